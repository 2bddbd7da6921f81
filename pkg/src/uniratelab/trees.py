"""Finite-depth Littlestone, DSL, NL, and GL trees: build, verify, convert.

Node tuples use distinct points within a tuple (repeats make the cube
conditions degenerate) but may reuse points across levels.  NL/GL
realizability is checked for every edge path including full-depth ones, the
same convention the Littlestone definition uses for its leaf edges.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

from .classes import FiniteClass, Pattern, UsageError, project, restrict
from .pseudocube import default_cap, enumerate_pseudo_cubes, is_pseudo_cube, peel

BitString = tuple[int, ...]


# ---------------------------------------------------------------------------
# Littlestone trees


@dataclass(frozen=True)
class LittlestoneTree:
    """Complete binary tree: node u (a bit string, |u| < depth) -> (x, y0, y1)."""

    depth: int
    nodes: dict[BitString, tuple[int, int, int]] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(
            {
                "kind": "littlestone",
                "depth": self.depth,
                "nodes": [
                    {"u": list(u), "x": x, "y0": y0, "y1": y1}
                    for u, (x, y0, y1) in sorted(self.nodes.items())
                ],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "LittlestoneTree":
        doc = json.loads(text)
        return cls(
            depth=doc["depth"],
            nodes={
                tuple(n["u"]): (n["x"], n["y0"], n["y1"]) for n in doc["nodes"]
            },
        )


def verify_littlestone(tree: LittlestoneTree, cls: FiniteClass):
    d = tree.depth
    expected = {u for k in range(d) for u in itertools.product((0, 1), repeat=k)}
    if set(tree.nodes) != expected:
        raise UsageError("littlestone tree is not a complete binary tree of its depth")
    for u, (x, y0, y1) in tree.nodes.items():
        if y0 == y1:
            return False, f"edge labels equal at node {u}"
        if not (0 <= x < cls.domain_size):
            raise UsageError(f"point {x} out of bounds at node {u}")
    for bits in itertools.product((0, 1), repeat=d):
        cons = []
        for k in range(d):
            x, y0, y1 = tree.nodes[bits[:k]]
            cons.append((x, (y0, y1)[bits[k]]))
        if restrict(cls, cons).is_empty():
            return False, f"path {bits} not realized by any hypothesis"
    return True, None


def max_littlestone_depth(cls: FiniteClass):
    """(depth, witness tree); depth equals littlestone_dim by construction."""
    memo: dict[frozenset[int], tuple[int, tuple | None]] = {}
    hyps = cls.hypotheses

    def rec(indices: frozenset[int]):
        if indices in memo:
            return memo[indices]
        best, best_move = 0, None
        for x in range(cls.domain_size):
            by_label: dict[int, list[int]] = {}
            for i in sorted(indices):
                by_label.setdefault(hyps[i][x], []).append(i)
            labels = sorted(by_label)
            for a, y0 in enumerate(labels):
                for y1 in labels[a + 1:]:
                    s0 = frozenset(by_label[y0])
                    s1 = frozenset(by_label[y1])
                    sub = 1 + min(rec(s0)[0], rec(s1)[0])
                    if sub > best:
                        best, best_move = sub, (x, y0, y1, s0, s1)
        memo[indices] = (best, best_move)
        return memo[indices]

    nodes: dict[BitString, tuple[int, int, int]] = {}

    def build(indices: frozenset[int], u: BitString, remaining: int):
        if remaining == 0:
            return
        _, move = rec(indices)
        x, y0, y1, s0, s1 = move
        nodes[u] = (x, y0, y1)
        build(s0, u + (0,), remaining - 1)
        build(s1, u + (1,), remaining - 1)

    root = frozenset(range(len(hyps)))
    depth = rec(root)[0]
    build(root, (), depth)
    return depth, LittlestoneTree(depth=depth, nodes=nodes)


# ---------------------------------------------------------------------------
# DSL trees


@dataclass(frozen=True)
class DslNode:
    points: tuple[int, ...]
    cube: tuple[Pattern, ...]  # sorted edge labels
    children: tuple["DslNode | None", ...]  # aligned with cube; None at leaves


@dataclass(frozen=True)
class DslTree:
    depth: int
    root: DslNode | None

    def to_json(self) -> str:
        def enc(node):
            if node is None:
                return None
            return {
                "points": list(node.points),
                "cube": [list(p) for p in node.cube],
                "children": [enc(c) for c in node.children],
            }

        return json.dumps({"kind": "dsl", "depth": self.depth, "root": enc(self.root)})

    @classmethod
    def from_json(cls, text: str) -> "DslTree":
        doc = json.loads(text)

        def dec(obj):
            if obj is None:
                return None
            return DslNode(
                points=tuple(obj["points"]),
                cube=tuple(tuple(p) for p in obj["cube"]),
                children=tuple(dec(c) for c in obj["children"]),
            )

        return cls(depth=doc["depth"], root=dec(doc["root"]))


def verify_dsl(tree: DslTree, cls: FiniteClass):
    if tree.depth == 0:
        if tree.root is not None:
            raise UsageError("depth-0 DSL tree must have no root node")
        return True, None
    if tree.root is None:
        raise UsageError("positive-depth DSL tree missing root")

    def walk(node: DslNode, level: int, path_cons: tuple[tuple[int, int], ...]):
        if len(node.points) != level + 1:
            raise UsageError(
                f"level-{level} node carries a {len(node.points)}-tuple, expected {level + 1}"
            )
        if len(set(node.points)) != len(node.points):
            return False, f"repeated point in tuple {node.points}"
        if len(node.children) != len(node.cube):
            raise UsageError("children not aligned with cube edges")
        if not is_pseudo_cube(node.cube, level + 1):
            return False, f"edge labels at level-{level} node {node.points} are not a pseudo-cube"
        proj = project(cls, node.points).patterns
        for edge in node.cube:
            if edge not in proj:
                return False, f"edge {edge} at node {node.points} outside the class projection"
        for edge, child in zip(node.cube, node.children):
            cons = path_cons + tuple(zip(node.points, edge))
            if restrict(cls, cons).is_empty():
                return False, f"path through {node.points} with edge {edge} not realized"
            if level + 1 < tree.depth:
                if child is None:
                    raise UsageError("interior DSL node missing a child subtree")
                ok, why = walk(child, level + 1, cons)
                if not ok:
                    return ok, why
            elif child is not None:
                raise UsageError("leaf-level DSL edge carries a child subtree")
        return True, None

    return walk(tree.root, 0, ())


def _dsl_depth_search(cls: FiniteClass, cap: int):
    """Enumeration-based depth + witness recursion, memoized on version spaces."""
    hyps = cls.hypotheses
    memo: dict[tuple[frozenset[int], int], tuple[int, tuple | None]] = {}

    def rec(indices: frozenset[int], level: int):
        key = (indices, level)
        if key in memo:
            return memo[key]
        best, best_move = 0, None
        arity = level + 1
        if arity <= cls.domain_size and indices:
            for pts in itertools.combinations(range(cls.domain_size), arity):
                patterns = frozenset(
                    tuple(hyps[i][p] for p in pts) for i in indices
                )
                from .classes import Projection

                for cube in enumerate_pseudo_cubes(Projection(pts, patterns), cap=cap):
                    children = []
                    for edge in cube.sorted_patterns():
                        sub = frozenset(
                            i
                            for i in indices
                            if all(hyps[i][p] == v for p, v in zip(pts, edge))
                        )
                        children.append(sub)
                    sub_depth = min(rec(c, level + 1)[0] for c in children)
                    if 1 + sub_depth > best:
                        best = 1 + sub_depth
                        best_move = (pts, cube, tuple(children))
        memo[key] = (best, best_move)
        return memo[key]

    return rec


def max_dsl_depth(cls: FiniteClass, cap: int | None = None):
    """(depth, witness DslTree), by exhaustive search over tuples and cubes."""
    cap = default_cap() if cap is None else cap
    rec = _dsl_depth_search(cls, cap)
    root_indices = frozenset(range(len(cls.hypotheses)))
    depth = rec(root_indices, 0)[0]

    def build(indices: frozenset[int], level: int, remaining: int):
        if remaining == 0:
            return None
        _, move = rec(indices, level)
        pts, cube, children = move
        cube_sorted = tuple(cube.sorted_patterns())
        return DslNode(
            points=pts,
            cube=cube_sorted,
            children=tuple(
                build(child, level + 1, remaining - 1) for child in children
            ),
        )

    return depth, DslTree(depth=depth, root=build(root_indices, 0, depth))


# ---------------------------------------------------------------------------
# NL and GL trees


@dataclass(frozen=True)
class NlNode:
    points: tuple[int, ...]
    s0: Pattern
    s1: Pattern
    children: tuple["NlNode | None", ...]  # indexed by sign vector as binary number


@dataclass(frozen=True)
class NlTree:
    depth: int
    root: NlNode | None

    def to_json(self) -> str:
        def enc(node):
            if node is None:
                return None
            return {
                "points": list(node.points),
                "s0": list(node.s0),
                "s1": list(node.s1),
                "children": [enc(c) for c in node.children],
            }

        return json.dumps({"kind": "nl", "depth": self.depth, "root": enc(self.root)})


@dataclass(frozen=True)
class GlNode:
    points: tuple[int, ...]
    s: Pattern
    children: tuple["GlNode | None", ...]


@dataclass(frozen=True)
class GlTree:
    depth: int
    root: GlNode | None

    def to_json(self) -> str:
        def enc(node):
            if node is None:
                return None
            return {
                "points": list(node.points),
                "s": list(node.s),
                "children": [enc(c) for c in node.children],
            }

        return json.dumps({"kind": "gl", "depth": self.depth, "root": enc(self.root)})


def _signs(width: int):
    return itertools.product((0, 1), repeat=width)


def _sign_index(bits: BitString) -> int:
    idx = 0
    for b in bits:
        idx = idx << 1 | b
    return idx


def verify_nl(tree: NlTree, cls: FiniteClass):
    if tree.depth == 0:
        if tree.root is not None:
            raise UsageError("depth-0 NL tree must have no root node")
        return True, None
    if tree.root is None:
        raise UsageError("positive-depth NL tree missing root")
    all_h = range(len(cls.hypotheses))

    def walk(node: NlNode, level: int, survivors: set[int]):
        width = level + 1
        if len(node.points) != width or len(node.s0) != width or len(node.s1) != width:
            raise UsageError(f"level-{level} NL node has mismatched arity")
        if len(set(node.points)) != width:
            return False, f"repeated point in NL tuple {node.points}"
        if len(node.children) != 1 << width:
            raise UsageError("NL node must have 2^(level+1) children slots")
        for i in range(width):
            if node.s0[i] == node.s1[i]:
                return False, f"s-vectors agree at coordinate {i} of node {node.points}"
        for bits in _signs(width):
            sel = tuple((node.s0, node.s1)[b][i] for i, b in enumerate(bits))
            sub = {
                h
                for h in survivors
                if all(cls.hypotheses[h][p] == v for p, v in zip(node.points, sel))
            }
            if not sub:
                return False, f"sign path {bits} at node {node.points} not realized"
            child = node.children[_sign_index(bits)]
            if level + 1 < tree.depth:
                if child is None:
                    raise UsageError("interior NL node missing a child")
                ok, why = walk(child, level + 1, sub)
                if not ok:
                    return ok, why
            elif child is not None:
                raise UsageError("leaf-level NL edge carries a child subtree")
        return True, None

    return walk(tree.root, 0, set(all_h))


def verify_gl(tree: GlTree, cls: FiniteClass):
    if tree.depth == 0:
        if tree.root is not None:
            raise UsageError("depth-0 GL tree must have no root node")
        return True, None
    if tree.root is None:
        raise UsageError("positive-depth GL tree missing root")

    def walk(node: GlNode, level: int, survivors: set[int]):
        width = level + 1
        if len(node.points) != width or len(node.s) != width:
            raise UsageError(f"level-{level} GL node has mismatched arity")
        if len(set(node.points)) != width:
            return False, f"repeated point in GL tuple {node.points}"
        if len(node.children) != 1 << width:
            raise UsageError("GL node must have 2^(level+1) children slots")
        for bits in _signs(width):
            sub = {
                h
                for h in survivors
                if all(
                    (cls.hypotheses[h][p] == s) == (b == 0)
                    for p, s, b in zip(node.points, node.s, bits)
                )
            }
            if not sub:
                return False, f"sign path {bits} at node {node.points} not realized"
            child = node.children[_sign_index(bits)]
            if level + 1 < tree.depth:
                if child is None:
                    raise UsageError("interior GL node missing a child")
                ok, why = walk(child, level + 1, sub)
                if not ok:
                    return ok, why
            elif child is not None:
                raise UsageError("leaf-level GL edge carries a child subtree")
        return True, None

    return walk(tree.root, 0, set(range(len(cls.hypotheses))))


def _nl_depth_rec(cls: FiniteClass, cap_depth: int):
    hyps = cls.hypotheses
    memo: dict[tuple[frozenset[int], int], tuple[int, tuple | None]] = {}

    def rec(indices: frozenset[int], level: int):
        key = (indices, level)
        if key in memo:
            return memo[key]
        best, best_move = 0, None
        width = level + 1
        if width <= cls.domain_size and level < cap_depth and indices:
            for pts in itertools.combinations(range(cls.domain_size), width):
                proj = sorted({tuple(hyps[i][p] for p in pts) for i in indices})
                for a, f0 in enumerate(proj):
                    for f1 in proj[a + 1:]:
                        if any(x == y for x, y in zip(f0, f1)):
                            continue
                        subs = []
                        ok = True
                        for bits in _signs(width):
                            sel = tuple((f0, f1)[b][i] for i, b in enumerate(bits))
                            sub = frozenset(
                                i
                                for i in indices
                                if all(hyps[i][p] == v for p, v in zip(pts, sel))
                            )
                            if not sub:
                                ok = False
                                break
                            subs.append(sub)
                        if not ok:
                            continue
                        depth_here = 1 + min(rec(s, level + 1)[0] for s in subs)
                        if depth_here > best:
                            best, best_move = depth_here, (pts, f0, f1, tuple(subs))
        memo[key] = (best, best_move)
        return memo[key]

    return rec


def max_nl_depth(cls: FiniteClass, cap_depth: int = 3):
    """(depth up to cap_depth, witness NlTree) by exhaustive search."""
    rec = _nl_depth_rec(cls, cap_depth)
    root = frozenset(range(len(cls.hypotheses)))
    depth = rec(root, 0)[0]

    def build(indices, level, remaining):
        if remaining == 0:
            return None
        _, move = rec(indices, level)
        pts, f0, f1, subs = move
        return NlNode(
            points=pts,
            s0=f0,
            s1=f1,
            children=tuple(build(s, level + 1, remaining - 1) for s in subs),
        )

    return depth, NlTree(depth=depth, root=build(root, 0, depth))


def max_gl_depth(cls: FiniteClass, cap_depth: int = 3):
    """(depth up to cap_depth, witness GlTree) by exhaustive search."""
    hyps = cls.hypotheses
    memo: dict[tuple[frozenset[int], int], tuple[int, tuple | None]] = {}

    def rec(indices: frozenset[int], level: int):
        key = (indices, level)
        if key in memo:
            return memo[key]
        best, best_move = 0, None
        width = level + 1
        if width <= cls.domain_size and level < cap_depth and indices:
            for pts in itertools.combinations(range(cls.domain_size), width):
                proj = sorted({tuple(hyps[i][p] for p in pts) for i in indices})
                for s in proj:
                    subs = []
                    ok = True
                    for bits in _signs(width):
                        sub = frozenset(
                            i
                            for i in indices
                            if all(
                                (hyps[i][p] == v) == (b == 0)
                                for p, v, b in zip(pts, s, bits)
                            )
                        )
                        if not sub:
                            ok = False
                            break
                        subs.append(sub)
                    if not ok:
                        continue
                    depth_here = 1 + min(rec(x, level + 1)[0] for x in subs)
                    if depth_here > best:
                        best, best_move = depth_here, (pts, s, tuple(subs))
        memo[key] = (best, best_move)
        return memo[key]

    root = frozenset(range(len(hyps)))
    depth = rec(root, 0)[0]

    def build(indices, level, remaining):
        if remaining == 0:
            return None
        _, move = rec(indices, level)
        pts, s, subs = move
        return GlNode(
            points=pts,
            s=s,
            children=tuple(build(x, level + 1, remaining - 1) for x in subs),
        )

    return depth, GlTree(depth=depth, root=build(root, 0, depth))


# ---------------------------------------------------------------------------
# Conversions


def nl_to_dsl(tree: NlTree, cls: FiniteClass) -> DslTree:
    """Boolean-cube mixtures of (s0, s1) become the pseudo-cube at each node."""
    ok, why = verify_nl(tree, cls)
    if not ok:
        raise UsageError(f"input NL tree does not verify: {why}")

    def conv(node: NlNode | None, level: int):
        if node is None:
            return None
        width = level + 1
        edges = {}
        for bits in _signs(width):
            mixture = tuple((node.s0, node.s1)[b][i] for i, b in enumerate(bits))
            edges[mixture] = node.children[_sign_index(bits)]
        cube = tuple(sorted(edges))
        return DslNode(
            points=node.points,
            cube=cube,
            children=tuple(conv(edges[e], level + 1) for e in cube),
        )

    return DslTree(depth=tree.depth, root=conv(tree.root, 0))


def _neighbor_chain(cube_patterns: frozenset[Pattern], s: Pattern, bits: BitString) -> Pattern:
    """Cube element whose equal/not-equal signature against s is exactly `bits`.

    Flips the support coordinates one at a time through i-neighbors, choosing
    the smallest neighbor at each step for determinism.
    """
    current = s
    for i, b in enumerate(bits):
        if not b:
            continue
        neighbors = sorted(
            g
            for g in cube_patterns
            if g[i] != current[i]
            and all(g[j] == current[j] for j in range(len(s)) if j != i)
        )
        current = neighbors[0]
    return current


def dsl_to_gl(tree: DslTree, cls: FiniteClass) -> GlTree:
    """Reference pattern s = canonically-first edge label at each node."""
    ok, why = verify_dsl(tree, cls)
    if not ok:
        raise UsageError(f"input DSL tree does not verify: {why}")

    def conv(node: DslNode | None, level: int):
        if node is None:
            return None
        width = level + 1
        cube_set = frozenset(node.cube)
        s = node.cube[0]
        by_edge = dict(zip(node.cube, node.children))
        children = []
        for bits in _signs(width):
            edge = _neighbor_chain(cube_set, s, bits)
            children.append(conv(by_edge[edge], level + 1))
        return GlNode(points=node.points, s=s, children=tuple(children))

    return GlTree(depth=tree.depth, root=conv(tree.root, 0))


def nl_to_gl(tree: NlTree) -> GlTree:
    """s = s0; NL sign children already satisfy the GL equal/not-equal semantics."""

    def conv(node: NlNode | None):
        if node is None:
            return None
        return GlNode(
            points=node.points,
            s=node.s0,
            children=tuple(conv(c) for c in node.children),
        )

    return GlTree(depth=tree.depth, root=conv(tree.root))


def verify_tree(tree, cls: FiniteClass):
    """Dispatch on tree kind; returns (ok, first violation or None)."""
    if isinstance(tree, LittlestoneTree):
        return verify_littlestone(tree, cls)
    if isinstance(tree, DslTree):
        return verify_dsl(tree, cls)
    if isinstance(tree, NlTree):
        return verify_nl(tree, cls)
    if isinstance(tree, GlTree):
        return verify_gl(tree, cls)
    raise UsageError(f"unknown tree type {type(tree).__name__}")
