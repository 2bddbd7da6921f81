"""Generators for example classes and lower-bound adversarial distributions:
monotone-linear lattice classes, rectangle-free pseudo-cube blocks, the
star-padded deep-cube class, branch distributions, and slow-rate schedules.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .classes import (
    FiniteClass,
    Pattern,
    RealizableDistribution,
    UsageError,
    restrict,
)
from .dimensions import natarajan_dim
from .pseudocube import PseudoCube, is_pseudo_cube
from .trees import DslNode, DslTree, LittlestoneTree, verify_dsl


# ---------------------------------------------------------------------------
# Monotone multiclass linear classes on lattice boxes


def make_lattice_linear_class(
    d: int,
    K: int,
    weight_values,
    bias_values,
    box_side: int,
) -> FiniteClass:
    """Labelings of a lattice box by monotone linear score maximization.

    Hypotheses pick, at each box point x, the largest label attaining
    max_k w_k . x - b_k, with w_1 = 0 and every weight column nondecreasing
    in the label index.  Weights come from `weight_values` per coordinate,
    biases from the positive grid `bias_values`.  Labels are stored 0-based.
    """
    if not weight_values or not bias_values:
        raise UsageError("weight and bias grids must be non-empty")
    if any(b <= 0 for b in bias_values):
        raise UsageError("biases must be positive")
    if K < 1 or d < 1 or box_side < 1:
        raise UsageError("d, K, box_side must be >= 1")
    wvals = sorted(set(weight_values))
    points = list(itertools.product(range(box_side), repeat=d))
    columns = list(itertools.combinations_with_replacement(wvals, K - 1))
    labelings = set()
    for cols in itertools.product(columns, repeat=d):
        # weight matrix: w[k][j], k = 0..K-1 with w[0] = 0
        w = [[0] * d] + [[cols[j][k] for j in range(d)] for k in range(K - 1)]
        for biases in itertools.product(bias_values, repeat=K):
            labeling = []
            for x in points:
                scores = [
                    sum(w[k][j] * x[j] for j in range(d)) - biases[k] for k in range(K)
                ]
                best = max(scores)
                labeling.append(max(k for k in range(K) if scores[k] == best))
            labelings.add(tuple(labeling))
    return FiniteClass(
        domain_size=len(points),
        labels=K,
        hypotheses=tuple(sorted(labelings)),
        point_names=tuple(str(p) for p in points),
    )


def lattice_box_points(d: int, box_side: int) -> list[tuple[int, ...]]:
    return list(itertools.product(range(box_side), repeat=d))


# ---------------------------------------------------------------------------
# Rectangle-free pseudo-cube blocks


def _rectangle_free(patterns, d: int) -> bool:
    """No coordinate pair realizes a 2x2 grid (Natarajan dimension stays 1)."""
    pats = list(patterns)
    for i, j in itertools.combinations(range(d), 2):
        cols: dict[int, set[int]] = {}
        for h in pats:
            cols.setdefault(h[i], set()).add(h[j])
        keys = sorted(cols)
        for a_pos, a in enumerate(keys):
            for b in keys[a_pos + 1:]:
                if len(cols[a] & cols[b]) >= 2:
                    return False
    return True


def _search_dim2(K: int) -> frozenset[Pattern] | None:
    """Canonical-first rectangle-free 2-dim pseudo-cube over [K]^2, if any."""
    cells = list(itertools.product(range(K), repeat=2))
    for size in range(4, len(cells) + 1):
        for combo in itertools.combinations(cells, size):
            if is_pseudo_cube(combo, 2) and _rectangle_free(combo, 2):
                return frozenset(combo)
    return None


def _cyclic_triangle_cube(K: int, base: tuple[int, int, int], line_offsets) -> frozenset | None:
    """Flag-triangle triples over Z_K: (point, line index, triangle index).

    Lines are L_j = j + line_offsets; triangles are the cyclic shifts of the
    base point set.  Returns the triple set when every triangle is a genuine
    triangle (three points pairwise joined by three distinct lines).
    """
    lines = {j: frozenset((j + o) % K for o in line_offsets) for j in range(K)}

    def join(p, q):
        js = [j for j, L in lines.items() if p in L and q in L]
        return js[0] if len(js) == 1 else None

    triples = set()
    for c in range(K):
        pts = [(b + c) % K for b in base]
        if len(set(pts)) != 3:
            return None
        edge_lines = []
        for p, q in itertools.combinations(pts, 2):
            j = join(p, q)
            if j is None:
                return None
            edge_lines.append(j)
        if len(set(edge_lines)) != 3:
            return None
        for j in set(edge_lines):
            for p in pts:
                if p in lines[j]:
                    triples.add((p, j, c))
    return frozenset(triples)


def _search_dim3(K: int) -> frozenset[Pattern] | None:
    """Search cyclic flag-triangle families over Z_K for a rectangle-free cube.

    Exhaustive subset search over [K]^3 is hopeless, so the search runs over a
    structured family: planar-difference-set lines plus a cyclic orbit of base
    triangles.  Each candidate is verified from scratch.
    """
    for offsets in itertools.combinations(range(K), 3):
        diffs = [
            (a - b) % K for a in offsets for b in offsets if a != b
        ]
        if len(set(diffs)) != len(diffs):
            continue  # need a planar difference set so joins are unique
        for base in itertools.combinations(range(K), 3):
            cand = _cyclic_triangle_cube(K, base, offsets)
            if cand is None:
                continue
            if is_pseudo_cube(cand, 3) and _rectangle_free(cand, 3):
                return cand
    return None


def find_natarajan1_pseudocube(d: int, max_labels: int = 8) -> PseudoCube:
    """A d-dimensional pseudo-cube whose pattern class has Natarajan dimension 1.

    d = 1: any label pair.  d = 2: exhaustive subset search over growing label
    counts.  d = 3: search over cyclic flag-triangle families (subset search
    is out of reach).  Raises with the label counts tried when nothing passes.
    """
    if d < 1 or d > 3:
        raise UsageError("block search supports dimensions 1..3")
    if d == 1:
        return PseudoCube(1, frozenset({(0,), (1,)}))
    tried = []
    for K in range(2, max_labels + 1):
        found = _search_dim2(K) if d == 2 else _search_dim3(K)
        tried.append(K)
        if found is not None:
            cube = PseudoCube(d, found)
            cls = FiniteClass(d, max(max(p) for p in found) + 1, tuple(sorted(found)))
            if natarajan_dim(cls) != 1:
                raise RuntimeError("rectangle-free candidate failed the dimension check")
            return cube
    raise UsageError(
        f"no dimension-{d} pseudo-cube with Natarajan dimension 1 found for label counts {tried}"
    )


# ---------------------------------------------------------------------------
# The star-padded counterexample class


@dataclass(frozen=True)
class CounterexampleClass:
    depth: int
    fclass: FiniteClass
    tree: DslTree
    blocks: tuple[PseudoCube, ...]
    star_label: int


def make_counterexample_class(depth: int, max_labels: int = 8) -> CounterexampleClass:
    """Deep-pseudo-cube class with Natarajan dimension 1, truncated at `depth`.

    Level-k tree nodes (k = 1..depth) carry disjoint copies of a dimension-k
    rectangle-free block on fresh points and fresh labels; each hypothesis
    follows its path's block patterns and is the star label elsewhere.
    """
    if depth < 1 or depth > 3:
        raise UsageError("counterexample depth must be in 1..3")
    blocks = tuple(find_natarajan1_pseudocube(k, max_labels) for k in range(1, depth + 1))
    block_patterns = [b.sorted_patterns() for b in blocks]

    points: list[str] = []
    star = 0
    next_label = 1
    hypotheses: dict[tuple[tuple[int, ...], ...], dict[int, int]] = {}

    def alloc_points(node_id, k):
        start = len(points)
        for i in range(k):
            points.append(f"{node_id}/x{i}")
        return tuple(range(start, start + k))

    def alloc_labels(count):
        nonlocal next_label
        out = tuple(range(next_label, next_label + count))
        next_label += count
        return out

    # nodes are paths of child indices; build the tree top-down
    node_points: dict[tuple[int, ...], tuple[int, ...]] = {}
    node_labelmap: dict[tuple[int, ...], dict[int, int]] = {}

    def build(path: tuple[int, ...], level: int):
        pats = block_patterns[level - 1]
        pts = alloc_points("n" + "".join(map(str, path)) if path else "root", level)
        node_points[path] = pts
        local = sorted({v for p in pats for v in p})
        glob = alloc_labels(len(local))
        node_labelmap[path] = dict(zip(local, glob))
        children = []
        for i, pat in enumerate(pats):
            if level < depth:
                children.append(build(path + (i,), level + 1))
            else:
                children.append(None)
        mapped = [tuple(node_labelmap[path][v] for v in pat) for pat in pats]
        order = sorted(range(len(mapped)), key=lambda i: mapped[i])
        return DslNode(
            points=pts,
            cube=tuple(mapped[i] for i in order),
            children=tuple(children[i] for i in order),
        )

    root = build((), 1)

    # hypotheses: one per tree edge; star everywhere off its path
    hyp_rows: set[tuple[int, ...]] = set()

    def emit(path: tuple[int, ...], level: int):
        pats = block_patterns[level - 1]
        for i, pat in enumerate(pats):
            row = [star] * len(points)
            for l in range(1, level + 1):
                ancestor = path[: l - 1]
                anc_pat = block_patterns[l - 1][(path + (i,))[l - 1]]
                lm = node_labelmap[ancestor]
                for pos, v in zip(node_points[ancestor], anc_pat):
                    row[pos] = lm[v]
            hyp_rows.add(tuple(row))
            if level < depth:
                emit(path + (i,), level + 1)

    emit((), 1)

    fclass = FiniteClass(
        domain_size=len(points),
        labels=next_label,
        hypotheses=tuple(sorted(hyp_rows)),
        point_names=tuple(points),
        label_names=("*",) + tuple(str(i) for i in range(1, next_label)),
    )
    tree = DslTree(depth=depth, root=root)
    ok, why = verify_dsl(tree, fclass)
    if not ok:
        raise RuntimeError(f"assembled tree failed verification: {why}")
    if natarajan_dim(fclass) != 1:
        raise RuntimeError("assembled class does not have Natarajan dimension 1")
    return CounterexampleClass(
        depth=depth, fclass=fclass, tree=tree, blocks=blocks, star_label=star
    )


# ---------------------------------------------------------------------------
# Branch distributions


def littlestone_branch_distribution(
    cls: FiniteClass, tree: LittlestoneTree, bits
) -> RealizableDistribution:
    """Dyadic weights along one branch; leftover mass joins the deepest atom."""
    bits = tuple(int(b) for b in bits)
    if len(bits) != tree.depth:
        raise UsageError(f"branch length {len(bits)} != tree depth {tree.depth}")
    if tree.depth == 0:
        raise UsageError("depth-0 tree has no branch atoms")
    weights: dict[tuple[int, int], Fraction] = {}
    cons = []
    schedule = []
    for k in range(tree.depth):
        x, y0, y1 = tree.nodes[bits[:k]]
        y = (y0, y1)[bits[k]]
        w = Fraction(1, 2 ** (k + 1))
        if k == tree.depth - 1:
            w += Fraction(1, 2 ** tree.depth)
        weights[(x, y)] = weights.get((x, y), Fraction(0)) + w
        cons.append((x, y))
        vs = restrict(cls, cons)
        if vs.is_empty():
            raise UsageError("branch not realized by the class; tree invalid")
        schedule.append((vs.hypothesis_indices()[0], Fraction(1, 2 ** (k + 1))))
    witness = restrict(cls, cons).hypothesis_indices()[0]
    return RealizableDistribution(
        base=cls,
        atoms=tuple((p, y, w) for (p, y), w in sorted(weights.items())),
        witness=witness,
        limit_realizable=True,
        witness_schedule=tuple(schedule),
    )


def dsl_branch_distribution(
    cls: FiniteClass, tree: DslTree, branch, schedule: "Schedule"
) -> RealizableDistribution:
    """Level-k nodes contribute k atoms of weight p_k / k along the branch."""
    branch = tuple(int(i) for i in branch)
    if len(branch) != tree.depth or tree.depth == 0:
        raise UsageError("branch length must equal the (positive) tree depth")
    p = schedule.truncated(tree.depth)
    weights: dict[tuple[int, int], Fraction] = {}
    cons = []
    schedule_out = []
    node = tree.root
    for k in range(1, tree.depth + 1):
        if not (0 <= branch[k - 1] < len(node.cube)):
            raise UsageError(f"branch index {branch[k - 1]} out of range at level {k - 1}")
        edge = node.cube[branch[k - 1]]
        for x, y in zip(node.points, edge):
            weights[(x, y)] = weights.get((x, y), Fraction(0)) + p[k - 1] / k
            cons.append((x, y))
        vs = restrict(cls, cons)
        if vs.is_empty():
            raise UsageError("branch not realized by the class; tree invalid")
        tail = sum(p[k:], Fraction(0))
        schedule_out.append((vs.hypothesis_indices()[0], tail))
        node = node.children[branch[k - 1]] if k < tree.depth else None
    witness = restrict(cls, cons).hypothesis_indices()[0]
    return RealizableDistribution(
        base=cls,
        atoms=tuple((x, y, w) for (x, y), w in sorted(weights.items())),
        witness=witness,
        limit_realizable=True,
        witness_schedule=tuple(schedule_out),
    )


# ---------------------------------------------------------------------------
# Slow-rate schedules


@dataclass(frozen=True)
class Schedule:
    """Depth-mass sequence with checkpoints certifying a slow-rate construction.

    Invariants, for every checkpoint (n_i, k_i) with rate sample R_i:
    sum(p) = 1; sum_{k > k_i} p_k <= 1/n_i; n_i * p_{k_i} <= k_i; and
    p_{k_i} = Cc * R_i with Cc in [1/2, 1].
    """

    p: tuple[Fraction, ...]
    checkpoints: tuple[tuple[int, int], ...]
    Cc: Fraction
    rate_samples: tuple[Fraction, ...]

    def verify(self) -> list[str]:
        problems = []
        if sum(self.p) != 1:
            problems.append(f"masses sum to {sum(self.p)} != 1")
        if any(w < 0 for w in self.p):
            problems.append("negative mass")
        if not Fraction(1, 2) <= self.Cc <= 1:
            problems.append(f"Cc = {self.Cc} outside [1/2, 1]")
        for (n_i, k_i), r_i in zip(self.checkpoints, self.rate_samples):
            tail = sum(self.p[k_i:], Fraction(0))
            if tail > Fraction(1, n_i):
                problems.append(f"tail beyond k={k_i} is {tail} > 1/{n_i}")
            if n_i * self.p[k_i - 1] > k_i:
                problems.append(f"n*p at checkpoint ({n_i},{k_i}) exceeds {k_i}")
            if self.p[k_i - 1] != self.Cc * r_i:
                problems.append(f"p_{k_i} != Cc * R({n_i})")
        ns = [n for n, _ in self.checkpoints]
        ks = [k for _, k in self.checkpoints]
        if sorted(set(ns)) != ns or sorted(set(ks)) != ks:
            problems.append("checkpoint sequences must be strictly increasing")
        return problems

    def truncated(self, depth: int) -> tuple[Fraction, ...]:
        """Masses cut at `depth`; leftover joins the deepest entry."""
        if depth < 1:
            raise UsageError("depth must be >= 1")
        head = list(self.p[:depth])
        head[-1] += sum(self.p[depth:], Fraction(0))
        return tuple(head)

    def to_json(self) -> str:
        import json

        return json.dumps(
            {
                "p": [[w.numerator, w.denominator] for w in self.p],
                "checkpoints": [list(c) for c in self.checkpoints],
                "Cc": [self.Cc.numerator, self.Cc.denominator],
                "rate_samples": [[r.numerator, r.denominator] for r in self.rate_samples],
                "invariant_report": self.verify(),
            }
        )


def make_schedule(rate, depth_cap: int = 12, base: int = 4) -> Schedule:
    """Greedy schedule: geometric checkpoints n_i = base^i, p at the checkpoint
    depths set to Cc * R(n_i), leftover mass stored at depth 1.

    `rate` maps n to a value in [0, 1], non-increasing to 0 on the checkpoint
    grid.  Raises naming the binding constraint when no valid schedule fits.
    """
    samples: list[Fraction] = []
    ns: list[int] = []
    i = 1
    while True:
        n_i = base ** i
        r = Fraction(rate(n_i)).limit_denominator(10 ** 12)
        if r < 0:
            raise UsageError("rate values must be non-negative")
        if samples and r > samples[-1]:
            raise UsageError("rate samples must be non-increasing")
        if r == 0:
            break
        ns.append(n_i)
        samples.append(r)
        # tentative checkpoint depth with Cc = 1/2 lower bound
        k_lower = max(len(ns) + 1, math.ceil(n_i * r / 2))
        if k_lower > depth_cap:
            ns.pop()
            samples.pop()
            break
        i += 1
        if i > 60:
            break
    if not ns:
        # degenerate rate: all mass at depth 1, no checkpoints
        return Schedule(p=(Fraction(1),), checkpoints=(), Cc=Fraction(1, 2), rate_samples=())

    # Cc must keep the total mass <= 1 and satisfy every tail constraint
    cc_cap = Fraction(1)
    total = sum(samples, Fraction(0))
    if total > 0:
        cc_cap = min(cc_cap, Fraction(1) / total)
    for idx, n_i in enumerate(ns):
        tail = sum(samples[idx + 1:], Fraction(0))
        if tail > 0:
            cc_cap = min(cc_cap, Fraction(1, n_i) / tail)
    while ns and cc_cap < Fraction(1, 2):
        # too many checkpoints for this rate; drop the deepest and retry
        ns.pop()
        samples.pop()
        cc_cap = Fraction(1)
        total = sum(samples, Fraction(0))
        if total > 0:
            cc_cap = min(cc_cap, Fraction(1) / total)
        for idx, n_i in enumerate(ns):
            tail = sum(samples[idx + 1:], Fraction(0))
            if tail > 0:
                cc_cap = min(cc_cap, Fraction(1, n_i) / tail)
    if not ns:
        raise UsageError("binding constraint: tail mass bounds force Cc below 1/2")
    Cc = min(Fraction(1), cc_cap)

    ks: list[int] = []
    for idx, (n_i, r) in enumerate(zip(ns, samples)):
        k_min = max((ks[-1] + 1) if ks else 2, math.ceil(n_i * Cc * r))
        if k_min > depth_cap:
            raise UsageError(
                f"binding constraint: checkpoint depth {k_min} exceeds depth cap {depth_cap}"
            )
        ks.append(k_min)

    p = [Fraction(0)] * depth_cap
    for k_i, r in zip(ks, samples):
        p[k_i - 1] = Cc * r
    leftover = 1 - sum(p, Fraction(0))
    if leftover < 0:
        raise UsageError("binding constraint: checkpoint masses exceed 1")
    p[0] += leftover
    sched = Schedule(
        p=tuple(p),
        checkpoints=tuple(zip(ns, ks)),
        Cc=Cc,
        rate_samples=tuple(samples),
    )
    problems = sched.verify()
    if problems:
        raise UsageError(f"binding constraint: {problems[0]}")
    return sched
