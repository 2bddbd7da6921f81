"""Exact Natarajan, Graph, DS, and Littlestone dimensions by exhaustive search.

All searches run over tuples of distinct points in increasing dimension with
early exit; witnesses are the canonically-first ones found.  Every dimension
here is monotone under dropping a coordinate from a witness, so the first
dimension without a witness ends the search.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

from .classes import FiniteClass, Pattern, project
from .pseudocube import default_cap, enumerate_pseudo_cubes, is_pseudo_cube, peel


@dataclass
class DimReport:
    natarajan: int
    graph: int
    ds: int
    littlestone: int
    witnesses: dict = field(default_factory=dict)

    def to_json(self, include_witnesses: bool = False) -> str:
        doc = {
            "natarajan": self.natarajan,
            "graph": self.graph,
            "ds": self.ds,
            "littlestone": self.littlestone,
        }
        if include_witnesses:
            doc["witnesses"] = {
                k: _jsonable(v) for k, v in self.witnesses.items()
            }
        return json.dumps(doc)

    def chain_holds(self, labels: int) -> bool:
        """ds <= graph <= ceil(5 log2 K) * natarajan, for K >= 2."""
        if self.ds > self.graph:
            return False
        if labels >= 2:
            return self.graph <= math.ceil(5 * math.log2(labels)) * self.natarajan
        return True


def _jsonable(v):
    if isinstance(v, tuple):
        return [_jsonable(x) for x in v]
    if isinstance(v, (list, set, frozenset)):
        return sorted(_jsonable(x) for x in v)
    return v


def _distinct_tuples(n: int, d: int):
    return itertools.combinations(range(n), d)


def _n_shatter_witness(patterns: frozenset[Pattern], d: int):
    """(f0, f1) pointwise-distinct with all 2^d mixtures realized, or None."""
    pats = sorted(patterns)
    for a, f0 in enumerate(pats):
        for f1 in pats[a + 1:]:
            if any(x == y for x, y in zip(f0, f1)):
                continue
            if all(
                tuple(f1[i] if b >> i & 1 else f0[i] for i in range(d)) in patterns
                for b in range(1 << d)
            ):
                return f0, f1
    return None


def natarajan_dim(cls: FiniteClass, with_witness: bool = False):
    """Largest d such that some d-tuple of distinct points is N-shattered."""
    best, best_witness = 0, None
    d = 1
    while d <= cls.domain_size:
        found = None
        for pts in _distinct_tuples(cls.domain_size, d):
            w = _n_shatter_witness(project(cls, pts).patterns, d)
            if w is not None:
                found = (pts, w)
                break
        if found is None:
            break
        best, best_witness = d, found
        d += 1
    if with_witness:
        return best, best_witness
    return best


def _g_shatter_witness(patterns: frozenset[Pattern], d: int):
    """Reference pattern s realizing every equal/not-equal sign vector, or None.

    Taking the all-equal sign vector forces s into the projection, so the
    reference search ranges over projection patterns only.
    """
    for s in sorted(patterns):
        ok = True
        for b in range(1 << d):
            if not any(
                all((h[i] == s[i]) == (not (b >> i & 1)) for i in range(d))
                for h in patterns
            ):
                ok = False
                break
        if ok:
            return s
    return None


def graph_dim(cls: FiniteClass, with_witness: bool = False):
    """Largest d such that some d-tuple of distinct points is G-shattered."""
    best, best_witness = 0, None
    d = 1
    while d <= cls.domain_size:
        found = None
        for pts in _distinct_tuples(cls.domain_size, d):
            s = _g_shatter_witness(project(cls, pts).patterns, d)
            if s is not None:
                found = (pts, s)
                break
        if found is None:
            break
        best, best_witness = d, found
        d += 1
    if with_witness:
        return best, best_witness
    return best


def ds_dim(cls: FiniteClass, with_witness: bool = False, cap: int | None = None):
    """Largest d such that some d-tuple's projection contains a pseudo-cube.

    Uses the peeling fixed point: non-empty core <=> a full-dimension
    pseudo-cube exists inside the projection.
    """
    best, best_witness = 0, None
    d = 1
    while d <= cls.domain_size:
        found = None
        for pts in _distinct_tuples(cls.domain_size, d):
            core = peel(project(cls, pts).patterns, d)
            if core:
                found = (pts, core)
                break
        if found is None:
            break
        best, best_witness = d, found
        d += 1
    if with_witness:
        return best, best_witness
    return best


def ds_dim_direct(cls: FiniteClass, cap: int | None = None) -> int:
    """Independent DS-dimension checker via explicit pseudo-cube enumeration."""
    cap = default_cap() if cap is None else cap
    best = 0
    d = 1
    while d <= cls.domain_size:
        found = False
        for pts in _distinct_tuples(cls.domain_size, d):
            if enumerate_pseudo_cubes(project(cls, pts), cap=cap, maximal_only=True):
                found = True
                break
        if not found:
            break
        best = d
        d += 1
    return best


def littlestone_dim(cls: FiniteClass) -> int:
    """Depth of the deepest Littlestone tree, by memoized version-space recursion."""
    memo: dict[frozenset[int], int] = {}
    hyps = cls.hypotheses

    def rec(indices: frozenset[int]) -> int:
        if indices in memo:
            return memo[indices]
        best = 0
        for x in range(cls.domain_size):
            by_label: dict[int, list[int]] = {}
            for i in indices:
                by_label.setdefault(hyps[i][x], []).append(i)
            labels = sorted(by_label)
            for a_pos, y0 in enumerate(labels):
                for y1 in labels[a_pos + 1:]:
                    sub = 1 + min(
                        rec(frozenset(by_label[y0])), rec(frozenset(by_label[y1]))
                    )
                    if sub > best:
                        best = sub
        memo[indices] = best
        return best

    return rec(frozenset(range(len(hyps))))


def dim_report(cls: FiniteClass, with_witnesses: bool = False) -> DimReport:
    witnesses = {}
    if with_witnesses:
        nat, w_nat = natarajan_dim(cls, with_witness=True)
        gr, w_gr = graph_dim(cls, with_witness=True)
        ds, w_ds = ds_dim(cls, with_witness=True)
        if w_nat:
            witnesses["natarajan"] = {"points": w_nat[0], "f0": w_nat[1][0], "f1": w_nat[1][1]}
        if w_gr:
            witnesses["graph"] = {"points": w_gr[0], "reference": w_gr[1]}
        if w_ds:
            witnesses["ds"] = {"points": w_ds[0], "cube": sorted(w_ds[1])}
    else:
        nat, gr, ds = natarajan_dim(cls), graph_dim(cls), ds_dim(cls)
    return DimReport(
        natarajan=nat,
        graph=gr,
        ds=ds,
        littlestone=littlestone_dim(cls),
        witnesses=witnesses,
    )
