"""Pseudo-cube predicate, enumeration inside projections, and structural checks.

A pseudo-cube of dimension d is a non-empty finite set of label d-tuples in
which every element has, for every coordinate, a neighbor differing exactly
there.  Enumeration works on the "peeled core" of a pattern set: iteratively
deleting patterns that lack some i-neighbor preserves every pseudo-cube, and
the non-empty fixed point is itself the largest pseudo-cube.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .classes import Pattern, Projection, ResourceCapError, UsageError

DEFAULT_CAP = 20
_CAP_ENV = "UNIRATELAB_CAP"


def default_cap() -> int:
    raw = os.environ.get(_CAP_ENV)
    if raw is None:
        return DEFAULT_CAP
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{_CAP_ENV} must be an integer, got {raw!r}")


@dataclass(frozen=True)
class PseudoCube:
    dimension: int
    patterns: frozenset[Pattern]

    def __post_init__(self):
        if not is_pseudo_cube(self.patterns, self.dimension):
            raise UsageError("pattern set is not a pseudo-cube")

    def __len__(self):
        return len(self.patterns)

    def sorted_patterns(self) -> list[Pattern]:
        return sorted(self.patterns)

    def to_json(self) -> str:
        return json.dumps({"d": self.dimension, "patterns": sorted(map(list, self.patterns))})

    @classmethod
    def from_json(cls, text: str) -> "PseudoCube":
        doc = json.loads(text)
        return cls(doc["d"], frozenset(tuple(p) for p in doc["patterns"]))


def _has_i_neighbor(h: Pattern, i: int, patterns) -> bool:
    for g in patterns:
        if g[i] != h[i] and all(g[j] == h[j] for j in range(len(h)) if j != i):
            return True
    return False


def is_pseudo_cube(patterns: Iterable[Pattern], d: int) -> bool:
    """Neighbor property for every (pattern, coordinate); empty sets fail."""
    pats = set(patterns)
    if not pats:
        return False
    for h in pats:
        if len(h) != d:
            raise UsageError(f"pattern {h} has length {len(h)}, expected {d}")
    for h in pats:
        for i in range(d):
            if not _has_i_neighbor(h, i, pats):
                return False
    return True


def peel(patterns: Iterable[Pattern], d: int) -> frozenset[Pattern]:
    """Iteratively delete patterns missing some i-neighbor; fixed point returned.

    Every pseudo-cube contained in the input survives peeling, and a non-empty
    fixed point is itself a pseudo-cube, so the result equals the union of all
    pseudo-cubes inside the input.
    """
    pats = set(patterns)
    for h in pats:
        if len(h) != d:
            raise UsageError(f"pattern {h} has length {len(h)}, expected {d}")
    changed = True
    while changed and pats:
        changed = False
        for h in list(pats):
            if any(not _has_i_neighbor(h, i, pats) for i in range(d)):
                pats.discard(h)
                changed = True
    return frozenset(pats)


def pseudo_cube_union(proj: Projection, cap: int | None = None) -> frozenset[Pattern]:
    """Union of all pseudo-cubes of full dimension contained in the projection."""
    d = len(proj.points)
    if d < 1:
        raise UsageError("projection dimension must be >= 1")
    cap = default_cap() if cap is None else cap
    if len(proj.patterns) > max(cap, 64):
        # peeling is polynomial; only guard absurd inputs
        raise ResourceCapError(
            f"{len(proj.patterns)} ambient patterns exceed hard guard {max(cap, 64)}"
        )
    return peel(proj.patterns, d)


def enumerate_pseudo_cubes(
    proj: Projection, cap: int | None = None, maximal_only: bool = False
) -> list[PseudoCube]:
    """All pseudo-cubes inside the projection, in (size, lexicographic) order.

    The family is closed under union, so there is a unique inclusion-maximal
    cube (the peeled core); `maximal_only` returns just that one.  The cap
    bounds the peeled core size before subset search.
    """
    d = len(proj.points)
    if d < 1:
        raise UsageError("projection dimension must be >= 1")
    cap = default_cap() if cap is None else cap
    core = peel(proj.patterns, d)
    if len(core) > cap:
        raise ResourceCapError(
            f"peeled core has {len(core)} patterns, cap is {cap} "
            f"(set {_CAP_ENV} or pass cap= to raise it)"
        )
    if not core:
        return []
    if maximal_only:
        return [PseudoCube(d, core)]

    found: set[frozenset[Pattern]] = set()
    visited: set[frozenset[Pattern]] = set()

    def explore(pats: frozenset[Pattern]):
        if pats in visited:
            return
        visited.add(pats)
        if not pats:
            return
        found.add(pats)  # a non-empty peel fixed point is a pseudo-cube
        for x in pats:
            explore(peel(pats - {x}, d))

    explore(core)
    cubes = [PseudoCube(d, pats) for pats in found]
    cubes.sort(key=lambda c: (len(c.patterns), c.sorted_patterns()))
    return cubes


def half_mass_check(cube: PseudoCube, j: int, y: int) -> tuple[int, float]:
    """(|{h in C : h(j) = y}|, |C| / 2); callers assert count <= bound."""
    if not (0 <= j < cube.dimension):
        raise UsageError(f"coordinate {j} out of range for dimension {cube.dimension}")
    count = sum(1 for h in cube.patterns if h[j] == y)
    return count, Fraction(len(cube.patterns), 2)


def project_fixing(cube: PseudoCube, g: Pattern, fixed: Iterable[int]) -> PseudoCube:
    """Restrict to patterns agreeing with g on `fixed`, projected to the rest.

    The result is again a pseudo-cube, of dimension d - |fixed|; the
    constructor asserts that.
    """
    J = sorted(set(int(j) for j in fixed))
    d = cube.dimension
    if g not in cube.patterns:
        raise UsageError("g must be a member of the cube")
    if not J or len(J) >= d:
        raise UsageError("fixed coordinate set must be a non-empty proper subset")
    if any(not (0 <= j < d) for j in J):
        raise UsageError("fixed coordinate out of range")
    K = [i for i in range(d) if i not in J]
    pats = frozenset(
        tuple(h[i] for i in K)
        for h in cube.patterns
        if all(h[j] == g[j] for j in J)
    )
    return PseudoCube(len(K), pats)
