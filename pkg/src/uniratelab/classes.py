"""Finite hypothesis classes, restrictions, projections, samples, distributions.

Points and labels are integer indices (0-based). Optional name tables map
them to display strings; every algorithm in the package works on indices.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

Pattern = tuple[int, ...]

WEIGHT_TOL = 1e-12


class UsageError(ValueError):
    """Caller broke a precondition (bad index, malformed structure)."""


class DomainError(ValueError):
    """Input data violates a semantic requirement (e.g. inconsistent sample)."""


class ResourceCapError(RuntimeError):
    """A combinatorial search exceeded its configured cap."""


@dataclass(frozen=True)
class FiniteClass:
    """Explicit table of hypotheses over a finite domain and finite label set."""

    domain_size: int
    labels: int
    hypotheses: tuple[Pattern, ...]
    point_names: tuple[str, ...] | None = None
    label_names: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.domain_size < 1:
            raise UsageError("domain_size must be >= 1")
        if self.labels < 1:
            raise UsageError("label count must be >= 1")
        if not self.hypotheses:
            raise UsageError("hypotheses list must be non-empty")
        seen = set()
        for h in self.hypotheses:
            if len(h) != self.domain_size:
                raise UsageError(f"hypothesis length {len(h)} != domain size {self.domain_size}")
            if any(not (0 <= v < self.labels) for v in h):
                raise UsageError(f"label out of range in hypothesis {h}")
            if h in seen:
                raise UsageError(f"duplicate hypothesis {h}")
            seen.add(h)
        if self.point_names is not None and len(self.point_names) != self.domain_size:
            raise UsageError("point_names length mismatch")
        if self.label_names is not None and len(self.label_names) != self.labels:
            raise UsageError("label_names length mismatch")

    def __len__(self):
        return len(self.hypotheses)

    def matrix(self) -> np.ndarray:
        """Hypotheses as an (|H|, domain_size) int array (cached)."""
        cached = getattr(self, "_matrix", None)
        if cached is None:
            cached = np.asarray(self.hypotheses, dtype=np.int64)
            object.__setattr__(self, "_matrix", cached)
        return cached

    def is_nondegenerate(self) -> bool:
        """Two hypotheses agreeing somewhere and disagreeing elsewhere exist."""
        for i, h1 in enumerate(self.hypotheses):
            for h2 in self.hypotheses[i + 1:]:
                agree = any(a == b for a, b in zip(h1, h2))
                differ = any(a != b for a, b in zip(h1, h2))
                if agree and differ:
                    return True
        return False

    def to_json(self) -> str:
        doc = {
            "domain_size": self.domain_size,
            "labels": self.labels,
            "hypotheses": [list(h) for h in self.hypotheses],
        }
        if self.point_names is not None:
            doc["point_names"] = list(self.point_names)
        if self.label_names is not None:
            doc["label_names"] = list(self.label_names)
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "FiniteClass":
        doc = json.loads(text)
        try:
            return cls(
                domain_size=doc["domain_size"],
                labels=doc["labels"],
                hypotheses=tuple(tuple(h) for h in doc["hypotheses"]),
                point_names=tuple(doc["point_names"]) if "point_names" in doc else None,
                label_names=tuple(doc["label_names"]) if "label_names" in doc else None,
            )
        except KeyError as exc:
            raise UsageError(f"class file missing key {exc}") from exc


def full_class(domain_size: int, labels: int) -> FiniteClass:
    """The class of all functions from the domain to the label set."""
    import itertools

    hyps = tuple(itertools.product(range(labels), repeat=domain_size))
    return FiniteClass(domain_size, labels, hyps)


@dataclass(frozen=True)
class VersionSpace:
    """Hypotheses of a base class consistent with (point, label) constraints."""

    base: FiniteClass
    constraints: tuple[tuple[int, int], ...]

    def hypothesis_indices(self) -> tuple[int, ...]:
        cached = getattr(self, "_indices", None)
        if cached is None:
            cached = tuple(
                i
                for i, h in enumerate(self.base.hypotheses)
                if all(h[p] == y for p, y in self.constraints)
            )
            object.__setattr__(self, "_indices", cached)
        return cached

    def hypotheses(self) -> tuple[Pattern, ...]:
        return tuple(self.base.hypotheses[i] for i in self.hypothesis_indices())

    def __len__(self):
        return len(self.hypothesis_indices())

    def is_empty(self) -> bool:
        return len(self) == 0


@dataclass(frozen=True)
class Projection:
    """Distinct restrictions of a class to an ordered point tuple (repeats allowed)."""

    points: tuple[int, ...]
    patterns: frozenset[Pattern]

    def __len__(self):
        return len(self.patterns)

    def sorted_patterns(self) -> list[Pattern]:
        return sorted(self.patterns)


def restrict(cls: FiniteClass, constraints: Iterable[tuple[int, int]]) -> VersionSpace:
    """Version space of hypotheses with h(p) == y for every (p, y) constraint.

    An empty version space is a valid result, not an error.
    """
    cons = tuple((int(p), int(y)) for p, y in constraints)
    for p, y in cons:
        if not (0 <= p < cls.domain_size):
            raise UsageError(f"point index {p} out of bounds")
        if not (0 <= y < cls.labels):
            raise UsageError(f"label {y} out of bounds")
    return VersionSpace(cls, cons)


def project(source: FiniteClass | VersionSpace, points: Sequence[int]) -> Projection:
    """Set of distinct restrictions of the class (or version space) to `points`."""
    pts = tuple(int(p) for p in points)
    if isinstance(source, VersionSpace):
        base, hyps = source.base, source.hypotheses()
    else:
        base, hyps = source, source.hypotheses
    for p in pts:
        if not (0 <= p < base.domain_size):
            raise UsageError(f"point index {p} out of bounds")
    return Projection(pts, frozenset(tuple(h[p] for p in pts) for h in hyps))


@dataclass(frozen=True)
class LabeledSample:
    """A sequence of (point index, label) pairs."""

    pairs: tuple[tuple[int, int], ...]

    def __len__(self):
        return len(self.pairs)

    def points(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.pairs)

    def labels(self) -> tuple[int, ...]:
        return tuple(y for _, y in self.pairs)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["point", "label"])
        writer.writerows(self.pairs)
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "LabeledSample":
        rows = list(csv.reader(io.StringIO(text)))
        if rows and rows[0] == ["point", "label"]:
            rows = rows[1:]
        return cls(tuple((int(p), int(y)) for p, y in rows if p != ""))


def is_consistent(cls: FiniteClass, sample: LabeledSample) -> bool:
    """True iff some hypothesis realizes every pair of the sample."""
    return not restrict(cls, sample.pairs).is_empty()


Weight = Fraction | float


@dataclass(frozen=True)
class RealizableDistribution:
    """Finite-support distribution over (point, label) pairs.

    Either `witness` names a zero-error hypothesis of `base`, or
    `limit_realizable` is set and `witness_schedule` lists (hypothesis index,
    error bound) pairs certifying inf er = 0; truncated tree-branch
    distributions carry both.
    """

    base: FiniteClass
    atoms: tuple[tuple[int, int, Weight], ...]
    witness: int | None = None
    limit_realizable: bool = False
    witness_schedule: tuple[tuple[int, Weight], ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not self.atoms:
            raise UsageError("distribution needs at least one atom")
        total = sum(Fraction(w) if isinstance(w, Fraction) else w for _, _, w in self.atoms)
        if isinstance(total, Fraction):
            if total != 1:
                raise UsageError(f"weights sum to {total}, expected exactly 1")
        elif abs(total - 1.0) > WEIGHT_TOL:
            raise UsageError(f"weights sum to {total}, expected 1 within {WEIGHT_TOL}")
        for p, y, w in self.atoms:
            if w < 0:
                raise UsageError("negative weight")
            if not (0 <= p < self.base.domain_size) or not (0 <= y < self.base.labels):
                raise UsageError(f"atom ({p},{y}) out of bounds")
        if self.witness is not None:
            err = self.error_rate(self.base.hypotheses[self.witness])
            if err != 0:
                raise UsageError(f"witness hypothesis has error {err} != 0")
        elif self.limit_realizable:
            if not self.witness_schedule:
                raise UsageError("limit-realizable distribution needs a witness schedule")
            for idx, bound in self.witness_schedule:
                err = self.error_rate(self.base.hypotheses[idx])
                if err > bound:
                    raise UsageError(
                        f"schedule witness {idx} has error {err} > stated bound {bound}"
                    )
        else:
            raise UsageError("distribution needs a witness or a limit-realizable schedule")

    def error_rate(self, hypothesis: Pattern) -> Weight:
        return sum(w for p, y, w in self.atoms if hypothesis[p] != y)

    def weights_array(self) -> np.ndarray:
        return np.asarray([float(w) for _, _, w in self.atoms])

    def to_json(self) -> str:
        doc = {
            "atoms": [[p, y, float(w)] for p, y, w in self.atoms],
            "witness": self.witness,
        }
        if self.limit_realizable:
            doc["limit_realizable"] = True
            doc["witness_schedule"] = [[i, float(b)] for i, b in self.witness_schedule]
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str, base: FiniteClass) -> "RealizableDistribution":
        doc = json.loads(text)
        return cls(
            base=base,
            atoms=tuple((int(p), int(y), float(w)) for p, y, w in doc["atoms"]),
            witness=doc.get("witness"),
            limit_realizable=doc.get("limit_realizable", False),
            witness_schedule=tuple(
                (int(i), float(b)) for i, b in doc.get("witness_schedule", [])
            ),
        )


def sample_iid(dist: RealizableDistribution, n: int, seed: int) -> LabeledSample:
    """n independent draws from the distribution's atoms; deterministic per seed."""
    if n < 0:
        raise UsageError("sample size must be >= 0")
    rng = np.random.default_rng(seed)
    if n == 0:
        return LabeledSample(())
    idx = rng.choice(len(dist.atoms), size=n, p=dist.weights_array())
    return LabeledSample(tuple((dist.atoms[i][0], dist.atoms[i][1]) for i in idx))
