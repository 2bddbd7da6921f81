"""Batch learners: exponential-rate online-to-batch, the lattice hull learner,
and the pattern-avoidance majority-vote template, plus the avoided-subclass
machinery and the leave-one-out reduction they plug into.

The three batch learners are also wrapped as sklearn-style estimators at the
bottom of the module so they compose with the wider ecosystem.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .classes import (
    DomainError,
    FiniteClass,
    LabeledSample,
    Pattern,
    RealizableDistribution,
    UsageError,
)
from .dimensions import ds_dim
from .games import AvoidanceState, DslGame, LittlestoneGame, avoidance_query, run_avoidance
from .rational_lp import convex_dominates

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Uniform learners over indexed domains


class CanonicalErm:
    """Deterministic consistent ERM: the canonically-first consistent pattern.

    Given a class over an indexed domain (a list of label patterns) and a
    training sample of (index, label) pairs realizable in that class, returns
    the lexicographically smallest consistent pattern.  Predicts the sample's
    own labels whenever the sample is realizable, which is the consistency
    contract uniform learners must satisfy here.
    """

    def __call__(self, patterns, train) -> Pattern | None:
        for pat in sorted(patterns):
            if all(pat[i] == y for i, y in train):
                return pat
        return None


class PluralityVoteLearner:
    """Per-index plurality vote among the consistent patterns, ties to the
    smallest label.

    Consistent (trained indices are unanimous among consistent patterns) and
    index-equivariant, which the canonical ERM is not; the leave-one-out
    error bound holds with its factor 2 only for equivariant learners once
    both sides are averaged over exchangeable data.
    """

    def __call__(self, patterns, train):
        live = [p for p in patterns if all(p[i] == y for i, y in train)]
        if not live:
            return None
        n = len(live[0])
        out = []
        for i in range(n):
            counts: dict[int, int] = {}
            for p in live:
                counts[p[i]] = counts.get(p[i], 0) + 1
            best = max(counts.values())
            out.append(min(v for v, c in counts.items() if c == best))
        return tuple(out)


def is_consistent_learner(A, patterns, labels, probes: int = 8, seed: int = 0) -> bool:
    """Probe the consistency contract on subsamples of a realizable labeling."""
    rng = np.random.default_rng(seed)
    n = len(labels)
    pats = list(patterns)
    for _ in range(probes):
        size = int(rng.integers(1, n + 1))
        idx = rng.choice(n, size=size, replace=True)
        train = [(int(i), labels[int(i)]) for i in idx]
        out = A(pats, train)
        if out is None or any(out[i] != y for i, y in train):
            return False
    return True


# ---------------------------------------------------------------------------
# Avoided subclasses and per-rates


@dataclass(frozen=True)
class PatternAvoidingClass:
    """Projections of the class onto base points, filtered by an avoidance map.

    A pattern survives when no tuple of distinct positions lands in the
    avoided set of its point tuple.  May be empty.
    """

    base_points: tuple[int, ...]
    arity: int
    patterns: frozenset[Pattern]

    def __len__(self):
        return len(self.patterns)


class StateAvoidanceFunction:
    """Avoided-pattern map of a pattern-avoidance run, with query caching."""

    def __init__(self, state: AvoidanceState, cls: FiniteClass, game: DslGame | None = None):
        self.state = state
        self.cls = cls
        self.game = DslGame(cls) if game is None else game
        self.arity = state.tau
        self._cache: dict[tuple[int, ...], frozenset[Pattern]] = {}

    def __call__(self, points: tuple[int, ...]) -> frozenset[Pattern]:
        points = tuple(points)
        hit = self._cache.get(points)
        if hit is None:
            hit = avoidance_query(self.state, points, self.cls, self.game)
            self._cache[points] = hit
        return hit


class ExplicitAvoidanceFunction:
    """Avoidance map given as a dict (or constant set) for tests and configs."""

    def __init__(self, arity: int, mapping=None, everywhere: frozenset | None = None):
        self.arity = arity
        self.mapping = {} if mapping is None else dict(mapping)
        self.everywhere = frozenset() if everywhere is None else frozenset(everywhere)

    def __call__(self, points):
        return frozenset(self.mapping.get(tuple(points), ())) | self.everywhere


def _value_tuples(counts: dict[int, int], arity: int):
    """Point-value tuples realizable by distinct positions of the base sequence."""
    values = sorted(counts)
    for tup in itertools.product(values, repeat=arity):
        usage: dict[int, int] = {}
        ok = True
        for v in tup:
            usage[v] = usage.get(v, 0) + 1
            if usage[v] > counts[v]:
                ok = False
                break
        if ok:
            yield tup


def build_avoiding_class(cls: FiniteClass, base_points, g) -> PatternAvoidingClass:
    """Filter the projection of the class onto `base_points` through g.

    Exact implementation of the avoided-subclass construction: a hypothesis's
    restriction survives iff no tuple of distinct positions (point values may
    repeat when the base sequence repeats them) has its labels in g's avoided
    set for those points.
    """
    pts = tuple(int(p) for p in base_points)
    k = g.arity
    if k > len(pts):
        raise UsageError(f"avoidance arity {k} exceeds base length {len(pts)}")
    counts: dict[int, int] = {}
    for p in pts:
        counts[p] = counts.get(p, 0) + 1
    tuples = list(_value_tuples(counts, k))
    survivors = set()
    seen = set()
    for h in cls.hypotheses:
        restriction = tuple(h[p] for p in pts)
        if restriction in seen:
            continue
        seen.add(restriction)
        bad = False
        for tup in tuples:
            if tuple(h[v] for v in tup) in g(tup):
                bad = True
                break
        if not bad:
            survivors.add(restriction)
    return PatternAvoidingClass(base_points=pts, arity=k, patterns=frozenset(survivors))


def ds_dim_of_patterns(patterns, length: int) -> int:
    """DS dimension of a bare pattern set over an indexed domain; 0 if empty."""
    pats = set(patterns)
    if not pats:
        return 0
    labels = max(max(p) for p in pats) + 1
    return ds_dim(FiniteClass(length, labels, tuple(sorted(pats))))


def per_rate(g, dist: RealizableDistribution, k: int):
    """Probability that a fresh i.i.d. k-tuple's labels land in g's avoided set.

    Exact sum over the finite support's k-tuples with product weights.
    """
    total = Fraction(0) if all(isinstance(w, Fraction) for _, _, w in dist.atoms) else 0.0
    cache: dict[tuple[int, ...], frozenset] = {}
    for combo in itertools.product(dist.atoms, repeat=k):
        pts = tuple(a[0] for a in combo)
        avoided = cache.get(pts)
        if avoided is None:
            avoided = frozenset(g(pts))
            cache[pts] = avoided
        if tuple(a[1] for a in combo) in avoided:
            w = combo[0][2]
            for a in combo[1:]:
                w = w * a[2]
            total += w
    return total


# ---------------------------------------------------------------------------
# Leave-one-out (partial sample) reduction


def partial_sample_learn(A, patterns, train, test_index: int):
    """Apply a uniform learner to a leave-one-out training set.

    Rejects learners that violate the consistency contract on this instance.
    """
    pats = sorted(set(map(tuple, patterns)))
    if not pats:
        raise UsageError("empty hypothesis class")
    out = A(pats, list(train))
    realizable = any(all(p[i] == y for i, y in train) for p in pats)
    if realizable and (out is None or any(out[i] != y for i, y in train)):
        raise UsageError("uniform learner is not consistent on this instance")
    if out is None:
        out = pats[0]
    return out[test_index]


def partial_sample_sides(A, patterns, labels, reps: int, seed: int):
    """Monte Carlo estimates of the two sides of the leave-one-out bound.

    labels = (y_1..y_{n+1}) realizable in the pattern class.  The left side
    trains on uniform draws from the first n labeled indices and tests at
    index n; the right side trains on draws from all n+1 and tests at a fresh
    uniform index.  Returns (lhs, rhs, se_lhs, se_rhs).
    """
    pats = np.asarray(sorted(set(map(tuple, patterns))), dtype=np.int64)
    y = np.asarray(labels, dtype=np.int64)
    n = len(labels) - 1
    size = -(-n // 2)  # ceil(n/2)
    rng = np.random.default_rng(seed)

    def erm_batch(train_idx: np.ndarray, test_idx: np.ndarray) -> np.ndarray:
        # consistency of every pattern with every rep's training multiset
        cons = (pats[:, train_idx] == y[train_idx]).all(axis=2)  # (|H|, reps)
        first = cons.argmax(axis=0)
        preds = pats[first, test_idx]
        return preds

    if isinstance(A, CanonicalErm):
        t_idx = rng.integers(0, n, size=(reps, size))
        lhs_err = erm_batch(t_idx, np.full(reps, n)) != y[n]
        t2_idx = rng.integers(0, n + 1, size=(reps, size))
        test2 = rng.integers(0, n + 1, size=reps)
        rhs_err = erm_batch(t2_idx, test2) != y[test2]
    else:
        lhs_err = np.empty(reps, dtype=bool)
        rhs_err = np.empty(reps, dtype=bool)
        pat_list = [tuple(p) for p in pats]
        for r in range(reps):
            t = rng.integers(0, n, size=size)
            train = [(int(i), int(y[i])) for i in t]
            lhs_err[r] = partial_sample_learn(A, pat_list, train, n) != y[n]
            t2 = rng.integers(0, n + 1, size=size)
            i_test = int(rng.integers(0, n + 1))
            train2 = [(int(i), int(y[i])) for i in t2]
            rhs_err[r] = partial_sample_learn(A, pat_list, train2, i_test) != y[i_test]
    lhs, rhs = lhs_err.mean(), rhs_err.mean()
    se = lambda p: float(np.sqrt(max(p * (1 - p), 1e-12) / reps))
    return float(lhs), float(rhs), se(lhs), se(rhs)


# ---------------------------------------------------------------------------
# Exponential-rate online-to-batch learner


class ExpRateRule:
    """Prediction rule of the value-guided online strategy after a sample pass.

    The rule changes only at online mistakes; at most littlestone_dim updates
    ever happen.
    """

    def __init__(self, cls: FiniteClass, game: LittlestoneGame | None = None):
        self.cls = cls
        self.game = LittlestoneGame(cls) if game is None else game
        self.committed: tuple[tuple[int, int], ...] = ()
        self._committed_idx = frozenset(range(len(cls.hypotheses)))
        self._sample_idx = self._committed_idx
        self.mistakes = 0

    def _filter(self, indices, x, y):
        hyps = self.cls.hypotheses
        return frozenset(i for i in indices if hyps[i][x] == y)

    def predict(self, x: int) -> int:
        val = self.game._value
        threshold = min(val(self._committed_idx), val(frozenset(range(len(self.cls.hypotheses)))))
        for y in range(self.cls.labels):
            if val(self._filter(self._committed_idx, x, y)) >= threshold:
                return y
        return 0

    def observe(self, x: int, y: int, t: int) -> int:
        self._sample_idx = self._filter(self._sample_idx, x, y)
        if not self._sample_idx:
            raise DomainError(f"sample inconsistent with class at prefix length {t}")
        pred = self.predict(x)
        if pred != y:
            self.mistakes += 1
            self.committed = self.committed + ((x, y),)
            self._committed_idx = self._filter(self._committed_idx, x, y)
        return pred

    def __call__(self, x: int) -> int:
        return self.predict(x)


def exp_rate_learner(
    cls: FiniteClass, sample: LabeledSample, game: LittlestoneGame | None = None
) -> ExpRateRule:
    """Feed the sample through the online strategy; return the final rule."""
    rule = ExpRateRule(cls, game)
    for t, (x, y) in enumerate(sample.pairs, start=1):
        rule.observe(x, y, t)
    return rule


# ---------------------------------------------------------------------------
# Near-linear majority-vote template


@dataclass
class NearLinearRule:
    cls: FiniteClass
    block_functions: list  # avoidance functions, one per sub-learner
    train_masks: list[int]  # per block: bitmask of patterns consistent with T^i
    s2_points: tuple[int, ...]
    s2_labels: tuple[int, ...]
    uniform_learner: object
    t_hat: int
    _fn_cache: dict = field(default_factory=dict)

    def _survivor_order(self, x: int):
        """Class hypotheses deduped on (S2, x) restriction, in canonical order."""
        seen = {}
        cols = self.s2_points + (x,)
        for fi, h in enumerate(self.cls.hypotheses):
            r = tuple(h[p] for p in cols)
            if r not in seen:
                seen[r] = fi
        return sorted(seen.items())

    def predict(self, x: int) -> int:
        cols = self.s2_points + (x,)
        counts: dict[int, int] = {}
        for p in cols:
            counts[p] = counts.get(p, 0) + 1
        order = self._survivor_order(x)
        votes: dict[int, int] = {}
        for g, mask in zip(self.block_functions, self.train_masks):
            vote = 0
            tuples = list(_value_tuples(counts, g.arity))
            for restriction, fi in order:
                h = self.cls.hypotheses[fi]
                if not (mask >> fi) & 1:
                    continue
                if any(tuple(h[v] for v in tup) in g(tup) for tup in tuples):
                    continue
                vote = restriction[-1]
                break
            votes[vote] = votes.get(vote, 0) + 1
        best = max(votes.values())
        return min(v for v, c in votes.items() if c == best)

    def __call__(self, x: int) -> int:
        return self.predict(x)


def near_linear_learner(
    cls: FiniteClass,
    sample: LabeledSample,
    A=None,
    dist: RealizableDistribution | None = None,
    seed: int = 0,
    min_n_guard: int = 32,
    game: DslGame | None = None,
):
    """Data-split pattern-avoidance majority-vote learner.

    First half drives the blockwise avoidance states and the time selection;
    the second half feeds the uniform learner through leave-one-out
    subsamples; prediction is the majority vote, ties to the smallest label.
    With a distribution the block error uses the exact per-rate test,
    otherwise the empirical second-quarter surrogate.
    """
    n = len(sample)
    A = CanonicalErm() if A is None else A
    if n < 8:
        logger.warning("n = %d < 8: falling back to the exponential-rate learner", n)
        return exp_rate_learner(cls, sample)
    if n < min_n_guard:
        logger.warning("n = %d below the sample-size guard %d; rates not guaranteed", n, min_n_guard)
    game = DslGame(cls) if game is None else game
    pairs = sample.pairs
    quarter, half = n // 4, n // 2

    def block_states(t: int):
        m = quarter // t
        states = []
        for i in range(m):
            seg = LabeledSample(pairs[i * t:(i + 1) * t])
            state, _, _ = run_avoidance(cls, seg, game)
            states.append(state)
        return states

    def block_error(states) -> float:
        bad = 0
        for st in states:
            g = StateAvoidanceFunction(st, cls, game)
            if dist is not None:
                bad += per_rate(g, dist, st.tau) > 0
            else:
                tau = st.tau
                hit = False
                for s in range(quarter, half - tau + 1):
                    wx = tuple(p for p, _ in pairs[s:s + tau])
                    wy = tuple(y for _, y in pairs[s:s + tau])
                    if wy in g(wx):
                        hit = True
                        break
                bad += hit
        return bad / len(states)

    t_hat = None
    for t in range(1, quarter):
        states = block_states(t)
        if block_error(states) < 0.25:
            t_hat = t
            break
    if t_hat is None:
        t_hat = quarter - 1  # states already holds the last candidate's blocks

    s2 = pairs[half:]
    s2_points = tuple(p for p, _ in s2)
    s2_labels = tuple(y for _, y in s2)
    n2 = len(s2)
    rng = np.random.default_rng(seed)
    size = -(-n2 // 2)

    # per-index consistency bitmasks over class hypotheses
    masks = []
    for j in range(n2):
        m = 0
        for fi, h in enumerate(cls.hypotheses):
            if h[s2_points[j]] == s2_labels[j]:
                m |= 1 << fi
        masks.append(m)
    train_masks = []
    full = (1 << len(cls.hypotheses)) - 1
    for _ in states:
        idx = rng.integers(0, n2, size=size)
        m = full
        for j in idx:
            m &= masks[j]
        train_masks.append(m)

    if not isinstance(A, CanonicalErm):
        if not is_consistent_learner(
            A, [tuple(h[p] for p in s2_points) for h in cls.hypotheses], s2_labels
        ):
            raise UsageError("uniform learner violates the consistency contract")
        logger.info("custom uniform learners use the generic (slow) prediction path")
        return _GenericNearLinearRule(cls, states, s2, A, rng, game, t_hat)

    return NearLinearRule(
        cls=cls,
        block_functions=[StateAvoidanceFunction(st, cls, game) for st in states],
        train_masks=train_masks,
        s2_points=s2_points,
        s2_labels=s2_labels,
        uniform_learner=A,
        t_hat=t_hat,
    )


class _GenericNearLinearRule:
    """Reference path for arbitrary uniform learners (no bitmask shortcut)."""

    def __init__(self, cls, states, s2, A, rng, game, t_hat):
        self.cls = cls
        self.functions = [StateAvoidanceFunction(st, cls, game) for st in states]
        self.s2 = s2
        self.A = A
        self.t_hat = t_hat
        n2 = len(s2)
        size = -(-n2 // 2)
        self.trains = [
            [int(j) for j in rng.integers(0, n2, size=size)] for _ in states
        ]

    def predict(self, x: int) -> int:
        s2_points = tuple(p for p, _ in self.s2)
        s2_labels = tuple(y for _, y in self.s2)
        base = s2_points + (x,)
        votes: dict[int, int] = {}
        for g, train_idx in zip(self.functions, self.trains):
            sub = build_avoiding_class(self.cls, base, g)
            train = [(j, s2_labels[j]) for j in train_idx]
            pats = sorted(sub.patterns)
            vote = 0
            if pats:
                out = self.A(pats, train)
                if out is not None:
                    vote = out[-1]
            votes[vote] = votes.get(vote, 0) + 1
        best = max(votes.values())
        return min(v for v, c in votes.items() if c == best)

    def __call__(self, x):
        return self.predict(x)


# ---------------------------------------------------------------------------
# The lattice hull learner


def lattice_feasible_labels(pairs, query, cache=None):
    """Labels k whose sample points admit a convex combination dominated by query."""
    by_label: dict[int, list[tuple[int, ...]]] = {}
    for x, y in pairs:
        by_label.setdefault(y, []).append(tuple(x))
    out = set()
    for k, points in by_label.items():
        key = (frozenset(points), tuple(query))
        if cache is not None and key in cache:
            hit = cache[key]
        else:
            hit = convex_dominates(points, query)
            if cache is not None:
                cache[key] = hit
        if hit:
            out.add(k)
    return out


def example1_predict(pairs, query, cache=None) -> int:
    """Smallest feasible label at the query point, 1 when none is feasible.

    Points are non-negative integer lattice vectors; labels are 1-based.
    """
    feasible = lattice_feasible_labels(pairs, query, cache)
    return min(feasible) if feasible else 1


class LatticeHullOnline:
    """Mistake-driven online form of the hull learner.

    The state grows only on mistakes, so correct rounds leave the predictor
    untouched by construction.  (Appending every pair would not: a correctly
    predicted default-label point can enter the class-1 hull and flip other
    predictions.)  Stream consistency is checked lazily: a feasible label
    strictly above the revealed one certifies that no monotone linear
    hypothesis generated the stream.
    """

    def __init__(self, debug: bool = False):
        self.pairs: list[tuple[tuple[int, ...], int]] = []
        self.mistake_times: list[int] = []
        self.debug = debug
        self._cache: dict = {}
        self._t = 0

    def predict(self, x) -> int:
        return example1_predict(self.pairs, tuple(x), self._cache)

    def step(self, x, y: int) -> int:
        self._t += 1
        x = tuple(int(v) for v in x)
        if any(v < 0 for v in x):
            raise UsageError("lattice points must be non-negative")
        if y < 1:
            raise UsageError("labels are 1-based")
        pred = self.predict(x)
        feasible = lattice_feasible_labels(self.pairs + [(x, y)], x, self._cache)
        if any(k > y for k in feasible):
            raise DomainError(
                f"stream inconsistent at step {self._t}: label {y} below a feasible class"
            )
        if pred != y:
            self.mistake_times.append(self._t)
            self.pairs.append((x, y))
        elif self.debug and self.predict(x) != y:
            raise RuntimeError("frozen state stopped predicting a correct round")
        return pred


def example1_online(stream):
    """Run the hull learner over (x, y) pairs; returns (mistake times, learner)."""
    learner = LatticeHullOnline()
    for x, y in stream:
        learner.step(x, y)
    return learner.mistake_times, learner


# ---------------------------------------------------------------------------
# sklearn-style estimator wrappers


def _as_index_column(X) -> np.ndarray:
    X = np.asarray(X)
    if X.ndim == 2 and X.shape[1] == 1:
        X = X[:, 0]
    if X.ndim != 1:
        raise UsageError("expected point indices of shape (n,) or (n, 1)")
    return X.astype(np.int64)


class ExponentialRateClassifier(BaseEstimator, ClassifierMixin):
    """Online-to-batch value-guided learner over a fixed finite class.

    X holds domain point indices; y holds labels.
    """

    def __init__(self, fclass: FiniteClass):
        self.fclass = fclass

    def fit(self, X, y):
        X = _as_index_column(X)
        y = np.asarray(y, dtype=np.int64)
        sample = LabeledSample(tuple(zip(X.tolist(), y.tolist())))
        self.rule_ = exp_rate_learner(self.fclass, sample)
        self.classes_ = np.arange(self.fclass.labels)
        return self

    def predict(self, X):
        X = _as_index_column(X)
        return np.asarray([self.rule_.predict(int(x)) for x in X])


class NearLinearClassifier(BaseEstimator, ClassifierMixin):
    """Pattern-avoidance majority-vote learner over a fixed finite class."""

    def __init__(self, fclass: FiniteClass, dist=None, random_state: int = 0):
        self.fclass = fclass
        self.dist = dist
        self.random_state = random_state

    def fit(self, X, y):
        X = _as_index_column(X)
        y = np.asarray(y, dtype=np.int64)
        sample = LabeledSample(tuple(zip(X.tolist(), y.tolist())))
        self.rule_ = near_linear_learner(
            self.fclass, sample, dist=self.dist, seed=self.random_state
        )
        self.classes_ = np.arange(self.fclass.labels)
        return self

    def predict(self, X):
        X = _as_index_column(X)
        return np.asarray([self.rule_.predict(int(x)) for x in X])


class LatticeHullClassifier(BaseEstimator, ClassifierMixin):
    """Convex-hull-domination learner on non-negative integer lattices.

    X has shape (n, d) with non-negative integer coordinates; y is 1-based.
    """

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.int64)
        if X.ndim != 2:
            raise UsageError("expected lattice points of shape (n, d)")
        y = np.asarray(y, dtype=np.int64)
        self.pairs_ = [(tuple(row), int(label)) for row, label in zip(X, y)]
        self._cache = {}
        self.classes_ = np.unique(y)
        return self

    def predict(self, X):
        X = np.asarray(X, dtype=np.int64)
        return np.asarray(
            [example1_predict(self.pairs_, tuple(row), self._cache) for row in X]
        )
