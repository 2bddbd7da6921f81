import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from uniratelab import (
    DomainError,
    FiniteClass,
    LabeledSample,
    RealizableDistribution,
    UsageError,
    full_class,
)
from uniratelab.dimensions import littlestone_dim
from uniratelab.games import DslGame, run_avoidance
from uniratelab.learners import (
    CanonicalErm,
    ExplicitAvoidanceFunction,
    ExponentialRateClassifier,
    LatticeHullClassifier,
    LatticeHullOnline,
    NearLinearClassifier,
    StateAvoidanceFunction,
    build_avoiding_class,
    ds_dim_of_patterns,
    example1_online,
    example1_predict,
    exp_rate_learner,
    is_consistent_learner,
    near_linear_learner,
    partial_sample_learn,
    partial_sample_sides,
    per_rate,
)
from uniratelab.rational_lp import convex_dominates, feasible_eq


def threshold_class(n):
    hyps = tuple(tuple(1 if x >= t else 0 for x in range(n)) for t in range(n + 1))
    return FiniteClass(n, 2, hyps)


def random_class(rng, max_points=4, max_labels=3, max_h=8):
    n = int(rng.integers(2, max_points + 1))
    k = int(rng.integers(2, max_labels + 1))
    size = int(rng.integers(2, min(max_h, k**n) + 1))
    seen = set()
    while len(seen) < size:
        seen.add(tuple(int(v) for v in rng.integers(0, k, size=n)))
    return FiniteClass(n, k, tuple(sorted(seen)))


# ---- exact rational feasibility --------------------------------------------------


def test_feasible_eq_simple():
    # x + y = 1, x - y = 0 -> x = y = 1/2 >= 0: feasible
    A = [[Fraction(1), Fraction(1)], [Fraction(1), Fraction(-1)]]
    assert feasible_eq(A, [Fraction(1), Fraction(0)])
    # x + y = 0 with x >= 1? encode: x + y = 0, x - s = 1 -> x = 1+s, y = -1-s < 0
    A2 = [[Fraction(1), Fraction(1), Fraction(0)], [Fraction(1), Fraction(0), Fraction(-1)]]
    assert not feasible_eq(A2, [Fraction(0), Fraction(1)])


def test_convex_dominates_1d():
    assert convex_dominates([(1,), (3,)], (5,))
    assert convex_dominates([(1,), (3,)], (1,))
    assert not convex_dominates([(3,)], (2,))
    assert not convex_dominates([], (2,))


def test_convex_dominates_2d_boundary_exact():
    # hull of (0,2),(2,0): the midpoint (1,1) dominates exactly; (1,0) does not
    pts = [(0, 2), (2, 0)]
    assert convex_dominates(pts, (1, 1))
    assert not convex_dominates(pts, (1, 0))
    assert not convex_dominates(pts, (0, 1))


# ---- uniform learner / ERM ---------------------------------------------------------


def test_canonical_erm_first_consistent():
    A = CanonicalErm()
    pats = [(1, 0), (0, 1), (0, 0)]
    assert A(pats, [(0, 0)]) == (0, 0)
    assert A(pats, [(0, 1), (1, 0)]) == (1, 0)
    assert A(pats, [(0, 1), (1, 1)]) is None


def test_is_consistent_learner_probe():
    pats = [(0, 0), (1, 1)]
    assert is_consistent_learner(CanonicalErm(), pats, (1, 1))
    constant = lambda patterns, train: patterns[0]
    assert not is_consistent_learner(constant, pats, (1, 1))


# ---- avoided subclasses --------------------------------------------------------------


def test_build_avoiding_class_identity_and_empty():
    cls = full_class(2, 2)
    nothing = ExplicitAvoidanceFunction(arity=1)
    assert build_avoiding_class(cls, (0, 1), nothing).patterns == frozenset(
        itertools.product((0, 1), repeat=2)
    )
    everything = ExplicitAvoidanceFunction(arity=1, everywhere={(0,), (1,)})
    assert build_avoiding_class(cls, (0, 1), everything).patterns == frozenset()


def test_build_avoiding_class_repeated_points():
    cls = FiniteClass(2, 3, ((0, 1), (2, 2)))
    g = ExplicitAvoidanceFunction(arity=2, mapping={(0, 0): {(0, 0)}})
    # base (0, 0): hypothesis (0,1) restricts to (0,0) and hits the avoided set
    got = build_avoiding_class(cls, (0, 0), g)
    assert got.patterns == {(2, 2)}


def test_ds_dim_subclass_lemma_on_stabilized_runs():
    rng = np.random.default_rng(101)
    for _ in range(12):
        cls = random_class(rng)
        game = DslGame(cls)
        h = cls.hypotheses[int(rng.integers(0, len(cls)))]
        xs = rng.integers(0, cls.domain_size, size=48)
        stream = LabeledSample(tuple((int(x), h[int(x)]) for x in xs))
        state, _, _ = run_avoidance(cls, stream, game)
        g = StateAvoidanceFunction(state, cls, game)
        S = tuple(int(x) for x in rng.integers(0, cls.domain_size, size=8))
        if len(set(S)) < state.tau:
            continue
        sub = build_avoiding_class(cls, S, g)
        assert ds_dim_of_patterns(sub.patterns, len(S)) < state.tau


def test_per_rate_examples():
    cls = full_class(1, 2)
    dist = RealizableDistribution(
        cls, atoms=((0, 0, Fraction(1, 4)), (0, 1, Fraction(3, 4))), witness=None,
        limit_realizable=True, witness_schedule=((1, Fraction(1, 4)),),
    )
    nothing = ExplicitAvoidanceFunction(arity=1)
    assert per_rate(nothing, dist, 1) == 0
    everything = ExplicitAvoidanceFunction(arity=1, everywhere={(0,), (1,)})
    assert per_rate(everything, dist, 1) == 1
    single = ExplicitAvoidanceFunction(arity=2, mapping={(0, 0): {(1, 1)}})
    assert per_rate(single, dist, 2) == Fraction(9, 16)


def test_per_rate_zero_implies_realizable_subclass():
    # stabilized avoidance functions with per = 0: uniform index distribution
    # realizable in the avoided subclass (witness found by search)
    rng = np.random.default_rng(202)
    checked = 0
    for _ in range(20):
        cls = random_class(rng)
        game = DslGame(cls)
        hi = int(rng.integers(0, len(cls)))
        h = cls.hypotheses[hi]
        atoms = tuple(
            (x, h[x], Fraction(1, cls.domain_size)) for x in range(cls.domain_size)
        )
        dist = RealizableDistribution(cls, atoms=atoms, witness=hi)
        stream_xs = rng.integers(0, cls.domain_size, size=40)
        stream = LabeledSample(tuple((int(x), h[int(x)]) for x in stream_xs))
        state, _, _ = run_avoidance(cls, stream, game)
        g = StateAvoidanceFunction(state, cls, game)
        if per_rate(g, dist, state.tau) != 0:
            continue
        checked += 1
        n = 6
        xs = [int(x) for x in rng.integers(0, cls.domain_size, size=n)]
        ys = [h[x] for x in xs]
        sub = build_avoiding_class(cls, tuple(xs), g)
        assert any(
            all(pat[i] == ys[i] for i in range(n)) for pat in sub.patterns
        ), "no witness realizes the sampled labels"
    assert checked >= 8


# ---- leave-one-out reduction -----------------------------------------------------------


def test_partial_sample_agreeing_index_zero_error():
    pats = [(0, 1, 0), (1, 0, 0)]
    lhs, rhs, _, _ = partial_sample_sides(CanonicalErm(), pats, (0, 1, 0), reps=200, seed=0)
    # hypotheses agree at the test index: both error rates vanish? the second
    # pattern disagrees with y_2 = 0? it agrees; both are consistent candidates
    assert lhs == 0.0


def test_partial_sample_rejects_inconsistent_learner():
    pats = [(0, 0), (1, 1)]
    bad = lambda patterns, train: patterns[0]
    with pytest.raises(UsageError):
        partial_sample_learn(bad, pats, [(0, 1)], 1)


def averaged_partial_sample_sides(A, seed, outer=80, inner=50):
    """Both sides of the leave-one-out bound, averaged over i.i.d. data.

    The fixed-sequence form of the bound is false (see the counterexample
    test below); the form the majority-vote template uses conditions on
    exchangeable draws, so the experiment redraws the labeled sequence.
    """
    r = np.random.default_rng(seed)
    dom = int(r.integers(2, 5))
    k = int(r.integers(2, 4))
    n = int(r.integers(3, 7))
    size = int(r.integers(2, 7))
    seen = set()
    while len(seen) < size:
        seen.add(tuple(int(v) for v in r.integers(0, k, size=dom)))
    base = sorted(seen)
    h = base[int(r.integers(0, len(base)))]
    lhs = rhs = 0.0
    var_l = var_r = 0.0
    for _ in range(outer):
        xs = r.integers(0, dom, size=n + 1)
        pats = sorted({tuple(b[x] for x in xs) for b in base})
        labels = tuple(h[x] for x in xs)
        l, rr, se_l, se_r = partial_sample_sides(
            A, pats, labels, reps=inner, seed=int(r.integers(0, 2**31))
        )
        lhs += l / outer
        rhs += rr / outer
        var_l += se_l**2 / outer**2
        var_r += se_r**2 / outer**2
    return lhs, rhs, math.sqrt(var_l), math.sqrt(var_r)


def test_partial_sample_lemma_bound_many_instances():
    from uniratelab.learners import PluralityVoteLearner

    rng = np.random.default_rng(303)
    for _ in range(20):
        lhs, rhs, se_l, se_r = averaged_partial_sample_sides(
            PluralityVoteLearner(), seed=int(rng.integers(0, 2**31))
        )
        assert lhs <= 2 * rhs + 3 * math.sqrt(se_l**2 + 4 * se_r**2) + 1e-12


def test_partial_sample_fixed_sequence_counterexample():
    # two patterns differing only at the held-out slot: the factor-2 bound
    # fails for a fixed sequence, which is why the experiment above averages
    # over the data draw
    n = 6
    pats = [tuple([0] * n) + (0,), tuple([0] * n) + (1,)]
    labels = pats[1]
    lhs, rhs, _, _ = partial_sample_sides(CanonicalErm(), pats, labels, reps=4000, seed=5)
    assert lhs > 2 * rhs + 0.1


# ---- exponential-rate learner ------------------------------------------------------------


def test_exp_rate_learner_singleton():
    cls = FiniteClass(3, 2, ((0, 1, 0),))
    rule = exp_rate_learner(cls, LabeledSample(((1, 1),)))
    assert [rule(x) for x in range(3)] == [0, 1, 0]


def test_exp_rate_learner_empty_sample_is_initial_strategy():
    cls = full_class(2, 2)
    rule = exp_rate_learner(cls, LabeledSample(()))
    from uniratelab.games import LittlestoneGame

    game = LittlestoneGame(cls)
    assert rule(0) == game.g((), 0) and rule(1) == game.g((), 1)


def test_exp_rate_learner_mistake_driven_invariance():
    rng = np.random.default_rng(404)
    for _ in range(20):
        cls = random_class(rng)
        h = cls.hypotheses[int(rng.integers(0, len(cls)))]
        xs = [int(x) for x in rng.integers(0, cls.domain_size, size=10)]
        sample = LabeledSample(tuple((x, h[x]) for x in xs))
        rule = exp_rate_learner(cls, sample)
        assert rule.mistakes <= littlestone_dim(cls)
        # appending correctly-predicted examples leaves the rule unchanged
        probe = [rule(x) for x in range(cls.domain_size)]
        extra = tuple((x, rule(x)) for x in range(cls.domain_size) if rule(x) == h[x])
        if extra:
            rule2 = exp_rate_learner(
                cls, LabeledSample(sample.pairs + extra)
            )
            assert [rule2(x) for x in range(cls.domain_size)] == probe


def test_exp_rate_learner_inconsistent_sample_raises():
    cls = FiniteClass(2, 2, ((0, 0), (1, 1)))
    with pytest.raises(DomainError):
        exp_rate_learner(cls, LabeledSample(((0, 0), (0, 1))))


# ---- the lattice hull learner ---------------------------------------------------------------


def test_example1_empty_sample_predicts_one():
    assert example1_predict([], (5,)) == 1
    assert example1_predict([], (0, 0)) == 1


def test_example1_1d_examples():
    sample = [((1,), 1), ((3,), 2)]
    assert example1_predict(sample, (5,)) == 1  # both classes feasible; min
    assert example1_predict(sample, (2,)) == 1  # class 2 infeasible: 2 < 3
    assert example1_predict(sample, (3,)) == 1  # class 1 still feasible at 3
    sample2 = [((3,), 2)]
    assert example1_predict(sample2, (5,)) == 2
    assert example1_predict(sample2, (2,)) == 1  # nothing feasible


def test_example1_online_constant_stream():
    stream = [((x,), 2) for x in (4, 5, 6, 7)]
    mistakes, learner = example1_online(stream)
    assert len(mistakes) <= 1


def test_example1_online_repeated_point():
    stream = [((2, 3), 2)] * 5
    mistakes, _ = example1_online(stream)
    assert len(mistakes) <= 1


def test_example1_online_inconsistent_raises():
    # label 1 at a point dominating a class-2 point is impossible
    with pytest.raises(DomainError):
        example1_online([((3,), 2), ((5,), 1)])


def monotone_linear_labels(points, w, b):
    K = len(b)
    out = []
    for x in points:
        scores = [sum(w[k][j] * x[j] for j in range(len(x))) - b[k] for k in range(K)]
        m = max(scores)
        out.append(max(k for k in range(K) if scores[k] == m) + 1)
    return out


def test_example1_proposition_clauses_on_consistent_streams():
    # finite mistakes and state frozen after correct rounds, exhaustively over
    # permutations of small consistent samples
    box = list(itertools.product(range(3), repeat=2))
    w = [[0, 0], [1, 1], [2, 3]]
    b = [1, 2, 5]
    labels = monotone_linear_labels(box, w, b)
    pts = [((0, 0)), (1, 1), (2, 0), (0, 2), (2, 2)]
    pairs = [(p, labels[box.index(p)]) for p in pts]
    probes = box
    import itertools as it

    for perm in it.permutations(pairs):
        learner = LatticeHullOnline(debug=True)
        for x, y in perm:
            before = [learner.predict(q) for q in probes]
            pred = learner.step(x, y)
            after = [learner.predict(q) for q in probes]
            if pred == y:
                assert before == after, (perm, x, y)
        assert len(learner.mistake_times) <= len(perm)


# ---- near-linear template -----------------------------------------------------------------


def make_threshold_dist(cls, t_star):
    n = cls.domain_size
    h = tuple(1 if x >= t_star else 0 for x in range(n))
    atoms = tuple((x, h[x], Fraction(1, n)) for x in range(n))
    return RealizableDistribution(cls, atoms=atoms, witness=cls.hypotheses.index(h)), h


def test_near_linear_fallback_small_n():
    cls = threshold_class(6)
    dist, h = make_threshold_dist(cls, 3)
    sample = LabeledSample(tuple((x, h[x]) for x in (0, 1, 2, 3)))
    rule = near_linear_learner(cls, sample, dist=dist)
    assert hasattr(rule, "mistakes")  # exponential-rate fallback


def test_near_linear_singleton_class_exact():
    cls = FiniteClass(4, 2, ((0, 1, 0, 1),))
    h = cls.hypotheses[0]
    atoms = tuple((x, h[x], Fraction(1, 4)) for x in range(4))
    dist = RealizableDistribution(cls, atoms=atoms, witness=0)
    xs = [x % 4 for x in range(16)]
    sample = LabeledSample(tuple((x, h[x]) for x in xs))
    rule = near_linear_learner(cls, sample, dist=dist)
    assert [rule.predict(x) for x in range(4)] == list(h)


def test_near_linear_learns_threshold():
    cls = threshold_class(8)
    dist, h = make_threshold_dist(cls, 4)
    rng = np.random.default_rng(7)
    xs = [int(x) for x in rng.integers(0, 8, size=64)]
    sample = LabeledSample(tuple((x, h[x]) for x in xs))
    rule = near_linear_learner(cls, sample, dist=dist, seed=3)
    errs = sum(rule.predict(x) != h[x] for x in range(8))
    assert errs <= 2


def test_near_linear_empirical_mode_runs():
    cls = threshold_class(6)
    dist, h = make_threshold_dist(cls, 2)
    rng = np.random.default_rng(11)
    xs = [int(x) for x in rng.integers(0, 6, size=40)]
    sample = LabeledSample(tuple((x, h[x]) for x in xs))
    rule = near_linear_learner(cls, sample, dist=None, seed=5)
    preds = [rule.predict(x) for x in range(6)]
    assert all(p in (0, 1) for p in preds)


def test_near_linear_generic_uniform_learner_path():
    cls = threshold_class(6)
    dist, h = make_threshold_dist(cls, 3)
    rng = np.random.default_rng(13)
    xs = [int(x) for x in rng.integers(0, 6, size=32)]
    sample = LabeledSample(tuple((x, h[x]) for x in xs))

    class LastErm:
        def __call__(self, patterns, train):
            for pat in sorted(patterns, reverse=True):
                if all(pat[i] == y for i, y in train):
                    return pat
            return None

    rule = near_linear_learner(cls, sample, A=LastErm(), dist=dist, seed=2)
    preds = [rule.predict(x) for x in range(6)]
    assert all(p in (0, 1) for p in preds)


# ---- sklearn wrappers ------------------------------------------------------------------------


def test_sklearn_exponential_classifier():
    cls = threshold_class(6)
    h = tuple(1 if x >= 3 else 0 for x in range(6))
    X = np.array([[0], [5], [2], [3], [1], [4]])
    y = np.array([h[int(x)] for x in X[:, 0]])
    est = ExponentialRateClassifier(cls).fit(X, y)
    assert (est.predict(X) == y).all()
    params = est.get_params()
    assert params["fclass"] is cls


def test_sklearn_near_linear_classifier():
    cls = threshold_class(6)
    dist, h = make_threshold_dist(cls, 3)
    rng = np.random.default_rng(23)
    X = rng.integers(0, 6, size=(40, 1))
    y = np.array([h[int(x)] for x in X[:, 0]])
    est = NearLinearClassifier(cls, dist=dist, random_state=1).fit(X, y)
    preds = est.predict(np.arange(6).reshape(-1, 1))
    assert preds.shape == (6,)


def test_sklearn_lattice_classifier():
    X = np.array([[1], [3]])
    y = np.array([1, 2])
    est = LatticeHullClassifier().fit(X, y)
    assert est.predict(np.array([[5], [2]])).tolist() == [1, 1]
