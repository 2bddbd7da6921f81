import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from uniratelab import (
    FiniteClass,
    LabeledSample,
    RealizableDistribution,
    UsageError,
    full_class,
    is_consistent,
    project,
    restrict,
    sample_iid,
)
from fractions import Fraction


def small_class(hyps, labels=None):
    hyps = tuple(tuple(h) for h in hyps)
    labels = labels or (max(max(h) for h in hyps) + 1)
    return FiniteClass(domain_size=len(hyps[0]), labels=labels, hypotheses=hyps)


def test_validation_rejects_bad_tables():
    with pytest.raises(UsageError):
        small_class([(0, 2)], labels=2)  # label out of range
    with pytest.raises(UsageError):
        FiniteClass(2, 2, ((0, 1), (0, 1)))  # duplicate
    with pytest.raises(UsageError):
        FiniteClass(2, 2, ())  # empty


def test_restrict_full_binary_two_points():
    cls = full_class(2, 2)
    vs = restrict(cls, [(0, 1)])
    assert set(vs.hypotheses()) == {(1, 0), (1, 1)}


def test_restrict_empty_constraints_is_identity():
    cls = full_class(2, 2)
    assert set(restrict(cls, []).hypotheses()) == set(cls.hypotheses)


def test_restrict_to_empty_version_space():
    cls = small_class([(0, 0), (1, 1)])
    vs = restrict(cls, [(0, 0), (1, 1)])
    assert vs.is_empty()


def test_restrict_bounds_checked():
    cls = full_class(2, 2)
    with pytest.raises(UsageError):
        restrict(cls, [(5, 0)])
    with pytest.raises(UsageError):
        restrict(cls, [(0, 7)])


def test_project_full_class_gives_full_cube():
    cls = full_class(3, 2)
    assert project(cls, (0, 2)).patterns == frozenset(itertools.product((0, 1), repeat=2))


def test_project_singleton():
    cls = small_class([(0, 1, 0)])
    assert project(cls, (2, 1)).patterns == {(0, 1)}


def test_project_repeated_point_gives_diagonal():
    # hand enumeration: (0,1,2)->(1,1); (0,2,1)->(2,2); (1,1,1)->(1,1)
    cls = small_class([(0, 1, 2), (0, 2, 1), (1, 1, 1)])
    assert project(cls, (1, 1)).patterns == {(1, 1), (2, 2)}


def test_is_consistent_cases():
    cls = small_class([(0, 0), (1, 1)])
    assert is_consistent(cls, LabeledSample(()))
    assert is_consistent(cls, LabeledSample(((0, 1), (1, 1))))
    assert not is_consistent(cls, LabeledSample(((0, 0), (1, 1))))


def exhaustive_small_classes(max_points=3, labels=2, max_h=4):
    """All tiny classes for exhaustive structure checks."""
    for n in range(1, max_points + 1):
        all_h = list(itertools.product(range(labels), repeat=n))
        for size in range(1, max_h + 1):
            for hyps in itertools.combinations(all_h, size):
                yield FiniteClass(n, labels, hyps)


def test_restrict_project_commutes_with_filter():
    # project(restrict(c, cons), pts) == filter(project(c, pts+cons_pts))
    for cls in itertools.islice(exhaustive_small_classes(), 0, None, 7):
        n = cls.domain_size
        for pts in itertools.product(range(n), repeat=2):
            for q in range(n):
                for l in range(cls.labels):
                    left = project(restrict(cls, [(q, l)]), pts).patterns
                    right = {
                        t[:2]
                        for t in project(cls, pts + (q,)).patterns
                        if t[2] == l
                    }
                    assert left == right


def test_projection_size_bound():
    for cls in itertools.islice(exhaustive_small_classes(3, 2, 4), 0, None, 5):
        for k in (1, 2):
            for pts in itertools.combinations(range(cls.domain_size), k):
                proj = project(cls, pts)
                assert len(proj) <= min(len(cls), cls.labels ** k)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_consistency_monotone_under_extension(data):
    cls = full_class(3, 2)
    pairs = data.draw(
        st.lists(
            st.tuples(st.integers(0, 2), st.integers(0, 1)), min_size=0, max_size=6
        )
    )
    sample = LabeledSample(tuple(pairs))
    flags = [
        is_consistent(cls, LabeledSample(sample.pairs[:k]))
        for k in range(len(sample) + 1)
    ]
    # once inconsistent, stays inconsistent
    for a, b in zip(flags, flags[1:]):
        assert a or not b


def test_distribution_weight_validation():
    cls = full_class(1, 2)
    with pytest.raises(UsageError):
        RealizableDistribution(cls, atoms=((0, 0, 0.5),), witness=0)  # mass != 1
    atoms = ((0, 0, Fraction(1, 2)), (0, 1, Fraction(1, 2)))
    with pytest.raises(UsageError):
        # a mixed-label point has no zero-error witness
        RealizableDistribution(cls, atoms=atoms, witness=0)
    with pytest.raises(UsageError):
        # neither witness nor limit-realizable schedule
        RealizableDistribution(cls, atoms=atoms, witness=None)


def test_distribution_witness_error_zero():
    cls = small_class([(0, 1), (1, 1)])
    d = RealizableDistribution(
        cls, atoms=((0, 0, Fraction(1, 4)), (1, 1, Fraction(3, 4))), witness=0
    )
    assert d.error_rate(cls.hypotheses[0]) == 0


def test_limit_realizable_schedule_checked():
    cls = small_class([(0, 1), (1, 1)])
    atoms = ((0, 0, Fraction(1, 2)), (0, 1, Fraction(1, 2)))
    with pytest.raises(UsageError):
        RealizableDistribution(
            cls, atoms=atoms, limit_realizable=True, witness_schedule=((0, Fraction(1, 4)),)
        )
    ok = RealizableDistribution(
        cls, atoms=atoms, limit_realizable=True, witness_schedule=((0, Fraction(1, 2)),)
    )
    assert ok.limit_realizable


def test_sample_iid_degenerate_cases():
    cls = full_class(1, 2)
    d = RealizableDistribution(cls, atoms=((0, 1, 1.0),), witness=1)
    assert sample_iid(d, 0, seed=1).pairs == ()
    assert sample_iid(d, 5, seed=1).pairs == ((0, 1),) * 5


def test_sample_iid_binomial_concentration():
    cls = full_class(2, 2)
    d = RealizableDistribution(
        cls,
        atoms=((0, 0, Fraction(1, 2)), (1, 0, Fraction(1, 2))),
        witness=0,
    )
    s = sample_iid(d, 100_000, seed=7)
    freq = sum(1 for p, _ in s.pairs if p == 0) / len(s)
    assert abs(freq - 0.5) < 0.02


def test_sample_iid_deterministic():
    cls = full_class(2, 2)
    d = RealizableDistribution(
        cls, atoms=((0, 0, 0.5), (1, 0, 0.5)), witness=0
    )
    assert sample_iid(d, 50, seed=3).pairs == sample_iid(d, 50, seed=3).pairs


def test_json_roundtrips():
    cls = FiniteClass(
        2, 3, ((0, 1), (2, 2)), point_names=("a", "b"), label_names=("x", "y", "z")
    )
    back = FiniteClass.from_json(cls.to_json())
    assert back == cls
    d = RealizableDistribution(cls, atoms=((0, 0, 0.25), (1, 1, 0.75)), witness=0)
    back_d = RealizableDistribution.from_json(d.to_json(), cls)
    assert back_d.atoms == d.atoms and back_d.witness == 0


def test_sample_csv_roundtrip():
    s = LabeledSample(((0, 1), (3, 2)))
    assert LabeledSample.from_csv(s.to_csv()) == s


def test_nondegeneracy_flag():
    assert full_class(2, 2).is_nondegenerate()
    # all hypotheses disagree everywhere: degenerate
    assert not FiniteClass(2, 2, ((0, 0), (1, 1))).is_nondegenerate()
    assert not FiniteClass(1, 2, ((0,), (1,))).is_nondegenerate()
