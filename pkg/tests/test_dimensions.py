import itertools
import math

import numpy as np

from uniratelab import FiniteClass, full_class
from uniratelab.dimensions import (
    dim_report,
    ds_dim,
    ds_dim_direct,
    graph_dim,
    littlestone_dim,
    natarajan_dim,
)

SIZE6_CLASS = FiniteClass(2, 3, ((0, 0), (0, 1), (1, 1), (1, 2), (2, 0), (2, 2)))


def random_class(rng: np.random.Generator, max_points=5, max_labels=4, max_h=20):
    n = int(rng.integers(2, max_points + 1))
    k = int(rng.integers(2, max_labels + 1))
    limit = min(max_h, k**n)
    size = int(rng.integers(2, limit + 1)) if limit >= 2 else 1
    seen = set()
    while len(seen) < size:
        seen.add(tuple(int(v) for v in rng.integers(0, k, size=n)))
    return FiniteClass(n, k, tuple(sorted(seen)))


def threshold_class(n: int) -> FiniteClass:
    hyps = tuple(tuple(1 if x >= t else 0 for x in range(n)) for t in range(n + 1))
    return FiniteClass(n, 2, hyps)


# ---- examples ---------------------------------------------------------------


def test_full_class_dims():
    for d, k in ((1, 2), (2, 2), (2, 3), (3, 2)):
        cls = full_class(d, k)
        assert natarajan_dim(cls) == d
        assert graph_dim(cls) == d
        assert ds_dim(cls) == d
    assert littlestone_dim(full_class(2, 2)) == 2
    assert littlestone_dim(full_class(3, 2)) == 3


def test_singleton_dims_zero():
    cls = FiniteClass(3, 3, ((0, 1, 2),))
    assert natarajan_dim(cls) == 0
    assert graph_dim(cls) == 0
    assert ds_dim(cls) == 0
    assert littlestone_dim(cls) == 0


def test_size6_class_dims():
    # the size-6 non-product cube: itself a 2-dim pseudo-cube, but no 2x2 grid
    assert ds_dim(SIZE6_CLASS) == 2
    assert natarajan_dim(SIZE6_CLASS) == 1


def test_constant_class_graph_dim():
    for k in (2, 3):
        for n in (1, 2, 3):
            cls = FiniteClass(n, k, tuple((c,) * n for c in range(k)))
            assert graph_dim(cls) == 1


def test_threshold_littlestone_matches_log_formula():
    for n in range(1, 16):
        assert littlestone_dim(threshold_class(n)) == math.floor(math.log2(n + 1))


# ---- invariants over seeded random classes -----------------------------------


def test_dimension_chain_and_order_on_random_classes():
    rng = np.random.default_rng(12345)
    for _ in range(60):
        cls = random_class(rng)
        rep = dim_report(cls)
        assert rep.chain_holds(cls.labels), (cls, rep)
        assert rep.natarajan <= rep.ds
        assert rep.littlestone <= math.floor(math.log2(len(cls)))


def test_ds_two_routes_agree():
    rng = np.random.default_rng(999)
    for _ in range(40):
        cls = random_class(rng, max_points=4, max_labels=3, max_h=12)
        assert ds_dim(cls) == ds_dim_direct(cls)


def test_monotone_under_class_inclusion():
    rng = np.random.default_rng(77)
    for _ in range(20):
        cls = random_class(rng, max_points=4, max_labels=3, max_h=10)
        if len(cls) < 3:
            continue
        sub = FiniteClass(
            cls.domain_size, cls.labels, tuple(sorted(cls.hypotheses)[: len(cls) // 2 + 1])
        )
        assert natarajan_dim(sub) <= natarajan_dim(cls)
        assert graph_dim(sub) <= graph_dim(cls)
        assert ds_dim(sub) <= ds_dim(cls)
        assert littlestone_dim(sub) <= littlestone_dim(cls)


def test_witnesses_verify():
    cls = full_class(3, 2)
    rep = dim_report(cls, with_witnesses=True)
    pts, (f0, f1) = rep.witnesses["natarajan"]["points"], (
        rep.witnesses["natarajan"]["f0"],
        rep.witnesses["natarajan"]["f1"],
    )
    assert len(pts) == rep.natarajan
    assert all(a != b for a, b in zip(f0, f1))
    s = rep.witnesses["graph"]["reference"]
    assert len(s) == rep.graph
    assert rep.witnesses["ds"]["points"] == pts or len(rep.witnesses["ds"]["points"]) == rep.ds


def test_dim_report_json():
    rep = dim_report(full_class(2, 2))
    doc = rep.to_json()
    assert '"natarajan": 2' in doc and '"littlestone": 2' in doc
