"""Monte Carlo learning curves, rate-class fitting, and the trichotomy harness.

Every trial derives its seed from (seed, n, rep), so curves are reproducible
bit for bit regardless of execution order; each trial draws a fresh training
sample and a single fresh test point, and the replications carry all the
averaging.
"""

from __future__ import annotations

import io
import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .classes import FiniteClass, LabeledSample, RealizableDistribution, UsageError
from .games import DslGame, LittlestoneGame

DEFAULT_GRID = (8, 16, 32, 64, 128, 256, 512)


@dataclass
class LearningCurve:
    ns: tuple[int, ...]
    means: tuple[float, ...]
    stderrs: tuple[float, ...]
    reps: int
    seed: int
    failures: int = 0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["n", "mean_error", "stderr", "reps"])
        for n, m, s in zip(self.ns, self.means, self.stderrs):
            w.writerow([n, f"{m:.8f}", f"{s:.8f}", self.reps])
        return buf.getvalue()


@dataclass
class RateFit:
    kind: str  # exponential | polynomial | unclassified-slow | all-zero
    c: float | None = None
    alpha: float | None = None
    amplitude: float | None = None
    r2_exp: float | None = None
    r2_poly: float | None = None
    low_confidence: bool = False

    def to_json(self) -> str:
        return json.dumps(self.__dict__)


def _trial_seed(seed: int, n: int, rep: int) -> int:
    return int(np.random.SeedSequence(entropy=seed, spawn_key=(n, rep)).generate_state(1)[0])


def _run_trial(cls, dist, learner, n, trial_seed):
    rng = np.random.default_rng(trial_seed)
    weights = dist.weights_array()
    idx = rng.choice(len(dist.atoms), size=n + 1, p=weights) if n + 1 else []
    pairs = tuple((dist.atoms[i][0], dist.atoms[i][1]) for i in idx)
    sample = LabeledSample(pairs[:n])
    test_x, test_y = pairs[n]
    rule = learner(cls, dist, sample, trial_seed)
    return float(rule(test_x) != test_y)


def estimate_curve(
    cls: FiniteClass,
    dist: RealizableDistribution,
    learner,
    grid=DEFAULT_GRID,
    reps: int = 200,
    seed: int = 0,
    threads: int = 1,
) -> LearningCurve:
    """Mean test error per sample size; learner failures are recorded per trial.

    `learner(cls, dist, sample, seed)` must return a point -> label rule.
    """
    if reps < 1:
        raise UsageError("reps must be >= 1")
    means, stderrs = [], []
    failures = 0
    tasks = [(n, rep) for n in grid for rep in range(reps)]
    results: dict[tuple[int, int], float] = {}
    if threads > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=threads) as ex:
            futs = {
                (n, rep): ex.submit(_run_trial, cls, dist, learner, n, _trial_seed(seed, n, rep))
                for n, rep in tasks
            }
            for key, fut in futs.items():
                results[key] = fut.result()
    else:
        for n, rep in tasks:
            try:
                results[(n, rep)] = _run_trial(cls, dist, learner, n, _trial_seed(seed, n, rep))
            except Exception:
                failures += 1
                results[(n, rep)] = float("nan")
    for n in grid:
        errs = np.asarray([results[(n, rep)] for rep in range(reps)])
        errs = errs[~np.isnan(errs)]
        if len(errs) == 0:
            means.append(float("nan"))
            stderrs.append(float("nan"))
            continue
        means.append(float(errs.mean()))
        std = float(errs.std(ddof=1)) if len(errs) > 1 else 0.0
        stderrs.append(std / math.sqrt(len(errs)))
    return LearningCurve(
        ns=tuple(grid),
        means=tuple(means),
        stderrs=tuple(stderrs),
        reps=reps,
        seed=seed,
        failures=failures,
    )


# ---------------------------------------------------------------------------
# Rate fitting


def _linfit(xs: np.ndarray, ys: np.ndarray):
    """Least squares y ~ a + b x; returns (a, b, R^2)."""
    A = np.vstack([np.ones_like(xs), xs]).T
    coef, *_ = np.linalg.lstsq(A, ys, rcond=None)
    pred = A @ coef
    ss_res = float(((ys - pred) ** 2).sum())
    ss_tot = float(((ys - ys.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(coef[0]), float(coef[1]), r2


def fit_rate(curve: LearningCurve, r2_threshold: float = 0.9) -> RateFit:
    """Classify the curve as exponential, polynomial, or unclassified-slow.

    Log errors are floored at 1/(2 reps) before fitting; the better-R^2 model
    is declared when it clears the threshold with a positive rate parameter.
    """
    floor = 1.0 / (2 * curve.reps)
    ns = np.asarray(curve.ns, dtype=float)
    means = np.asarray(curve.means, dtype=float)
    ok = ~np.isnan(means)
    ns, means = ns[ok], means[ok]
    if len(ns) == 0:
        raise UsageError("empty curve")
    if (means <= 0).all() or (means <= floor).all():
        return RateFit(kind="all-zero", low_confidence=curve.reps == 1)
    if (means > floor).sum() < 4:
        raise UsageError("need at least 4 grid points above the floor to fit")
    logs = np.log(np.maximum(means, floor))
    a_e, b_e, r2_e = _linfit(ns, logs)
    a_p, b_p, r2_p = _linfit(np.log(ns), logs)
    c, alpha = -b_e, -b_p
    fit = RateFit(
        r2_exp=r2_e,
        r2_poly=r2_p,
        low_confidence=curve.reps == 1,
        kind="unclassified-slow",
    )
    if r2_e >= r2_p:
        if r2_e >= r2_threshold and c > 0:
            fit.kind, fit.c, fit.amplitude = "exponential", c, math.exp(a_e)
    else:
        if r2_p >= r2_threshold and alpha > 0:
            fit.kind, fit.alpha, fit.amplitude = "polynomial", alpha, math.exp(a_p)
    if fit.kind == "unclassified-slow":
        fit.c, fit.alpha = c, alpha
    return fit


def n_to_reach(curve: LearningCurve, eps: float = 0.1):
    """Smallest grid n whose mean error is <= eps, or None."""
    for n, m in zip(curve.ns, curve.means):
        if not math.isnan(m) and m <= eps:
            return n
    return None


def spearman_trend(curve: LearningCurve) -> float:
    from scipy.stats import spearmanr

    rho = spearmanr(curve.ns, curve.means).statistic
    return float(rho)


# ---------------------------------------------------------------------------
# Builtin learner adapters (cls, dist, sample, seed) -> rule


def erm_learner(cls: FiniteClass, dist, sample: LabeledSample, seed: int):
    """Canonical-first consistent hypothesis; falls back to the first one."""
    order = sorted(range(len(cls.hypotheses)), key=lambda i: cls.hypotheses[i])
    mat = cls.matrix()
    xs = np.asarray(sample.points(), dtype=np.int64)
    ys = np.asarray(sample.labels(), dtype=np.int64)
    if len(xs):
        cons = (mat[:, xs] == ys).all(axis=1)
    else:
        cons = np.ones(len(cls.hypotheses), dtype=bool)
    pick = next((i for i in order if cons[i]), order[0])
    h = cls.hypotheses[pick]
    return lambda x: h[x]


class _ExpLearnerFactory:
    """Shares one game-value memo across all trials of a curve."""

    def __init__(self):
        self._games: dict[int, LittlestoneGame] = {}

    def __call__(self, cls, dist, sample, seed):
        from .learners import exp_rate_learner

        game = self._games.get(id(cls))
        if game is None:
            game = LittlestoneGame(cls)
            self._games[id(cls)] = game
        return exp_rate_learner(cls, sample, game)


class _NearLinearFactory:
    """Shares one pseudo-cube game engine across trials; exact per-rate mode."""

    def __init__(self, use_dist: bool = True):
        self._games: dict[int, DslGame] = {}
        self.use_dist = use_dist

    def __call__(self, cls, dist, sample, seed):
        from .learners import near_linear_learner

        game = self._games.get(id(cls))
        if game is None:
            game = DslGame(cls)
            self._games[id(cls)] = game
        return near_linear_learner(
            cls,
            sample,
            dist=dist if self.use_dist else None,
            seed=seed,
            game=game,
        )


def make_learner(name: str):
    if name == "erm":
        return erm_learner
    if name == "exp":
        return _ExpLearnerFactory()
    if name == "near-linear":
        return _NearLinearFactory()
    if name == "near-linear-empirical":
        return _NearLinearFactory(use_dist=False)
    raise UsageError(f"unknown learner {name!r}; expected erm|exp|near-linear")


# ---------------------------------------------------------------------------
# Trichotomy harness


@dataclass
class TrichotomyReport:
    fits: dict
    n_eps: dict
    curves: dict
    ordering_ok: bool
    degenerate: bool = False
    eps: float = 0.1

    def summary(self) -> str:
        lines = []
        for name in ("exponential", "near-linear", "slow"):
            fit = self.fits[name]
            n_eps = self.n_eps[name]
            lines.append(
                f"{name:12s} fit={fit.kind:18s} n_to_reach_{self.eps}={n_eps}"
            )
        lines.append(f"ordering exp < poly < slow: {'yes' if self.ordering_ok else 'NO'}")
        if self.degenerate:
            lines.append("WARNING: at least one curve is degenerate (identically ~0)")
        return "\n".join(lines)


def canonical_experiments(seed: int = 20240601):
    """The three pinned trichotomy configurations."""
    from .constructions import (
        dsl_branch_distribution,
        make_counterexample_class,
        make_lattice_linear_class,
        make_schedule,
    )

    # exponential: monotone lattice class, exponential-rate learner
    lattice = make_lattice_linear_class(
        d=1, K=3, weight_values=(0, 1, 2), bias_values=(1, 3, 5), box_side=8
    )
    witness = max(range(len(lattice.hypotheses)), key=lambda i: lattice.hypotheses[i])
    atoms = []
    weights = [16, 8, 4, 2, 1, 1]
    pts = [0, 2, 3, 4, 6, 7]
    total = sum(weights)
    from fractions import Fraction

    for p, w in zip(pts, weights):
        atoms.append((p, lattice.hypotheses[witness][p], Fraction(w, total)))
    exp_dist = RealizableDistribution(base=lattice, atoms=tuple(atoms), witness=witness)

    # near-linear: threshold-style class, pattern-avoidance majority vote
    n_pts = 12
    thresh_hyps = tuple(
        tuple(1 if x >= t else 0 for x in range(n_pts)) for t in range(n_pts + 1)
    )
    threshold = FiniteClass(domain_size=n_pts, labels=2, hypotheses=thresh_hyps)
    t_star = 5
    h_star = tuple(1 if x >= t_star else 0 for x in range(n_pts))
    w = Fraction(1, n_pts)
    thr_atoms = tuple((x, h_star[x], w) for x in range(n_pts))
    thr_dist = RealizableDistribution(
        base=threshold, atoms=thr_atoms, witness=thresh_hyps.index(h_star)
    )

    # slow: star-padded deep-cube class, branch distribution, plain ERM
    cex = make_counterexample_class(3)
    sched = make_schedule(lambda n: 1.0 / math.log(n + 1.0), depth_cap=12)
    slow_dist = dsl_branch_distribution(cex.fclass, cex.tree, (0, 0, 0), sched)

    return {
        "exponential": (lattice, exp_dist, make_learner("exp")),
        "near-linear": (threshold, thr_dist, make_learner("near-linear")),
        "slow": (cex.fclass, slow_dist, make_learner("erm")),
    }


def trichotomy_report(
    experiments=None,
    grid=DEFAULT_GRID,
    reps: int = 2000,
    seed: int = 20240601,
    eps: float = 0.1,
) -> TrichotomyReport:
    """Run the three canonical experiments and classify their curves."""
    experiments = canonical_experiments(seed) if experiments is None else experiments
    curves, fits, n_eps = {}, {}, {}
    for name, (cls, dist, learner) in experiments.items():
        curve = estimate_curve(cls, dist, learner, grid=grid, reps=reps, seed=seed)
        curves[name] = curve
        fits[name] = fit_rate(curve)
        n_eps[name] = n_to_reach(curve, eps)
    degenerate = any(f.kind == "all-zero" for f in fits.values())
    big = max(grid) * 64

    def rank(v):
        return big if v is None else v

    ordering_ok = (
        rank(n_eps["exponential"]) < rank(n_eps["near-linear"]) < rank(n_eps["slow"])
    )
    return TrichotomyReport(
        fits=fits, n_eps=n_eps, curves=curves, ordering_ok=ordering_ok, degenerate=degenerate, eps=eps
    )
