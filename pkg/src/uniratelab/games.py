"""Game engines over finite classes: the online game, the Littlestone game,
the pseudo-cube game, the value-guided learner, and pattern avoidance.

Game values are integers: -1 when the learner side has already won, otherwise
the maximum number of further rounds the adversary can force.  On finite
classes this equals the remaining tree depth of the current version space,
computed by backward induction.

A pseudo-cube-game position in which some reply fell outside its round's cube
can never be won by the learner through the emptiness rule again; from such a
position the value is the number of remaining rounds that still admit a valid
(tuple, cube) move, which is ds-dimension minus rounds played.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .classes import (
    DomainError,
    FiniteClass,
    LabeledSample,
    Pattern,
    Projection,
    UsageError,
    project,
    restrict,
)
from .dimensions import ds_dim
from .pseudocube import default_cap, enumerate_pseudo_cubes, is_pseudo_cube, peel

XYPair = tuple[int, int]


# ---------------------------------------------------------------------------
# The Littlestone game and the value-guided online learner


class LittlestoneGame:
    """Backward-induction values for the binary-choice game and its online form.

    Positions are reduced to the (point, label) history; the value only
    depends on the induced version space.
    """

    def __init__(self, cls: FiniteClass):
        self.cls = cls
        self._memo: dict[frozenset[int], int] = {}
        self._root = frozenset(range(len(cls.hypotheses)))

    def _indices(self, pairs) -> frozenset[int]:
        hyps = self.cls.hypotheses
        return frozenset(
            i for i in self._root if all(hyps[i][p] == y for p, y in pairs)
        )

    def _value(self, indices: frozenset[int]) -> int:
        if not indices:
            return -1
        if indices in self._memo:
            return self._memo[indices]
        hyps = self.cls.hypotheses
        best = -1
        for x in range(self.cls.domain_size):
            by_label: dict[int, list[int]] = {}
            for i in indices:
                by_label.setdefault(hyps[i][x], []).append(i)
            # adversary may name labels outside the version space; those
            # branches have value -1 and never help, so realized labels suffice
            labels = sorted(by_label)
            for a, y0 in enumerate(labels):
                for y1 in labels[a + 1:]:
                    m = min(
                        self._value(frozenset(by_label[y0])),
                        self._value(frozenset(by_label[y1])),
                    )
                    if m > best:
                        best = m
        val = 1 + best
        self._memo[indices] = val
        return val

    def val(self, pairs=()) -> int:
        """Game value of the position given by a (point, label) history."""
        return self._value(self._indices(tuple(pairs)))

    def g(self, pairs, x: int) -> int:
        """Smallest label that keeps the value from dropping; 0 on fallback."""
        base = min(self.val(pairs), self.val(()))
        pairs = tuple(pairs)
        for y in range(self.cls.labels):
            if self.val(pairs + ((x, y),)) >= base:
                return y
        return 0


@dataclass(frozen=True)
class OnlineState:
    """Mistake-driven learner state: the committed (point, label) history."""

    committed: tuple[XYPair, ...] = ()


def online_predict(game: LittlestoneGame, state: OnlineState, x: int) -> int:
    return game.g(state.committed, x)


def online_update(game: LittlestoneGame, state: OnlineState, x: int, y: int):
    """(prediction, new state); the state changes only when the prediction errs."""
    pred = online_predict(game, state, x)
    if pred != y:
        return pred, OnlineState(state.committed + ((x, y),))
    return pred, state


def run_online(cls: FiniteClass, sample: LabeledSample):
    """Feed the sample through the value-guided strategy.

    Returns (mistake count, transcript); the sample must be consistent with
    the class, checked prefix by prefix.
    """
    game = LittlestoneGame(cls)
    state = OnlineState()
    mistakes = 0
    transcript = []
    for t, (x, y) in enumerate(sample.pairs, start=1):
        if restrict(cls, sample.pairs[:t]).is_empty():
            raise DomainError(f"sample inconsistent with class at prefix length {t}")
        pred, state = online_update(game, state, x, y)
        wrong = pred != y
        mistakes += wrong
        transcript.append({"t": t, "x": x, "y": y, "prediction": pred, "mistake": wrong})
    return mistakes, transcript, state


# ---------------------------------------------------------------------------
# The pseudo-cube game


@dataclass(frozen=True)
class DslRound:
    points: tuple[int, ...]
    cube: frozenset[Pattern]
    labels: Pattern


@dataclass(frozen=True)
class DslPosition:
    rounds: tuple[DslRound, ...] = ()

    def __len__(self):
        return len(self.rounds)

    def extended(self, points, cube, labels) -> "DslPosition":
        return DslPosition(
            self.rounds + (DslRound(tuple(points), frozenset(cube), tuple(labels)),)
        )


class DslGame:
    """Backward-induction engine for the pseudo-cube game on a finite class."""

    def __init__(self, cls: FiniteClass, cap: int | None = None):
        self.cls = cls
        self.cap = default_cap() if cap is None else cap
        self._root = frozenset(range(len(cls.hypotheses)))
        self._depth_memo: dict[tuple[frozenset[int], int], int] = {}
        self._stall_limit = ds_dim(cls)

    # -- backward induction ------------------------------------------------

    def _depth(self, indices: frozenset[int], level: int) -> int:
        """Max further rounds from a clean position with this version space."""
        key = (indices, level)
        if key in self._depth_memo:
            return self._depth_memo[key]
        hyps = self.cls.hypotheses
        best = 0
        arity = level + 1
        if indices and arity <= self.cls.domain_size:
            for pts in itertools.combinations(range(self.cls.domain_size), arity):
                children: dict[Pattern, list[int]] = {}
                for i in indices:
                    children.setdefault(tuple(hyps[i][p] for p in pts), []).append(i)
                if len(children) < 2:
                    continue
                depths = {
                    pat: self._depth(frozenset(idx), level + 1)
                    for pat, idx in children.items()
                }
                # a cube whose children all reach depth >= v exists iff the
                # peeled core of the v-filtered pattern set is non-empty
                for v in sorted(set(depths.values()), reverse=True):
                    if 1 + v <= best:
                        break
                    filtered = {pat for pat, dv in depths.items() if dv >= v}
                    if peel(filtered, arity):
                        best = 1 + v
                        break
        self._depth_memo[key] = best
        return best

    def _stall_value(self, rounds_played: int) -> int:
        return max(self._stall_limit - rounds_played, 0)

    # -- position values ---------------------------------------------------

    def _classify(self, position: DslPosition):
        """Walk the rounds; returns ('won', None) | ('broken', None) |
        ('clean', surviving index set)."""
        indices = self._root
        hyps = self.cls.hypotheses
        broken = False
        for s, rnd in enumerate(position.rounds, start=1):
            if len(rnd.points) != s or len(rnd.labels) != s:
                raise UsageError(f"round {s} tuples must have length {s}")
            proj = {tuple(h[p] for p in rnd.points) for h in hyps}
            if not rnd.cube <= proj or not is_pseudo_cube(rnd.cube, s):
                return "won", None  # invalid cube forfeits immediately
            indices = frozenset(
                i
                for i in indices
                if all(hyps[i][p] == y for p, y in zip(rnd.points, rnd.labels))
            )
            if rnd.labels not in rnd.cube:
                broken = True
            if not broken and not indices:
                return "won", None
        if broken:
            return "broken", None
        return "clean", indices

    def val(self, position: DslPosition = DslPosition()) -> int:
        kind, indices = self._classify(position)
        if kind == "won":
            return -1
        if kind == "broken":
            return self._stall_value(len(position))
        return self._depth(indices, len(position))

    # -- pattern avoidance ---------------------------------------------------

    def eta(self, position: DslPosition, points, cube, labels) -> int:
        """1 iff appending the round drops the value below min(val(v), val(empty))."""
        threshold = min(self.val(position), self.val(DslPosition()))
        after = self.val(position.extended(points, cube, labels))
        return 1 if after < threshold else 0


@dataclass(frozen=True)
class AvoidanceState:
    """Committed value-decreasing rounds plus the sliding window."""

    committed: DslPosition = field(default_factory=DslPosition)
    window: tuple[XYPair, ...] = ()

    @property
    def tau(self) -> int:
        return len(self.committed) + 1


def avoidance_step(
    state: AvoidanceState, x: int, y: int, cls: FiniteClass, game: DslGame | None = None
) -> AvoidanceState:
    """One step of the online pattern-avoidance procedure.

    Slides the window, then scans the pseudo-cubes of the window projection in
    canonical order; the first value-decreasing (cube, window labels) round is
    committed and the pattern length grows by one.
    """
    game = DslGame(cls) if game is None else game
    tau = state.tau
    window = (state.window + ((x, y),))[-tau:]
    wx = tuple(p for p, _ in window)
    wy = tuple(v for _, v in window)
    committed = state.committed
    if len(set(wx)) == len(wx):  # repeated points admit no pseudo-cube
        for cube in enumerate_pseudo_cubes(project(cls, wx), cap=game.cap):
            if game.eta(committed, wx, cube.patterns, wy) == 1:
                committed = committed.extended(wx, cube.patterns, wy)
                break
    return AvoidanceState(committed=committed, window=window)


def avoidance_query(
    state: AvoidanceState, points, cls: FiniteClass, game: DslGame | None = None
) -> frozenset[Pattern]:
    """The avoided-pattern set at the current pattern length.

    Patterns in the result would decrease the game value if committed next.
    """
    game = DslGame(cls) if game is None else game
    pts = tuple(points)
    if len(pts) != state.tau:
        raise UsageError(f"query tuple length {len(pts)} != current pattern length {state.tau}")
    if len(set(pts)) != len(pts):
        return frozenset()
    avoided = set()
    for cube in enumerate_pseudo_cubes(project(cls, pts), cap=game.cap):
        for labels in cube.patterns:
            if labels in avoided:
                continue
            if game.eta(state.committed, pts, cube.patterns, labels) == 1:
                avoided.add(labels)
    return frozenset(avoided)


def run_avoidance(cls: FiniteClass, sample: LabeledSample, game: DslGame | None = None):
    """Run the procedure over a stream; returns (final state, tau trace, commit times)."""
    game = DslGame(cls) if game is None else game
    state = AvoidanceState()
    taus = []
    commits = []
    for t, (x, y) in enumerate(sample.pairs, start=1):
        new_state = avoidance_step(state, x, y, cls, game)
        if new_state.tau > state.tau:
            commits.append(t)
        state = new_state
        taus.append(state.tau)
    return state, taus, commits
