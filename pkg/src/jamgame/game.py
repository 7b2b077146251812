"""Stage game machinery: conditional payoffs, control set, reduction.

A game instance bundles the plant map ``x_next = F(x, v)``, the stage cost
``payoff(y, u, j)`` for landing at ``y`` with control ``u`` while channel j
was selected, the channel family, the observed link state, and the current
plant state. Because the plant input is ``v = b * u`` with a Bernoulli link
bit, the payoff the jammer collects when it selects channel j is

    h_j(u) = q_j * payoff(F(x, u), u, j) + (1 - q_j) * payoff(F(x, 0), u, j)

with ``q_j`` evaluated at the observed prior states. Everything downstream
(control-set bracketing, channel ranking, the two-channel reduction, and
strategy lifting) works with these curves.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .channel import ChannelSet, JammerPolicy, LinkState
from .errors import (
    CoercivityError,
    ConnectednessError,
    ContractViolationError,
    RankingError,
)


@dataclass(frozen=True)
class SolverConfig:
    """Numeric knobs for the solve pipeline.

    margin            headroom added to max_j h_j(0) when bracketing the
                      control sublevel set
    scan_points       grid density for the connectedness audit and the
                      indifference-point sign scan
    ranking_points    grid density for the channel-ranking check
    control_bisect_tol  bisection tolerance for sublevel-set endpoints
    root_tol          bisection tolerance for indifference points
    grad_tol          derivative threshold separating the flat-tangency
                      branch from a genuine sign condition
    search_inflation  fractional widening of the control interval before
                      the indifference-point scan
    scan_limit        coercivity bail-out: |u| beyond which a payoff that
                      still has not exceeded the threshold is reported as
                      non-coercive
    eq_tol            relative tolerance for treating two payoff values as
                      equal (tangency candidates, crossing residuals)
    """

    margin: float = 1.0
    scan_points: int = 10_000
    ranking_points: int = 1001
    control_bisect_tol: float = 1e-9
    root_tol: float = 1e-10
    grad_tol: float = 1e-7
    search_inflation: float = 0.05
    scan_limit: float = 1e6
    eq_tol: float = 1e-8


DEFAULT_CONFIG = SolverConfig()

FD_STEP = 1e-6  # central-difference step scale, h = FD_STEP * (1 + |u|)


@dataclass(frozen=True)
class ControlInterval:
    """Closed bounded interval of admissible controls."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)):
            raise ContractViolationError("interval endpoints must be finite")
        if self.lo > self.hi:
            raise ContractViolationError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, u: float, slack: float = 0.0) -> bool:
        return self.lo - slack <= u <= self.hi + slack

    def inflate(self, fraction: float) -> "ControlInterval":
        pad = fraction * self.width
        return ControlInterval(self.lo - pad, self.hi + pad)

    def grid(self, points: int) -> np.ndarray:
        if points < 2:
            raise ContractViolationError("grid needs at least 2 points")
        return np.linspace(self.lo, self.hi, points)

    def hull(self, other: "ControlInterval") -> "ControlInterval":
        return ControlInterval(min(self.lo, other.lo), max(self.hi, other.hi))


@dataclass(frozen=True, eq=False)
class GameInstance:
    """Immutable bundle of everything needed to evaluate the stage payoffs.

    ``dynamics(x, v)`` and ``payoff(y, u, j)`` must be total on finite
    inputs (j is 1-based). The optional derivative hooks enable exact
    payoff-curve slopes: ``payoff_du`` is the partial derivative of the
    stage cost in u at fixed landing state, ``payoff_dy`` its gradient in
    the landing state, and ``dynamics_dv`` the input direction of the
    plant map; when any hook is missing, central differences are used.
    ``h_vectorized(u, j)``, when provided, is a fast closed-form route to
    h_j used by grid scans (it must accept scalar or array controls and
    agree with the generic decomposition; tests enforce 1e-10 relative).
    ``control_hint`` carries an exact control set when one is known in
    closed form.
    """

    dynamics: Callable[[np.ndarray, float], np.ndarray]
    payoff: Callable[[np.ndarray, float, int], float]
    channels: ChannelSet
    link: LinkState
    x: np.ndarray
    payoff_du: Optional[Callable[[np.ndarray, float, int], float]] = None
    payoff_dy: Optional[Callable[[np.ndarray, float, int], np.ndarray]] = None
    dynamics_dv: Optional[Callable[[np.ndarray, float], np.ndarray]] = None
    h_vectorized: Optional[Callable[[np.ndarray, int], np.ndarray]] = None
    control_hint: Optional[ControlInterval] = None

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, dtype=float)).copy()
        x.flags.writeable = False
        object.__setattr__(self, "x", x)
        if self.link.n != self.channels.n:
            raise ContractViolationError(
                f"link tracks {self.link.n} channels but the set has {self.channels.n}"
            )

    @property
    def n(self) -> int:
        return self.channels.n

    @property
    def q_vector(self) -> np.ndarray:
        return self.channels.q_at(self.link.c_minus)

    def _check_channel(self, j: int):
        if not 1 <= j <= self.n:
            raise ContractViolationError(f"channel index {j} outside 1..{self.n}")


def conditional_payoff(game: GameInstance, u: float, j: int) -> float:
    """Expected stage cost given that the jammer selected channel j.

    Always evaluated through the generic two-branch decomposition (link
    passing vs blocking); the closed-form fast path, when a game carries
    one, is deliberately not consulted here so the two routes stay
    independently checkable.
    """
    game._check_channel(j)
    u = float(u)
    qj = float(game.q_vector[j - 1])
    passing = game.payoff(game.dynamics(game.x, u), u, j)
    blocked = game.payoff(game.dynamics(game.x, 0.0), u, j)
    return qj * passing + (1.0 - qj) * blocked


def conditional_payoff_batch(game: GameInstance, u_grid: np.ndarray, j: int) -> np.ndarray:
    """h_j on a grid of controls; uses the vectorized fast path if present."""
    game._check_channel(j)
    u_grid = np.asarray(u_grid, dtype=float)
    if game.h_vectorized is not None:
        return np.asarray(game.h_vectorized(u_grid, j), dtype=float)
    qj = float(game.q_vector[j - 1])
    y0 = game.dynamics(game.x, 0.0)
    out = np.empty(u_grid.shape, dtype=float)
    flat = u_grid.ravel()
    res = out.ravel()
    for i, u in enumerate(flat.tolist()):
        res[i] = qj * game.payoff(game.dynamics(game.x, u), u, j) \
            + (1.0 - qj) * game.payoff(y0, u, j)
    return out


def conditional_payoff_du(game: GameInstance, u: float, j: int) -> float:
    """Derivative of h_j in u: exact chain rule when all hooks are wired,
    otherwise a central difference with step scaled to |u|."""
    game._check_channel(j)
    u = float(u)
    if game.payoff_du is not None and game.payoff_dy is not None and game.dynamics_dv is not None:
        qj = float(game.q_vector[j - 1])
        y1 = game.dynamics(game.x, u)
        y0 = game.dynamics(game.x, 0.0)
        through_plant = float(np.dot(np.atleast_1d(game.payoff_dy(y1, u, j)),
                                     np.atleast_1d(game.dynamics_dv(game.x, u))))
        return qj * (through_plant + game.payoff_du(y1, u, j)) \
            + (1.0 - qj) * game.payoff_du(y0, u, j)
    step = FD_STEP * (1.0 + abs(u))
    return (conditional_payoff(game, u + step, j)
            - conditional_payoff(game, u - step, j)) / (2.0 * step)


def max_payoff_batch(game: GameInstance, u_grid: np.ndarray) -> np.ndarray:
    """max_j h_j on a grid (all channels, current one included)."""
    stacked = np.stack([conditional_payoff_batch(game, u_grid, j)
                        for j in range(1, game.n + 1)])
    return stacked.max(axis=0)


def expected_payoff(game: GameInstance, u: float, policy: JammerPolicy) -> float:
    """Stage cost averaged over the jammer's channel selection."""
    if policy.n != game.n:
        raise ContractViolationError(
            f"policy has {policy.n} entries for a {game.n}-channel game")
    return float(sum(policy.p[j - 1] * conditional_payoff(game, u, j)
                     for j in range(1, game.n + 1)))


def _scalar_h(game: GameInstance, u: float, j: int) -> float:
    if game.h_vectorized is not None:
        return float(game.h_vectorized(u, j))
    return conditional_payoff(game, u, j)


def _bracket_sublevel(game, j, alpha, side, config):
    """Walk outward from 0 in doubling steps until h_j exceeds alpha, then
    bisect the boundary. Returns the outside endpoint (rounded outward)."""
    step = 1.0
    inside = 0.0
    while True:
        u = side * step
        if _scalar_h(game, u, j) > alpha:
            outside = u
            break
        inside = u
        step *= 2.0
        if step > config.scan_limit:
            raise CoercivityError(
                f"h_{j} stayed below {alpha!r} out to |u| = {config.scan_limit:g}; "
                "the payoff does not look coercive in u")
    while abs(outside - inside) > config.control_bisect_tol:
        mid = 0.5 * (inside + outside)
        if _scalar_h(game, mid, j) > alpha:
            outside = mid
        else:
            inside = mid
    return outside


def compute_control_set(game: GameInstance, margin: float = 1.0,
                        config: SolverConfig | None = None) -> ControlInterval:
    """Bracket the compact control set.

    The threshold is alpha = max_j h_j(0) + margin; u = 0 is always inside
    since every payoff is finite there. Each channel's sublevel set
    {u : h_j(u) <= alpha} is bracketed by an outward doubling scan plus
    bisection, and the hull of all of them is returned, so the result
    contains {u : max_j h_j(u) <= alpha}, every minimizer of max_j h_j,
    and every h_j's own minimizer. A grid audit then rejects sublevel sets
    that are visibly not an interval.
    """
    if margin <= 0:
        raise ContractViolationError("margin must be positive")
    cfg = config or DEFAULT_CONFIG
    alpha = max(_scalar_h(game, 0.0, j) for j in range(1, game.n + 1)) + margin
    lo = min(_bracket_sublevel(game, j, alpha, -1.0, cfg) for j in range(1, game.n + 1))
    hi = max(_bracket_sublevel(game, j, alpha, +1.0, cfg) for j in range(1, game.n + 1))
    interval = ControlInterval(lo, hi)

    inside = max_payoff_batch(game, interval.grid(cfg.scan_points)) <= alpha
    transitions = int(np.count_nonzero(inside[:-1] != inside[1:]))
    if transitions > 2:
        raise ConnectednessError(
            f"the sublevel set below alpha = {alpha!r} splits into multiple "
            f"intervals ({transitions} boundary crossings on the audit grid)")
    return interval


@dataclass(frozen=True, eq=False)
class RankingReport:
    """Outcome of the channel-ordering check on a control interval."""

    ok: bool
    violation: tuple | None      # (u, j, k) with h_j(u) < h_k(u), 1-based
    grid_points: int
    worst_gap: float             # most negative h_j - h_k seen (0 when ok)

    def describe(self) -> str:
        if self.ok:
            return f"channel ranking holds on {self.grid_points} grid points"
        u, j, k = self.violation
        return (f"channel ranking violated at u = {u!r}: "
                f"h_{j} < h_{k} by {-self.worst_gap!r}")


def check_ranking(game: GameInstance, interval: ControlInterval,
                  grid_points: int) -> RankingReport:
    """Check that lower-numbered channels never pay the jammer less than
    higher-numbered ones anywhere on the interval (the current channel is
    exempt from the ordering). Violations are reported, not raised."""
    if grid_points < 2:
        raise ContractViolationError("grid_points must be >= 2")
    others = [j for j in range(1, game.n + 1) if j != game.link.j_minus]
    if len(others) < 2:
        return RankingReport(True, None, grid_points, 0.0)

    grid = interval.grid(grid_points)
    curves = {j: conditional_payoff_batch(game, grid, j) for j in others}
    scale = 1.0 + max(float(np.abs(c).max()) for c in curves.values())
    tol = 1e-12 * scale

    worst = 0.0
    first = None
    pairs = [(a, b) for ai, a in enumerate(others) for b in others[ai + 1:]]
    diffs = np.stack([curves[a] - curves[b] for a, b in pairs])  # (pairs, grid)
    bad = diffs < -tol
    if bad.any():
        u_idx = int(np.argmax(bad.any(axis=0)))          # first offending control
        pair_idx = int(np.argmax(bad[:, u_idx]))         # first offending pair there
        a, b = pairs[pair_idx]
        first = (float(grid[u_idx]), a, b)
        worst = float(diffs.min())
    return RankingReport(first is None, first, grid_points, min(worst, 0.0))


def _vectorize_scalar(fn):
    def wrapped(u):
        arr = np.asarray(u, dtype=float)
        if arr.ndim == 0:
            return float(fn(float(arr)))
        return np.array([fn(v) for v in arr.ravel().tolist()]).reshape(arr.shape)
    return wrapped


@dataclass(frozen=True, eq=False)
class ReducedGame:
    """Two-channel view of the game: the payoff for switching to the
    designated blocking channel (h1) and for keeping the current one (h2),
    with their slopes, over the control interval. The callables accept
    scalars or arrays."""

    h1: Callable
    h2: Callable
    h1_du: Callable
    h2_du: Callable
    interval: ControlInterval
    blocking_index: int

    def gap(self, u):
        """h1 - h2, the curve whose roots are the indifference points."""
        return self.h1(u) - self.h2(u)

    def swapped(self) -> "ReducedGame":
        return ReducedGame(self.h2, self.h1, self.h2_du, self.h1_du,
                           self.interval, self.blocking_index)


def reduce_game(game: GameInstance, interval: ControlInterval,
                config: SolverConfig | None = None) -> ReducedGame:
    """Build the two-channel reduction after validating the ranking.

    The blocking channel is the lowest-numbered channel other than the
    current one (with the ranking verified, that is the most damaging
    switch available). Raises ``RankingError`` when the ordering fails.
    """
    cfg = config or DEFAULT_CONFIG
    report = check_ranking(game, interval, cfg.ranking_points)
    if not report.ok:
        u, j, k = report.violation
        raise RankingError(
            f"cannot reduce: channels {j} and {k} are ordered the wrong way "
            f"at u = {u!r} (h_{j} < h_{k})", violation=report.violation)

    j_minus = game.link.j_minus
    blocking = min(j for j in range(1, game.n + 1) if j != j_minus)

    def curve(j):
        def f(u):
            arr = np.asarray(u, dtype=float)
            if arr.ndim == 0:
                return _scalar_h(game, float(arr), j)
            return conditional_payoff_batch(game, arr, j)
        return f

    h1 = curve(blocking)
    h2 = curve(j_minus)
    h1_du = _vectorize_scalar(lambda u: conditional_payoff_du(game, u, blocking))
    h2_du = _vectorize_scalar(lambda u: conditional_payoff_du(game, u, j_minus))
    return ReducedGame(h1, h2, h1_du, h2_du, interval, blocking)


def lift_strategy(p_tilde, blocking_index: int, j_minus: int, n: int) -> JammerPolicy:
    """Embed a two-channel mixture back into the full n-channel simplex:
    mass p_tilde[0] on the blocking channel, p_tilde[1] on the current one."""
    p_tilde = np.asarray(p_tilde, dtype=float)
    if p_tilde.shape != (2,):
        raise ContractViolationError("p_tilde must be a 2-vector")
    if blocking_index == j_minus:
        raise ContractViolationError("blocking channel and current channel must differ")
    if not (1 <= blocking_index <= n and 1 <= j_minus <= n):
        raise ContractViolationError("channel indices outside 1..n")
    p = np.zeros(n)
    p[blocking_index - 1] = p_tilde[0]
    p[j_minus - 1] = p_tilde[1]
    return JammerPolicy(p)


def validate_payoff_derivative(game: GameInstance, interval: ControlInterval,
                               points: int = 100, seed: int = 0) -> float:
    """Worst mixed-tolerance mismatch between the supplied stage-cost
    derivative and central differences of the stage cost, sampled at
    random controls on the interval. Returns 0.0 when no hook is wired."""
    if game.payoff_du is None:
        return 0.0
    rng = np.random.default_rng(seed)
    span = interval.width or 1.0
    worst = 0.0
    for _ in range(points):
        u = float(rng.uniform(interval.lo - 0.1 * span, interval.hi + 0.1 * span))
        j = int(rng.integers(1, game.n + 1))
        y = game.dynamics(game.x, u)
        step = FD_STEP * (1.0 + abs(u))
        numeric = (game.payoff(y, u + step, j) - game.payoff(y, u - step, j)) / (2 * step)
        analytic = game.payoff_du(y, u, j)
        err = abs(analytic - numeric) / (1.0 + abs(analytic))
        worst = max(worst, err)
    return worst
