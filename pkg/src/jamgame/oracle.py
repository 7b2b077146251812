"""Brute-force verification: grid game values, saddle certification,
Monte Carlo payoff estimation.

The oracle is deliberately dumb. Upper and lower game values come from
exhaustive grids (the inner maximization over mixtures of an affine
function is taken at a vertex, which is exact), saddle certificates check
the defining inequalities pointwise, and the Monte Carlo estimate replays
the channel-switching mechanism sample by sample. Solver output is
accepted only when this machinery agrees with it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .channel import JammerPolicy, sample_steps
from .errors import ContractViolationError
from .game import ControlInterval, GameInstance, ReducedGame


@dataclass(frozen=True)
class GridSpec:
    """Grid densities for the discretized games."""

    interval: ControlInterval
    u_points: int = 2001
    p_points: int = 1001

    def __post_init__(self):
        if self.u_points < 3 or self.p_points < 3:
            raise ContractViolationError("grids need at least 3 points")

    def u_grid(self) -> np.ndarray:
        return self.interval.grid(self.u_points)

    def p_grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.p_points)

    def doubled(self) -> "GridSpec":
        return GridSpec(self.interval, 2 * self.u_points - 1, 2 * self.p_points - 1)


@dataclass(frozen=True, eq=False)
class OracleReport:
    """Discretized upper/lower values and their witnesses."""

    j1_hat: float
    j2_hat: float
    u_argmin: float
    p_argmax: np.ndarray
    gap: float

    def __post_init__(self):
        if self.gap < -1e-12:
            raise ContractViolationError(
                f"negative duality gap {self.gap!r}: grid values are inconsistent")


def grid_game_values(rg: ReducedGame, spec: GridSpec) -> OracleReport:
    """Upper value: sweep controls, price each against the worse channel
    choice (vertex of the mixture simplex). Lower value: sweep mixtures,
    let the controller pick the best grid response. Ties break to the
    first index."""
    ug = spec.u_grid()
    h1 = np.asarray(rg.h1(ug), dtype=float)
    h2 = np.asarray(rg.h2(ug), dtype=float)

    upper_curve = np.maximum(h1, h2)
    i = int(np.argmin(upper_curve))
    j1_hat = float(upper_curve[i])

    w = spec.p_grid()
    diff = h1 - h2
    inner = np.empty(w.shape[0])
    block = 128  # keep the (block, u_points) slab cache-resident
    for start in range(0, w.shape[0], block):
        chunk = w[start:start + block, None] * diff[None, :] + h2[None, :]
        inner[start:start + chunk.shape[0]] = chunk.min(axis=1)
    k = int(np.argmax(inner))
    j2_hat = float(inner[k])

    return OracleReport(
        j1_hat=j1_hat, j2_hat=j2_hat,
        u_argmin=float(ug[i]),
        p_argmax=np.array([float(w[k]), 1.0 - float(w[k])]),
        gap=j1_hat - j2_hat)


@dataclass(frozen=True, eq=False)
class SaddleCheck:
    """Pointwise audit of the saddle inequalities at (u_star, p_tilde)."""

    passed: bool
    value: float                  # p_tilde' h(u_star)
    controller_violation: float   # how far some control undercuts the value
    jammer_violation: float       # how far some mixture overshoots it
    worst_u: float
    worst_p: np.ndarray
    tol: float


def verify_saddle(rg: ReducedGame, u_star: float, p_tilde, spec: GridSpec,
                  tol: float) -> SaddleCheck:
    """Certify that no grid deviation beats (u_star, p_tilde) by more than
    tol: the controller must not find a cheaper control against the fixed
    mixture, and the jammer must not find a better mixture at the fixed
    control."""
    if tol <= 0:
        raise ContractViolationError("tol must be positive")
    p_tilde = np.asarray(p_tilde, dtype=float)
    if p_tilde.shape != (2,) or np.any(p_tilde < 0) or abs(p_tilde.sum() - 1.0) > 1e-9:
        raise ContractViolationError(f"p_tilde is not a 2-point distribution: {p_tilde}")

    h1s = float(rg.h1(u_star))
    h2s = float(rg.h2(u_star))
    value = float(p_tilde[0] * h1s + p_tilde[1] * h2s)

    ug = spec.u_grid()
    mixed = p_tilde[0] * np.asarray(rg.h1(ug), dtype=float) \
        + p_tilde[1] * np.asarray(rg.h2(ug), dtype=float)
    i = int(np.argmin(mixed))
    controller_violation = value - float(mixed[i])

    w = spec.p_grid()
    jam = w * h1s + (1.0 - w) * h2s
    k = int(np.argmax(jam))
    jammer_violation = float(jam[k]) - value

    return SaddleCheck(
        passed=(controller_violation <= tol and jammer_violation <= tol),
        value=value,
        controller_violation=controller_violation,
        jammer_violation=jammer_violation,
        worst_u=float(ug[i]),
        worst_p=np.array([float(w[k]), 1.0 - float(w[k])]),
        tol=tol)


class McResult(NamedTuple):
    mean: float
    half_width: float  # three sample standard errors


def run_monte_carlo(game: GameInstance, u: float, policy: JammerPolicy,
                    trials: int, seed: int) -> McResult:
    """Simulate the switching mechanism and average the realized payoffs.

    Each trial draws one channel switch; the realized cost depends only on
    the selected channel and the link bit, so the 2n possible costs are
    tabulated once and looked up per trial. Deterministic for a fixed seed.
    """
    if trials < 1:
        raise ContractViolationError("trials must be >= 1")
    u = float(u)
    n = game.n
    landing = {b: game.dynamics(game.x, b * u) for b in (0, 1)}
    cost = np.array([[game.payoff(landing[b], u, j) for b in (0, 1)]
                     for j in range(1, n + 1)])

    draws = sample_steps(game.channels, game.link, policy, trials, seed)
    realized = cost[draws.channels - 1, draws.passing]
    mean = float(realized.mean())
    if trials < 2:
        return McResult(mean, float("inf"))
    half = 3.0 * float(realized.std(ddof=1)) / float(np.sqrt(trials))
    return McResult(mean, half)
