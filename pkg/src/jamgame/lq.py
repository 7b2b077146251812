"""Linear-quadratic specialization with closed forms.

Plant: ``x_next = A x + b B u``. Stage cost: ``|x|^2 + u^2 + |x_next|^2``
plus a stealth reward ``tau`` collected by the jammer whenever its
selection keeps the current channel on the link. With constant passing
probabilities everything is available in closed form:

    h_j(u)    = gamma_j + u^2 + |B|^2 q_j u (u + 2 beta)
    gamma_j   = x'(I + A'A)x  (+ tau when j is the current channel)
    beta      = B'Ax / |B|^2

The admissible-control interval is {u : u (u + 2 beta) <= 0}. Writing
``z = tau |B|^2 / ((q_jm - q_1) (B'Ax)^2)``, the jammer's optimal policy is
strictly mixed exactly when

    1 - 1/(1 + |B|^2 q_1)^2  <  z  <  1 - 1/(1 + |B|^2 q_jm)^2,

and the optimal control there is ``u_star = -beta (1 - sqrt(1 - z))``, the
root of the indifference equation that sits strictly between the two
payoff-curve minimizers.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .channel import ChannelSet, LinkState
from .errors import ContractViolationError
from .game import ControlInterval, GameInstance

REGION_BELOW = "below"
REGION_INSIDE = "inside"
REGION_ABOVE = "above"
REGION_UNDEFINED = "undefined"


@dataclass(frozen=True, eq=False)
class LqScenario:
    """Linear plant, quadratic cost, constant ascending passing probabilities."""

    A: np.ndarray
    B: np.ndarray
    tau: float
    q: np.ndarray
    j_minus: int
    x: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.atleast_1d(np.asarray(self.B, dtype=float))
        x = np.atleast_1d(np.asarray(self.x, dtype=float))
        q = np.atleast_1d(np.asarray(self.q, dtype=float))
        if A.shape[0] != A.shape[1]:
            raise ContractViolationError(f"A must be square, got {A.shape}")
        if B.shape != (A.shape[0],) or x.shape != (A.shape[0],):
            raise ContractViolationError(
                f"B and x must be length-{A.shape[0]} vectors, got {B.shape} and {x.shape}")
        if float(B @ B) <= 0.0:
            raise ContractViolationError("B must be nonzero")
        if self.tau < 0.0:
            raise ContractViolationError("tau must be nonnegative")
        if q.ndim != 1 or q.shape[0] < 2:
            raise ContractViolationError("q must list at least two channels")
        if np.any(q < 0.0) or np.any(q > 1.0):
            raise ContractViolationError("q entries must lie in [0, 1]")
        if np.any(np.diff(q) <= 0.0):
            raise ContractViolationError("q must be strictly increasing")
        if not 1 <= int(self.j_minus) <= q.shape[0]:
            raise ContractViolationError(f"j_minus outside 1..{q.shape[0]}")
        for name, arr in (("A", A), ("B", B), ("x", x), ("q", q)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "tau", float(self.tau))
        object.__setattr__(self, "j_minus", int(self.j_minus))

    @property
    def n(self) -> int:
        return self.q.shape[0]

    @cached_property
    def b_norm_sq(self) -> float:
        return float(self.B @ self.B)

    @cached_property
    def beta(self) -> float:
        """Aligned component of the drifted state, B'Ax / |B|^2."""
        return float(self.B @ (self.A @ self.x)) / self.b_norm_sq

    @cached_property
    def state_cost(self) -> float:
        """x'(I + A'A)x, the control-free part of every payoff curve."""
        ax = self.A @ self.x
        return float(self.x @ self.x + ax @ ax)

    def gamma(self, j: int) -> float:
        return self.state_cost + (self.tau if j == self.j_minus else 0.0)


def lq_conditional_payoff(scenario: LqScenario, u, j: int):
    """Closed-form h_j; accepts scalar or array controls."""
    if not 1 <= j <= scenario.n:
        raise ContractViolationError(f"channel index {j} outside 1..{scenario.n}")
    u = np.asarray(u, dtype=float)
    qj = float(scenario.q[j - 1])
    val = scenario.gamma(j) + u * u \
        + scenario.b_norm_sq * qj * u * (u + 2.0 * scenario.beta)
    return float(val) if val.ndim == 0 else val


def lq_conditional_payoff_du(scenario: LqScenario, u, j: int):
    """Closed-form slope of h_j."""
    if not 1 <= j <= scenario.n:
        raise ContractViolationError(f"channel index {j} outside 1..{scenario.n}")
    u = np.asarray(u, dtype=float)
    qj = float(scenario.q[j - 1])
    val = 2.0 * (1.0 + scenario.b_norm_sq * qj) * u \
        + 2.0 * scenario.b_norm_sq * qj * scenario.beta
    return float(val) if val.ndim == 0 else val


def lq_control_set(scenario: LqScenario) -> ControlInterval:
    """Exact admissible controls {u : u (u + 2 beta) <= 0}; degenerates to
    the single point {0} when the state carries no aligned component."""
    edge = -2.0 * scenario.beta
    return ControlInterval(min(0.0, edge), max(0.0, edge))


class RegionResult(NamedTuple):
    z: float
    region: str


def randomization_bounds(scenario: LqScenario) -> tuple[float, float]:
    """Open z-interval on which the jammer's optimal policy is mixed."""
    nb2 = scenario.b_norm_sq
    lo = 1.0 - 1.0 / (1.0 + nb2 * float(scenario.q[0])) ** 2
    hi = 1.0 - 1.0 / (1.0 + nb2 * float(scenario.q[scenario.j_minus - 1])) ** 2
    return lo, hi


def lq_region(scenario: LqScenario) -> RegionResult:
    """Locate the state relative to the randomization region.

    z compares the stealth reward against what blocking is worth at this
    state; it is undefined when the current channel is already the most
    blocking one (j_minus = 1) or when the state has no aligned component
    (B'Ax = 0), in which cases the generic pipeline decides the game.
    """
    bax = float(scenario.B @ (scenario.A @ scenario.x))
    if scenario.j_minus == 1 or bax == 0.0:
        return RegionResult(float("nan"), REGION_UNDEFINED)
    dq = float(scenario.q[scenario.j_minus - 1] - scenario.q[0])
    z = scenario.tau * scenario.b_norm_sq / (dq * bax * bax)
    lo, hi = randomization_bounds(scenario)
    if z <= lo:
        return RegionResult(z, REGION_BELOW)
    if z >= hi:
        return RegionResult(z, REGION_ABOVE)
    return RegionResult(z, REGION_INSIDE)


def lq_u_star(scenario: LqScenario) -> float:
    """Closed-form optimal control inside the randomization region.

    Of the two indifference-equation roots -beta (1 -/+ sqrt(1 - z)), only
    the one closer to zero falls strictly between the two payoff-curve
    minimizers, which is what makes the mixed policy optimal; it agrees
    with the root found by bisection plus the slope test.
    """
    z, region = lq_region(scenario)
    if region != REGION_INSIDE:
        raise ContractViolationError(
            f"closed-form control only exists inside the randomization region "
            f"(z = {z!r}, region = {region})")
    return -scenario.beta * (1.0 - np.sqrt(1.0 - z))


def to_game_instance(scenario: LqScenario) -> GameInstance:
    """Wrap the scenario as a generic game instance.

    The generic payoff closures implement the quadratic stage cost
    directly (so the decomposition route stays independent of the closed
    forms), while the vectorized hook and the exact control interval give
    the solve pipeline its fast path.
    """
    s = scenario
    xx = float(s.x @ s.x)
    j_minus = s.j_minus
    nb2 = s.b_norm_sq
    beta = s.beta
    gammas = tuple(s.gamma(j) for j in range(1, s.n + 1))
    q = s.q

    def h_fast(u, j):
        # same closed form as lq_conditional_payoff, with the per-scenario
        # constants baked in (hot path of every grid scan)
        return gammas[j - 1] + u * u + nb2 * q[j - 1] * u * (u + 2.0 * beta)

    def dynamics(xv, v):
        return s.A @ xv + s.B * v

    def payoff(y, u, j):
        extra = s.tau if j == j_minus else 0.0
        return xx + u * u + float(y @ y) + extra

    def payoff_du(y, u, j):
        return 2.0 * u

    def payoff_dy(y, u, j):
        return 2.0 * y

    def dynamics_dv(xv, v):
        return s.B

    return GameInstance(
        dynamics=dynamics,
        payoff=payoff,
        channels=ChannelSet.constant(s.q),
        link=LinkState(j_minus=j_minus, c_minus=np.zeros(s.n, dtype=int)),
        x=s.x,
        payoff_du=payoff_du,
        payoff_dy=payoff_dy,
        dynamics_dv=dynamics_dv,
        h_vectorized=h_fast,
        control_hint=lq_control_set(s),
    )
