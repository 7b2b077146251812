import numpy as np
import pytest

from jamgame import LqScenario, to_game_instance
from jamgame.lq import randomization_bounds

SQRT2 = float(np.sqrt(2.0))

# Desk-scale reference scenario used throughout: scalar plant with gain 2,
# unit input direction, two channels, jammer currently on the good one.
S1 = dict(A=[[2.0]], B=[1.0], tau=1.6, q=[0.1, 0.9], j_minus=2, x=[1.0])

# Frozen values for S1, derived from the quadratic indifference equation
# u^2 + 4u + 2 = 0 and the stationarity mixture, and confirmed by bisection
# plus grid search before being frozen here.
S1_U_STAR = SQRT2 - 2.0                      # -0.5857864376269049
S1_OTHER_ROOT = -2.0 - SQRT2                 # -3.414213562373095
S1_J = 10.8 - 4.0 * SQRT2                    # 5.14314575050762
S1_D1 = 2.2 * SQRT2 - 4.0                    # blocking-curve slope at u*
S1_D2 = 3.8 * SQRT2 - 4.0                    # stay-curve slope at u*
S1_P1 = 2.375 - 2.5 / SQRT2                  # 0.6072330470336311
S1_Z = 0.5
S1_Z_LO = 0.17355371900826455
S1_Z_HI = 0.7229916897506925
S1_TAU_LO = 3.2 * S1_Z_LO                    # 0.5553719008264466
S1_TAU_HI = 3.2 * S1_Z_HI                    # 2.313573407202216
S1_MIN_H1 = 5.0 - 0.04 / 1.1                 # 4.963636363636364 at u = -2/11
S1_MIN_H1_AT = -2.0 / 11.0

S1_YAML = """
plant:
  A: [[2.0]]
  B: [1.0]
payoff:
  kind: lq
  tau: 1.6
channels:
  q: [0.1, 0.9]
  j_minus: 2
state:
  x: [1.0]
mc:
  trials: 200000
  seed: 0
"""


def make_s1(**overrides) -> LqScenario:
    params = dict(S1)
    params.update(overrides)
    return LqScenario(**params)


@pytest.fixture
def s1() -> LqScenario:
    return make_s1()


@pytest.fixture
def s1_game(s1):
    return to_game_instance(s1)


def random_lq_scenario(rng) -> LqScenario:
    """Desk-scale random instance with its z statistic spread over the
    below/inside/above regions and kept off the region boundary."""
    while True:
        N = int(rng.integers(1, 4))
        n = int(rng.integers(2, 5))
        A = rng.uniform(-1.0, 1.0, (N, N))
        B = rng.uniform(-1.0, 1.0, N)
        nb = float(np.linalg.norm(B))
        if nb < 0.3:
            continue
        B = B / nb * float(rng.uniform(0.7, 1.1))
        x = rng.uniform(-1.0, 1.0, N)
        bax = float(B @ (A @ x))
        if abs(bax) < 1e-3:
            continue
        beta = bax / float(B @ B)
        x = x * (float(rng.uniform(0.12, 0.35)) * np.sign(beta) / beta)
        q = np.sort(rng.uniform(0.05, 0.9, n))
        if np.any(np.diff(q) < 0.05):
            continue
        j_minus = int(rng.integers(2, n + 1))
        probe = LqScenario(A=A, B=B, tau=0.0, q=q, j_minus=j_minus, x=x)
        lo, hi = randomization_bounds(probe)
        frac = float(rng.uniform(-0.5, 1.5))
        if min(abs(frac), abs(frac - 1.0)) < 0.06:
            continue
        z_target = lo + frac * (hi - lo)
        if z_target <= 0.01:
            continue
        bax = float(B @ (A @ x))
        tau = z_target * (q[j_minus - 1] - q[0]) * bax * bax / float(B @ B)
        return LqScenario(A=A, B=B, tau=tau, q=q, j_minus=j_minus, x=x)
