"""Switched binary-channel link model.

The link between controller and plant is a finite family of n binary
channels. At each step the jammer observes the channel states ``c_minus``
and the index ``j_minus`` of the channel currently occupying the link,
draws a replacement channel S from its policy vector p, and then every
channel re-randomizes its transmission state: channel j becomes passing
with probability ``q_j``, which may depend on the observed pattern
``c_minus``. The controller's signal gets through exactly when the fresh
state of the selected channel is passing, so the link bit is ``b = c_S``
and ``Pr(b = 1) = p @ q``.

Sampling is driven by counter-based Philox streams so that parallel
Monte Carlo runs can hand each trial its own stream (``trial_rng``) while
batched runs (``sample_steps``) consume the keyed stream row by row and
stay bit-for-bit reproducible for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ContractViolationError

SIMPLEX_TOL = 1e-12


def _float_vector(values, name):
    arr = np.array(values, dtype=float)
    if arr.ndim != 1:
        raise ContractViolationError(f"{name} must be a 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ContractViolationError(f"{name} must be finite")
    arr.flags.writeable = False
    return arr


def _bit_vector(values, name):
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise ContractViolationError(f"{name} must be a 1-D vector, got shape {arr.shape}")
    if not np.all((arr == 0) | (arr == 1)):
        raise ContractViolationError(f"{name} entries must be 0 or 1")
    out = arr.astype(np.int64)
    out.flags.writeable = False
    return out


def _check_prob_vector(q, n, name):
    if q.shape != (n,):
        raise ContractViolationError(f"{name} must have length {n}, got {q.shape}")
    if np.any(q < 0.0) or np.any(q > 1.0):
        raise ContractViolationError(f"{name} entries must lie in [0, 1]")


@dataclass(frozen=True, eq=False)
class ChannelSet:
    """Finite family of binary channels.

    ``base_q`` holds the per-channel passing probabilities used for any
    prior-state pattern not listed in ``table``; ``table`` optionally maps
    specific ``c_minus`` bit patterns to their own probability vectors,
    which is enough because a single game instance only ever evaluates q
    at the one observed pattern.
    """

    n: int
    base_q: np.ndarray
    table: dict | None = None

    def __post_init__(self):
        if self.n < 2:
            raise ContractViolationError("a channel set needs at least 2 channels")
        object.__setattr__(self, "base_q", _float_vector(self.base_q, "base_q"))
        _check_prob_vector(self.base_q, self.n, "base_q")
        if self.table is not None:
            frozen = {}
            for key, vec in self.table.items():
                pattern = tuple(int(v) for v in key)
                if len(pattern) != self.n or any(v not in (0, 1) for v in pattern):
                    raise ContractViolationError(f"table key {key!r} is not an n-bit pattern")
                qv = _float_vector(vec, f"table[{pattern}]")
                _check_prob_vector(qv, self.n, f"table[{pattern}]")
                frozen[pattern] = qv
            object.__setattr__(self, "table", frozen)

    @classmethod
    def constant(cls, q) -> "ChannelSet":
        """Channel set whose passing probabilities ignore prior states."""
        q = _float_vector(q, "q")
        return cls(n=q.shape[0], base_q=q)

    def q_at(self, c_minus) -> np.ndarray:
        """Passing-probability vector conditioned on the prior states."""
        if self.table:
            key = tuple(int(v) for v in np.asarray(c_minus))
            hit = self.table.get(key)
            if hit is not None:
                return hit
        return self.base_q


@dataclass(frozen=True, eq=False)
class LinkState:
    """Index of the channel on the link and the pre-switch channel states."""

    j_minus: int
    c_minus: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "c_minus", _bit_vector(self.c_minus, "c_minus"))
        n = self.c_minus.shape[0]
        if not (isinstance(self.j_minus, (int, np.integer)) and 1 <= self.j_minus <= n):
            raise ContractViolationError(f"j_minus must be a channel index in 1..{n}, got {self.j_minus}")
        object.__setattr__(self, "j_minus", int(self.j_minus))

    @property
    def n(self) -> int:
        return self.c_minus.shape[0]


@dataclass(frozen=True, eq=False)
class JammerPolicy:
    """Probability distribution over channel selections."""

    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p", _float_vector(self.p, "p"))
        if np.any(self.p < 0.0):
            raise ContractViolationError("policy entries must be nonnegative")
        total = float(self.p.sum())
        if abs(total - 1.0) > SIMPLEX_TOL:
            raise ContractViolationError(f"policy must sum to 1 within {SIMPLEX_TOL}, got {total!r}")

    @classmethod
    def vertex(cls, j: int, n: int) -> "JammerPolicy":
        """Deterministic policy that always selects channel j (1-based)."""
        if not 1 <= j <= n:
            raise ContractViolationError(f"vertex index {j} outside 1..{n}")
        p = np.zeros(n)
        p[j - 1] = 1.0
        return cls(p)

    @property
    def n(self) -> int:
        return self.p.shape[0]


class StepResult(NamedTuple):
    channel: int        # selected channel S, 1-based
    states: np.ndarray  # fresh transmission states of all channels
    passing: int        # link bit b = states[channel - 1]


class StepSample(NamedTuple):
    channels: np.ndarray  # (trials,) selected channels, 1-based
    states: np.ndarray    # (trials, n) fresh transmission states
    passing: np.ndarray   # (trials,) link bits


def _match(channels: ChannelSet, link: LinkState, policy: JammerPolicy):
    if link.n != channels.n or policy.n != channels.n:
        raise ContractViolationError(
            f"dimension mismatch: channels n={channels.n}, link n={link.n}, policy n={policy.n}"
        )


def passing_probability(channels: ChannelSet, link: LinkState, policy: JammerPolicy) -> float:
    """Probability that the link bit comes up passing, p @ q(c_minus)."""
    _match(channels, link, policy)
    return float(policy.p @ channels.q_at(link.c_minus))


def _select(cum_p: np.ndarray, u):
    # side="right" skips zero-mass prefixes; clip guards cumsum rounding below 1.
    idx = np.searchsorted(cum_p, u, side="right")
    return np.minimum(idx, cum_p.shape[0] - 1)


def sample_step(channels: ChannelSet, link: LinkState, policy: JammerPolicy,
                rng: np.random.Generator) -> StepResult:
    """Draw one channel switch: S from the policy, then fresh states for
    every channel (the selection never reuses ``c_minus``), then b = c_S.

    Consumes exactly 1 + n uniforms from ``rng``, in the same layout as one
    row of :func:`sample_steps`.
    """
    _match(channels, link, policy)
    u = rng.random(1 + channels.n)
    s = int(_select(np.cumsum(policy.p), u[0])) + 1
    q = channels.q_at(link.c_minus)
    states = (u[1:] < q).astype(np.int64)
    return StepResult(s, states, int(states[s - 1]))


def sample_steps(channels: ChannelSet, link: LinkState, policy: JammerPolicy,
                 trials: int, seed: int) -> StepSample:
    """Vectorized i.i.d. channel switches, reproducible for a fixed seed.

    Row t of the uniform table holds trial t's draws, so the result is
    identical to running :func:`sample_step` ``trials`` times on a single
    ``Generator(Philox(key=seed))``, and each trial's outcome depends only
    on its own row.
    """
    _match(channels, link, policy)
    if trials < 1:
        raise ContractViolationError("trials must be >= 1")
    rng = np.random.Generator(np.random.Philox(key=seed))
    u = rng.random((trials, 1 + channels.n))
    s = _select(np.cumsum(policy.p), u[:, 0]) + 1
    q = channels.q_at(link.c_minus)
    states = (u[:, 1:] < q).astype(np.int64)
    passing = states[np.arange(trials), s - 1]
    return StepSample(s.astype(np.int64), states, passing)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent per-trial stream: trial t starts 2**192 counter blocks
    into the keyed Philox stream, so distinct trials never overlap and may
    run concurrently in any order."""
    return np.random.Generator(np.random.Philox(key=seed, counter=trial << 192))
