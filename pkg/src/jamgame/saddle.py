"""Saddle-point location and classification for the reduced game.

An indifference point is a control at which switching to the blocking
channel and staying put cost the jammer the same. A mixed jammer policy
can only be optimal at such a point, and it is optimal exactly when the
two payoff slopes there either have opposite signs or both vanish. The
solver scans the admissible interval for indifference points, classifies
each one by its slopes, builds the mixed policy from stationarity of the
mixed payoff, and falls back to the better committed (vertex) policy when
no point qualifies.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ContractViolationError
from .game import (
    DEFAULT_CONFIG,
    GameInstance,
    ReducedGame,
    SolverConfig,
    compute_control_set,
    lift_strategy,
    reduce_game,
)
from .channel import JammerPolicy

KIND_MIXED = "nontrivial-mixed"
KIND_FLAT = "degenerate-flat"
KIND_BLOCKING = "trivial-blocking"
KIND_STAY = "trivial-stay"
KIND_NONE = "none-found"

CLASS_OPPOSITE = "opposite-signs"
CLASS_BOTH_ZERO = "both-zero"
CLASS_NOT_SADDLE = "not-a-saddle"

_DEGENERATE_WIDTH = 1e-12


@dataclass(frozen=True)
class IndifferencePoint:
    """One candidate crossing with its classification evidence."""

    u: float
    classification: str
    residual: float   # |h1(u) - h2(u)|
    d1: float         # slope of the blocking-channel payoff
    d2: float         # slope of the stay-put payoff


@dataclass(frozen=True, eq=False)
class SaddleReport:
    """Full solver verdict for one game instance."""

    kind: str
    u_star: Optional[float]
    p_tilde: Optional[np.ndarray]
    p_star: Optional[JammerPolicy]
    value: Optional[float]
    indifference_points: tuple
    multiple: bool = False
    diagnostics: dict = field(default_factory=dict)

    @property
    def nontrivial(self) -> bool:
        return self.kind in (KIND_MIXED, KIND_FLAT)


def _bisect_root(g, lo, hi, glo, tol):
    """Plain bisection on a bracketing interval, to absolute tolerance tol."""
    for _ in range(200):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if gm == 0.0:
            return mid
        if (glo < 0.0) != (gm < 0.0):
            hi = mid
        else:
            lo, glo = mid, gm
    return 0.5 * (lo + hi)


def find_indifference_points(rg: ReducedGame, tol: float | None = None,
                             config: SolverConfig | None = None) -> list[float]:
    """All controls in (a slightly inflated copy of) the interval where the
    two reduced payoffs meet.

    Sign changes of h1 - h2 on a dense grid are refined by bisection;
    near-tangencies, where the gap dips within tolerance of zero without
    changing sign, are kept as candidates too so flat crossings are not
    lost. Identical curves collapse to the single stationary candidate.
    An empty list is a valid outcome.
    """
    cfg = config or DEFAULT_CONFIG
    tol = cfg.root_tol if tol is None else float(tol)
    if tol <= 0:
        raise ContractViolationError("tol must be positive")

    domain = rg.interval.inflate(cfg.search_inflation)
    if domain.width < _DEGENERATE_WIDTH:
        return []
    grid = domain.grid(cfg.scan_points)
    h1g = np.asarray(rg.h1(grid), dtype=float)
    h2g = np.asarray(rg.h2(grid), dtype=float)
    g_vals = h1g - h2g
    scale = 1.0 + max(float(np.abs(h1g).max()), float(np.abs(h2g).max()))
    eq_tol = cfg.eq_tol * scale

    def g(u):
        return float(rg.h1(u)) - float(rg.h2(u))

    roots: list[float] = []
    if np.all(np.abs(g_vals) <= eq_tol):
        # Indistinguishable curves: the only meaningful candidate is the
        # common stationary point.
        peak = np.maximum(h1g, h2g)
        i = int(np.argmin(peak))
        lo = grid[max(i - 1, 0)]
        hi = grid[min(i + 1, len(grid) - 1)]
        res = minimize_scalar(lambda u: float(rg.h1(u)) + float(rg.h2(u)),
                              bounds=(lo, hi), method="bounded",
                              options={"xatol": tol})
        return [float(res.x)]

    signs = np.sign(g_vals)
    crossing = np.nonzero((signs[:-1] * signs[1:]) < 0)[0]
    for i in crossing:
        roots.append(_bisect_root(g, float(grid[i]), float(grid[i + 1]),
                                  float(g_vals[i]), tol))
    exact = np.nonzero(g_vals == 0.0)[0]
    roots.extend(float(grid[i]) for i in exact)

    # Tangency candidates: local minima of |g| that sit within tolerance of
    # zero but never flip sign on the grid.
    absg = np.abs(g_vals)
    interior = np.arange(1, len(grid) - 1)
    local_min = interior[(absg[interior] <= absg[interior - 1])
                         & (absg[interior] <= absg[interior + 1])
                         & (absg[interior] <= eq_tol)]
    for i in local_min:
        if signs[i - 1] * signs[i + 1] < 0 or g_vals[i] == 0.0:
            continue  # already captured as a sign change or exact zero
        res = minimize_scalar(lambda u: abs(g(u)),
                              bounds=(float(grid[i - 1]), float(grid[i + 1])),
                              method="bounded", options={"xatol": tol})
        if abs(g(float(res.x))) <= eq_tol:
            roots.append(float(res.x))

    roots.sort()
    spacing = (domain.width / (cfg.scan_points - 1)) * 0.5
    merged: list[float] = []
    for r in roots:
        if merged and abs(r - merged[-1]) <= spacing:
            continue
        merged.append(r)
    return merged


def classify_point(rg: ReducedGame, u_bar: float,
                   tol_grad: float | None = None) -> str:
    """Slope test at an indifference point: opposite signs and joint
    vanishing both admit a mixed optimal policy; anything else does not."""
    tol = DEFAULT_CONFIG.grad_tol if tol_grad is None else float(tol_grad)
    d1 = float(rg.h1_du(u_bar))
    d2 = float(rg.h2_du(u_bar))
    if max(abs(d1), abs(d2)) <= tol:
        return CLASS_BOTH_ZERO
    if d1 * d2 < -tol * tol:
        return CLASS_OPPOSITE
    return CLASS_NOT_SADDLE


def mixed_strategy(rg: ReducedGame, u_bar: float,
                   tol_grad: float | None = None) -> np.ndarray:
    """Mixture that makes the mixed payoff stationary at the crossing:
    p1 d1 + p2 d2 = 0, so p1 = d2 / (d2 - d1), strictly interior under the
    opposite-signs condition. The flat case admits every mixture; the
    midpoint is returned as the canonical representative."""
    kind = classify_point(rg, u_bar, tol_grad)
    if kind == CLASS_NOT_SADDLE:
        raise ContractViolationError(
            f"u = {u_bar!r} is not a saddle candidate (slopes share a sign)")
    if kind == CLASS_BOTH_ZERO:
        return np.array([0.5, 0.5])
    d1 = float(rg.h1_du(u_bar))
    d2 = float(rg.h2_du(u_bar))
    p1 = d2 / (d2 - d1)
    return np.array([p1, 1.0 - p1])


def _minimize_on(fn, interval, config):
    """Grid scan plus local polish; returns (min value, minimizer)."""
    if interval.width < _DEGENERATE_WIDTH:
        u = interval.lo
        return float(fn(u)), float(u)
    grid = interval.grid(min(config.scan_points, 4001))
    vals = np.asarray(fn(grid), dtype=float)
    i = int(np.argmin(vals))
    lo = float(grid[max(i - 1, 0)])
    hi = float(grid[min(i + 1, len(grid) - 1)])
    res = minimize_scalar(lambda u: float(fn(u)), bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-10})
    if res.fun <= vals[i]:
        return float(res.fun), float(res.x)
    return float(vals[i]), float(grid[i])


def solve_reduced(rg: ReducedGame, j_minus: int, n: int,
                  config: SolverConfig | None = None,
                  diagnostics: dict | None = None) -> SaddleReport:
    """Classify a reduced game given its curves and interval."""
    cfg = config or DEFAULT_CONFIG
    diag = dict(diagnostics or {})

    candidates = find_indifference_points(rg, cfg.root_tol, cfg)
    points = []
    for u in candidates:
        cls = classify_point(rg, u, cfg.grad_tol)
        points.append(IndifferencePoint(
            u=u, classification=cls,
            residual=abs(float(rg.h1(u)) - float(rg.h2(u))),
            d1=float(rg.h1_du(u)), d2=float(rg.h2_du(u))))
    points_t = tuple(points)
    valid = [pt for pt in points if pt.classification != CLASS_NOT_SADDLE]

    if valid:
        # The jammer maximizes, so among several admissible crossings keep
        # the one worth the most; report the rest.
        best = max(valid, key=lambda pt: float(rg.h1(pt.u)))
        p_tilde = mixed_strategy(rg, best.u, cfg.grad_tol)
        kind = KIND_FLAT if best.classification == CLASS_BOTH_ZERO else KIND_MIXED
        value = float(rg.h1(best.u))
        p_star = lift_strategy(p_tilde, rg.blocking_index, j_minus, n)
        return SaddleReport(kind=kind, u_star=best.u, p_tilde=p_tilde,
                            p_star=p_star, value=value,
                            indifference_points=points_t,
                            multiple=len(valid) > 1, diagnostics=diag)

    m1, u1 = _minimize_on(rg.h1, rg.interval, cfg)
    m2, u2 = _minimize_on(rg.h2, rg.interval, cfg)
    diag["trivial_minima"] = {"blocking": (m1, u1), "stay": (m2, u2)}
    if not (np.isfinite(m1) and np.isfinite(m2)):
        return SaddleReport(kind=KIND_NONE, u_star=None, p_tilde=None,
                            p_star=None, value=None,
                            indifference_points=points_t, diagnostics=diag)
    if m1 >= m2:
        kind, u_star, value, p_tilde = KIND_BLOCKING, u1, m1, np.array([1.0, 0.0])
    else:
        kind, u_star, value, p_tilde = KIND_STAY, u2, m2, np.array([0.0, 1.0])
    p_star = lift_strategy(p_tilde, rg.blocking_index, j_minus, n)
    return SaddleReport(kind=kind, u_star=u_star, p_tilde=p_tilde,
                        p_star=p_star, value=value,
                        indifference_points=points_t, diagnostics=diag)


def solve(game: GameInstance, config: SolverConfig | None = None) -> SaddleReport:
    """Run the full pipeline on a game instance.

    The bracketed control set doubles as the coercivity and connectedness
    audit even when the game carries an exact interval; the exact interval,
    when present, is the one used for ranking, reduction, and the search
    (the ordering assumption belongs to it, and need not survive on the
    looser bracket). Assumption failures propagate as exceptions.
    """
    cfg = config or DEFAULT_CONFIG
    bracket = compute_control_set(game, cfg.margin, cfg)
    interval = game.control_hint if game.control_hint is not None else bracket
    rg = reduce_game(game, interval, cfg)
    diag = {
        "bracket": (bracket.lo, bracket.hi),
        "interval": (interval.lo, interval.hi),
        "interval_source": "closed-form" if game.control_hint is not None else "bracketed",
        "blocking_index": rg.blocking_index,
    }
    return solve_reduced(rg, game.link.j_minus, game.n, cfg, diag)
