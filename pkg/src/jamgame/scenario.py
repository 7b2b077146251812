"""Scenario documents and the payoff-kind registry.

Scenarios are YAML documents. The full schema, with defaults in
parentheses:

    plant:
      A: [[2.0]]          # square matrix, row-major; required for kind lq
      B: [1.0]            # input direction, same dimension as the state
      kind: <name>        # alternative: a registered generic plant/payoff
    payoff:
      kind: lq            # registry key; "lq" is built in
      tau: 1.6            # stealth reward, lq only (0.0)
    channels:
      q: [0.1, 0.9]       # strictly increasing passing probabilities
      j_minus: 2          # current channel, 1-based
      c_minus: [0, 0]     # prior states (zeros)
    state:
      x: [1.0]
    solver:               # all optional
      margin: 1.0
      scan_points: 10000
      ranking_points: 1001
      root_tol: 1.0e-10
      grad_tol: 1.0e-7
      search_inflation: 0.05
    oracle:
      u_grid: 2001
      p_grid: 1001
    mc:
      trials: 100000
      seed: 0

Generic payoff kinds are added with :func:`register_payoff_kind`; a
builder receives the parsed scenario and returns a ready game instance.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
import yaml

from .errors import ScenarioError
from .game import GameInstance, SolverConfig
from .lq import LqScenario, to_game_instance

DEFAULT_U_GRID = 2001
DEFAULT_P_GRID = 1001
DEFAULT_TRIALS = 100_000
DEFAULT_SEED = 0

SWEEP_TAU = "tau"
SWEEP_STATE_SCALE = "state-scale"

_SOLVER_FIELDS = ("margin", "scan_points", "ranking_points", "control_bisect_tol",
                  "root_tol", "grad_tol", "search_inflation", "scan_limit", "eq_tol")


@dataclass(frozen=True, eq=False)
class ScenarioFile:
    """Validated scenario with all defaults filled in."""

    payoff_kind: str
    payoff_params: dict
    plant: dict
    q: np.ndarray
    j_minus: int
    c_minus: np.ndarray
    x: np.ndarray
    solver: SolverConfig
    u_grid: int
    p_grid: int
    trials: int
    seed: int

    @property
    def n(self) -> int:
        return self.q.shape[0]

    def with_tau(self, tau: float) -> "ScenarioFile":
        params = dict(self.payoff_params)
        params["tau"] = float(tau)
        return replace(self, payoff_params=params)

    def with_state_scale(self, scale: float) -> "ScenarioFile":
        return replace(self, x=self.x * float(scale))

    def to_dict(self) -> dict:
        doc = {
            "plant": {k: (v.tolist() if isinstance(v, np.ndarray) else v)
                      for k, v in self.plant.items()},
            "payoff": {"kind": self.payoff_kind, **self.payoff_params},
            "channels": {"q": self.q.tolist(), "j_minus": self.j_minus,
                         "c_minus": self.c_minus.tolist()},
            "state": {"x": self.x.tolist()},
            "solver": {k: getattr(self.solver, k) for k in _SOLVER_FIELDS},
            "oracle": {"u_grid": self.u_grid, "p_grid": self.p_grid},
            "mc": {"trials": self.trials, "seed": self.seed},
        }
        return doc

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)


def _fail(field, constraint):
    raise ScenarioError(f"{field}: {constraint}")


def _get(mapping, field, path, required=True, default=None):
    if not isinstance(mapping, dict):
        _fail(path, "must be a mapping")
    if field not in mapping:
        if required:
            _fail(f"{path}.{field}", "missing required field")
        return default
    return mapping[field]


def _vector(value, path):
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        _fail(path, "must be a list of numbers")
    if arr.ndim != 1 or arr.size == 0:
        _fail(path, "must be a non-empty flat list of numbers")
    return arr


def _matrix(value, path):
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        _fail(path, "must be a matrix (list of equal-length rows)")
    arr = np.atleast_2d(arr)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        _fail(path, f"must be a square matrix, got shape {arr.shape}")
    return arr


def parse_scenario(text: str) -> ScenarioFile:
    """Parse and validate a YAML scenario document.

    Every violated constraint is reported with the offending field path;
    omitted optional blocks pick up the documented defaults.
    """
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"document is not valid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        _fail("document", "top level must be a mapping")

    payoff = _get(doc, "payoff", "document")
    kind = _get(payoff, "kind", "payoff")
    if not isinstance(kind, str):
        _fail("payoff.kind", "must be a string")
    params = {k: v for k, v in payoff.items() if k != "kind"}

    plant_doc = _get(doc, "plant", "document")
    plant = {}
    if "kind" in plant_doc:
        plant["kind"] = str(plant_doc["kind"])
    else:
        plant["A"] = _matrix(_get(plant_doc, "A", "plant"), "plant.A")
        plant["B"] = _vector(_get(plant_doc, "B", "plant"), "plant.B")
        if plant["B"].shape[0] != plant["A"].shape[0]:
            _fail("plant.B", f"length {plant['B'].shape[0]} does not match "
                             f"the {plant['A'].shape[0]}-dimensional plant")

    channels = _get(doc, "channels", "document")
    q = _vector(_get(channels, "q", "channels"), "channels.q")
    if q.shape[0] < 2:
        _fail("channels.q", "needs at least two channels")
    if np.any(q < 0) or np.any(q > 1):
        _fail("channels.q", "entries must lie in [0, 1]")
    if np.any(np.diff(q) <= 0):
        _fail("channels.q", "entries must be strictly increasing "
                            "(most blocking channel first)")
    j_minus = _get(channels, "j_minus", "channels")
    if not isinstance(j_minus, int) or not 1 <= j_minus <= q.shape[0]:
        _fail("channels.j_minus", f"must be an integer in 1..{q.shape[0]}")
    c_minus_raw = _get(channels, "c_minus", "channels", required=False)
    if c_minus_raw is None:
        c_minus = np.zeros(q.shape[0], dtype=int)
    else:
        c_minus = np.asarray(c_minus_raw)
        if c_minus.shape != q.shape or not np.all((c_minus == 0) | (c_minus == 1)):
            _fail("channels.c_minus", f"must be {q.shape[0]} bits (0/1)")
        c_minus = c_minus.astype(int)

    state = _get(doc, "state", "document")
    x = _vector(_get(state, "x", "state"), "state.x")
    if "A" in plant and x.shape[0] != plant["A"].shape[0]:
        _fail("state.x", f"length {x.shape[0]} does not match "
                         f"the {plant['A'].shape[0]}-dimensional plant")

    solver_doc = _get(doc, "solver", "document", required=False, default={}) or {}
    unknown = set(solver_doc) - set(_SOLVER_FIELDS)
    if unknown:
        _fail("solver", f"unknown keys {sorted(unknown)}")
    try:
        solver = SolverConfig(**solver_doc)
    except TypeError as exc:
        raise ScenarioError(f"solver: {exc}") from exc
    if solver.margin <= 0:
        _fail("solver.margin", "must be positive")

    oracle_doc = _get(doc, "oracle", "document", required=False, default={}) or {}
    u_grid = int(oracle_doc.get("u_grid", DEFAULT_U_GRID))
    p_grid = int(oracle_doc.get("p_grid", DEFAULT_P_GRID))
    if u_grid < 3 or p_grid < 3:
        _fail("oracle", "grids need at least 3 points")

    mc_doc = _get(doc, "mc", "document", required=False, default={}) or {}
    trials = int(mc_doc.get("trials", DEFAULT_TRIALS))
    seed = int(mc_doc.get("seed", DEFAULT_SEED))
    if trials < 1:
        _fail("mc.trials", "must be >= 1")

    if kind == "lq":
        if "A" not in plant:
            _fail("plant", "payoff kind lq needs explicit A and B matrices")
        tau = params.get("tau", 0.0)
        if not isinstance(tau, (int, float)) or tau < 0:
            _fail("payoff.tau", "must be a nonnegative number")
        params["tau"] = float(tau)

    return ScenarioFile(payoff_kind=kind, payoff_params=params, plant=plant,
                        q=q, j_minus=j_minus, c_minus=c_minus, x=x,
                        solver=solver, u_grid=u_grid, p_grid=p_grid,
                        trials=trials, seed=seed)


def load_scenario(path) -> ScenarioFile:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_scenario(handle.read())


# --- payoff-kind registry ---------------------------------------------------

PayoffBuilder = Callable[[ScenarioFile], GameInstance]
_BUILDERS: dict[str, PayoffBuilder] = {}


def register_payoff_kind(name: str, builder: PayoffBuilder) -> None:
    """Make a payoff kind available to scenario files."""
    _BUILDERS[name] = builder


def payoff_kinds() -> tuple[str, ...]:
    return tuple(sorted(_BUILDERS))


def build_lq_scenario(sf: ScenarioFile) -> LqScenario:
    if sf.payoff_kind != "lq":
        raise ScenarioError(f"payoff.kind: expected lq, got {sf.payoff_kind!r}")
    return LqScenario(A=sf.plant["A"], B=sf.plant["B"],
                      tau=sf.payoff_params.get("tau", 0.0),
                      q=sf.q, j_minus=sf.j_minus, x=sf.x)


def _build_lq(sf: ScenarioFile) -> GameInstance:
    return to_game_instance(build_lq_scenario(sf))


register_payoff_kind("lq", _build_lq)


def build_game(sf: ScenarioFile) -> GameInstance:
    builder = _BUILDERS.get(sf.payoff_kind)
    if builder is None:
        raise ScenarioError(
            f"payoff.kind: unknown kind {sf.payoff_kind!r}; "
            f"registered kinds: {', '.join(payoff_kinds())}")
    return builder(sf)


# --- parameter sweeps --------------------------------------------------------

@dataclass(frozen=True)
class SweepSpec:
    """One-dimensional parameter sweep (stealth reward or state scale)."""

    parameter: str
    lo: float
    hi: float
    points: int

    def __post_init__(self):
        if self.parameter not in (SWEEP_TAU, SWEEP_STATE_SCALE):
            raise ScenarioError(
                f"sweep.parameter: must be {SWEEP_TAU!r} or {SWEEP_STATE_SCALE!r}, "
                f"got {self.parameter!r}")
        if self.points < 1:
            raise ScenarioError("sweep.points: must be >= 1")
        if self.points == 1:
            if self.lo > self.hi:
                raise ScenarioError("sweep.range: lo must not exceed hi")
        elif not self.lo < self.hi:
            raise ScenarioError("sweep.range: lo must be strictly below hi")

    def values(self) -> np.ndarray:
        if self.points == 1:
            return np.array([self.lo])
        return np.linspace(self.lo, self.hi, self.points)

    def apply(self, sf: ScenarioFile, value: float) -> ScenarioFile:
        if self.parameter == SWEEP_TAU:
            return sf.with_tau(value)
        return sf.with_state_scale(value)
