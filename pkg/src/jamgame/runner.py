"""Batch workflows behind the CLI: solve, sweep, verification, checks.

Reports come in two forms per run: a human-readable text block and a CSV
with a fixed column order (floats at 17 significant digits, so output is
byte-stable for a fixed scenario and seed). Quantities keep their solver
names in every report: u_star, p_star, J, z.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import UnsupportedOperationError
from .game import GameInstance, ReducedGame, check_ranking, compute_control_set, \
    reduce_game, validate_payoff_derivative
from .lq import REGION_UNDEFINED, lq_region, randomization_bounds
from .oracle import GridSpec, McResult, OracleReport, SaddleCheck, \
    grid_game_values, run_monte_carlo, verify_saddle
from .saddle import KIND_NONE, SaddleReport, solve
from .scenario import ScenarioFile, SweepSpec, build_game, build_lq_scenario

VALUE_TOL = 1e-3       # solver value vs oracle upper value
GAP_TOL = 1e-3         # oracle duality gap at default grids
SADDLE_TOL = 1e-4      # pointwise saddle certificate


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _region_info(sf: ScenarioFile):
    """(z, region) for LQ scenarios, (None, None) for generic kinds."""
    if sf.payoff_kind != "lq":
        return None, None
    z, region = lq_region(build_lq_scenario(sf))
    return (None if np.isnan(z) else float(z)), region


@dataclass(frozen=True, eq=False)
class SolveOutcome:
    scenario: ScenarioFile
    game: GameInstance
    reduced: ReducedGame
    report: SaddleReport
    z: Optional[float]
    region: Optional[str]

    @property
    def exit_code(self) -> int:
        return 3 if self.report.kind == KIND_NONE else 0

    def csv(self) -> str:
        r = self.report
        header = ["kind", "u_star", "J", "p_tilde_1", "p_tilde_2", "z", "region"]
        row = [r.kind, r.u_star, r.value,
               None if r.p_tilde is None else r.p_tilde[0],
               None if r.p_tilde is None else r.p_tilde[1],
               self.z, self.region]
        n = self.scenario.n
        header += [f"p_star_{j}" for j in range(1, n + 1)]
        row += list(r.p_star.p) if r.p_star is not None else [None] * n
        return _csv_text(header, [row])

    def text(self) -> str:
        r = self.report
        lines = [f"kind: {r.kind}"]
        if r.u_star is not None:
            lines.append(f"u_star: {_fmt(r.u_star)}")
            lines.append(f"J: {_fmt(r.value)}")
        if r.p_tilde is not None:
            lines.append(f"p_tilde: {_fmt(r.p_tilde[0])} {_fmt(r.p_tilde[1])}")
        if r.p_star is not None:
            lines.append("p_star: " + " ".join(_fmt(v) for v in r.p_star.p))
        if self.z is not None:
            lines.append(f"z: {_fmt(self.z)}")
        if self.region is not None:
            lines.append(f"region: {self.region}")
        if r.multiple:
            lines.append("note: several admissible indifference points; "
                         "the one with the largest value was kept")
        src = r.diagnostics.get("interval_source", "bracketed")
        lo, hi = r.diagnostics.get("interval", (None, None))
        lines.append(f"control interval: [{_fmt(lo)}, {_fmt(hi)}] ({src})")
        if r.indifference_points:
            lines.append("indifference points:")
            for pt in r.indifference_points:
                lines.append(
                    f"  u={_fmt(pt.u)} residual={_fmt(pt.residual)} "
                    f"d1={_fmt(pt.d1)} d2={_fmt(pt.d2)} -> {pt.classification}")
        else:
            lines.append("indifference points: none")
        return "\n".join(lines) + "\n"


def run_solve(sf: ScenarioFile) -> SolveOutcome:
    """Classify the scenario's game. Assumption failures raise."""
    game = build_game(sf)
    report = solve(game, sf.solver)
    interval = game.control_hint
    if interval is None:
        lo, hi = report.diagnostics["interval"]
        from .game import ControlInterval
        interval = ControlInterval(lo, hi)
    rg = reduce_game(game, interval, sf.solver)
    z, region = _region_info(sf)
    return SolveOutcome(sf, game, rg, report, z, region)


SWEEP_HEADER = ["parameter", "z", "region", "kind", "u_star", "p_tilde_1",
                "J", "oracle_gap"]


@dataclass(frozen=True, eq=False)
class SweepRow:
    parameter: float
    z: Optional[float]
    region: Optional[str]
    kind: str
    u_star: Optional[float]
    p_tilde_1: Optional[float]
    J: Optional[float]
    oracle_gap: float

    def as_list(self):
        return [self.parameter, self.z, self.region, self.kind, self.u_star,
                self.p_tilde_1, self.J, self.oracle_gap]


@dataclass(frozen=True, eq=False)
class SweepOutcome:
    scenario: ScenarioFile
    sweep: SweepSpec
    rows: list
    bounds: Optional[tuple]   # z randomization bounds, when defined

    @property
    def exit_code(self) -> int:
        return 0

    def csv(self) -> str:
        return _csv_text(SWEEP_HEADER, [row.as_list() for row in self.rows])

    def text(self) -> str:
        lines = [f"sweep over {self.sweep.parameter}: {len(self.rows)} points "
                 f"in [{_fmt(self.sweep.lo)}, {_fmt(self.sweep.hi)}]"]
        kinds = {}
        for row in self.rows:
            kinds[row.kind] = kinds.get(row.kind, 0) + 1
        for kind in sorted(kinds):
            lines.append(f"  {kind}: {kinds[kind]} points")
        return "\n".join(lines) + "\n"


def run_sweep(sf: ScenarioFile, sweep: SweepSpec) -> SweepOutcome:
    """One solve plus oracle gap per sweep point, rows in sweep order.

    Sweep semantics lean on the closed forms, so only the lq payoff kind
    is supported.
    """
    if sf.payoff_kind != "lq":
        raise UnsupportedOperationError(
            f"sweeps are defined for the lq payoff kind, not {sf.payoff_kind!r}")
    rows = []
    for value in sweep.values().tolist():
        point = sweep.apply(sf, value)
        outcome = run_solve(point)
        spec = GridSpec(outcome.reduced.interval, point.u_grid, point.p_grid)
        oracle = grid_game_values(outcome.reduced, spec)
        r = outcome.report
        rows.append(SweepRow(
            parameter=value, z=outcome.z, region=outcome.region, kind=r.kind,
            u_star=r.u_star,
            p_tilde_1=None if r.p_tilde is None else float(r.p_tilde[0]),
            J=r.value, oracle_gap=oracle.gap))
    try:
        bounds = randomization_bounds(build_lq_scenario(sf))
    except Exception:
        bounds = None
    return SweepOutcome(sf, sweep, rows, bounds)


@dataclass(frozen=True, eq=False)
class VerifyOutcome:
    scenario: ScenarioFile
    solve: SolveOutcome
    oracle: OracleReport
    saddle: SaddleCheck
    mc: McResult
    value_agrees: bool
    gap_ok: bool
    mc_contains: bool
    verdict: bool

    @property
    def exit_code(self) -> int:
        return 0 if self.verdict else 4

    def csv(self) -> str:
        header = ["J", "j1_hat", "j2_hat", "oracle_gap", "u_argmin",
                  "saddle_pass", "controller_violation", "jammer_violation",
                  "mc_mean", "mc_half_width", "verdict"]
        row = [self.solve.report.value, self.oracle.j1_hat, self.oracle.j2_hat,
               self.oracle.gap, self.oracle.u_argmin, self.saddle.passed,
               self.saddle.controller_violation, self.saddle.jammer_violation,
               self.mc.mean, self.mc.half_width, self.verdict]
        return _csv_text(header, [row])

    def text(self) -> str:
        lines = [
            f"solver: kind={self.solve.report.kind} J={_fmt(self.solve.report.value)}",
            f"oracle: j1_hat={_fmt(self.oracle.j1_hat)} "
            f"j2_hat={_fmt(self.oracle.j2_hat)} gap={_fmt(self.oracle.gap)}",
            f"oracle witnesses: u_argmin={_fmt(self.oracle.u_argmin)} "
            f"p_argmax={_fmt(self.oracle.p_argmax[0])} {_fmt(self.oracle.p_argmax[1])}",
            f"saddle check (tol {_fmt(self.saddle.tol)}): "
            f"{'pass' if self.saddle.passed else 'FAIL'} "
            f"controller_violation={_fmt(self.saddle.controller_violation)} "
            f"jammer_violation={_fmt(self.saddle.jammer_violation)}",
            f"monte carlo: mean={_fmt(self.mc.mean)} "
            f"half_width={_fmt(self.mc.half_width)} "
            f"({self.scenario.trials} trials, seed {self.scenario.seed})",
            f"value agreement: {'yes' if self.value_agrees else 'NO'}; "
            f"gap within {_fmt(GAP_TOL)}: {'yes' if self.gap_ok else 'NO'}; "
            f"mc interval contains J: {'yes' if self.mc_contains else 'NO'}",
            f"verdict: {'pass' if self.verdict else 'FAIL'}",
        ]
        return "\n".join(lines) + "\n"


def run_oracle_and_simulate(sf: ScenarioFile, perturb_u: float = 0.0) -> VerifyOutcome:
    """Independent verification of the solver's answer.

    Grid values bound the game value from both sides, the saddle
    certificate audits the solver's (u_star, p_tilde) pointwise, and the
    Monte Carlo estimate replays the channel mechanism at (u_star, p_star).
    ``perturb_u`` deliberately offsets the certified control, which is a
    quick way to demonstrate that the certificate actually bites.
    """
    outcome = run_solve(sf)
    report = outcome.report
    spec = GridSpec(outcome.reduced.interval, sf.u_grid, sf.p_grid)
    oracle = grid_game_values(outcome.reduced, spec)

    u_star = float(report.u_star) + float(perturb_u)
    p_tilde = report.p_tilde if report.p_tilde is not None else np.array([1.0, 0.0])
    saddle = verify_saddle(outcome.reduced, u_star, p_tilde, spec, SADDLE_TOL)

    policy = report.p_star
    mc = run_monte_carlo(outcome.game, u_star, policy, sf.trials, sf.seed)

    value = float(report.value)
    value_agrees = abs(value - oracle.j1_hat) <= VALUE_TOL * (1.0 + abs(value))
    gap_ok = oracle.gap <= GAP_TOL * (1.0 + abs(value))
    mc_contains = abs(mc.mean - value) <= mc.half_width
    verdict = bool(value_agrees and gap_ok and mc_contains and saddle.passed)
    return VerifyOutcome(sf, outcome, oracle, saddle, mc,
                         value_agrees, gap_ok, mc_contains, verdict)


@dataclass(frozen=True, eq=False)
class CheckOutcome:
    scenario: ScenarioFile
    coercive: bool
    connected: bool
    ranking_ok: bool
    ranking_detail: str
    derivative_error: float
    interval: tuple
    interval_source: str
    failure: Optional[str]

    @property
    def passed(self) -> bool:
        return self.failure is None

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 3

    def csv(self) -> str:
        header = ["coercive", "connected", "ranking_ok", "derivative_error",
                  "interval_lo", "interval_hi", "interval_source", "passed"]
        row = [self.coercive, self.connected, self.ranking_ok,
               self.derivative_error, self.interval[0], self.interval[1],
               self.interval_source, self.passed]
        return _csv_text(header, [row])

    def text(self) -> str:
        lines = [
            f"coercive payoffs: {'yes' if self.coercive else 'NO'}",
            f"connected control sublevel set: {'yes' if self.connected else 'NO'}",
            f"channel ranking: {'yes' if self.ranking_ok else 'NO'} "
            f"({self.ranking_detail})",
            f"stage-cost derivative mismatch: {_fmt(self.derivative_error)}",
            f"control interval: [{_fmt(self.interval[0])}, {_fmt(self.interval[1])}] "
            f"({self.interval_source})",
            f"assumptions: {'pass' if self.passed else 'FAIL: ' + self.failure}",
        ]
        return "\n".join(lines) + "\n"


def run_check(sf: ScenarioFile) -> CheckOutcome:
    """Audit the standing assumptions without solving the game."""
    from .errors import CoercivityError, ConnectednessError

    game = build_game(sf)
    coercive = connected = True
    failure = None
    interval = game.control_hint
    source = "closed-form" if interval is not None else "bracketed"
    try:
        bracket = compute_control_set(game, sf.solver.margin, sf.solver)
        if interval is None:
            interval = bracket
    except CoercivityError as exc:
        coercive, failure = False, str(exc)
    except ConnectednessError as exc:
        connected, failure = False, str(exc)
    if interval is None:
        return CheckOutcome(sf, coercive, connected, False, "not checked",
                            float("nan"), (float("nan"), float("nan")),
                            source, failure)

    ranking = check_ranking(game, interval, sf.solver.ranking_points)
    if not ranking.ok and failure is None:
        failure = ranking.describe()
    deriv = validate_payoff_derivative(game, interval)
    if deriv > 1e-5 and failure is None:
        failure = f"stage-cost derivative disagrees with finite differences ({deriv:.3g})"
    return CheckOutcome(sf, coercive, connected, ranking.ok, ranking.describe(),
                        deriv, (interval.lo, interval.hi), source, failure)
