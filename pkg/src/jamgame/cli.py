"""Command-line interface.

Subcommands: solve, sweep, oracle, simulate, check. Every command reads a
scenario file (--scenario). With --out PATH the text report, CSV, and a
rendered figure (solve and sweep) are written as PATH.txt / PATH.csv /
PATH.png; without it the text report goes to stdout and the CSV is
skipped. Relative --out paths are rooted at $JAMGAME_OUT_DIR when set.

Exit codes: 0 success, 2 parse or validation error, 3 assumption failure,
4 verification verdict failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

from .errors import AssumptionError, ContractViolationError, ScenarioError, \
    UnsupportedOperationError
from .runner import run_check, run_oracle_and_simulate, run_solve, run_sweep
from .scenario import SweepSpec, load_scenario

OUT_DIR_ENV = "JAMGAME_OUT_DIR"

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_ASSUMPTION = 3
EXIT_VERDICT = 4


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jamgame",
        description="Saddle-point analysis of one-step controller/jammer "
                    "games over switched binary packet-dropping channels.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--scenario", required=True, help="scenario YAML file")
        p.add_argument("--out", default=None,
                       help="output path stem; writes <out>.txt/.csv(/.png). "
                            f"Relative paths are rooted at ${OUT_DIR_ENV} when set")
        p.add_argument("--seed", type=int, default=None, help="override mc.seed")
        p.add_argument("--trials", type=int, default=None, help="override mc.trials")
        p.add_argument("--u-grid", type=int, default=None, help="override oracle.u_grid")
        p.add_argument("--p-grid", type=int, default=None, help="override oracle.p_grid")
        p.add_argument("--no-plot", action="store_true",
                       help="skip figure rendering even when --out is given")

    p_solve = sub.add_parser("solve", help="classify the game and report the saddle")
    common(p_solve)

    p_sweep = sub.add_parser("sweep", help="solve across a parameter sweep (lq only)")
    common(p_sweep)
    p_sweep.add_argument("--sweep-param", required=True,
                         choices=["tau", "state-scale"])
    p_sweep.add_argument("--sweep-range", required=True, nargs=2, type=float,
                         metavar=("LO", "HI"))
    p_sweep.add_argument("--sweep-points", required=True, type=int)

    p_oracle = sub.add_parser("oracle", help="verify the solver against grid "
                                             "game values and the saddle certificate")
    common(p_oracle)
    p_oracle.add_argument("--perturb-u", type=float, default=0.0,
                          help="offset the certified control before checking "
                               "(a failing certificate demonstrates the check works)")

    p_sim = sub.add_parser("simulate", help="Monte Carlo estimate of the game "
                                            "value at the solver's saddle")
    common(p_sim)

    p_check = sub.add_parser("check", help="audit the standing assumptions only")
    common(p_check)
    return parser


def _resolve_out(out: str | None) -> Path | None:
    if out is None:
        return None
    path = Path(out)
    if not path.is_absolute():
        base = os.environ.get(OUT_DIR_ENV)
        if base:
            path = Path(base) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _apply_overrides(sf, args):
    if args.seed is not None:
        sf = replace(sf, seed=args.seed)
    if args.trials is not None:
        sf = replace(sf, trials=args.trials)
    if args.u_grid is not None:
        sf = replace(sf, u_grid=args.u_grid)
    if args.p_grid is not None:
        sf = replace(sf, p_grid=args.p_grid)
    return sf


def _emit(outcome, out: Path | None, plot: bool, figure=None) -> None:
    text = outcome.text()
    if out is None:
        sys.stdout.write(text)
        return
    out.with_suffix(".txt").write_text(text, encoding="utf-8")
    out.with_suffix(".csv").write_text(outcome.csv(), encoding="utf-8")
    written = [str(out.with_suffix(".txt")), str(out.with_suffix(".csv"))]
    if plot and figure is not None:
        written.append(figure(out.with_suffix(".png")))
    sys.stdout.write(text)
    sys.stdout.write("wrote: " + ", ".join(written) + "\n")


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        sf = _apply_overrides(load_scenario(args.scenario), args)
        out = _resolve_out(args.out)
        plot = not args.no_plot

        if args.command == "solve":
            outcome = run_solve(sf)
            from .plots import render_solve_figure
            _emit(outcome, out, plot, lambda p: render_solve_figure(outcome, p))
        elif args.command == "sweep":
            lo, hi = args.sweep_range
            sweep = SweepSpec(args.sweep_param, lo, hi, args.sweep_points)
            outcome = run_sweep(sf, sweep)
            from .plots import render_sweep_figure
            _emit(outcome, out, plot, lambda p: render_sweep_figure(outcome, p))
        elif args.command == "oracle":
            outcome = run_oracle_and_simulate(sf, perturb_u=args.perturb_u)
            _emit(outcome, out, plot)
        elif args.command == "simulate":
            outcome = run_oracle_and_simulate(sf)
            _emit(outcome, out, plot)
        else:  # check
            outcome = run_check(sf)
            _emit(outcome, out, plot)
        return outcome.exit_code
    except (ScenarioError, UnsupportedOperationError, ContractViolationError,
            FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except AssumptionError as exc:
        print(f"assumption failure: {exc}", file=sys.stderr)
        return EXIT_ASSUMPTION


if __name__ == "__main__":
    raise SystemExit(main())
