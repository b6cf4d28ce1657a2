"""Command-line front end: run figure reproductions, export patterns, summarize.

Exit codes: 0 on success, 2 when summarize finds a failed threshold, 1 on
errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .apals import PIPELINE_METHODS, run_pipeline
from .array import load_scenario, load_optimizer_settings
from .experiments import FIGURE_IDS, default_base_scenario, default_spec, run_experiment, summarize
from .hybrid import beampattern, export_beampattern, export_weights


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="beamsim",
                                     description="Hybrid receive-beamforming experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="reproduce one figure or table as CSV artifacts")
    run_p.add_argument("--figure", required=True, choices=FIGURE_IDS)
    run_p.add_argument("--scenario", type=Path, default=None,
                       help="scenario JSON overriding the figure's default base scenario")
    run_p.add_argument("--trials", type=int, default=20)
    run_p.add_argument("--seed", type=int, default=42, help="master seed for the ensemble")
    run_p.add_argument("--out", type=Path, required=True, help="output directory")
    run_p.add_argument("--population", type=int, default=40)
    run_p.add_argument("--iterations", type=int, default=100)

    pat_p = sub.add_parser("pattern", help="run one method and export its beampattern CSV")
    pat_p.add_argument("--method", required=True, choices=PIPELINE_METHODS)
    pat_p.add_argument("--scenario", type=Path, default=None,
                       help="scenario JSON (default: the 16-antenna null-steering setup)")
    pat_p.add_argument("--seed", type=int, default=42)
    pat_p.add_argument("--points", type=int, default=721)
    pat_p.add_argument("--out", type=Path, required=True, help="output CSV path")
    pat_p.add_argument("--weights-out", type=Path, default=None,
                       help="also export the digital weights as JSON")

    sum_p = sub.add_parser("summarize", help="grade a result directory against thresholds")
    sum_p.add_argument("--in", dest="in_dir", type=Path, required=True)
    return parser


def _cmd_run(args) -> int:
    base = load_scenario(args.scenario) if args.scenario else None
    kwargs = {}
    if args.scenario:
        opt = load_optimizer_settings(args.scenario)
        if "population" in opt:
            kwargs["n_population"] = int(opt["population"])
        if "iterations" in opt:
            kwargs["n_iterations"] = int(opt["iterations"])
    kwargs.setdefault("n_population", args.population)
    kwargs.setdefault("n_iterations", args.iterations)
    spec = default_spec(args.figure, args.out, n_trials=args.trials,
                        master_seed=args.seed, base_scenario=base, **kwargs)
    manifest = run_experiment(spec)
    print(f"wrote {len(manifest['files'])} files to {args.out}")
    return 0


def _cmd_pattern(args) -> int:
    scenario = load_scenario(args.scenario) if args.scenario else default_base_scenario("table2")
    solution = run_pipeline(scenario, args.method, seed=args.seed)
    grid = np.radians(np.linspace(-90.0, 90.0, args.points))
    gains = beampattern(solution.analog, solution.digital, grid)
    export_beampattern(args.out, grid, gains)
    if args.weights_out:
        export_weights(args.weights_out, solution.digital, scenario,
                       algorithm=solution.method, seed=args.seed)
    angle = solution.optimized_angle
    angle_text = f"{angle:.6e} rad" if angle is not None else "n/a"
    print(f"{solution.method}: SINR {solution.achieved_sinr:.2f} dB, "
          f"optimized angle {angle_text}, pattern -> {args.out}")
    return 0


def _cmd_summarize(args) -> int:
    report = summarize(args.in_dir)
    for check in report["checks"]:
        mark = "PASS" if check["passed"] else "FAIL"
        print(f"{mark} {check['name']}: {check['detail']}")
    print(f"status: {report['status']}")
    return 2 if report["status"] == "fail" else 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "pattern": _cmd_pattern, "summarize": _cmd_summarize}
    try:
        return handlers[args.command](args)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
