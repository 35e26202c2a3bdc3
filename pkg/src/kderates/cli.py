# cli.py
# Command-line entry point.  Subcommands map onto the experiment modes;
# every one takes --config PATH, --out DIR and --seed N (seed overrides
# the config's base_seed).  Exit code 0 on success, 2 on failure with a
# machine-readable JSON error summary on stderr.

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .harness import DeviationReport, ExperimentConfig, dumps_17g, emit_plots, fit_rate, run

_SUBCOMMAND_MODES = {
    "simulate": ("rate_in_h", "rate_in_n"),
    "moments": ("moment_scaling",),
    "voldim": ("voldim",),
    "bounds": ("bounds",),
    "covering": ("covering",),
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kderates", description="KDE sup-deviation and dimension experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in [*_SUBCOMMAND_MODES, "fit"]:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="YAML experiment config")
        p.add_argument("--out", default=None, help="output directory (overrides the config)")
        p.add_argument("--seed", type=int, default=None, help="override base_seed")
        if name == "fit":
            p.add_argument("--report", default=None, help="report.json path (default: <out>/report.json)")
            p.add_argument("--axis", default=None, choices=["h", "n"], help="fit axis (default: inferred)")
            p.add_argument("--statistic", default=None, choices=["mean", "median"])
    return parser


def _load_config(args) -> tuple[ExperimentConfig, Path]:
    config = ExperimentConfig.from_yaml(args.config)
    if args.seed is not None:
        config.raw["base_seed"] = int(args.seed)
    out_dir = Path(args.out) if args.out else Path(config.raw.get("out_dir", "out"))
    return config, out_dir


def _cmd_fit(args) -> int:
    config, out_dir = _load_config(args)
    report_path = Path(args.report) if args.report else out_dir / "report.json"
    report = DeviationReport.load(report_path)
    axis = args.axis
    if axis is None:
        axis = "h" if len({c.h for c in report.cells}) > 1 else "n"
    fit = fit_rate(report, axis, args.statistic)
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {
        "axis": axis,
        "statistic": args.statistic or report.statistic,
        "slope": fit.slope,
        "intercept": fit.intercept,
        "residual": fit.residual,
        "n_points": fit.n_points,
    }
    (out_dir / f"fit_{axis}.json").write_text(dumps_17g(payload) + "\n", encoding="utf-8")
    emit_plots(report, out_dir, args.statistic)
    print(f"fit axis={axis} slope={fit.slope:.6g} residual={fit.residual:.3g}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "fit":
            return _cmd_fit(args)
        config, out_dir = _load_config(args)
        allowed = _SUBCOMMAND_MODES[args.command]
        if config.mode not in allowed:
            raise ValueError(f"config mode {config.mode!r} not valid for '{args.command}' (expects {allowed})")
        report = run(config, out_dir)
        failures = getattr(report, "failures", None) or (report.get("failures") if isinstance(report, dict) else None)
        print(f"{args.command}: wrote artifacts to {out_dir}")
        if failures:
            print(f"{len(failures)} cell failure(s) recorded in the report", file=sys.stderr)
        return 0
    except Exception as exc:
        summary = {"error": str(exc), "type": type(exc).__name__, "command": args.command}
        print(dumps_17g(summary), file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
