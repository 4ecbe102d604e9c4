"""Command-line front end for the simulation harness.

Exit codes: 0 success, 2 usage error, 3 unreadable config, 4 bad override,
5 config validation failure, 6 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .config import (
    ConfigError,
    ConfigReadError,
    OverrideError,
    apply_overrides,
    compare_from_dict,
    read_config,
    resolve,
    scenario_from_dict,
)
from .harness import (
    compare_models,
    resolve_field,
    run_scenario,
    save_field_csv,
    write_outputs,
)

EXIT_OK = 0
EXIT_CONFIG_READ = 3
EXIT_OVERRIDE = 4
EXIT_CONFIG_INVALID = 5
EXIT_RUNTIME = 6

_EPILOG = """\
config keys (dotted form usable with --set), with defaults:
  grid.x_min/x_max/y_min/y_max   search region bounds (0, 100, 0, 100)
  grid.n_x, grid.n_y             grid discretization counts (100, 100)
  field.seed                     synthetic-field seed (0)
  field.bumps                    number of Gaussian bumps (6)
  field.amplitude, field.width   bump parameter ranges ([1.0, 3.5], [8.0, 25.0])
  field.path                     load the true field from a CSV instead
  modes.rule                     'largest' (smallest (u+1)^2+(v+1)^2 score) or 'rect'
  modes.count                    retained-mode count, or [kx, ky] for 'rect' (60)
  quantizer.thresholds           level thresholds ([1.0, 2.0, 3.0], i.e. 4 levels)
  noise.kind, noise.variance     'gaussian' (variance 0.1) or 'none'
  estimator.eta                  logistic sharpness (5.0)
  estimator.sigma_lm             per-step ridge damping (5.0e-05)
  estimator.delta                forgetting factor in (0, 1] (1.0)
  planner.rho0                   travel distance between measurements (10.0)
  planner.epsilon                exploration probability (0.1)
  planner.candidate_grid         candidate-target lattice ([6, 6] -> 36 indices)
  run.iterations, run.runs       measurements per run (2000), seeded runs (10)
  run.seed                       master seed (7)
  run.start_index                initial position index (grid center)
  [[switch]]                     mid-run events: at, mode_count, [switch.field]
  compare.mode_counts            retained-mode counts for `compare`
  compare.rbf_layouts            RBF center lattices for `compare`
  ssim.*                         similarity-metric parameters
"""


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dctfield",
        description="Simulate scalar-field estimation from quantized point measurements.",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_outdir=True):
        p.add_argument("--config", required=True, help="TOML scenario config")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE", help="override a config key (repeatable)")
        p.add_argument("--seed", type=int, default=None, help="override run.seed")
        if needs_outdir:
            p.add_argument("--output-dir", default="out", help="directory for outputs")

    p_est = sub.add_parser("estimate", help="run the estimation scenario, write CSVs")
    common(p_est)
    p_est.add_argument("--jobs", type=int, default=1,
                       help="parallel processes for independent runs")

    p_cmp = sub.add_parser("compare", help="best-case model comparison table")
    common(p_cmp)

    p_gen = sub.add_parser("field-gen", help="write the configured synthetic field as CSV")
    common(p_gen)

    p_val = sub.add_parser("validate-config", help="check a config and echo it as JSON")
    common(p_val, needs_outdir=False)
    return parser


def _resolved_config(args) -> dict:
    raw = read_config(args.config)
    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append(f"run.seed={args.seed}")
    raw = apply_overrides(raw, overrides)
    return resolve(raw)


def _cmd_estimate(args) -> int:
    resolved = _resolved_config(args)
    cfg = scenario_from_dict(resolved)
    records = run_scenario(cfg, jobs=args.jobs)
    written = write_outputs(cfg, resolved, records, Path(args.output_dir))
    print(f"wrote {len(written)} files to {args.output_dir}")
    return EXIT_OK


def _cmd_compare(args) -> int:
    resolved = _resolved_config(args)
    scenario, mode_counts, layouts = compare_from_dict(resolved)
    field = resolve_field(scenario.field, scenario.grid)
    rows = compare_models(field, mode_counts, layouts, scenario.ssim_params)
    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / "comparison.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model", "count", "layout", "mse", "ssim"])
        for row in rows:
            writer.writerow([row["model"], row["count"], row.get("layout", ""),
                             repr(row["mse"]), repr(row["ssim"])])
    for row in rows:
        label = row.get("layout", str(row["count"]))
        print(f"{row['model']:>4} {label:>8}  mse={row['mse']:.6g}  ssim={row['ssim']:.6g}")
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_field_gen(args) -> int:
    resolved = _resolved_config(args)
    cfg = scenario_from_dict(resolved)
    field = resolve_field(cfg.field, cfg.grid)
    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / "field.csv"
    save_field_csv(field, path)
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    resolved = _resolved_config(args)
    scenario_from_dict(resolved)  # raises on invalid values
    if "compare" in resolved:
        compare_from_dict(resolved)
    print(json.dumps(resolved, indent=2))
    return EXIT_OK


_COMMANDS = {
    "estimate": _cmd_estimate,
    "compare": _cmd_compare,
    "field-gen": _cmd_field_gen,
    "validate-config": _cmd_validate,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigReadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_READ
    except OverrideError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OVERRIDE
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_INVALID
    except (RuntimeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
