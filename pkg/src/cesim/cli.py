"""Command-line interface.

Exit codes: 0 success, 1 validation error, 2 runtime abort (divergence),
3 I/O failure.
"""

from __future__ import annotations

import argparse
import copy
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from .config import LoadedExperiment, build_experiment, load_config
from .engine import run_experiment
from .errors import ConfigurationError, GenerationError
from .presets import PRESET_NAMES, run_preset
from .summary import summarize_rows
from .traceio import read_trace_csv, write_trace_csv, write_trace_json

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_ABORT = 2
EXIT_IO = 3

_AXES = ("byzantine_f", "local_T", "rule", "seed")


def _echo_report(loaded: LoadedExperiment) -> None:
    if loaded.report is None:
        print("advisory: no condition report (constants unavailable)")
        return
    rep = loaded.report
    print(f"advisory: L_hat={rep.L_hat:.6g} mu_hat=" + (f"{rep.mu_hat:.6g}" if rep.mu_hat else "n/a"))
    if rep.alpha_cap is not None:
        print(
            f"advisory: alpha={rep.alpha:.6g} certified cap={rep.alpha_cap:.6g} "
            f"(rate {rep.alpha_cap_rate:.6g}, proof {rep.alpha_cap_proof:.6g}) -> "
            + ("ok" if rep.step_ok else "exceeds cap")
        )
        print(
            f"advisory: byzantine fraction {rep.fraction_filter:.6g} vs bound "
            f"{rep.fraction_bound:.6g} -> " + ("ok" if rep.fraction_ok else "violated")
        )
    print(f"advisory: suggested practical alpha={rep.alpha_suggested:.6g}")


def _run_one(loaded: LoadedExperiment, out_dir: str) -> int:
    os.makedirs(out_dir, exist_ok=True)
    trace = run_experiment(loaded.experiment, config_snapshot=loaded.snapshot())
    report = loaded.report.to_dict() if loaded.report else None
    write_trace_csv(trace, os.path.join(out_dir, "trace.csv"))
    write_trace_json(trace, os.path.join(out_dir, "trace.json"), condition_report=report)
    with open(os.path.join(out_dir, "config.json"), "w") as fh:
        json.dump(loaded.snapshot(), fh, indent=2, sort_keys=True)
    if trace.abort_reason:
        print(f"aborted: {trace.abort_reason}", file=sys.stderr)
        return EXIT_ABORT
    return EXIT_OK


def cmd_run(args) -> int:
    loaded = load_config(args.config)
    _echo_report(loaded)
    return _run_one(loaded, args.out)


def cmd_preset(args) -> int:
    manifest = run_preset(args.name, args.out, seed=args.seed)
    aborted = [c["name"] for c in manifest["cells"] if c["aborted"]]
    if aborted:
        print(f"aborted cells: {aborted}", file=sys.stderr)
        return EXIT_ABORT
    return EXIT_OK


def _axis_docs(doc: dict, axis: str, values):
    for value in values:
        out = copy.deepcopy(doc)
        if axis == "byzantine_f":
            out.setdefault("roster", {})["byzantine"] = int(value)
            out["roster"]["filter_f"] = int(value)
        elif axis == "local_T":
            out["local_steps"] = int(value)
        elif axis == "rule":
            out["rule"] = {"name": str(value)}
        elif axis == "seed":
            out["seed"] = int(value)
        yield value, out


def cmd_sweep(args) -> int:
    if "=" not in args.axis:
        raise ConfigurationError("--axis must look like name=v1,v2,...")
    axis, _, raw = args.axis.partition("=")
    if axis not in _AXES:
        raise ConfigurationError(f"axis must be one of {_AXES}")
    values = [v.strip() for v in raw.split(",") if v.strip()]
    if not values:
        raise ConfigurationError("axis needs at least one value")
    if args.reps < 1:
        raise ConfigurationError("--reps must be >= 1")

    with open(args.config) as fh:
        base = json.load(fh)

    cells = []
    for value, doc in _axis_docs(base, axis, values):
        for rep in range(args.reps):
            cell_doc = copy.deepcopy(doc)
            cell_doc["seed"] = int(cell_doc.get("seed", 0)) + 1000003 * rep
            cells.append((f"{axis}-{value}", f"rep-{rep}", cell_doc))

    def run_cell(cell):
        axis_dir, rep_dir, doc = cell
        loaded = build_experiment(doc, base_dir=os.path.dirname(os.path.abspath(args.config)))
        return _run_one(loaded, os.path.join(args.out, axis_dir, rep_dir))

    workers = max(1, int(os.environ.get("CESIM_WORKERS", "1")))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            codes = list(pool.map(run_cell, cells))
    else:
        codes = [run_cell(cell) for cell in cells]
    return max(codes)


def cmd_check(args) -> int:
    loaded = load_config(args.config)
    _echo_report(loaded)
    if loaded.report is not None:
        print(json.dumps(loaded.report.to_dict(), indent=2, sort_keys=True))
    return EXIT_OK


def cmd_summarize(args) -> int:
    rows = read_trace_csv(args.trace)
    stats = summarize_rows(rows, metric=args.metric)
    print(json.dumps(stats.to_dict(), indent=2, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cesim",
        description="Byzantine fault-tolerant federated local SGD simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a single experiment from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("preset", help="run a figure preset")
    p.add_argument("name", choices=PRESET_NAMES)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_preset)

    p = sub.add_parser("sweep", help="sweep one config axis with replications")
    p.add_argument("--config", required=True)
    p.add_argument("--axis", required=True, help="name=v1,v2,... (byzantine_f|local_T|rule|seed)")
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("check", help="theory advisory for a config, no run")
    p.add_argument("--config", required=True)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("summarize", help="summary statistics for a trace CSV")
    p.add_argument("--trace", required=True)
    p.add_argument("--metric", default="optimality_gap", choices=["optimality_gap", "mean_sq_grad"])
    p.set_defaults(fn=cmd_summarize)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigurationError, GenerationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
