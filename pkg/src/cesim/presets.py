"""Experiment presets mirroring the comparative convergence figures.

fig1: N=50, T=3, f in {2,5,8,10}, rules CE / CWTM / multi-KRUM / mean plus
      a fault-free mean baseline, optimality-gap metric. One step size is
      resolved from the fault-free configuration and shared by every cell so
      curves differ only through f and the rule.
fig2: CE only, T in {1,3} at equal step size per f, optimality-gap metric.
fig3: sigmoid objective (PL fails), CE, T in {1,3}, mean squared honest
      gradient norm as the metric.

Each preset writes one CSV and one config JSON per cell, a summary.json
manifest, a standalone plot script, and a rendered PNG.
"""

from __future__ import annotations

import copy
import json
import os
from typing import List

from .config import build_experiment
from .engine import run_experiment
from .plotting import render_preset, write_plot_script
from .summary import summarize_trace
from .traceio import write_trace_csv

PRESET_NAMES = ("fig1", "fig2", "fig3")
_F_SWEEP = [2, 5, 8, 10]
_RULES = ["ce", "cwtm", "multi_krum", "mean"]


def _base_doc(seed: int) -> dict:
    return {
        "seed": seed,
        "rounds": 50,
        "local_steps": 3,
        "noise": {"sigma": 0.5, "minibatch": 1},
        "roster": {
            "n": 50,
            "byzantine": 0,
            "filter_f": 0,
            "attack": {"name": "sign_flip", "scale": 7.0},
        },
        "instance": {"kind": "regression_sin", "d": 20, "l": 25},
        "schedule": {"kind": "constant", "alpha": "auto"},
    }


def _with(doc: dict, *, f: int = None, rule: str = None, local_steps: int = None,
          alpha=None, kind: str = None) -> dict:
    out = copy.deepcopy(doc)
    if f is not None:
        out["roster"]["byzantine"] = f
        out["roster"]["filter_f"] = f
    if rule is not None:
        out["rule"] = {"name": rule}
    if local_steps is not None:
        out["local_steps"] = local_steps
    if alpha is not None:
        out["schedule"] = {"kind": "constant", "alpha": alpha}
    if kind is not None:
        out["instance"]["kind"] = kind
    return out


def _resolved_alpha(doc: dict) -> float:
    return build_experiment(doc).resolved_alpha


def preset_cells(name: str, seed: int) -> List[dict]:
    """Cell descriptors: config document plus plot panel/line labels."""
    base = _base_doc(seed)
    cells = []
    if name == "fig1":
        alpha = _resolved_alpha(_with(base, f=0, rule="mean"))
        for f in _F_SWEEP:
            for rule in _RULES:
                cells.append(
                    {
                        "name": f"{rule}_f{f}",
                        "doc": _with(base, f=f, rule=rule, alpha=alpha),
                        "panel": f"f={f}",
                        "line": rule,
                        "f": f,
                        "T": 3,
                        "rule": rule,
                    }
                )
        cells.append(
            {
                "name": "baseline_mean_f0",
                "doc": _with(base, f=0, rule="mean", alpha=alpha),
                "panel": "*",
                "line": "mean (no faults)",
                "f": 0,
                "T": 3,
                "rule": "mean",
            }
        )
        return cells
    if name in ("fig2", "fig3"):
        kind = "sigmoid_norm" if name == "fig3" else "regression_sin"
        base = _with(base, kind=kind, rule="ce")
        for f in _F_SWEEP:
            alpha = _resolved_alpha(_with(base, f=f, local_steps=3))
            for t in (1, 3):
                cells.append(
                    {
                        "name": f"ce_T{t}_f{f}",
                        "doc": _with(base, f=f, local_steps=t, alpha=alpha),
                        "panel": f"T={t}",
                        "line": f"f={f}",
                        "f": f,
                        "T": t,
                        "rule": "ce",
                    }
                )
        return cells
    raise ValueError(f"unknown preset {name!r} (expected one of {PRESET_NAMES})")


def preset_metric(name: str) -> str:
    return "mean_sq_grad" if name == "fig3" else "optimality_gap"


def run_preset(name: str, out_dir: str, seed: int = 0, render: bool = True) -> dict:
    """Run every cell of a preset and write its report files; returns the manifest."""
    metric = preset_metric(name)
    os.makedirs(out_dir, exist_ok=True)
    manifest = {"preset": name, "seed": seed, "metric": metric, "cells": []}
    for cell in preset_cells(name, seed):
        loaded = build_experiment(cell["doc"])
        trace = run_experiment(loaded.experiment, config_snapshot=loaded.snapshot())
        csv_name = f"{cell['name']}.csv"
        write_trace_csv(trace, os.path.join(out_dir, csv_name))
        with open(os.path.join(out_dir, f"{cell['name']}.config.json"), "w") as fh:
            json.dump(loaded.snapshot(), fh, indent=2, sort_keys=True)
        entry = {
            "name": cell["name"],
            "csv": csv_name,
            "panel": cell["panel"],
            "line": cell["line"],
            "f": cell["f"],
            "T": cell["T"],
            "rule": cell["rule"],
            "aborted": trace.abort_reason,
            "summary": None,
        }
        if trace.completed:
            entry["summary"] = summarize_trace(trace, metric=metric).to_dict()
        manifest["cells"].append(entry)
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    write_plot_script(out_dir)
    if render:
        render_preset(out_dir)
    return manifest
