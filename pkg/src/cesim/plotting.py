"""Figure rendering for preset output directories.

Reads the summary.json manifest a preset wrote next to its CSVs and draws
one semilog panel per panel label, one line per cell. Also emits a
standalone plot script into the directory so figures can be regenerated
without this package installed.
"""

from __future__ import annotations

import csv
import json
import math
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def _read_metric(path: str, metric: str):
    ks, vals = [], []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            ks.append(int(rec["round"]))
            vals.append(float(rec[metric]))
    return ks, vals


def render_preset(out_dir: str) -> str:
    with open(os.path.join(out_dir, "summary.json")) as fh:
        manifest = json.load(fh)
    metric = manifest["metric"]
    cells = manifest["cells"]
    panels = []
    for cell in cells:
        if cell["panel"] != "*" and cell["panel"] not in panels:
            panels.append(cell["panel"])
    ncols = 2 if len(panels) > 1 else 1
    nrows = max(1, math.ceil(len(panels) / ncols))
    fig, axes = plt.subplots(nrows, ncols, figsize=(6 * ncols, 4 * nrows), squeeze=False)
    flat = [ax for row in axes for ax in row]
    for ax, panel in zip(flat, panels):
        for cell in cells:
            if cell["panel"] not in (panel, "*"):
                continue
            ks, vals = _read_metric(os.path.join(out_dir, cell["csv"]), metric)
            ax.semilogy(ks, [max(v, 1e-300) for v in vals], label=cell["line"])
        ax.set_title(panel)
        ax.set_xlabel("round")
        ax.set_ylabel(metric)
        ax.legend(fontsize=8)
        ax.grid(True, which="both", alpha=0.3)
    for ax in flat[len(panels):]:
        ax.set_visible(False)
    fig.suptitle(manifest["preset"])
    fig.tight_layout()
    out_path = os.path.join(out_dir, f"{manifest['preset']}.png")
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
    return out_path


_PLOT_SCRIPT = '''#!/usr/bin/env python3
"""Regenerate the preset figure from the CSVs in this directory."""
import csv, json, math, os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
with open(os.path.join(HERE, "summary.json")) as fh:
    manifest = json.load(fh)
metric, cells = manifest["metric"], manifest["cells"]

panels = []
for cell in cells:
    if cell["panel"] != "*" and cell["panel"] not in panels:
        panels.append(cell["panel"])
ncols = 2 if len(panels) > 1 else 1
nrows = max(1, math.ceil(len(panels) / ncols))
fig, axes = plt.subplots(nrows, ncols, figsize=(6 * ncols, 4 * nrows), squeeze=False)
flat = [ax for row in axes for ax in row]
for ax, panel in zip(flat, panels):
    for cell in cells:
        if cell["panel"] not in (panel, "*"):
            continue
        ks, vals = [], []
        with open(os.path.join(HERE, cell["csv"]), newline="") as fh:
            for rec in csv.DictReader(fh):
                ks.append(int(rec["round"]))
                vals.append(max(float(rec[metric]), 1e-300))
        ax.semilogy(ks, vals, label=cell["line"])
    ax.set_title(panel)
    ax.set_xlabel("round")
    ax.set_ylabel(metric)
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
for ax in flat[len(panels):]:
    ax.set_visible(False)
fig.suptitle(manifest["preset"])
fig.tight_layout()
fig.savefig(os.path.join(HERE, manifest["preset"] + ".png"), dpi=120)
print("wrote", manifest["preset"] + ".png")
'''


def write_plot_script(out_dir: str) -> str:
    path = os.path.join(out_dir, "plot.py")
    with open(path, "w") as fh:
        fh.write(_PLOT_SCRIPT)
    return path
