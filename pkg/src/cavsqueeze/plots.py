"""Static SVG renderings of the standard result figures from their CSVs.

Plots are conveniences generated from CSV files, never inputs to any
computation.  Outputs are byte-deterministic: fixed hash salt, no date
metadata.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = "cavsqueeze"

# figure id -> (required columns, x column, y column, log axes, labels)
FIGURES = {
    "2a": (("s", "xi2"), "s", "xi2", (False, True),
           ("scaled time s", "squeezing xi^2")),
    "2b": (("area", "xi2"), "area", "xi2", (True, True),
           ("state area A", "squeezing xi^2")),
    "3a": (("d", "xi2_t"), "d", "xi2_t", (True, True),
           ("detuning d", "time-optimized xi^2")),
    "3b": (("area", "xi2_t"), "area", "xi2_t", (True, True),
           ("state area A", "time-optimized xi^2")),
    "3c": (("d", "xi2_t"), "d", "xi2_t", (True, True),
           ("detuning d", "time-optimized xi^2")),
    "4a": (("d", "xi2_t"), "d", "xi2_t", (True, True),
           ("detuning d", "time-optimized xi^2")),
    "4b": (("t", "xi2_mean"), "t", "xi2_mean", (False, True),
           ("time (1/gamma_sc)", "mean xi^2")),
    "4c": (("p", "xi2_qnd"), "p", "xi2_qnd", (True, True),
           ("spin-flip probability p", "predicted xi^2")),
}

# optional column used to split rows into separate lines
GROUP_COLUMNS = ("NC", "eta", "label", "C")


def read_csv_columns(path) -> dict[str, list]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValueError(f"{path}: empty CSV")
        rows = list(reader)
    if not rows:
        raise ValueError(f"{path}: CSV has a header but no data rows")
    out = {name: [] for name in reader.fieldnames}
    for row in rows:
        for name in reader.fieldnames:
            val = row[name]
            try:
                val = float(val)
            except (TypeError, ValueError):
                pass
            out[name].append(val)
    return out


def emit_plot(csv_path, figure_id: str, out_path) -> Path:
    """Render the named figure style from a CSV; returns the SVG path."""
    if figure_id not in FIGURES:
        raise ValueError(f"unknown figure id {figure_id!r}; choose from {sorted(FIGURES)}")
    required, xcol, ycol, (logx, logy), (xlabel, ylabel) = FIGURES[figure_id]
    data = read_csv_columns(csv_path)
    missing = [c for c in required if c not in data]
    if missing:
        raise ValueError(f"{csv_path}: missing columns {missing} for figure {figure_id}")

    group_col = next((g for g in GROUP_COLUMNS if g in data), None)
    fig, ax = plt.subplots(figsize=(4.2, 3.2), dpi=100)
    if group_col is not None:
        seen = []
        for val in data[group_col]:
            if val not in seen:
                seen.append(val)
        for val in seen:
            idx = [i for i, v in enumerate(data[group_col]) if v == val]
            ax.plot([data[xcol][i] for i in idx], [data[ycol][i] for i in idx],
                    label=f"{group_col}={val:g}" if isinstance(val, float) else f"{group_col}={val}")
        ax.legend(fontsize=7)
    else:
        ax.plot(data[xcol], data[ycol])
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return out_path
