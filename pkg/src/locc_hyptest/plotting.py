"""SVG trade-off plots rendered from sweep CSV files.

Line conventions: thin solid for one-way, dashed for the two-way bound,
thick solid for separable and dotted for global.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLES = {
    "one_way": dict(color="black", linestyle="-", linewidth=0.8, label="one-way LOCC"),
    "two_way_tilde": dict(color="black", linestyle="--", linewidth=1.2, label="two-way bound"),
    "separable": dict(color="black", linestyle="-", linewidth=2.6, label="separable"),
    "global": dict(color="black", linestyle=":", linewidth=1.4, label="global"),
}
ORDER = ("one_way", "two_way_tilde", "separable", "global")


def read_curves(csv_path) -> tuple:
    """Return (x_name, {class: (xs, betas)}) from a sweep CSV."""
    with open(csv_path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{csv_path}: no rows")
    x_name = "lambda" if "lambda" in rows[0] else "alpha"
    out: dict = {}
    for row in rows:
        xs, ys = out.setdefault(row["class"], ([], []))
        xs.append(float(row[x_name]))
        ys.append(float(row["beta"]))
    for cls, (xs, ys) in out.items():
        order = sorted(range(len(xs)), key=xs.__getitem__)
        out[cls] = ([xs[i] for i in order], [ys[i] for i in order])
    return x_name, out


def plot_csv(csv_path, out_path, title: str = "") -> Path:
    x_name, data = read_curves(csv_path)
    plt.rcParams["svg.hashsalt"] = "locc-hyptest"  # stable element ids
    fig, ax = plt.subplots(figsize=(4.5, 3.6))
    for cls in ORDER:
        if cls in data:
            xs, ys = data[cls]
            ax.plot(xs, ys, **STYLES[cls])
    ax.set_xlabel("lambda" if x_name == "lambda" else "type 1 error alpha")
    ax.set_ylabel("type 2 error beta")
    ax.set_ylim(-0.02, 1.02)
    if title:
        ax.set_title(title, fontsize=9)
    ax.legend(fontsize=7, frameon=False)
    fig.tight_layout()
    out_path = Path(out_path)
    fig.savefig(out_path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return out_path
