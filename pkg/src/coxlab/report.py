"""Delimited output and figure rendering for the command-line tools.

CSV files carry `# key: value` comment headers embedding the tool version
and the fully resolved run configuration; JSON payloads embed the same
fields.  Reals are serialized with 17 significant digits (lossless for
doubles).  Each report command also renders a matplotlib figure next to its
delimited output; polygons are drawn in the Klein projection, where
geodesics are straight chords.
"""

from __future__ import annotations

import csv
import json
import math
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from . import __version__


def _fmt(x):
    if isinstance(x, float):
        return format(x, ".17g")
    return x


def run_meta(config: dict) -> dict:
    return {"tool": "coxlab", "version": __version__, "config": config}


def write_csv(path, rows, fieldnames, config):
    with open(path, "w", newline="") as f:
        for key, val in run_meta(config).items():
            f.write(f"# {key}: {json.dumps(val)}\n")
        w = csv.DictWriter(f, fieldnames=fieldnames)
        w.writeheader()
        for row in rows:
            w.writerow({k: _fmt(row.get(k)) for k in fieldnames})


def write_json(path, rows, config):
    payload = run_meta(config)
    payload["rows"] = rows
    with open(path, "w") as f:
        json.dump(payload, f, indent=1, default=_json_default)
        f.write("\n")


def _json_default(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    raise TypeError(f"not serializable: {type(x)}")


def figure_path(out_path) -> str:
    stem, _ = os.path.splitext(out_path)
    return stem + ".png"


def plot_thin_rows(rows, path, bound=None):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    by_pid = {}
    for r in rows:
        by_pid.setdefault(r["polygon_id"], []).append(r)
    for pid, rs in by_pid.items():
        rs = sorted(rs, key=lambda r: r["R"])
        R = [r["R"] for r in rs]
        y = [r["ratio"] for r in rs]
        err = [3 * r["stderr"] for r in rs]
        ax.errorbar(R, y, yerr=err, marker="o", capsize=2, label=str(pid))
    if bound is not None:
        ax.axhline(bound, color="k", ls="--", lw=1, label="proved bound at R=2")
    ax.set_xlabel("displacement threshold R")
    ax.set_ylabel("thin-part area fraction")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(fontsize=7, loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_tree_rows(rows, path):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    n = np.array([r["n"] for r in rows], dtype=float)
    order = np.argsort(n)
    n = n[order]
    rad = np.array([r["radius"] for r in rows], dtype=float)[order]
    mld = np.array([r["min_leaf_depth"] for r in rows], dtype=float)[order]
    ax.plot(n, rad, "o-", ms=3, label="radius from root")
    ax.plot(n, mld, "s-", ms=3, label="min leaf depth")
    ax.plot(n, np.floor(np.log2(n)) + 1, "k--", lw=1, label="floor(log2 n) ± 1")
    ax.plot(n, np.floor(np.log2(n)) - 1, "k--", lw=1)
    ax.set_xscale("log", base=2)
    ax.set_xlabel("polygon size n")
    ax.set_ylabel("dual-tree depth")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_polygon(P, path, tri=None, title=None):
    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    circle = plt.Circle((0, 0), 1.0, fill=False, color="0.7", lw=1)
    ax.add_patch(circle)
    K = np.array([v[1:] / v[0] for v in P.vertices])
    ring = np.vstack([K, K[:1]])
    ax.plot(ring[:, 0], ring[:, 1], "b-", lw=1.5)
    if tri is not None:
        for a, b in tri.diagonals:
            ax.plot([K[a, 0], K[b, 0]], [K[a, 1], K[b, 1]], "g-", lw=0.6)
    ax.plot(K[:, 0], K[:, 1], "b.", ms=3)
    ax.set_aspect("equal")
    ax.set_xlim(-1.05, 1.05)
    ax.set_ylim(-1.05, 1.05)
    ax.axis("off")
    if title:
        ax.set_title(title, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_ball_rows(rows, path):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    L = [r["L"] for r in rows]
    size = [r["ball_size"] for r in rows]
    ax.semilogy(L, size, "o-")
    ax.set_xlabel("word length L")
    ax.set_ylabel("ball size")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_verify_rows(reports, path):
    fig, ax = plt.subplots(figsize=(6.5, 0.45 * sum(len(r["checks"]) for r in reports) + 1))
    names, slacks, colors = [], [], []
    for rep in reports:
        for c in rep["checks"]:
            names.append(f'{rep["suite"]}: {c["name"]}')
            slacks.append(c["slack"])
            colors.append("tab:green" if c["passed"] else "tab:red")
    y = np.arange(len(names))
    mag = [math.log10(abs(s) + 1e-18) for s in slacks]
    ax.barh(y, mag, color=colors)
    ax.set_yticks(y)
    ax.set_yticklabels(names, fontsize=6)
    ax.set_xlabel("log10 |slack|  (green = passed)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
