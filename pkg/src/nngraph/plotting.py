"""PNG figures for the CLI report path. Uses the non-interactive Agg backend."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def error_curves(rows: list[dict], path, title: str = "") -> Path:
    """Mean error against per-point budget with the 95% band shaded."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for alg in dict.fromkeys(r["algorithm"] for r in rows):
        sel = [r for r in rows if r["algorithm"] == alg]
        b = np.array([r["budget"] for r in sel], dtype=float)
        m = np.array([r["mean_error"] for r in sel], dtype=float)
        lo = np.array([r["lo95"] for r in sel], dtype=float)
        hi = np.array([r["hi95"] for r in sel], dtype=float)
        (line,) = ax.plot(b, m, marker="o", ms=3, label=alg)
        ax.fill_between(b, lo, hi, color=line.get_color(), alpha=0.2)
    if any(r["budget"] > 0 for r in rows):
        ax.set_xscale("symlog", linthresh=10)
    ax.set_xlabel("queries per point")
    ax.set_ylabel("error rate")
    ax.set_ylim(-0.02, 1.02)
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def scaling_plot(fits: dict, path, title: str = "") -> Path:
    """Mean total queries against n on log-log axes with the fitted power lines."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for alg, fit in fits.items():
        n = np.array(fit["sizes"], dtype=float)
        y = np.array(fit["mean_totals"], dtype=float)
        (line,) = ax.plot(n, y, "o", label=f"{alg} (slope {fit['power']['slope']:.2f})")
        p = fit["power"]
        ax.plot(n, np.exp(p["intercept"]) * n ** p["slope"], "-", color=line.get_color(), alpha=0.6)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("total queries")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
