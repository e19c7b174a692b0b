"""Figure rendering for sweep reports.

Renders the delimited sweep output as log-scale error-probability curves,
one line per (detector, label) series, written next to the data file.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_STYLES = ["o-", "s--", "^-.", "v:", "d-", "*--", "x-.", "+:"]


def render_sweep_figure(rows, out_path, xlabel, ylabel="symbol error probability",
                        title=None, logy=True, logx=False):
    """Plot sweep rows (dicts with param/value/detector/label/p_hat/ci_lo/
    ci_hi) grouped into one line per series; returns the path written."""
    series = {}
    for r in rows:
        if r.get("p_hat") in (None, ""):
            continue
        key = r.get("label") or r["detector"]
        series.setdefault(key, []).append(r)

    fig, ax = plt.subplots(figsize=(7.0, 4.8))
    for i, (key, pts) in enumerate(sorted(series.items())):
        pts = sorted(pts, key=lambda r: float(r["value"]))
        x = [float(r["value"]) for r in pts]
        y = [float(r["p_hat"]) for r in pts]
        lo = [max(float(r["p_hat"]) - float(r["ci_lo"]), 0.0) for r in pts]
        hi = [max(float(r["ci_hi"]) - float(r["p_hat"]), 0.0) for r in pts]
        ax.errorbar(x, y, yerr=[lo, hi], fmt=_STYLES[i % len(_STYLES)],
                    ms=4, lw=1.2, capsize=2, label=key)
    if logy:
        ax.set_yscale("log")
    if logx:
        ax.set_xscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def render_required_m_figure(rows, out_path, title=None):
    """Step plot of the particle count needed per scale value, one line per
    spacing."""
    series = {}
    for r in rows:
        series.setdefault(r["label"], []).append(r)
    fig, ax = plt.subplots(figsize=(7.0, 4.8))
    for i, (key, pts) in enumerate(sorted(series.items())):
        pts = sorted(pts, key=lambda r: float(r["value"]))
        x = [float(r["value"]) for r in pts]
        y = [int(r["m_required"]) for r in pts]
        ax.plot(x, y, _STYLES[i % len(_STYLES)], ms=4, lw=1.2, label=key)
    ax.set_yscale("log")
    ax.set_xlabel("scale c [s]")
    ax.set_ylabel("particles required")
    if title:
        ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path
