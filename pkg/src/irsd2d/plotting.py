"""Figures written next to the CSV reports."""
from __future__ import annotations

import functools

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

LABELS = {
    "proposed-tts": "Proposed TTS",
    "sts": "STS",
    "max-to-max-tts": "Max-to-max TTS",
    "random-irs": "Random IRS",
    "no-irs": "No IRS",
}
MARKERS = {"proposed-tts": "o", "sts": "s", "max-to-max-tts": "^", "random-irs": "v",
           "no-irs": "x"}
AXIS_LABELS = {"M": "Number of reflecting elements $M$", "y_I": "IRS position $y_I$ (m)",
               "J": "Number of helpers $J$", "frames": "Frames $T_f$"}

RC = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "savefig.dpi": 150,
}


def _styled(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        with plt.rc_context(RC):
            return fn(*args, **kwargs)
    return wrapper


def _figure():
    return plt.subplots(figsize=(3.6, 2.8))


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)


@_styled
def plot_convergence(curves: dict, path) -> None:
    """``curves`` maps scheme -> per-frame mean delay."""
    fig, ax = _figure()
    for scheme, y in curves.items():
        ax.plot(range(1, len(y) + 1), y, label=LABELS.get(scheme, scheme), lw=1.2)
    ax.set_xlabel("Frame (iteration)")
    ax.set_ylabel("Average system delay (s)")
    ax.legend()
    _save(fig, path)


@_styled
def plot_sweep(summary_rows: list, path) -> None:
    fig, ax = _figure()
    axis = summary_rows[0]["axis"] if summary_rows else ""
    schemes: dict = {}
    for r in summary_rows:
        schemes.setdefault(r["scheme"], []).append(r)
    for scheme, rows in schemes.items():
        x = [r["value"] for r in rows]
        y = [r["mean"] for r in rows]
        err = [r["ci95"] for r in rows]
        ax.errorbar(x, y, yerr=err, marker=MARKERS.get(scheme, "o"), ms=4, capsize=2,
                    lw=1.0, label=LABELS.get(scheme, scheme))
    ax.set_xlabel(AXIS_LABELS.get(axis, axis))
    ax.set_ylabel("Weighted sum delay (s)")
    ax.legend()
    _save(fig, path)


@_styled
def plot_overhead(rows: list, path) -> None:
    fig, ax = _figure()
    schemes: dict = {}
    for r in rows:
        schemes.setdefault(r["scheme"], []).append(r)
    for scheme, rs in schemes.items():
        ax.plot([r["M"] for r in rs], [r["bits"] for r in rs],
                marker=MARKERS.get(scheme, "o"), ms=4, label=LABELS.get(scheme, scheme))
    ax.set_xlabel(AXIS_LABELS["M"])
    ax.set_ylabel("CSI overhead per frame (bits)")
    ax.legend()
    _save(fig, path)
