"""Figure rendering for the command-line reports.

Each helper draws one figure and writes it next to the delimited output.
The Agg backend keeps rendering headless and reproducible.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_META = {"Software": "sqclock"}
_DPI = 150


def _save(fig, path: str) -> str:
    fig.savefig(path, dpi=_DPI, metadata=_META)
    plt.close(fig)
    return path


def save_fringe(path: str, deltas, probs) -> str:
    fig, ax = plt.subplots(figsize=(6.4, 4.0), constrained_layout=True)
    ax.plot(deltas, probs, lw=1.2)
    ax.set_xlabel("detuning (rad/s)")
    ax.set_ylabel("transition probability")
    ax.set_ylim(-0.02, 1.02)
    ax.grid(True, alpha=0.4)
    return _save(fig, path)


def save_spectrum(path: str, omegas, phis, values) -> str:
    """values[i, j] = S at (phis[i], omegas[j])."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0), constrained_layout=True)
    for i, phi in enumerate(phis):
        ax.plot(omegas, values[i], lw=1.2, label=f"phi = {phi:.3f} rad")
    ax.set_xlabel("analysis frequency (rad/s)")
    ax.set_ylabel("squeezing spectrum S")
    ax.grid(True, alpha=0.4)
    ax.legend(fontsize=8)
    return _save(fig, path)


def save_snr(path: str, xs, xlabel: str, vac, sq, ratio) -> str:
    fig, (ax1, ax2) = plt.subplots(
        2, 1, figsize=(6.4, 5.6), sharex=True, constrained_layout=True
    )
    ax1.plot(xs, vac, lw=1.2, label="coherent")
    ax1.plot(xs, sq, lw=1.2, label="squeezed")
    ax1.set_ylabel("S/N")
    ax1.grid(True, alpha=0.4)
    ax1.legend(fontsize=8)
    ax2.plot(xs, ratio, lw=1.2, color="tab:green")
    ax2.axhline(1.0, color="gray", lw=0.8, ls="--")
    ax2.set_xlabel(xlabel)
    ax2.set_ylabel("improvement")
    ax2.grid(True, alpha=0.4)
    return _save(fig, path)


def save_record(path: str, records: dict) -> str:
    """Plot one or more frequency records, keyed by label."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0), constrained_layout=True)
    for label, record in records.items():
        t = np.arange(record.samples.size) * record.tau0
        ax.plot(t, record.samples, lw=0.8, label=label)
    ax.set_xlabel("time (s)")
    ax.set_ylabel("fractional frequency y")
    ax.grid(True, alpha=0.4)
    if len(records) > 1:
        ax.legend(fontsize=8)
    return _save(fig, path)


def save_allan(path: str, curve, predicted=None) -> str:
    fig, ax = plt.subplots(figsize=(6.4, 4.0), constrained_layout=True)
    ax.loglog(curve.taus, curve.sigmas, "o-", lw=1.2, ms=4, label="measured")
    if predicted is not None:
        ax.loglog(curve.taus, predicted, "--", lw=1.2, label="predicted")
        ax.legend(fontsize=8)
    ax.set_xlabel("averaging time tau (s)")
    ax.set_ylabel("Allan deviation")
    ax.grid(True, which="both", alpha=0.4)
    return _save(fig, path)
