"""Figure rendering for the report path.

Every function writes a PNG next to the delimited output it illustrates.
Imported lazily by the CLI so plotting never burdens the data path.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .hamiltonian import BRANCH_MI_ORDER

_LINE_NAMES = {(-1, -1): "lower, m$_I$=-1", (-1, 0): "lower, m$_I$=0",
               (-1, +1): "lower, m$_I$=+1", (+1, -1): "upper, m$_I$=-1",
               (+1, 0): "upper, m$_I$=0", (+1, +1): "upper, m$_I$=+1"}


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_spectrum(spectrum, path, lines=None, model_curve=None):
    """Contrast spectrum, optionally with line markers and a fitted model."""
    fig, ax = plt.subplots(figsize=(7, 4))
    f_mhz = spectrum.frequencies_hz / 1e6
    ax.plot(f_mhz, spectrum.contrast, lw=0.9, color="tab:blue", label="data")
    if model_curve is not None:
        ax.plot(f_mhz, model_curve, lw=1.4, color="tab:red", label="fit")
        ax.legend(frameon=False)
    if lines is not None:
        for t in lines.transitions:
            ax.axvline(t.frequency_hz / 1e6, color="0.75", lw=0.6, zorder=0)
    ax.set_xlabel("frequency (MHz)")
    ax.set_ylabel("contrast")
    _finish(fig, path)


def plot_sweep(sweep, path):
    """Six transition branches versus axial magnetic field."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    bz_mt = sweep.bz_tesla * 1e3
    for i, key in enumerate(BRANCH_MI_ORDER):
        ax.plot(bz_mt, sweep.frequencies_hz[i] / 1e6, lw=1.0,
                label=_LINE_NAMES[key])
    ax.set_xlabel("B$_z$ (mT)")
    ax.set_ylabel("transition frequency (MHz)")
    ax.legend(frameon=False, fontsize=8, ncol=2)
    _finish(fig, path)


def plot_strength_scan(grid, curves, scan_name, path):
    """Normalized strengths of the six lines along a polarization scan."""
    fig, ax = plt.subplots(figsize=(7, 4))
    for i, key in enumerate(BRANCH_MI_ORDER):
        ax.plot(grid, curves[i], lw=1.0, label=_LINE_NAMES[key])
    ax.set_xlabel(scan_name)
    ax.set_ylabel("normalized strength W")
    ax.set_ylim(-0.05, 1.05)
    ax.legend(frameon=False, fontsize=8, ncol=2)
    _finish(fig, path)


def plot_rabi(t_grid, population, path):
    """Population transfer trace of one driven transition."""
    fig, ax = plt.subplots(figsize=(7, 3.5))
    ax.plot(t_grid * 1e6, population, lw=1.0, color="tab:blue")
    ax.set_xlabel("time (us)")
    ax.set_ylabel("transfer probability")
    ax.set_ylim(-0.05, 1.05)
    _finish(fig, path)
