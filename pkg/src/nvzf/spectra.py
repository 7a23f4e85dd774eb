"""Synthetic ODMR spectra, axial-field sweeps and time-domain traces."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hamiltonian import (BRANCH_MI_ORDER, block_hamiltonian,
                          diagonalize_hermitian, transition_frequencies)
from .polarization import DriveField, rwa_hamiltonian, transition_strengths

_FOUR_LN2 = 4.0 * math.log(2.0)

#: Quartet labels in ascending line frequency at zero axial field. Outer
#: labels address the m_I = +1 member of each degenerate pair.
TRANSITION_LABELS = {
    "1": (-1, +1), "outer_low": (-1, +1),
    "2": (-1, 0), "inner_low": (-1, 0),
    "3": (+1, 0), "inner_high": (+1, 0),
    "4": (+1, +1), "outer_high": (+1, +1),
}


@dataclass(frozen=True)
class LineShape:
    """Dip profile applied to every transition line.

    ``contrast_scale`` converts a normalized strength W into dip depth, so
    a W = 1 line dips by exactly one contrast_scale below the baseline.
    """

    fwhm_hz: float
    contrast_scale: float
    kind: str = "gaussian"
    baseline: float = 1.0

    def __post_init__(self):
        if self.kind not in ("gaussian", "lorentzian"):
            raise ValueError(f"unknown line shape {self.kind!r}")
        if not (math.isfinite(self.fwhm_hz) and self.fwhm_hz > 0):
            raise ValueError("fwhm_hz must be positive")
        if not (math.isfinite(self.contrast_scale) and 0 < self.contrast_scale <= 1):
            raise ValueError("contrast_scale must lie in (0, 1]")
        if not math.isfinite(self.baseline):
            raise ValueError("baseline must be finite")

    def profile(self, x):
        """Unit-amplitude dip profile evaluated at detuning x (Hz)."""
        x = np.asarray(x, dtype=float)
        if self.kind == "gaussian":
            return np.exp(-_FOUR_LN2 * (x / self.fwhm_hz) ** 2)
        return 1.0 / (1.0 + (2.0 * x / self.fwhm_hz) ** 2)


@dataclass(frozen=True)
class Spectrum:
    """A sampled contrast spectrum on a strictly ascending frequency grid."""

    frequencies_hz: np.ndarray
    contrast: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.frequencies_hz, dtype=float)
        y = np.asarray(self.contrast, dtype=float)
        if f.ndim != 1 or y.shape != f.shape:
            raise ValueError("frequencies and contrast must be equal-length 1-D arrays")
        if f.size and not np.all(np.isfinite(f)):
            raise ValueError("frequencies must be finite")
        if f.size and not np.all(np.isfinite(y)):
            raise ValueError("contrast must be finite")
        if f.size > 1 and not np.all(np.diff(f) > 0):
            raise ValueError("frequency grid must be strictly ascending")
        object.__setattr__(self, "frequencies_hz", f)
        object.__setattr__(self, "contrast", y)

    def __len__(self):
        return self.frequencies_hz.size


@dataclass(frozen=True)
class MinimumGap:
    """Smallest on-grid branch separation for one nuclear projection."""

    gap_hz: float
    bz_tesla: float


@dataclass(frozen=True)
class SweepResult:
    """Transition frequencies versus axial field.

    ``frequencies_hz`` has shape (6, n) in canonical (branch, m_I) order;
    ``min_gaps`` maps each m_I to the smallest upper-lower separation found
    on the grid and the field where it occurs.
    """

    bz_tesla: np.ndarray
    frequencies_hz: np.ndarray
    min_gaps: dict


def dip_profile(grid, centers, weights, shape):
    """Contrast curve of weighted dips on a frequency grid.

    Lines at coincident centers simply add, so degenerate pairs appear as
    one dip of summed weight. No lines gives a flat baseline.
    """
    grid = np.asarray(grid, dtype=float)
    y = np.full(grid.shape, shape.baseline)
    for center, weight in zip(centers, weights):
        y -= shape.contrast_scale * weight * shape.profile(grid - center)
    return y


def synthesize_spectrum(transitions, strengths, shape, grid):
    """Noise-free spectrum of the six hyperfine lines.

    Dip depth of each line is contrast_scale times its normalized strength;
    degenerate outer lines overlap exactly at zero axial field and merge
    into a dip of summed depth.
    """
    centers = [t.frequency_hz for t in transitions.transitions]
    return Spectrum(frequencies_hz=np.asarray(grid, dtype=float),
                    contrast=dip_profile(grid, centers, strengths.w, shape))


def sweep_bz(params, field, bz_min_tesla, bz_max_tesla, n):
    """Trace all six lines over an axial-field interval.

    Reports the per-m_I minimum branch separation on the grid; near an
    avoided crossing this approaches twice the transverse effective field.
    """
    if n < 2:
        raise ValueError("sweep needs at least 2 grid points")
    if not bz_min_tesla < bz_max_tesla:
        raise ValueError("bz_min_tesla must be below bz_max_tesla")
    bz = np.linspace(bz_min_tesla, bz_max_tesla, n)
    freqs = np.empty((6, n))
    for j, b in enumerate(bz):
        freqs[:, j] = transition_frequencies(params, field, b).frequencies_hz
    idx = {key: i for i, key in enumerate(BRANCH_MI_ORDER)}
    min_gaps = {}
    for m_i in (-1, 0, +1):
        gaps = freqs[idx[(+1, m_i)]] - freqs[idx[(-1, m_i)]]
        j = int(np.argmin(gaps))
        min_gaps[m_i] = MinimumGap(gap_hz=float(gaps[j]), bz_tesla=float(bz[j]))
    return SweepResult(bz_tesla=bz, frequencies_hz=freqs, min_gaps=min_gaps)


def polarization_scan(field, params, omega_rabi_hz, epsilon_mw_rad, phi_grid):
    """Normalized strengths of the six lines versus drive orientation.

    Returns an array of shape (6, len(phi_grid)) in canonical order.
    """
    phi_grid = np.asarray(phi_grid, dtype=float)
    curves = np.empty((6, phi_grid.size))
    for j, phi in enumerate(phi_grid):
        drive = DriveField(omega_rabi_hz=omega_rabi_hz, phi_mw_rad=float(phi),
                           epsilon_mw_rad=epsilon_mw_rad)
        curves[:, j] = transition_strengths(field, params, drive).w
    return curves


def ellipticity_scan(field, params, omega_rabi_hz, phi_mw_rad, epsilon_grid):
    """Normalized strengths of the six lines versus drive ellipticity."""
    epsilon_grid = np.asarray(epsilon_grid, dtype=float)
    curves = np.empty((6, epsilon_grid.size))
    for j, eps in enumerate(epsilon_grid):
        drive = DriveField(omega_rabi_hz=omega_rabi_hz, phi_mw_rad=phi_mw_rad,
                           epsilon_mw_rad=float(eps))
        curves[:, j] = transition_strengths(field, params, drive).w
    return curves


def parse_transition_label(label):
    """Resolve a transition label to a (branch, m_I) pair.

    Accepts quartet labels 1..4 (ints or strings), their names
    (outer_low, inner_low, inner_high, outer_high), and explicit
    "<branch>,<m_I>" strings such as "+,0" or "-,-1".
    """
    if isinstance(label, int):
        label = str(label)
    if not isinstance(label, str):
        raise ValueError(f"transition label must be an int or string, got {label!r}")
    key = label.strip().lower()
    if key in TRANSITION_LABELS:
        return TRANSITION_LABELS[key]
    parts = key.split(",")
    if len(parts) == 2 and parts[0] in ("-", "+"):
        branch = -1 if parts[0] == "-" else +1
        try:
            m_i = int(parts[1])
        except ValueError:
            m_i = None
        if m_i in (-1, 0, 1):
            return branch, m_i
    raise ValueError(
        f"unknown transition label {label!r}; use 1..4, outer_low/inner_low/"
        f"inner_high/outer_high, or '<+|->,<m_I>' such as '+,0'")


def _coupling_element(field, params, drive, branch, m_i):
    """Drive matrix element <branch, m_I|H_mw|0, m_I> in Hz, numerically."""
    block = block_hamiltonian(params, field, m_i)
    _, vecs = diagonalize_hermitian(block)
    v = vecs[:, 0 if branch == -1 else 1]
    h = rwa_hamiltonian(drive)
    return np.conj(v[0]) * h[0, 1] + np.conj(v[1]) * h[2, 1]


def rabi_trace(field, params, drive, target, t_grid):
    """Population transfer |0, m_I> -> dressed target state versus time.

    The target block is restricted to two levels and driven on resonance;
    the population follows sin^2(rate * t / 2) where rate is the labeled
    angular Rabi rate 2*pi * |coupling|. A nonzero carrier frequency in
    the drive must match the target line to 1e-6 relative.
    """
    branch, m_i = parse_transition_label(target)
    t_grid = np.asarray(t_grid, dtype=float)
    if drive.omega_drive_hz > 0.0:
        f_target = transition_frequencies(params, field).frequency(branch, m_i)
        if abs(drive.omega_drive_hz - f_target) > 1e-6 * abs(f_target):
            raise ValueError(
                f"drive carrier {drive.omega_drive_hz} Hz is detuned from the "
                f"target line at {f_target} Hz; detuned evolution is unsupported")
    coupling = _coupling_element(field, params, drive, branch, m_i)
    rate = 2.0 * math.pi * abs(coupling)
    return np.sin(rate * t_grid / 2.0) ** 2


def dominant_frequency(trace, dt):
    """Dominant oscillation frequency (Hz) of a sampled trace.

    Hann-windowed discrete spectrum with parabolic peak interpolation;
    returns 0 for a constant trace.
    """
    x = np.asarray(trace, dtype=float)
    if x.ndim != 1 or x.size < 4:
        raise ValueError("trace must be a 1-D array with at least 4 samples")
    if dt <= 0:
        raise ValueError("dt must be positive")
    x = x - x.mean()
    if not np.any(np.abs(x) > 1e-15):
        return 0.0
    window = np.hanning(x.size)
    mag = np.abs(np.fft.rfft(x * window))
    k = int(np.argmax(mag[1:])) + 1
    if 1 <= k < mag.size - 1 and mag[k] > 0:
        with np.errstate(divide="ignore"):
            logs = np.log(np.maximum(mag[k - 1:k + 2], 1e-300))
        denom = logs[0] - 2.0 * logs[1] + logs[2]
        delta = 0.5 * (logs[0] - logs[2]) / denom if denom != 0 else 0.0
        delta = float(np.clip(delta, -0.5, 0.5))
    else:
        delta = 0.0
    return (k + delta) / (x.size * dt)
