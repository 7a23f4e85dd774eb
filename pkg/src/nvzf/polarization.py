"""Microwave drive polarization and hyperfine transition strengths.

An in-plane microwave magnetic field of arbitrary elliptical polarization
is parameterized by a Rabi amplitude Omega = gamma * B_perp (Hz), an
orientation angle phi_mw and an ellipticity angle epsilon_mw. The
ellipticity runs from -pi/4 (right circular, sigma-) through 0 (linear)
to +pi/4 (left circular, sigma+); the amplitude ratio of the two circular
components is lambda_mw = tan(pi/4 - epsilon_mw).

Within the rotating-wave approximation the drive couples |0> to the two
dressed m_s = +/-1 eigenstates of each hyperfine block. The normalized
coupling strengths W depend only on the mixing angles of the block and on
the phase combination 2*phi_mw - phi_pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hamiltonian import BRANCH_MI_ORDER, mixing_angles

_QUARTER_PI = math.pi / 4.0


@dataclass(frozen=True)
class DriveField:
    """Elliptically polarized microwave drive.

    Attributes
    ----------
    omega_rabi_hz : float
        Rabi amplitude Omega = gamma * B_perp of the total transverse field.
    phi_mw_rad : float
        In-plane orientation of the polarization ellipse's major axis.
    epsilon_mw_rad : float
        Ellipticity angle in [-pi/4, pi/4] after normalization. Values up
        to |pi/2| are accepted and folded back by swapping the ellipse
        axes (phi_mw += pi/2), which leaves the physical field unchanged
        up to a time origin.
    omega_drive_hz : float
        Carrier frequency of the field; 0 means "tuned on resonance" for
        time-domain evolution.
    """

    omega_rabi_hz: float
    phi_mw_rad: float = 0.0
    epsilon_mw_rad: float = 0.0
    omega_drive_hz: float = 0.0

    def __post_init__(self):
        for name in ("omega_rabi_hz", "phi_mw_rad", "epsilon_mw_rad",
                     "omega_drive_hz"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.omega_rabi_hz < 0:
            raise ValueError("omega_rabi_hz must be >= 0")
        if self.omega_drive_hz < 0:
            raise ValueError("omega_drive_hz must be >= 0")
        eps = self.epsilon_mw_rad
        if abs(eps) > math.pi / 2.0:
            raise ValueError("epsilon_mw_rad must lie in [-pi/2, pi/2]")
        if abs(eps) > _QUARTER_PI:
            object.__setattr__(self, "epsilon_mw_rad",
                               math.copysign(math.pi / 2.0 - abs(eps), eps))
            object.__setattr__(self, "phi_mw_rad",
                               self.phi_mw_rad + math.pi / 2.0)

    @property
    def lambda_mw(self):
        """Circular amplitude ratio sigma-minus / sigma-plus.

        Equals tan(pi/4 - epsilon_mw): 0 for pure sigma+, 1 for linear
        polarization, diverging toward pure sigma-.
        """
        return math.tan(_QUARTER_PI - self.epsilon_mw_rad)


@dataclass(frozen=True)
class CircularDecomposition:
    """Amplitudes of the co- and counter-rotating circular components."""

    amp_plus_hz: float
    amp_minus_hz: float
    lambda_mw: float


@dataclass(frozen=True)
class StrengthSet:
    """Coupling strengths of the six hyperfine transitions.

    ``w`` holds the normalized strengths in canonical (branch, m_I) order;
    each degenerate-pair sum W(-) + W(+) equals 1. ``absolute`` carries the
    squared angular Rabi rates (2*pi)^2 * (Omega/2)^2 * W, and the outer
    totals sum the two degenerate outer lines of each branch.
    """

    w: tuple
    absolute: tuple
    outer_minus_total: float
    outer_plus_total: float

    def w_of(self, branch, m_i):
        return self.w[BRANCH_MI_ORDER.index((branch, m_i))]

    def absolute_of(self, branch, m_i):
        return self.absolute[BRANCH_MI_ORDER.index((branch, m_i))]


@dataclass(frozen=True)
class Imbalances:
    """Relative strength imbalances of the inner and outer line pairs."""

    i_inner: float
    i_outer_summed: float
    i_outer_m_plus: float
    i_outer_m_minus: float


def mw_field_vector(drive, t):
    """Instantaneous transverse field (b_x, b_y) in Rabi-equivalent Hz.

    Evaluates the polarization ellipse at times ``t`` (seconds, scalar or
    array) using the carrier frequency stored in the drive.
    """
    t = np.asarray(t, dtype=float)
    phase = 2.0 * math.pi * drive.omega_drive_hz * t
    ce, se = math.cos(drive.epsilon_mw_rad), math.sin(drive.epsilon_mw_rad)
    cp, sp = math.cos(drive.phi_mw_rad), math.sin(drive.phi_mw_rad)
    omega = drive.omega_rabi_hz
    b_x = omega * (ce * cp * np.cos(phase) - se * sp * np.sin(phase))
    b_y = omega * (ce * sp * np.cos(phase) + se * cp * np.sin(phase))
    return b_x, b_y


def circular_decomposition(drive):
    """Split the elliptical field into sigma+ and sigma- amplitudes.

    The co-rotating component has amplitude Omega * cos(pi/4 - eps) / sqrt(2)
    and the counter-rotating one is lambda_mw times that. The original field
    is recovered as

        a+ * (cos(w t + phi), sin(w t + phi))
      + a- * (cos(w t - phi), -sin(w t - phi)).
    """
    ang = _QUARTER_PI - drive.epsilon_mw_rad
    scale = drive.omega_rabi_hz / math.sqrt(2.0)
    return CircularDecomposition(amp_plus_hz=scale * math.cos(ang),
                                 amp_minus_hz=scale * math.sin(ang),
                                 lambda_mw=drive.lambda_mw)


def stokes_parameters(drive):
    """Normalized Stokes parameters (s1, s2, s3) of the fully polarized drive."""
    two_eps = 2.0 * drive.epsilon_mw_rad
    two_phi = 2.0 * drive.phi_mw_rad
    return (math.cos(two_eps) * math.cos(two_phi),
            math.cos(two_eps) * math.sin(two_phi),
            math.sin(two_eps))


def rwa_hamiltonian(drive):
    """Rotating-frame drive Hamiltonian on the electron triplet, in Hz.

    In the |+1>, |0>, |-1> basis the only nonzero couplings connect |0> to
    the m_s = +/-1 levels; the direct Delta m = 2 element vanishes.
    """
    half = drive.omega_rabi_hz / 2.0
    c = math.cos(_QUARTER_PI - drive.epsilon_mw_rad)
    s = math.sin(_QUARTER_PI - drive.epsilon_mw_rad)
    up = half * c * np.exp(-1j * drive.phi_mw_rad)
    down = half * s * np.exp(1j * drive.phi_mw_rad)
    h = np.zeros((3, 3), dtype=complex)
    h[0, 1] = up
    h[1, 0] = np.conj(up)
    h[2, 1] = down
    h[1, 2] = np.conj(down)
    return h


def _normalized_strengths(theta, phi_pi, drive):
    """Closed-form W for the six lines, canonical (branch, m_I) order.

    These are the squared overlaps of the driven superposition with the
    dressed eigenstates, reduced to products of double-angle terms so the
    special polarizations (dark states, pure circular drive) evaluate
    exactly in floating point.
    """
    two_eps = 2.0 * drive.epsilon_mw_rad
    delta = 2.0 * drive.phi_mw_rad - phi_pi
    axial = math.cos(theta) * math.sin(two_eps)
    planar = math.sin(theta) * math.cos(two_eps) * math.cos(delta)
    inner = math.cos(two_eps) * math.cos(delta)
    w = {
        (-1, -1): (1.0 + axial - planar) / 2.0,
        (-1, 0): (1.0 - inner) / 2.0,
        (-1, +1): (1.0 - axial - planar) / 2.0,
        (+1, -1): (1.0 - axial + planar) / 2.0,
        (+1, 0): (1.0 + inner) / 2.0,
        (+1, +1): (1.0 + axial + planar) / 2.0,
    }
    # roundoff can push a vanishing strength an ulp below zero
    return tuple(max(w[key], 0.0) for key in BRANCH_MI_ORDER)


def transition_strengths(field, params, drive):
    """Normalized and absolute strengths of all six hyperfine transitions.

    The strengths follow from the overlap of the driven superposition with
    the dressed eigenstates of each hyperfine block; only the mixing angles
    and the relative phase 2*phi_mw - phi_pi enter the normalized values.
    """
    angles = mixing_angles(params, field)
    w = _normalized_strengths(angles.theta_pi_rad, angles.phi_pi_rad, drive)
    scale = (2.0 * math.pi * drive.omega_rabi_hz / 2.0) ** 2
    absolute = tuple(scale * wi for wi in w)
    idx = {key: i for i, key in enumerate(BRANCH_MI_ORDER)}
    outer_minus = absolute[idx[(-1, -1)]] + absolute[idx[(-1, +1)]]
    outer_plus = absolute[idx[(+1, -1)]] + absolute[idx[(+1, +1)]]
    return StrengthSet(w=w, absolute=absolute,
                       outer_minus_total=outer_minus,
                       outer_plus_total=outer_plus)


def imbalances(field, params, drive):
    """Inner and outer relative imbalances of the transition strengths.

    Each imbalance is (upper - lower) / (upper + lower) for the matching
    strengths; the summed outer version uses the degenerate-pair totals.
    """
    strengths = transition_strengths(field, params, drive)

    def _ratio(upper, lower):
        total = upper + lower
        if total == 0.0:
            return 0.0
        return (upper - lower) / total

    i_inner = _ratio(strengths.w_of(+1, 0), strengths.w_of(-1, 0))
    i_outer = _ratio(strengths.outer_plus_total, strengths.outer_minus_total)
    i_plus = _ratio(strengths.w_of(+1, +1), strengths.w_of(-1, +1))
    i_minus = _ratio(strengths.w_of(+1, -1), strengths.w_of(-1, -1))
    return Imbalances(i_inner=i_inner, i_outer_summed=i_outer,
                      i_outer_m_plus=i_plus, i_outer_m_minus=i_minus)


def rabi_frequencies(field, params, drive):
    """Angular Rabi rates 2*pi * (Omega/2) * sqrt(W), canonical order.

    These are the labeled per-transition rates (2*pi times the coupling
    matrix element); the population of a resonantly driven pair oscillates
    as sin^2(rate * t / 2).
    """
    strengths = transition_strengths(field, params, drive)
    return np.sqrt(np.array(strengths.absolute))


def rabi_quartet(field, params, drive):
    """The four labeled rates (1..4) in ascending line frequency.

    Labels 1 and 4 are the outer lines taken on the m_I = +1 member of
    each degenerate pair (the members coincide for linear drive); 2 and 3
    are the inner m_I = 0 pair. With this pairing the rates satisfy
    rate1^2 + rate4^2 == rate2^2 + rate3^2 for every polarization.
    """
    rates = rabi_frequencies(field, params, drive)
    idx = {key: i for i, key in enumerate(BRANCH_MI_ORDER)}
    return (rates[idx[(-1, +1)]], rates[idx[(-1, 0)]],
            rates[idx[(+1, 0)]], rates[idx[(+1, +1)]])
