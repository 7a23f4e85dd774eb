"""Ground-state spin Hamiltonian of the negatively charged NV center.

Models the S = 1 electron spin hyperfine-coupled to the host 14N nucleus
(I = 1) in the presence of an intrinsic effective field (electric field
plus crystal strain) and an axial magnetic bias field. Energies are in Hz
throughout; the m_s = 0 manifold sits at zero energy, so eigenvalues of
the m_s = +/-1 subspace are directly the optically detected transition
frequencies.

Basis ordering is |+1>, |0>, |-1> for both the electron and the nuclear
spin; the 9-dimensional product basis is electron (x) nucleus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_SQRT2 = math.sqrt(2.0)

# Spin-1 operators in the |+1>, |0>, |-1> basis.
SPIN1_SX = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex) / _SQRT2
SPIN1_SY = np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]], dtype=complex) / _SQRT2
SPIN1_SZ = np.diag([1.0, 0.0, -1.0]).astype(complex)

#: Canonical (branch, m_I) ordering used by every 6-element container.
BRANCH_MI_ORDER = ((-1, -1), (-1, 0), (-1, +1), (+1, -1), (+1, 0), (+1, +1))

_VALID_MI = (-1, 0, 1)


def _require_finite(name, *values):
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class NvParams:
    """Fixed parameters of the NV ground-state spin system.

    Attributes
    ----------
    d_hz : float
        Zero-field splitting D.
    a_hf_hz : float
        Axial hyperfine constant of the 14N nucleus (negative).
    gamma_e_hz_per_t : float
        Electron gyromagnetic ratio.
    d_par_hz_cm_per_v : float
        Axial electric-field coupling constant.
    d_perp_hz_cm_per_v : float
        Transverse electric-field coupling constant.
    """

    d_hz: float = 2.87e9
    a_hf_hz: float = -2.14e6
    gamma_e_hz_per_t: float = 28.024953e9
    d_par_hz_cm_per_v: float = 0.35
    d_perp_hz_cm_per_v: float = 17.0

    def __post_init__(self):
        _require_finite("NvParams fields", self.d_hz, self.a_hf_hz,
                        self.gamma_e_hz_per_t, self.d_par_hz_cm_per_v,
                        self.d_perp_hz_cm_per_v)
        if self.d_hz <= 0:
            raise ValueError("d_hz must be positive")
        if self.gamma_e_hz_per_t <= 0:
            raise ValueError("gamma_e_hz_per_t must be positive")


@dataclass(frozen=True)
class FieldSources:
    """Microscopic electric field (V/cm) and strain (Hz) along the NV axes."""

    e_x_v_per_cm: float = 0.0
    e_y_v_per_cm: float = 0.0
    e_z_v_per_cm: float = 0.0
    m_x_hz: float = 0.0
    m_y_hz: float = 0.0
    m_z_hz: float = 0.0

    def __post_init__(self):
        _require_finite("FieldSources fields", self.e_x_v_per_cm,
                        self.e_y_v_per_cm, self.e_z_v_per_cm,
                        self.m_x_hz, self.m_y_hz, self.m_z_hz)


@dataclass(frozen=True)
class EffectiveField:
    """Combined electric-field plus strain interaction, in Hz.

    The transverse components couple the m_s = +1 and m_s = -1 levels;
    the axial component shifts both symmetrically.
    """

    pi_x_hz: float = 0.0
    pi_y_hz: float = 0.0
    pi_par_hz: float = 0.0

    def __post_init__(self):
        _require_finite("EffectiveField fields", self.pi_x_hz, self.pi_y_hz,
                        self.pi_par_hz)

    @property
    def pi_perp_hz(self):
        """Magnitude of the transverse component."""
        return math.hypot(self.pi_x_hz, self.pi_y_hz)

    @property
    def phi_pi_rad(self):
        """Azimuth of the transverse component in [0, 2pi); 0 when it vanishes."""
        if self.pi_x_hz == 0.0 and self.pi_y_hz == 0.0:
            return 0.0
        return math.atan2(self.pi_y_hz, self.pi_x_hz) % (2.0 * math.pi)

    @classmethod
    def from_polar(cls, pi_perp_hz, phi_pi_rad=0.0, pi_par_hz=0.0):
        """Build from transverse magnitude and azimuth."""
        if pi_perp_hz < 0:
            raise ValueError("pi_perp_hz must be >= 0")
        return cls(pi_x_hz=pi_perp_hz * math.cos(phi_pi_rad),
                   pi_y_hz=pi_perp_hz * math.sin(phi_pi_rad),
                   pi_par_hz=pi_par_hz)


@dataclass(frozen=True)
class MixingAngles:
    """Spherical angles that diagonalize one hyperfine block.

    theta_pi_rad lies in (pi/2, pi] for a negative hyperfine constant and
    reaches pi when the transverse field vanishes (no state mixing).
    """

    theta_pi_rad: float
    phi_pi_rad: float


@dataclass(frozen=True)
class Transition:
    """One optically detected line: |0, m_I> to the dressed |branch, m_I> level."""

    branch: int
    m_i: int
    frequency_hz: float
    degenerate: bool = False


@dataclass(frozen=True)
class TransitionSet:
    """Six hyperfine transitions in canonical (branch, m_I) order."""

    transitions: tuple

    def __post_init__(self):
        keys = tuple((t.branch, t.m_i) for t in self.transitions)
        if keys != BRANCH_MI_ORDER:
            raise ValueError("transitions must follow the canonical order")

    def frequency(self, branch, m_i):
        return self.transitions[BRANCH_MI_ORDER.index((branch, m_i))].frequency_hz

    @property
    def frequencies_hz(self):
        """Frequencies as an array in canonical order."""
        return np.array([t.frequency_hz for t in self.transitions])

    @property
    def inner_splitting_hz(self):
        """Separation of the m_I = 0 pair, equal to twice the transverse field."""
        return self.frequency(+1, 0) - self.frequency(-1, 0)

    def outer_splitting_hz(self, m_i=+1):
        """Separation of the outer pair for one nuclear projection."""
        if m_i not in (-1, +1):
            raise ValueError("outer transitions have m_i = -1 or +1")
        return self.frequency(+1, m_i) - self.frequency(-1, m_i)


def effective_field_from_sources(sources, params=NvParams()):
    """Convert electric field and strain amplitudes to the effective field.

    The axial electric field couples through the (weak) axial constant and
    the transverse components through the much larger transverse constant;
    strain enters additively in Hz.
    """
    return EffectiveField(
        pi_x_hz=params.d_perp_hz_cm_per_v * sources.e_x_v_per_cm + sources.m_x_hz,
        pi_y_hz=params.d_perp_hz_cm_per_v * sources.e_y_v_per_cm + sources.m_y_hz,
        pi_par_hz=params.d_par_hz_cm_per_v * sources.e_z_v_per_cm + sources.m_z_hz,
    )


def block_hamiltonian(params, field, m_i, bz_tesla=0.0):
    """2x2 Hamiltonian of the {|+1, m_I>, |-1, m_I>} subspace, in Hz.

    The m_s = 0 level of the same nuclear projection is the energy
    reference, so eigenvalues of this block are transition frequencies.
    """
    if m_i not in _VALID_MI:
        raise ValueError(f"m_i must be one of {_VALID_MI}, got {m_i!r}")
    _require_finite("bz_tesla", bz_tesla)
    shift = params.d_hz + field.pi_par_hz
    zeeman = m_i * params.a_hf_hz + params.gamma_e_hz_per_t * bz_tesla
    coupling = field.pi_x_hz - 1j * field.pi_y_hz
    return np.array([[shift + zeeman, coupling],
                     [np.conj(coupling), shift - zeeman]], dtype=complex)


def full_hamiltonian(params, field, bz_tesla=0.0):
    """Full 9x9 electron (x) nuclear Hamiltonian in Hz.

    Includes the zero-field splitting, the axial hyperfine coupling, the
    effective-field interaction and the axial Zeeman term. Nuclear Zeeman
    and quadrupole terms are common-mode for the observed transitions and
    are omitted.
    """
    _require_finite("bz_tesla", bz_tesla)
    eye3 = np.eye(3, dtype=complex)
    sz2 = SPIN1_SZ @ SPIN1_SZ
    sx2_sy2 = SPIN1_SX @ SPIN1_SX - SPIN1_SY @ SPIN1_SY
    sxsy_sym = SPIN1_SX @ SPIN1_SY + SPIN1_SY @ SPIN1_SX
    h_el = ((params.d_hz + field.pi_par_hz) * sz2
            + field.pi_x_hz * sx2_sy2
            + field.pi_y_hz * sxsy_sym
            + params.gamma_e_hz_per_t * bz_tesla * SPIN1_SZ)
    return np.kron(h_el, eye3) + params.a_hf_hz * np.kron(SPIN1_SZ, SPIN1_SZ)


def transition_frequencies(params, field, bz_tesla=0.0):
    """Closed-form frequencies of the six hyperfine transitions.

    Each (branch, m_I) line sits at D + Pi_par +/- the quadrature sum of
    the hyperfine-plus-Zeeman detuning and the transverse field. The two
    outer lines of each branch are flagged degenerate at zero axial field.
    """
    _require_finite("bz_tesla", bz_tesla)
    shift = params.d_hz + field.pi_par_hz
    perp = field.pi_perp_hz
    transitions = []
    for branch, m_i in BRANCH_MI_ORDER:
        zeeman = m_i * params.a_hf_hz + params.gamma_e_hz_per_t * bz_tesla
        freq = shift + branch * math.hypot(zeeman, perp)
        degenerate = (m_i != 0) and (bz_tesla == 0.0)
        transitions.append(Transition(branch=branch, m_i=m_i,
                                      frequency_hz=freq, degenerate=degenerate))
    return TransitionSet(transitions=tuple(transitions))


def mixing_angles(params, field):
    """Polar and azimuthal mixing angles of the outer-line eigenstates.

    cos(theta) = -|A| / sqrt(Pi_perp^2 + A^2), so theta runs from just
    above pi/2 (strong transverse field) to pi (unmixed levels).
    """
    hyp = math.hypot(field.pi_perp_hz, params.a_hf_hz)
    if hyp == 0.0:
        theta = math.pi
    else:
        theta = math.acos(-abs(params.a_hf_hz) / hyp)
        if field.pi_perp_hz == 0.0:
            theta = math.pi
    return MixingAngles(theta_pi_rad=theta, phi_pi_rad=field.phi_pi_rad)


def diagonalize_hermitian(h):
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    Validates hermiticity to 1e-9 relative asymmetry, then defers to
    LAPACK through numpy. Returns (eigenvalues, eigenvectors) with
    orthonormal eigenvectors in columns.
    """
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    norm = np.linalg.norm(h)
    asym = np.linalg.norm(h - h.conj().T)
    if asym > 1e-9 * max(norm, 1.0):
        raise ValueError("matrix is not Hermitian within 1e-9 relative asymmetry")
    return np.linalg.eigh(h)
