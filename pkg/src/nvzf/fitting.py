"""Multi-dip spectral fitting and effective-field inversion.

The nonlinear solver is a damped Gauss-Newton (Levenberg-Marquardt)
iteration with analytic Jacobians: the damping factor is divided by 10
after an accepted step and multiplied by 10 after a rejected one, and
iteration stops once the relative cost decrease falls below 1e-10 or
after a hard iteration cap.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .hamiltonian import NvParams

_FOUR_LN2 = 4.0 * math.log(2.0)
_REL_TOL = 1e-10
_MAX_ITER = 500


@dataclass(frozen=True)
class GaussianPeak:
    """One Gaussian dip: depth ``amplitude`` below the shared baseline."""

    center_hz: float
    amplitude: float
    fwhm_hz: float


@dataclass(frozen=True)
class PeakModel:
    """Shared baseline plus a list of Gaussian dips."""

    peaks: tuple
    baseline: float

    def __post_init__(self):
        object.__setattr__(self, "peaks", tuple(self.peaks))

    def evaluate(self, f):
        """Model contrast on a frequency grid."""
        f = np.asarray(f, dtype=float)
        y = np.full(f.shape, self.baseline)
        for p in self.peaks:
            x = (f - p.center_hz) / p.fwhm_hz
            y -= p.amplitude * np.exp(-_FOUR_LN2 * x * x)
        return y


@dataclass(frozen=True)
class PeakFit:
    """Result of a multi-dip fit; ``stderr`` mirrors the model structure."""

    model: PeakModel
    residual_rms: float
    converged: bool
    n_iterations: int
    stderr: PeakModel | None


@dataclass(frozen=True)
class FieldExtraction:
    """Effective-field parameters inverted from fitted line centers."""

    pi_perp_hz: float
    pi_par_hz: float
    bz_tesla: float
    pi_perp_stderr_hz: float | None
    pi_par_stderr_hz: float | None
    bz_stderr_tesla: float | None
    assignment: tuple
    residual_rms_hz: float


@dataclass(frozen=True)
class FitResult:
    """Full analysis of one spectrum: dips, field inversion, imbalances."""

    peak_fit: PeakFit
    extraction: FieldExtraction
    i_inner: float | None
    i_outer: float | None

    def to_dict(self):
        model = self.peak_fit.model
        err = self.peak_fit.stderr
        peaks = []
        for k, p in enumerate(model.peaks):
            entry = {
                "center_hz": p.center_hz,
                "amplitude": p.amplitude,
                "fwhm_hz": p.fwhm_hz,
                "center_stderr_hz": err.peaks[k].center_hz if err else None,
                "amplitude_stderr": err.peaks[k].amplitude if err else None,
                "fwhm_stderr_hz": err.peaks[k].fwhm_hz if err else None,
                "assigned_branch": self.extraction.assignment[k][0],
                "assigned_m_i": self.extraction.assignment[k][1],
            }
            peaks.append(entry)
        ext = self.extraction
        return {
            "n_peaks": len(model.peaks),
            "converged": self.peak_fit.converged,
            "n_iterations": self.peak_fit.n_iterations,
            "residual_rms": self.peak_fit.residual_rms,
            "baseline": model.baseline,
            "baseline_stderr": err.baseline if err else None,
            "peaks": peaks,
            "field": {
                "pi_perp_hz": ext.pi_perp_hz,
                "pi_par_hz": ext.pi_par_hz,
                "bz_tesla": ext.bz_tesla,
                "pi_perp_stderr_hz": ext.pi_perp_stderr_hz,
                "pi_par_stderr_hz": ext.pi_par_stderr_hz,
                "bz_stderr_tesla": ext.bz_stderr_tesla,
                "residual_rms_hz": ext.residual_rms_hz,
            },
            "imbalances": {"i_inner": self.i_inner, "i_outer": self.i_outer},
        }


@dataclass(frozen=True)
class BatchSummary:
    """Aggregate of several analyzed spectra."""

    entries: tuple
    pi_perp_mean_hz: float
    pi_perp_std_hz: float
    pi_par_mean_hz: float
    pi_par_std_hz: float

    def to_dict(self):
        return {
            "n_spectra": len(self.entries),
            "pi_perp_mean_hz": self.pi_perp_mean_hz,
            "pi_perp_std_hz": self.pi_perp_std_hz,
            "pi_par_mean_hz": self.pi_par_mean_hz,
            "pi_par_std_hz": self.pi_par_std_hz,
            "spectra": [{"name": name, **result.to_dict()}
                        for name, result in self.entries],
        }


def _levenberg_marquardt(residual_jac, p0, accept=None, max_iter=_MAX_ITER):
    """Minimize ||r(p)||^2 given r and its Jacobian; returns a dict.

    ``accept`` may veto trial parameter vectors (domain constraints);
    vetoed steps count as rejections and raise the damping.
    """
    p = np.array(p0, dtype=float)
    r, jac = residual_jac(p)
    cost = float(r @ r)
    lam = 1e-3
    converged = False
    iterations = 0
    while iterations < max_iter and not converged:
        iterations += 1
        normal = jac.T @ jac
        grad = jac.T @ r
        scale = np.maximum(np.diag(normal), 1e-300)
        stepped = False
        for _ in range(60):
            try:
                step = np.linalg.solve(normal + lam * np.diag(scale), -grad)
            except np.linalg.LinAlgError:
                lam = min(lam * 10.0, 1e30)
                continue
            trial = p + step
            if accept is not None and not accept(trial):
                lam = min(lam * 10.0, 1e30)
                continue
            r_t, jac_t = residual_jac(trial)
            cost_t = float(r_t @ r_t)
            if math.isfinite(cost_t) and cost_t <= cost:
                if cost - cost_t <= _REL_TOL * max(cost, 1e-300):
                    converged = True
                p, r, jac, cost = trial, r_t, jac_t, cost_t
                lam = max(lam / 10.0, 1e-15)
                stepped = True
                break
            lam = min(lam * 10.0, 1e30)
        if not stepped:
            converged = True  # no descent direction left at machine damping
    return {"p": p, "residual": r, "jacobian": jac, "cost": cost,
            "converged": converged, "n_iterations": iterations}


def _stderr_from_fit(residual, jacobian, n_params):
    """Per-parameter standard errors from the linearized covariance."""
    dof = residual.size - n_params
    if dof <= 0:
        return None
    try:
        cov = np.linalg.inv(jacobian.T @ jacobian)
    except np.linalg.LinAlgError:
        return None
    var = float(residual @ residual) / dof
    return np.sqrt(np.maximum(np.diag(cov) * var, 0.0))


def _pack(model):
    p = [model.baseline]
    for peak in model.peaks:
        p.extend((peak.center_hz, peak.amplitude, peak.fwhm_hz))
    return np.array(p, dtype=float)


def _unpack(p):
    peaks = [GaussianPeak(center_hz=p[k], amplitude=p[k + 1], fwhm_hz=p[k + 2])
             for k in range(1, p.size, 3)]
    return PeakModel(peaks=tuple(peaks), baseline=float(p[0]))


def _peaks_residual_jac(p, f, y):
    n = (p.size - 1) // 3
    model = np.full(f.shape, p[0])
    jac = np.empty((f.size, p.size))
    jac[:, 0] = 1.0
    for k in range(n):
        c, a, w = p[1 + 3 * k], p[2 + 3 * k], p[3 + 3 * k]
        x = f - c
        g = np.exp(-_FOUR_LN2 * (x / w) ** 2)
        model -= a * g
        jac[:, 1 + 3 * k] = -a * g * (2.0 * _FOUR_LN2) * x / w ** 2
        jac[:, 2 + 3 * k] = -g
        jac[:, 3 + 3 * k] = -a * g * (2.0 * _FOUR_LN2) * x ** 2 / w ** 3
    return model - y, jac


def auto_initialize(spectrum, n_peaks):
    """Starting model from the n deepest resolvable minima.

    The contrast is smoothed with a centered moving average of window 5;
    local minima of the smoothed curve are ranked by depth and selected
    greedily with a minimum separation of 3 grid steps.
    """
    if n_peaks < 1:
        raise ValueError("n_peaks must be >= 1")
    y = spectrum.contrast
    f = spectrum.frequencies_hz
    if y.size < 7:
        raise ValueError("spectrum too short to initialize a fit")
    padded = np.pad(y, 2, mode="edge")
    smooth = np.convolve(padded, np.full(5, 0.2), mode="valid")
    interior = np.arange(1, smooth.size - 1)
    is_min = (smooth[interior] < smooth[interior - 1]) & \
             (smooth[interior] <= smooth[interior + 1])
    candidates = interior[is_min]
    if candidates.size == 0:
        raise ValueError("no local minima found; the spectrum looks flat")
    order = candidates[np.argsort(smooth[candidates])]
    chosen = []
    for idx in order:
        if all(abs(idx - j) >= 3 for j in chosen):
            chosen.append(int(idx))
        if len(chosen) == n_peaks:
            break
    if len(chosen) < n_peaks:
        raise ValueError(
            f"found only {len(chosen)} resolvable minima but n_peaks={n_peaks}; "
            f"reduce n_peaks or supply an explicit initialization")
    baseline = float(np.percentile(smooth, 95))
    step = float(np.median(np.diff(f)))
    peaks = []
    for idx in sorted(chosen):
        depth = max(baseline - smooth[idx], 1e-12)
        half = baseline - depth / 2.0
        left = idx
        while left > 0 and smooth[left] < half:
            left -= 1
        right = idx
        while right < smooth.size - 1 and smooth[right] < half:
            right += 1
        fwhm = max((f[right] - f[left]), 2.0 * step)
        peaks.append(GaussianPeak(center_hz=float(f[idx]),
                                  amplitude=float(depth), fwhm_hz=float(fwhm)))
    return PeakModel(peaks=tuple(peaks), baseline=baseline)


def fit_peaks(spectrum, n_peaks, init=None, max_iter=_MAX_ITER):
    """Least-squares fit of n Gaussian dips with a shared baseline.

    Peak list of the returned model is sorted by center. Standard errors
    come from the linearized covariance at the optimum; ``converged``
    reflects whether the relative cost decrease dropped below 1e-10
    within the iteration budget.
    """
    if not 1 <= n_peaks <= 8:
        raise ValueError("n_peaks must lie in 1..8")
    n_points = len(spectrum)
    needed = 5 * (3 * n_peaks + 1)
    if n_points < needed:
        raise ValueError(
            f"spectrum has {n_points} points but fitting {n_peaks} peaks "
            f"needs at least {needed}")
    if init is None:
        init = auto_initialize(spectrum, n_peaks)
    else:
        if len(init.peaks) != n_peaks:
            raise ValueError("initialization does not match n_peaks")
        centers = [p.center_hz for p in init.peaks]
        if len(set(centers)) != len(centers):
            raise ValueError(
                "degenerate initialization: two peaks share a center; "
                "perturb the initial centers so they are distinct")
        if any(p.fwhm_hz <= 0 for p in init.peaks):
            raise ValueError("initial fwhm values must be positive")

    f, y = spectrum.frequencies_hz, spectrum.contrast
    span = f[-1] - f[0]
    lo, hi = f[0] - span, f[-1] + span

    def residual_jac(p):
        return _peaks_residual_jac(p, f, y)

    def accept(p):
        # positive widths, and no dip drifting far outside the data window
        # (an unsupported dip has a flat cost direction toward infinity)
        return bool(np.all(np.isfinite(p)) and np.all(p[3::3] > 0)
                    and np.all(p[1::3] >= lo) and np.all(p[1::3] <= hi))

    out = _levenberg_marquardt(residual_jac, _pack(init), accept=accept,
                               max_iter=max_iter)
    model = _unpack(out["p"])
    stderr_vec = _stderr_from_fit(out["residual"], out["jacobian"], out["p"].size)
    order = np.argsort([p.center_hz for p in model.peaks])
    sorted_peaks = tuple(model.peaks[i] for i in order)
    stderr = None
    if stderr_vec is not None:
        err_model = _unpack(stderr_vec.copy())
        # stderr vector reuses the packed layout; baseline slot is index 0
        err_peaks = tuple(err_model.peaks[i] for i in order)
        stderr = PeakModel(peaks=err_peaks, baseline=float(stderr_vec[0]))
    return PeakFit(model=PeakModel(peaks=sorted_peaks, baseline=model.baseline),
                   residual_rms=math.sqrt(out["cost"] / n_points),
                   converged=out["converged"],
                   n_iterations=out["n_iterations"],
                   stderr=stderr)


def select_peak_count(spectrum, candidates=(2, 3, 4, 5, 6)):
    """Pick the dip count by the small-sample-corrected information criterion.

    A candidate count only competes when every fitted dip is statistically
    significant (amplitude above 5 standard errors); surplus dips latch onto
    noise excursions and fail that cut long before the criterion alone would
    reject them. If no candidate passes the cut the plain criterion decides.
    Counts whose initialization or sample-size precondition fails are
    skipped; raises if no candidate is feasible.
    """
    n_points = len(spectrum)
    best = None
    best_any = None
    for n in candidates:
        try:
            fit = fit_peaks(spectrum, n)
        except ValueError:
            continue
        k = 3 * n + 2  # dip parameters, baseline, noise variance
        if n_points - k - 1 <= 0:
            continue
        ssr = max(fit.residual_rms ** 2 * n_points, 1e-300)
        aicc = (n_points * math.log(ssr / n_points) + 2.0 * k
                + 2.0 * k * (k + 1) / (n_points - k - 1))
        significant = fit.stderr is not None and all(
            err.amplitude > 0 and peak.amplitude > 5.0 * err.amplitude
            for peak, err in zip(fit.model.peaks, fit.stderr.peaks))
        if best_any is None or aicc < best_any[0]:
            best_any = (aicc, n)
        if significant and (best is None or aicc < best[0]):
            best = (aicc, n)
    if best is None:
        best = best_any
    if best is None:
        raise ValueError("no peak count in 2..6 could be initialized and fitted")
    return best[1]


def _line_model(p, assignment, params, fit_bz):
    """Model frequencies and Jacobian for an assignment of lines."""
    pi_perp, pi_par = p[0], p[1]
    bz = p[2] if fit_bz else 0.0
    n = len(assignment)
    freqs = np.empty(n)
    jac = np.empty((n, p.size))
    for i, (branch, m_i) in enumerate(assignment):
        z = m_i * params.a_hf_hz + params.gamma_e_hz_per_t * bz
        hyp = math.hypot(z, pi_perp)
        freqs[i] = params.d_hz + pi_par + branch * hyp
        if hyp == 0.0:
            jac[i, 0] = branch
            d_z = 0.0
        else:
            jac[i, 0] = branch * pi_perp / hyp
            d_z = branch * z / hyp
        jac[i, 1] = 1.0
        if fit_bz:
            jac[i, 2] = params.gamma_e_hz_per_t * d_z
    return freqs, jac


# Model lines indexed in canonical (branch, m_I) order.
_LINE_KEYS = ((-1, -1), (-1, 0), (-1, +1), (+1, -1), (+1, 0), (+1, +1))


def _initial_guess(centers, assignment, params, fit_bz):
    pi_par0 = float(np.mean(centers)) - params.d_hz
    inner = {key: c for key, c in zip(assignment, centers) if key[1] == 0}
    if len(inner) == 2:
        pi_perp0 = abs(inner[(+1, 0)] - inner[(-1, 0)]) / 2.0
    else:
        pi_perp0 = (max(centers) - min(centers)) / 4.0
    pi_perp0 = max(pi_perp0, 1.0)
    guess = [pi_perp0, pi_par0]
    if fit_bz:
        guess.append(0.0)
    return np.array(guess)


def extract_effective_field(centers, params=NvParams(), assume_bz_zero=True):
    """Invert fitted line centers to the effective-field parameters.

    Enumerates assignments of the sorted centers to subsets of the six
    model lines (sorted pairing is always optimal for a fixed parameter
    vector), solves each candidate by damped Gauss-Newton and keeps the
    lowest residual; ties prefer smaller |B_z|, then smaller transverse
    field. The transverse magnitude is sign-invariant in the model, so
    its absolute value is reported. Line positions are likewise invariant
    under jointly flipping the axial field and every nuclear projection,
    so the non-negative B_z representative is returned with the matching
    m_I labels.
    """
    centers = np.sort(np.asarray(centers, dtype=float).ravel())
    if centers.size and not np.all(np.isfinite(centers)):
        raise ValueError("centers must be finite")
    n_free = 2 if assume_bz_zero else 3
    if centers.size < n_free + 1:
        raise ValueError(
            f"{centers.size} centers cannot constrain {n_free} parameters; "
            f"need at least {n_free + 1}")
    if centers.size > 6:
        raise ValueError("more centers than model lines (6)")
    fit_bz = not assume_bz_zero

    if fit_bz:
        # the model line ordering switches at B_z = 0, +/-|A|/2gamma and
        # +/-|A|/gamma; one start inside each regime keeps the piecewise
        # landscape from trapping the descent
        bz_scale = abs(params.a_hf_hz) / params.gamma_e_hz_per_t
        bz_starts = tuple(k * bz_scale
                          for k in (0.0, 0.25, -0.25, 0.75, -0.75, 1.5, -1.5))
    else:
        bz_starts = (0.0,)

    results = []
    for subset in itertools.combinations(range(6), centers.size):
        assignment = [_LINE_KEYS[i] for i in subset]
        for bz0 in bz_starts:
            p0 = _initial_guess(centers, assignment, params, fit_bz)
            if fit_bz:
                p0[2] = bz0
            # pair sorted centers with the lines as ordered at the start
            # point; re-pair whenever optimization flips the model order
            freqs0, _ = _line_model(p0, assignment, params, fit_bz)
            ordered = [assignment[i] for i in np.argsort(freqs0, kind="stable")]
            out = None
            for _ in range(6):
                def residual_jac(p, a=ordered):
                    freqs, jac = _line_model(p, a, params, fit_bz)
                    return freqs - centers, jac

                out = _levenberg_marquardt(residual_jac, p0)
                freqs, _ = _line_model(out["p"], ordered, params, fit_bz)
                resort = sorted(range(len(ordered)), key=lambda i: freqs[i])
                if resort == list(range(len(ordered))):
                    break
                ordered = [ordered[i] for i in resort]
                p0 = out["p"]
            results.append((out, tuple(ordered)))

    best_cost = min(out["cost"] for out, _ in results)
    tol = 1e-9 * (1.0 + best_cost)
    ties = [(out, a) for out, a in results if out["cost"] <= best_cost + tol]
    ties.sort(key=lambda item: (abs(item[0]["p"][2]) if fit_bz else 0.0,
                                abs(item[0]["p"][0])))
    out, assignment = ties[0]
    if fit_bz and out["p"][2] < 0.0:
        # mirror to the equivalent non-negative axial field solution
        out["p"][2] = -out["p"][2]
        assignment = tuple((branch, -m_i) for branch, m_i in assignment)
    stderr = _stderr_from_fit(out["residual"], out["jacobian"], out["p"].size)
    return FieldExtraction(
        pi_perp_hz=abs(float(out["p"][0])),
        pi_par_hz=float(out["p"][1]),
        bz_tesla=float(out["p"][2]) if fit_bz else 0.0,
        pi_perp_stderr_hz=float(stderr[0]) if stderr is not None else None,
        pi_par_stderr_hz=float(stderr[1]) if stderr is not None else None,
        bz_stderr_tesla=(float(stderr[2]) if fit_bz else 0.0)
        if stderr is not None else None,
        assignment=assignment,
        residual_rms_hz=math.sqrt(out["cost"] / centers.size),
    )


def imbalance_from_fit(peaks, assignment):
    """Inner and outer strength imbalances from fitted dip depths.

    ``assignment`` pairs each peak with its (branch, m_I) line; outer
    depths per branch are summed over nuclear projections. Raises if a
    pair member is missing.
    """
    if len(peaks) != len(assignment):
        raise ValueError("peaks and assignment must have equal length")
    inner = {}
    outer = {-1: [], +1: []}
    for peak, (branch, m_i) in zip(peaks, assignment):
        if m_i == 0:
            inner[branch] = peak.amplitude
        else:
            outer[branch].append(peak.amplitude)
    if set(inner) != {-1, +1}:
        raise ValueError("inner imbalance needs both m_I = 0 lines in the fit")
    if not outer[-1] or not outer[+1]:
        raise ValueError("outer imbalance needs lines from both branches")

    def _ratio(hi, lo):
        total = hi + lo
        return (hi - lo) / total if total != 0 else 0.0

    return (_ratio(inner[+1], inner[-1]),
            _ratio(sum(outer[+1]), sum(outer[-1])))


def analyze_spectrum(spectrum, n_peaks, params=NvParams(), assume_bz_zero=True,
                     init=None):
    """Full pipeline: dip fit, field inversion, imbalance estimates.

    ``n_peaks`` may be an integer or "auto" for information-criterion
    selection. Imbalances are None when the fitted assignment lacks the
    pair members they need.
    """
    if n_peaks == "auto":
        n_peaks = select_peak_count(spectrum)
    peak_fit = fit_peaks(spectrum, n_peaks, init=init)
    centers = [p.center_hz for p in peak_fit.model.peaks]
    extraction = extract_effective_field(centers, params, assume_bz_zero)
    try:
        i_inner, i_outer = imbalance_from_fit(peak_fit.model.peaks,
                                              extraction.assignment)
    except ValueError:
        i_inner, i_outer = None, None
    return FitResult(peak_fit=peak_fit, extraction=extraction,
                     i_inner=i_inner, i_outer=i_outer)


def batch_summary(entries):
    """Aggregate named fit results into mean/std of the field parameters."""
    entries = tuple(entries)
    if not entries:
        raise ValueError("batch_summary needs at least one result")
    perp = np.array([r.extraction.pi_perp_hz for _, r in entries])
    par = np.array([r.extraction.pi_par_hz for _, r in entries])
    std = (lambda v: float(np.std(v, ddof=1)) if v.size > 1 else 0.0)
    return BatchSummary(entries=entries,
                        pi_perp_mean_hz=float(perp.mean()),
                        pi_perp_std_hz=std(perp),
                        pi_par_mean_hz=float(par.mean()),
                        pi_par_std_hz=std(par))
