"""Run configuration: JSON parsing with field-level diagnostics.

Configs are plain JSON objects. Field names carry their unit as a suffix
(_hz, _tesla, _rad, _s); any angle-valued field also accepts a _deg twin,
and providing both forms of the same angle is an error. Unknown keys are
rejected so typos surface immediately.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .hamiltonian import EffectiveField, FieldSources, NvParams, \
    effective_field_from_sources
from .polarization import DriveField
from .spectra import LineShape


class ConfigError(ValueError):
    """Raised for malformed or invalid run configurations."""


@dataclass(frozen=True)
class GridSpec:
    """A uniform sampling grid."""

    start: float
    stop: float
    n: int

    def linspace(self):
        return np.linspace(self.start, self.stop, self.n)


@dataclass(frozen=True)
class RunConfig:
    """Validated inputs for the command-line entry points."""

    params: NvParams
    field: EffectiveField
    drive: DriveField | None
    bz_tesla: float
    frequency_grid: GridSpec | None
    bz_grid: GridSpec | None
    phi_grid: GridSpec | None
    epsilon_grid: GridSpec | None
    time_grid: GridSpec | None
    lineshape: LineShape | None
    noise_sigma: float
    seed: int


def _require_dict(value, path):
    if not isinstance(value, dict):
        raise ConfigError(f"{path}: expected an object")
    return value


def _reject_unknown(section, allowed, path):
    unknown = sorted(set(section) - set(allowed))
    if unknown:
        raise ConfigError(f"{path}: unknown field(s) {', '.join(unknown)}; "
                          f"allowed: {', '.join(sorted(allowed))}")


def _number(section, key, path, default=None, required=False):
    if key not in section:
        if required:
            raise ConfigError(f"{path}.{key}: required field is missing")
        return default
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}.{key}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{path}.{key}: must be finite")
    return float(value)


def _integer(section, key, path, default=None, required=False):
    if key not in section:
        if required:
            raise ConfigError(f"{path}.{key}: required field is missing")
        return default
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}.{key}: expected an integer, got {value!r}")
    return value


def _angle(section, base, path, default=0.0):
    """Read an angle given as <base>_rad or <base>_deg (exclusive)."""
    rad_key, deg_key = f"{base}_rad", f"{base}_deg"
    if rad_key in section and deg_key in section:
        raise ConfigError(f"{path}: give either {rad_key} or {deg_key}, not both")
    if deg_key in section:
        return math.radians(_number(section, deg_key, path))
    return _number(section, rad_key, path, default=default)


def _parse_params(section, path):
    section = _require_dict(section, path)
    allowed = ("d_hz", "a_hf_hz", "gamma_e_hz_per_t", "d_par_hz_cm_per_v",
               "d_perp_hz_cm_per_v")
    _reject_unknown(section, allowed, path)
    defaults = NvParams()
    kwargs = {key: _number(section, key, path, default=getattr(defaults, key))
              for key in allowed}
    try:
        return NvParams(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _parse_field(section, path, params):
    section = _require_dict(section, path)
    if "sources" in section:
        _reject_unknown(section, ("sources",), path)
        src = _require_dict(section["sources"], f"{path}.sources")
        allowed = ("e_x_v_per_cm", "e_y_v_per_cm", "e_z_v_per_cm",
                   "m_x_hz", "m_y_hz", "m_z_hz")
        _reject_unknown(src, allowed, f"{path}.sources")
        kwargs = {key: _number(src, key, f"{path}.sources", default=0.0)
                  for key in allowed}
        return effective_field_from_sources(FieldSources(**kwargs), params)
    polar_keys = {"pi_perp_hz", "phi_pi_rad", "phi_pi_deg"}
    if polar_keys & set(section):
        _reject_unknown(section, sorted(polar_keys | {"pi_par_hz"}), path)
        perp = _number(section, "pi_perp_hz", path, required=True)
        phi = _angle(section, "phi_pi", path)
        par = _number(section, "pi_par_hz", path, default=0.0)
        try:
            return EffectiveField.from_polar(perp, phi, par)
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    allowed = ("pi_x_hz", "pi_y_hz", "pi_par_hz")
    _reject_unknown(section, allowed, path)
    kwargs = {key: _number(section, key, path, default=0.0) for key in allowed}
    return EffectiveField(**kwargs)


def _parse_drive(section, path):
    section = _require_dict(section, path)
    allowed = ("omega_rabi_hz", "phi_mw_rad", "phi_mw_deg",
               "epsilon_mw_rad", "epsilon_mw_deg", "omega_drive_hz")
    _reject_unknown(section, allowed, path)
    try:
        return DriveField(
            omega_rabi_hz=_number(section, "omega_rabi_hz", path, required=True),
            phi_mw_rad=_angle(section, "phi_mw", path),
            epsilon_mw_rad=_angle(section, "epsilon_mw", path),
            omega_drive_hz=_number(section, "omega_drive_hz", path, default=0.0),
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _parse_lineshape(section, path):
    section = _require_dict(section, path)
    allowed = ("kind", "fwhm_hz", "contrast_scale", "baseline")
    _reject_unknown(section, allowed, path)
    kind = section.get("kind", "gaussian")
    if not isinstance(kind, str):
        raise ConfigError(f"{path}.kind: expected a string")
    try:
        return LineShape(
            fwhm_hz=_number(section, "fwhm_hz", path, required=True),
            contrast_scale=_number(section, "contrast_scale", path, required=True),
            kind=kind,
            baseline=_number(section, "baseline", path, default=1.0),
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _parse_grid(section, path, degrees=False, min_start=None):
    section = _require_dict(section, path)
    _reject_unknown(section, ("start", "stop", "n"), path)
    start = _number(section, "start", path, required=True)
    stop = _number(section, "stop", path, required=True)
    n = _integer(section, "n", path, required=True)
    if n < 2:
        raise ConfigError(f"{path}.n: need at least 2 points, got {n}")
    if not start < stop:
        raise ConfigError(f"{path}: start must be below stop")
    if min_start is not None and start < min_start:
        raise ConfigError(f"{path}.start: must be >= {min_start}")
    if degrees:
        start, stop = math.radians(start), math.radians(stop)
    return GridSpec(start=start, stop=stop, n=n)


def _parse_angle_grid(data, base, path):
    rad_key, deg_key = f"{base}_rad", f"{base}_deg"
    if rad_key in data and deg_key in data:
        raise ConfigError(f"{path}: give either {rad_key} or {deg_key}, not both")
    if deg_key in data:
        return _parse_grid(data[deg_key], f"{path}.{deg_key}", degrees=True)
    if rad_key in data:
        return _parse_grid(data[rad_key], f"{path}.{rad_key}")
    return None


_TOP_LEVEL_KEYS = (
    "nv_params", "effective_field", "drive", "bz_tesla",
    "frequency_grid_hz", "bz_grid_tesla", "phi_grid_rad", "phi_grid_deg",
    "epsilon_grid_rad", "epsilon_grid_deg", "time_grid_s",
    "lineshape", "noise_sigma", "seed",
)


def parse_config(data, source="config"):
    """Validate a decoded JSON object into a RunConfig."""
    data = _require_dict(data, source)
    _reject_unknown(data, _TOP_LEVEL_KEYS, source)
    params = _parse_params(data.get("nv_params", {}), f"{source}.nv_params")
    field = _parse_field(data.get("effective_field", {}),
                         f"{source}.effective_field", params)
    drive = None
    if "drive" in data:
        drive = _parse_drive(data["drive"], f"{source}.drive")
    lineshape = None
    if "lineshape" in data:
        lineshape = _parse_lineshape(data["lineshape"], f"{source}.lineshape")
    freq_grid = None
    if "frequency_grid_hz" in data:
        freq_grid = _parse_grid(data["frequency_grid_hz"],
                                f"{source}.frequency_grid_hz")
    bz_grid = None
    if "bz_grid_tesla" in data:
        bz_grid = _parse_grid(data["bz_grid_tesla"], f"{source}.bz_grid_tesla")
    time_grid = None
    if "time_grid_s" in data:
        time_grid = _parse_grid(data["time_grid_s"], f"{source}.time_grid_s",
                                min_start=0.0)
    noise_sigma = _number(data, "noise_sigma", source, default=0.0)
    if noise_sigma < 0:
        raise ConfigError(f"{source}.noise_sigma: must be >= 0")
    seed = _integer(data, "seed", source, default=0)
    if not 0 <= seed < 2 ** 64:
        raise ConfigError(f"{source}.seed: must fit in an unsigned 64-bit integer")
    return RunConfig(
        params=params,
        field=field,
        drive=drive,
        bz_tesla=_number(data, "bz_tesla", source, default=0.0),
        frequency_grid=freq_grid,
        bz_grid=bz_grid,
        phi_grid=_parse_angle_grid(data, "phi_grid", source),
        epsilon_grid=_parse_angle_grid(data, "epsilon_grid", source),
        time_grid=time_grid,
        lineshape=lineshape,
        noise_sigma=noise_sigma,
        seed=seed,
    )


def parse_config_file(path):
    """Load and validate a JSON config file."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}, "
                          f"column {exc.colno}: {exc.msg}") from exc
    return parse_config(data, source=str(path))
