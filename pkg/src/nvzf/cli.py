"""Command-line interface.

Subcommands cover the full workflow: simulate a spectrum, fit a measured
one, sweep the axial field, tabulate drive-polarization response, compute
a Rabi trace and batch-process a directory. Set NVZF_LOG=debug|info|
warning|error to control verbosity. All outputs land in --out as CSV
plus JSON; --plot additionally renders a PNG figure for each product.
"""

from __future__ import annotations

import argparse
import glob
import logging
import os
import sys

from .config import ConfigError, GridSpec, RunConfig, parse_config_file
from .fitting import analyze_spectrum, batch_summary
from .hamiltonian import EffectiveField, NvParams, transition_frequencies
from .io import (MalformedCsvError, read_spectrum_csv, write_json_file,
                 write_spectrum_csv, write_table_csv)
from .noise import apply_noise
from .polarization import transition_strengths
from .spectra import (ellipticity_scan, parse_transition_label,
                      polarization_scan, rabi_trace, sweep_bz,
                      synthesize_spectrum)

log = logging.getLogger("nvzf")

SWEEP_HEADER = ("bz_tesla", "f_minus_m-1", "f_minus_m0", "f_minus_m+1",
                "f_plus_m-1", "f_plus_m0", "f_plus_m+1")
STRENGTH_COLUMNS = ("w_minus_m-1", "w_minus_m0", "w_minus_m+1",
                    "w_plus_m-1", "w_plus_m0", "w_plus_m+1")


def _setup_logging():
    name = os.environ.get("NVZF_LOG", "warning")
    level = getattr(logging, name.upper(), None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level,
                        format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr)
    if not isinstance(getattr(logging, name.upper(), None), int):
        log.warning("unknown NVZF_LOG level %r, using warning", name)


def _n_peaks_arg(value):
    if value == "auto":
        return value
    try:
        n = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected an integer or 'auto', got {value!r}")
    if not 1 <= n <= 8:
        raise argparse.ArgumentTypeError("n-peaks must lie in 1..8")
    return n


def _seed_arg(value):
    try:
        seed = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {value!r}")
    if not 0 <= seed < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return seed


def _load_config(args, default_ok=False):
    if args.config is None:
        if default_ok:
            return RunConfig(params=NvParams(), field=EffectiveField(),
                             drive=None, bz_tesla=0.0, frequency_grid=None,
                             bz_grid=None, phi_grid=None, epsilon_grid=None,
                             time_grid=None, lineshape=None, noise_sigma=0.0,
                             seed=0)
        raise ConfigError("this command requires --config")
    return parse_config_file(args.config)


def _need(value, name, hint):
    if value is None:
        raise ConfigError(f"this command needs '{hint}' in the config ({name})")
    return value


def _out_dir(args):
    os.makedirs(args.out, exist_ok=True)
    return args.out


def _transitions_payload(cfg, transitions, strengths):
    field = cfg.field
    lines = [{"branch": t.branch, "m_i": t.m_i, "frequency_hz": t.frequency_hz,
              "w": w, "degenerate": t.degenerate}
             for t, w in zip(transitions.transitions, strengths.w)]
    return {
        "bz_tesla": cfg.bz_tesla,
        "field": {"pi_x_hz": field.pi_x_hz, "pi_y_hz": field.pi_y_hz,
                  "pi_par_hz": field.pi_par_hz, "pi_perp_hz": field.pi_perp_hz,
                  "phi_pi_rad": field.phi_pi_rad},
        "inner_splitting_hz": transitions.inner_splitting_hz,
        "outer_splitting_hz": transitions.outer_splitting_hz(+1),
        "lines": lines,
    }


def cmd_simulate(args):
    cfg = _load_config(args)
    drive = _need(cfg.drive, "drive", "drive")
    shape = _need(cfg.lineshape, "lineshape", "lineshape")
    grid_spec = _need(cfg.frequency_grid, "frequency_grid_hz", "frequency_grid_hz")
    seed = args.seed if args.seed is not None else cfg.seed
    transitions = transition_frequencies(cfg.params, cfg.field, cfg.bz_tesla)
    strengths = transition_strengths(cfg.field, cfg.params, drive)
    spectrum = synthesize_spectrum(transitions, strengths, shape,
                                   grid_spec.linspace())
    spectrum = apply_noise(spectrum, cfg.noise_sigma, seed)
    out = _out_dir(args)
    csv_path = os.path.join(out, "spectrum.csv")
    write_spectrum_csv(spectrum, csv_path)
    write_json_file(_transitions_payload(cfg, transitions, strengths),
                    os.path.join(out, "transitions.json"))
    log.info("wrote %s", csv_path)
    if args.plot:
        from . import plots
        plots.plot_spectrum(spectrum, os.path.join(out, "spectrum.png"),
                            lines=transitions)
    return 0


def cmd_fit(args):
    spectrum = read_spectrum_csv(args.spectrum)
    cfg = _load_config(args, default_ok=True)
    result = analyze_spectrum(spectrum, args.n_peaks, cfg.params,
                              assume_bz_zero=not args.fit_bz)
    out = _out_dir(args)
    write_json_file(result.to_dict(), os.path.join(out, "fit_result.json"))
    model_curve = result.peak_fit.model.evaluate(spectrum.frequencies_hz)
    write_table_csv(os.path.join(out, "fit_curve.csv"),
                    ("frequency_hz", "model_contrast"),
                    (spectrum.frequencies_hz, model_curve))
    if args.plot:
        from . import plots
        plots.plot_spectrum(spectrum, os.path.join(out, "fit.png"),
                            model_curve=model_curve)
    if not result.peak_fit.converged:
        log.warning("fit did not converge within the iteration budget")
        return 2
    return 0


def cmd_sweep(args):
    cfg = _load_config(args)
    grid = _need(cfg.bz_grid, "bz_grid_tesla", "bz_grid_tesla")
    sweep = sweep_bz(cfg.params, cfg.field, grid.start, grid.stop, grid.n)
    out = _out_dir(args)
    columns = [sweep.bz_tesla] + [sweep.frequencies_hz[i] for i in range(6)]
    write_table_csv(os.path.join(out, "sweep.csv"), SWEEP_HEADER, columns)
    summary = {"min_gaps": {
        f"{m_i:+d}": {"gap_hz": gap.gap_hz, "bz_tesla": gap.bz_tesla}
        for m_i, gap in sweep.min_gaps.items()}}
    write_json_file(summary, os.path.join(out, "sweep_summary.json"))
    if args.plot:
        from . import plots
        plots.plot_sweep(sweep, os.path.join(out, "sweep.png"))
    return 0


def cmd_strengths(args):
    cfg = _load_config(args)
    drive = _need(cfg.drive, "drive", "drive")
    if args.scan == "phi":
        grid_spec = _need(cfg.phi_grid, "phi_grid_rad", "phi_grid_rad")
        grid = grid_spec.linspace()
        curves = polarization_scan(cfg.field, cfg.params, drive.omega_rabi_hz,
                                   drive.epsilon_mw_rad, grid)
        scan_column = "phi_mw_rad"
    else:
        grid_spec = _need(cfg.epsilon_grid, "epsilon_grid_rad", "epsilon_grid_rad")
        grid = grid_spec.linspace()
        curves = ellipticity_scan(cfg.field, cfg.params, drive.omega_rabi_hz,
                                  drive.phi_mw_rad, grid)
        scan_column = "epsilon_mw_rad"
    out = _out_dir(args)
    write_table_csv(os.path.join(out, "strengths.csv"),
                    (scan_column,) + STRENGTH_COLUMNS,
                    [grid] + [curves[i] for i in range(6)])
    if args.plot:
        from . import plots
        plots.plot_strength_scan(grid, curves, scan_column,
                                 os.path.join(out, "strengths.png"))
    return 0


def cmd_rabi(args):
    cfg = _load_config(args)
    drive = _need(cfg.drive, "drive", "drive")
    grid_spec = _need(cfg.time_grid, "time_grid_s", "time_grid_s")
    parse_transition_label(args.transition)  # fail fast on bad labels
    t_grid = grid_spec.linspace()
    population = rabi_trace(cfg.field, cfg.params, drive, args.transition, t_grid)
    out = _out_dir(args)
    write_table_csv(os.path.join(out, "rabi.csv"), ("time_s", "population"),
                    (t_grid, population))
    if args.plot:
        from . import plots
        plots.plot_rabi(t_grid, population, os.path.join(out, "rabi.png"))
    return 0


def cmd_batch(args):
    cfg = _load_config(args, default_ok=True)
    paths = sorted(glob.glob(os.path.join(args.directory, "*.csv")))
    if not paths:
        log.error("no .csv files found in %s", args.directory)
        return 1
    out = _out_dir(args)
    entries = []
    for path in paths:
        name = os.path.splitext(os.path.basename(path))[0]
        try:
            spectrum = read_spectrum_csv(path)
            result = analyze_spectrum(spectrum, args.n_peaks, cfg.params,
                                      assume_bz_zero=not args.fit_bz)
        except (MalformedCsvError, ValueError) as exc:
            log.warning("skipping %s: %s", path, exc)
            continue
        write_json_file(result.to_dict(),
                        os.path.join(out, f"{name}_fit.json"))
        if args.plot:
            from . import plots
            model_curve = result.peak_fit.model.evaluate(spectrum.frequencies_hz)
            plots.plot_spectrum(spectrum, os.path.join(out, f"{name}_fit.png"),
                                model_curve=model_curve)
        entries.append((name, result))
    if not entries:
        log.error("all %d spectra failed to parse or fit", len(paths))
        return 1
    write_json_file(batch_summary(entries).to_dict(),
                    os.path.join(out, "batch_summary.json"))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nvzf",
        description="NV zero-field spectroscopy: simulate, fit and analyze "
                    "hyperfine ODMR spectra.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required):
        p.add_argument("--config", required=config_required,
                       help="JSON run configuration")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--plot", action="store_true",
                       help="also render PNG figures")

    p = sub.add_parser("simulate", help="synthesize a spectrum from a config")
    common(p, True)
    p.add_argument("--seed", type=_seed_arg, default=None,
                   help="override the config noise seed")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit dips in a measured spectrum CSV")
    p.add_argument("spectrum", help="input spectrum CSV")
    common(p, False)
    p.add_argument("--n-peaks", type=_n_peaks_arg, default="auto",
                   help="dip count, or 'auto' for information-criterion choice")
    p.add_argument("--fit-bz", action="store_true",
                   help="also fit the axial field instead of assuming 0")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("sweep", help="transition frequencies versus axial field")
    common(p, True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("strengths", help="strength curves along a drive scan")
    common(p, True)
    p.add_argument("--scan", choices=("phi", "epsilon"), default="phi",
                   help="scan the drive orientation (phi) or ellipticity")
    p.set_defaults(func=cmd_strengths)

    p = sub.add_parser("rabi", help="time-domain population transfer trace")
    common(p, True)
    p.add_argument("--transition", required=True,
                   help="target line: 1..4, a quartet name, or '<+|->,<m_I>'")
    p.set_defaults(func=cmd_rabi)

    p = sub.add_parser("batch", help="fit every spectrum CSV in a directory")
    p.add_argument("directory", help="directory of spectrum CSVs")
    common(p, False)
    p.add_argument("--n-peaks", type=_n_peaks_arg, default="auto")
    p.add_argument("--fit-bz", action="store_true")
    p.set_defaults(func=cmd_batch)

    return parser


def main(argv=None):
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, MalformedCsvError) as exc:
        log.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        log.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        log.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
