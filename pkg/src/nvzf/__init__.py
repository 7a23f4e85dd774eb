"""NV zero-field spectroscopy toolkit.

Models the NV ground-state hyperfine spin system under intrinsic
effective fields and axial bias fields, predicts ODMR line positions and
strengths for arbitrarily polarized microwave drive, and inverts measured
spectra back to the effective-field parameters.
"""

from .hamiltonian import (BRANCH_MI_ORDER, EffectiveField, FieldSources,
                          MixingAngles, NvParams, Transition, TransitionSet,
                          block_hamiltonian, diagonalize_hermitian,
                          effective_field_from_sources, full_hamiltonian,
                          mixing_angles, transition_frequencies)
from .polarization import (CircularDecomposition, DriveField, Imbalances,
                           StrengthSet, circular_decomposition, imbalances,
                           mw_field_vector, rabi_frequencies, rabi_quartet,
                           rwa_hamiltonian, stokes_parameters,
                           transition_strengths)
from .spectra import (LineShape, MinimumGap, Spectrum, SweepResult,
                      dip_profile, dominant_frequency, ellipticity_scan,
                      parse_transition_label, polarization_scan, rabi_trace,
                      sweep_bz, synthesize_spectrum)
from .fitting import (BatchSummary, FieldExtraction, FitResult, GaussianPeak,
                      PeakFit, PeakModel, analyze_spectrum, auto_initialize,
                      batch_summary, extract_effective_field, fit_peaks,
                      imbalance_from_fit, select_peak_count)
from .noise import apply_noise, normal_samples
from .config import ConfigError, GridSpec, RunConfig, parse_config, \
    parse_config_file
from .io import (MalformedCsvError, read_spectrum_csv, write_json_file,
                 write_spectrum_csv, write_table_csv)

__version__ = "0.1.0"
