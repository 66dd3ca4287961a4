"""Random shifted-Gaussian integral operators: sampling, spectra, experiments.

A stationary point process drops Gaussian atoms along the line; compressing
the resulting random integral operator to an interval leaves a finite-rank
positive operator whose Gram-matrix spectrum this package computes in closed
form. Replicated, seeded experiments probe the operator's norm growth, width
decay, nuclear trace identity, and the density of the atom spans.
"""

from .experiments import (
    EXPERIMENTS,
    ConfigError,
    ExperimentConfig,
    ExperimentReport,
    NumericalError,
    config_from_dict,
    load_config,
    replication_seed,
    run_campbell,
    run_divergence,
    run_experiment,
    run_frame_bound,
    run_muntz,
    run_norm_growth,
    run_nuclear,
    run_sample,
    run_spectrum,
    run_widths,
    write_outputs,
)
from .gaussians import (
    GaussianBump,
    IndicatorAtom,
    TargetFunction,
    density,
    inner_full,
    inner_restricted,
    norm_sq,
    normal_cdf,
    shift_coefficients,
)
from .operators import (
    RestrictedOperator,
    apply,
    atom_norms,
    boundedness_certificate,
    build_restricted,
    coefficient_vector,
    quadratic_form,
    rayleigh_quotient,
)
from .pointproc import (
    CountSequence,
    PointConfiguration,
    ProcessSpec,
    count_in,
    ergodic_average,
    max_unit_count,
    reciprocal_sum,
    sample,
    unit_counts,
)
from .span_density import DensityCurve, density_curve, span_distance
from .spectral import DecayFit, SpectralSummary, decay_fit, eigen_sym, spectrum, width_tail_bound, widths
from .windows import Window, as_window

__version__ = "0.1.0"

__all__ = [
    "EXPERIMENTS",
    "ConfigError",
    "CountSequence",
    "DecayFit",
    "DensityCurve",
    "ExperimentConfig",
    "ExperimentReport",
    "GaussianBump",
    "IndicatorAtom",
    "NumericalError",
    "PointConfiguration",
    "ProcessSpec",
    "RestrictedOperator",
    "SpectralSummary",
    "TargetFunction",
    "Window",
    "apply",
    "as_window",
    "atom_norms",
    "boundedness_certificate",
    "build_restricted",
    "coefficient_vector",
    "config_from_dict",
    "count_in",
    "decay_fit",
    "density",
    "density_curve",
    "eigen_sym",
    "ergodic_average",
    "inner_full",
    "inner_restricted",
    "load_config",
    "max_unit_count",
    "norm_sq",
    "normal_cdf",
    "quadratic_form",
    "rayleigh_quotient",
    "reciprocal_sum",
    "replication_seed",
    "run_campbell",
    "run_divergence",
    "run_experiment",
    "run_frame_bound",
    "run_muntz",
    "run_norm_growth",
    "run_nuclear",
    "run_sample",
    "run_spectrum",
    "run_widths",
    "sample",
    "shift_coefficients",
    "span_distance",
    "spectrum",
    "unit_counts",
    "width_tail_bound",
    "widths",
    "write_outputs",
]
