"""Numerical laboratory for single-shot homodyne phase estimation.

The probe is a coherent superposition of the vacuum with a displaced
squeezed state.  The package provides exact Gaussian-state algebra, the
quadrature measurement statistics (small-signal and exact), Fisher
information bounds, deterministic inverse-CDF sampling, maximum-likelihood
estimation and Monte Carlo campaign drivers, plus a truncated number-basis
oracle used for validation.
"""

from .gaussian import (
    ComplexGaussianAmplitude,
    SqueezedParams,
    exact_amplitude,
    from_mean_photons,
    number_moments,
)
from .probe import ProbeSpec, build_probe, probe_number_variance, quantum_fisher, vacuum_overlap
from .homodyne import (
    GridConfig,
    QuadratureConfig,
    TabulatedDensity,
    cramer_rao_bound,
    exact_density,
    first_order_density,
    fisher_information,
    g_kernel,
    peak_mass_estimate,
)
from .sampler import SeedSpec, sample
from .mle import LikelihoodProblem, estimate, log_likelihood
from .experiments import (
    CampaignConfig,
    CampaignResult,
    NuRule,
    ScalingFit,
    bound_table,
    convergence_trace,
    run_campaign,
    scaling_study,
)

__all__ = [
    "SqueezedParams",
    "ComplexGaussianAmplitude",
    "from_mean_photons",
    "exact_amplitude",
    "number_moments",
    "ProbeSpec",
    "build_probe",
    "vacuum_overlap",
    "probe_number_variance",
    "quantum_fisher",
    "GridConfig",
    "QuadratureConfig",
    "TabulatedDensity",
    "g_kernel",
    "first_order_density",
    "exact_density",
    "fisher_information",
    "cramer_rao_bound",
    "peak_mass_estimate",
    "SeedSpec",
    "sample",
    "LikelihoodProblem",
    "log_likelihood",
    "estimate",
    "NuRule",
    "CampaignConfig",
    "CampaignResult",
    "ScalingFit",
    "run_campaign",
    "convergence_trace",
    "scaling_study",
    "bound_table",
]

__version__ = "0.1.0"
