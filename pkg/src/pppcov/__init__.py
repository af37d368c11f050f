"""Coverage probability of Poisson cellular networks under double shadowed fading."""

from .coverage import (CoverageQuery, NetworkConfig, coverage_closed_form, coverage_from_mixture,
                       coverage_radial_integral, coverage_sweep, db_to_linear)
from .errors import (ConvergenceError, DomainError, InconsistencyError, InvalidArgumentError,
                     PPPCovError)
from .fading import (DoubleShadowedParams, GammaComponent, GammaMixture, GhqMixture,
                     KappaMuShadowedParams, build_gamma_mixture, build_ghq_mixture,
                     double_shadowed_ccdf, double_shadowed_pdf_exact, double_shadowed_pdf_ghq,
                     kms_ccdf, kms_pdf, sample_double_shadowed, sample_kms, single_term_mixture)
from .interference import (Deterministic, FadingModel, KappaMuShadowedModel, Lognormal, Nakagami,
                           Rayleigh, RayleighLognormal, e_h0, e_hq, parse_fading_model)
from .partitions import a_coefficient, b_coefficient, enumerate_tj
from .simulator import (CoverageEstimate, SimConfig, sample_sir, simulate_coverage,
                        simulate_coverage_sweep, sir_from_layout)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError", "CoverageEstimate", "CoverageQuery", "Deterministic", "DomainError",
    "DoubleShadowedParams", "FadingModel", "GammaComponent", "GammaMixture", "GhqMixture",
    "InconsistencyError", "InvalidArgumentError", "KappaMuShadowedModel", "KappaMuShadowedParams",
    "Lognormal", "Nakagami", "NetworkConfig", "PPPCovError", "Rayleigh", "RayleighLognormal",
    "SimConfig", "a_coefficient", "b_coefficient", "build_gamma_mixture", "build_ghq_mixture",
    "coverage_closed_form", "coverage_from_mixture", "coverage_radial_integral", "coverage_sweep",
    "db_to_linear", "double_shadowed_ccdf", "double_shadowed_pdf_exact", "double_shadowed_pdf_ghq",
    "e_h0", "e_hq", "enumerate_tj", "kms_ccdf", "kms_pdf", "parse_fading_model",
    "sample_double_shadowed", "sample_kms", "sample_sir", "simulate_coverage",
    "simulate_coverage_sweep", "single_term_mixture", "sir_from_layout",
]
