"""Gramian-based rapid stabilization of linear time-reversible systems.

Synthesizes the explicit feedback u = -B^T gram^{-1} x from a decay-weighted
observability Gramian, and certifies the algebraic identities behind it
(Riccati residual, coercivity margin, similarity conjugation, Lyapunov
envelope, spectral and theorem-level decay bounds) numerically.
"""

from .feedback import (
    DecayBound,
    FeedbackLaw,
    bundle_for_variant,
    conjugate_generator,
    decay_bound,
    eigen_discriminant_2x2,
    law_from_bundle,
    spectral_abscissa,
    synthesize,
)
from .gramian import (
    GramianBundle,
    QuadratureError,
    apply_gramian_via_odes,
    coercivity_margin,
    damping_root,
    infinite_horizon_gramian,
    riccati_residual,
    truncated_gramian,
    weighted_gramian,
)
from .lti import (
    GrowthBound,
    LtiSystem,
    NotObservableError,
    ObservabilityConstants,
    controllability_rank,
    expm,
    growth_bound,
    observability_constants,
    propagate,
    unweighted_gramian,
)
from .sim import (
    DivergenceError,
    LyapunovProfile,
    SweepRow,
    Trajectory,
    fit_decay_rate,
    integrate,
    lyapunov_profile,
    sweep_T,
)
from .weight import WeightProfile, weight_derivative, weight_eval
from .cli import demo_system, parse_system, run_verify, system_to_json

__version__ = "0.1.0"

__all__ = [
    "DecayBound",
    "DivergenceError",
    "FeedbackLaw",
    "GramianBundle",
    "GrowthBound",
    "LtiSystem",
    "LyapunovProfile",
    "NotObservableError",
    "ObservabilityConstants",
    "QuadratureError",
    "SweepRow",
    "Trajectory",
    "WeightProfile",
    "apply_gramian_via_odes",
    "bundle_for_variant",
    "coercivity_margin",
    "conjugate_generator",
    "controllability_rank",
    "damping_root",
    "decay_bound",
    "demo_system",
    "eigen_discriminant_2x2",
    "expm",
    "fit_decay_rate",
    "growth_bound",
    "infinite_horizon_gramian",
    "integrate",
    "law_from_bundle",
    "lyapunov_profile",
    "observability_constants",
    "parse_system",
    "propagate",
    "riccati_residual",
    "run_verify",
    "spectral_abscissa",
    "sweep_T",
    "synthesize",
    "system_to_json",
    "truncated_gramian",
    "unweighted_gramian",
    "weight_derivative",
    "weight_eval",
    "weighted_gramian",
]
