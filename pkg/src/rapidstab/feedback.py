"""Feedback synthesis from Gramian inverses, and closed-loop decay bounds.

The stabilizing gain is F = -B^T gram^{-1} for any of the Gramian variants;
the closed loop is A + B F.  For the standard variant the closed loop is
similar, through the Gramian itself, to -A^T - gram^{-1} gram_deriv, which
is how group generation and the decay estimates are certified numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .gramian import (
    GramianBundle,
    VARIANT_INFINITE,
    VARIANT_STANDARD,
    VARIANT_TRUNCATED,
    infinite_horizon_gramian,
    truncated_gramian,
    weighted_gramian,
)
from .lti import LtiSystem, growth_bound, observability_constants
from .weight import WeightProfile

VARIANTS = (VARIANT_STANDARD, VARIANT_TRUNCATED, VARIANT_INFINITE)


@dataclass(frozen=True)
class FeedbackLaw:
    """Stabilizing gain and the closed-loop matrix it produces.

    gain        -- m x n feedback matrix F = -B^T gram^{-1}
    closed_loop -- n x n matrix A + B @ gain
    variant     -- Gramian variant the gain was built from
    omega       -- prescribed decay rate
    knot        -- weight knot (plateau end; inf for the infinite horizon)
    """

    gain: np.ndarray
    closed_loop: np.ndarray
    variant: str
    omega: float
    knot: float


@dataclass(frozen=True)
class DecayBound:
    """Closed-loop decay certificate with all of its constants.

    The envelope is c_prime * exp(exponent * t) with

        exponent = -2*omega + gamma + alpha * phi_T,
        phi_T    = exp(gamma*T - 2*omega*(T - T0)),
        alpha    = 2*omega * c^2 * c1(1/(2*omega)) / c2(T0),
        c_prime  = c * cond(gram).

    (c, gamma) is the adjoint growth bound; c1, c2 are the extreme
    eigenvalues of the unweighted Gramians at horizons 1/(2*omega) and T0.
    """

    c: float
    gamma: float
    c1_half_omega: float
    c2_T0: float
    alpha: float
    phi_T: float
    exponent: float
    c_prime: float


def _gain_from_bundle(sys: LtiSystem, g: GramianBundle):
    factor = scipy.linalg.cho_factor(g.gram)
    gain = -scipy.linalg.cho_solve(factor, sys.B).T
    closed_loop = sys.A + sys.B @ gain
    return gain, closed_loop


def bundle_for_variant(sys: LtiSystem, omega: float, T0: float,
                       T: float | None = None, variant: str = VARIANT_STANDARD,
                       nodes: int | None = None) -> GramianBundle:
    """Gramian bundle for the requested variant.

    standard         -- plateau-and-ramp weight with knot at T (default T0)
    truncated        -- exponential weight cut at T0 (no Riccati certificate)
    infinite-horizon -- Lyapunov-equation Gramian; needs Re(eig A) > -omega
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    if T is None:
        T = T0
    if variant == VARIANT_STANDARD:
        if T < T0:
            raise ValueError(f"plateau horizon T={T} must be >= T0={T0}")
        return weighted_gramian(sys, WeightProfile(omega=omega, knot=float(T)), nodes)
    if variant == VARIANT_TRUNCATED:
        return truncated_gramian(sys, omega, T0, nodes)
    return infinite_horizon_gramian(sys, omega)


def law_from_bundle(sys: LtiSystem, g: GramianBundle, omega: float,
                    knot: float) -> FeedbackLaw:
    """Feedback law F = -B^T gram^{-1} built from an existing bundle."""
    gain, closed_loop = _gain_from_bundle(sys, g)
    return FeedbackLaw(gain=gain, closed_loop=closed_loop, variant=g.variant,
                       omega=float(omega), knot=float(knot))


def synthesize(sys: LtiSystem, omega: float, T0: float, T: float | None = None,
               variant: str = VARIANT_STANDARD,
               nodes: int | None = None) -> FeedbackLaw:
    """Build the Gramian feedback law for the requested variant (see
    bundle_for_variant for the variant semantics)."""
    g = bundle_for_variant(sys, omega, T0, T, variant, nodes)
    if variant == VARIANT_STANDARD:
        knot = float(T if T is not None else T0)
    elif variant == VARIANT_TRUNCATED:
        knot = float(T0)
    else:
        knot = math.inf
    return law_from_bundle(sys, g, omega, knot)


def conjugate_generator(sys: LtiSystem, g: GramianBundle):
    """Conjugated closed-loop generator and the similarity defect.

    Returns (-A^T - gram^{-1} gram_deriv, err) where err is the relative
    Frobenius mismatch of gram^{-1} (A - B B^T gram^{-1}) gram against it.
    The Riccati identity forces the mismatch to vanish, so err is another
    live certificate of the standard-variant quadrature.
    """
    if g.variant != VARIANT_STANDARD:
        raise ValueError(
            f"conjugation requires the standard variant, got {g.variant!r}"
        )
    factor = scipy.linalg.cho_factor(g.gram)
    conjugated = -sys.A.T - scipy.linalg.cho_solve(factor, g.gram_deriv)
    _, closed_loop = _gain_from_bundle(sys, g)
    transported = scipy.linalg.cho_solve(factor, closed_loop @ g.gram)
    err = np.linalg.norm(transported - conjugated) / np.linalg.norm(conjugated)
    return conjugated, float(err)


def spectral_abscissa(M) -> float:
    """Maximum real part over the eigenvalues of a square matrix."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or not np.all(np.isfinite(M)):
        raise ValueError("spectral abscissa needs a finite square matrix")
    return float(np.max(np.linalg.eigvals(M).real))


def eigen_discriminant_2x2(M) -> float:
    """trace^2 - 4 det of a 2x2 matrix; negative certifies a conjugate pair."""
    M = np.asarray(M, dtype=float)
    if M.shape != (2, 2):
        raise ValueError(f"discriminant is defined for 2x2 matrices, got {M.shape}")
    trace = M[0, 0] + M[1, 1]
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    return float(trace * trace - 4.0 * det)


def decay_bound(sys: LtiSystem, omega: float, T0: float, T: float | None = None,
                nodes: int | None = None) -> DecayBound:
    """Decay certificate for the standard-variant closed loop with knot T.

    The exponent tends to gamma - 2*omega as T grows (phi_T -> 0 when
    gamma < 2*omega), which for conservative systems (gamma = 0) explains
    decay rates near -2*omega even though the plain guarantee is -omega.
    """
    if T is None:
        T = T0
    if T < T0:
        raise ValueError(f"plateau horizon T={T} must be >= T0={T0}")
    bound = growth_bound(sys)
    c, gamma = bound.c, bound.gamma
    c1 = observability_constants(sys, 0.5 / omega, nodes).c1
    c2 = observability_constants(sys, T0, nodes).c2
    alpha = 2.0 * omega * c * c * c1 / c2
    phi_T = math.exp(gamma * T - 2.0 * omega * (T - T0))
    g = weighted_gramian(sys, WeightProfile(omega=omega, knot=float(T)), nodes)
    return DecayBound(c=c, gamma=gamma, c1_half_omega=float(c1), c2_T0=float(c2),
                      alpha=float(alpha), phi_T=float(phi_T),
                      exponent=float(-2.0 * omega + gamma + alpha * phi_T),
                      c_prime=float(c * g.condition))
