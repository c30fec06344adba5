"""Weighted Gramians, their derivative companions, and numerical certificates.

The central object is the weighted Gramian

    Lambda = integral_0^end e(s) e^{-sA} B B^T e^{-sA^T} ds

for the plateau-and-ramp weight e(s), together with the derivative Gramian

    Lambda' = -integral_0^end e'(s) e^{-sA} B B^T e^{-sA^T} ds.

Both are computed by quadrature; Lambda' is never derived from the Riccati
identity A Lambda + Lambda A^T + Lambda' = B B^T, so that identity remains
an independent certificate of the quadrature.  Two further variants are the
plain exponentially weighted Gramian truncated at the knot, and the
infinite-horizon Gramian obtained from a Lyapunov equation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .lti import LtiSystem, NotObservableError, _panel_width, controllability_rank
from .quadrature import node_count, propagator_gramians
from .weight import WeightProfile, weight_derivative, weight_eval

RICCATI_TOL = 1e-9

# exp(-700) is the last representable magnitude before underflow; weight
# contributions beyond this point are identically zero in double precision.
_UNDERFLOW_EXPONENT = 700.0

VARIANT_STANDARD = "standard"
VARIANT_TRUNCATED = "truncated"
VARIANT_INFINITE = "infinite-horizon"


class QuadratureError(RuntimeError):
    """The quadrature failed its internal certificate at the requested resolution."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class GramianBundle:
    """A Gramian, its derivative companion, and quadrature metadata.

    gram        -- symmetric positive definite n x n Gramian
    gram_deriv  -- symmetric PSD derivative Gramian (2*omega*gram for the
                   truncated and infinite-horizon variants)
    condition   -- spectral condition number of `gram`
    quad_nodes  -- total integrand evaluations (0 for infinite-horizon)
    variant     -- 'standard' | 'truncated' | 'infinite-horizon'
    """

    gram: np.ndarray
    gram_deriv: np.ndarray
    condition: float
    quad_nodes: int
    variant: str


def _require_full_rank(sys: LtiSystem):
    rank = controllability_rank(sys)
    if rank < sys.n:
        raise NotObservableError(
            f"system {sys.label or '(unnamed)'} has controllability rank "
            f"{rank} < {sys.n}; feedback synthesis needs full rank"
        )


def _residual(sys: LtiSystem, gram, gram_deriv) -> float:
    BBt = sys.B @ sys.B.T
    mismatch = sys.A @ gram + gram @ sys.A.T + gram_deriv - BBt
    return float(np.linalg.norm(mismatch) / np.linalg.norm(BBt))


def _spd_eigenvalues(gram, what) -> np.ndarray:
    ev = np.linalg.eigvalsh(gram)
    if ev[0] <= 0.0:
        raise QuadratureError(
            f"{what} is numerically singular (min eigenvalue {ev[0]:.3e}); "
            "the system is too weakly controllable at this horizon"
        )
    return ev


def weighted_gramian(sys: LtiSystem, w: WeightProfile,
                     nodes: int | None = None) -> GramianBundle:
    """Standard-variant bundle: plateau-and-ramp weighted Gramian plus derivative.

    Quadrature panels never straddle the weight knot, so the integrand is
    analytic on every panel.  The returned bundle is certified: if the
    relative Riccati residual exceeds 1e-9 at the requested node count, a
    QuadratureError is raised instead.
    """
    _require_full_rank(sys)
    nodes = node_count(nodes)
    # Beyond the underflow horizon the weight is exactly zero in double
    # precision; trimming there keeps the panel count bounded for huge omega.
    cut = _UNDERFLOW_EXPONENT / (2.0 * w.omega)
    segments = [(0.0, min(w.knot, cut))]
    if w.knot < cut:
        segments.append((w.knot, w.end))
    width = _panel_width(sys.A, extra=0.5 / w.omega)
    (gram, gram_deriv), evaluations = propagator_gramians(
        sys.A, sys.B, segments,
        [lambda s: weight_eval(w, s), lambda s: -weight_derivative(w, s)],
        max_width=width, nodes=nodes,
    )
    ev = _spd_eigenvalues(gram, "weighted Gramian")
    residual = _residual(sys, gram, gram_deriv)
    if residual > RICCATI_TOL:
        raise QuadratureError(
            f"Riccati residual {residual:.3e} exceeds {RICCATI_TOL:.0e} at "
            f"{nodes} nodes per panel; increase the node count",
            residual=residual,
        )
    return GramianBundle(gram=gram, gram_deriv=gram_deriv,
                         condition=float(ev[-1] / ev[0]),
                         quad_nodes=evaluations, variant=VARIANT_STANDARD)


def truncated_gramian(sys: LtiSystem, omega: float, T0: float,
                      nodes: int | None = None) -> GramianBundle:
    """Exponentially weighted Gramian cut off at the knot (no ramp).

    The derivative slot holds 2*omega*gram, the interior part of the
    derivative Gramian; the boundary terms are not tracked, so this variant
    carries no Riccati certificate.
    """
    if not (omega > 0.0 and T0 > 0.0):
        raise ValueError(f"need omega > 0 and T0 > 0, got omega={omega}, T0={T0}")
    _require_full_rank(sys)
    nodes = node_count(nodes)
    horizon = min(float(T0), _UNDERFLOW_EXPONENT / (2.0 * omega))
    width = _panel_width(sys.A, extra=0.5 / omega)
    (gram,), evaluations = propagator_gramians(
        sys.A, sys.B, [(0.0, horizon)],
        [lambda s: np.exp(-2.0 * omega * s)],
        max_width=width, nodes=nodes,
    )
    ev = _spd_eigenvalues(gram, "truncated Gramian")
    return GramianBundle(gram=gram, gram_deriv=2.0 * omega * gram,
                         condition=float(ev[-1] / ev[0]),
                         quad_nodes=evaluations, variant=VARIANT_TRUNCATED)


def infinite_horizon_gramian(sys: LtiSystem, omega: float) -> GramianBundle:
    """Gramian weighted by exp(-2*omega*s) over [0, infinity).

    Differentiating the integrand shows the integral solves the Lyapunov
    equation (A + omega I) X + X (A + omega I)^T = B B^T, which is solved
    directly.  Integrability requires every eigenvalue of A to have real
    part > -omega.
    """
    if not omega > 0.0:
        raise ValueError(f"omega must be positive, got {omega}")
    _require_full_rank(sys)
    min_real = float(np.min(np.linalg.eigvals(sys.A).real))
    if min_real <= -omega:
        raise ValueError(
            f"infinite-horizon Gramian diverges: eigenvalue real part "
            f"{min_real:.6g} <= -omega = {-omega:.6g}"
        )
    shifted = sys.A + omega * np.eye(sys.n)
    try:
        gram = scipy.linalg.solve_continuous_lyapunov(shifted, sys.B @ sys.B.T)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"Lyapunov solve failed: {exc}") from exc
    gram = 0.5 * (gram + gram.T)
    ev = _spd_eigenvalues(gram, "infinite-horizon Gramian")
    return GramianBundle(gram=gram, gram_deriv=2.0 * omega * gram,
                         condition=float(ev[-1] / ev[0]),
                         quad_nodes=0, variant=VARIANT_INFINITE)


def _rk4_step_matrix(M: np.ndarray, h: float) -> np.ndarray:
    """One classical RK4 step for x' = Mx, which collapses to the degree-4
    Taylor polynomial of e^{hM}."""
    hM = h * M
    hM2 = hM @ hM
    return (np.eye(M.shape[0]) + hM + hM2 / 2.0
            + hM2 @ hM / 6.0 + hM2 @ hM2 / 24.0)


def apply_gramian_via_odes(sys: LtiSystem, w: WeightProfile, xi0) -> np.ndarray:
    """Apply the weighted Gramian through two ODE solves (quadrature-free oracle).

    Solves the homogeneous adjoint problem xi' = -A^T xi forward from xi0,
    forms the input u(t) = e(t) B^T xi(t) (which vanishes at the end point
    because the weight does), then solves y' = A y + B u backward from
    y(end) = 0 by integrating the time-reversed system forward.  The result
    is -y(0), which equals gram @ xi0 up to the integrator error.

    xi0 may be a single state (n,) or a block of columns (n, k); the solves
    are batched over columns.
    """
    xi0 = np.asarray(xi0, dtype=float)
    if xi0.ndim not in (1, 2):
        raise ValueError(f"xi0 must be a vector or a column block, got ndim={xi0.ndim}")
    single = xi0.ndim == 1
    X = xi0.reshape(sys.n, -1) if single else xi0
    if X.shape[0] != sys.n:
        raise ValueError(f"xi0 must have {sys.n} rows, got {X.shape[0]}")
    end = w.end
    steps = math.ceil(end / min(1e-3, end / 2000.0) - 1e-12)
    if steps > 20_000_000:
        raise ValueError(f"horizon {end} needs {steps} fixed steps; too long")
    h = end / steps
    # Forward adjoint solve on the half-step grid, so the backward solve can
    # read the input at its RK4 stage times without interpolation.
    phi_half = _rk4_step_matrix(-sys.A.T, 0.5 * h)
    e_half = weight_eval(w, np.linspace(0.0, end, 2 * steps + 1))
    inputs = np.empty((2 * steps + 1, sys.m, X.shape[1]))
    xi = X.copy()
    inputs[0] = e_half[0] * (sys.B.T @ xi)
    for j in range(1, 2 * steps + 1):
        xi = phi_half @ xi
        inputs[j] = e_half[j] * (sys.B.T @ xi)

    # Time-reversed backward problem: z(tau) = y(end - tau) satisfies
    # z' = -A z - B u(end - tau), z(0) = 0; then y(0) = z(end).
    A = sys.A
    B = sys.B
    z = np.zeros_like(X)
    for i in range(steps):
        top = 2 * (steps - i)
        f0 = -B @ inputs[top]
        fmid = -B @ inputs[top - 1]
        f1 = -B @ inputs[top - 2]
        k1 = -A @ z + f0
        k2 = -A @ (z + 0.5 * h * k1) + fmid
        k3 = -A @ (z + 0.5 * h * k2) + fmid
        k4 = -A @ (z + h * k3) + f1
        z = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    result = -z
    return result.reshape(-1) if single else result


def riccati_residual(sys: LtiSystem, g: GramianBundle) -> float:
    """Relative Frobenius residual of A*gram + gram*A^T + gram_deriv - B*B^T.

    The standard-variant Gramian satisfies this identity exactly; the
    residual measures quadrature quality.  Other variants do not carry the
    identity and are rejected.
    """
    if g.variant != VARIANT_STANDARD:
        raise ValueError(
            f"Riccati certificate applies to the standard variant only, "
            f"got {g.variant!r}"
        )
    return _residual(sys, g.gram, g.gram_deriv)


def damping_root(g: GramianBundle) -> np.ndarray:
    """Symmetric PSD square root of gram^{-1} gram_deriv gram^{-1}.

    Computed by spectral decomposition; the symmetric PSD root is unique,
    which makes it canonical.  A significantly indefinite operand signals a
    quadrature failure.
    """
    factor = scipy.linalg.cho_factor(g.gram)
    inner = scipy.linalg.cho_solve(factor, g.gram_deriv)
    M = scipy.linalg.cho_solve(factor, inner.T)
    M = 0.5 * (M + M.T)
    ev, vec = np.linalg.eigh(M)
    if ev[0] < -1e-10:
        raise QuadratureError(
            f"damping operator indefinite (min eigenvalue {ev[0]:.3e}); "
            "the derivative Gramian quadrature failed"
        )
    root = vec @ np.diag(np.sqrt(np.clip(ev, 0.0, None))) @ vec.T
    return 0.5 * (root + root.T)


def coercivity_margin(g: GramianBundle, omega: float):
    """Margin matrix R = gram_deriv - 2*omega*gram and its smallest eigenvalue.

    For the standard variant R is positive semidefinite because the weight
    satisfies -e'(s) >= 2*omega*e(s); by congruence this is equivalent to
    the damping operator dominating 2*omega*gram^{-1}.
    """
    if g.variant != VARIANT_STANDARD:
        raise ValueError(
            f"coercivity margin applies to the standard variant only, "
            f"got {g.variant!r}"
        )
    R = g.gram_deriv - 2.0 * omega * g.gram
    return R, float(np.linalg.eigvalsh(R)[0])
