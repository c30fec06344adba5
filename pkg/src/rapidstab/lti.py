"""Linear time-invariant systems: propagators, rank tests, Gramian constants.

The model is x'(t) = A x(t) + B u(t) with A generating a two-sided group
e^{tA}.  Coordinates are assumed chosen so that the Euclidean inner product
is the energy pairing; every operator identity in this package is then a
plain matrix identity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .quadrature import node_count, propagator_gramians

RANK_RTOL = 1e-12


class NotObservableError(ValueError):
    """The pair (A, B) fails the full-rank admissibility condition."""


def _as_matrix(x, name):
    arr = np.array(x, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a matrix, got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


@dataclass(frozen=True)
class LtiSystem:
    """State matrix A (n x n), control matrix B (n x m), optional label."""

    A: np.ndarray
    B: np.ndarray
    label: str = ""
    n: int = field(init=False)
    m: int = field(init=False)

    def __post_init__(self):
        A = _as_matrix(self.A, "A")
        B = _as_matrix(self.B, "B")
        if A.shape[0] != A.shape[1]:
            raise ValueError(f"A must be square, got shape {A.shape}")
        if B.shape[0] != A.shape[0]:
            raise ValueError(
                f"B must have {A.shape[0]} rows to match A, got shape {B.shape}"
            )
        if A.shape[0] < 1 or B.shape[1] < 1:
            raise ValueError("state and control dimensions must be >= 1")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "n", A.shape[0])
        object.__setattr__(self, "m", B.shape[1])


@dataclass(frozen=True)
class GrowthBound:
    """Constants (c, gamma) with ||e^{-tA^T}|| <= c e^{gamma t} for t >= 0."""

    c: float
    gamma: float

    def __post_init__(self):
        if self.c < 1.0:
            raise ValueError(f"growth constant c must be >= 1, got {self.c}")


@dataclass(frozen=True)
class ObservabilityConstants:
    """Extreme eigenvalues of the horizon-T Gramian: 0 < c2 <= c1."""

    c1: float
    c2: float
    horizon: float

    def __post_init__(self):
        if not (0.0 < self.c2 <= self.c1):
            raise ValueError(f"need 0 < c2 <= c1, got c1={self.c1}, c2={self.c2}")


def expm(A, t: float) -> np.ndarray:
    """Matrix exponential e^{tA}; t may be any real (groups are two-sided)."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expm needs a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)) or not np.isfinite(t):
        raise ValueError("expm needs finite entries")
    return scipy.linalg.expm(t * A)


def propagate(sys: LtiSystem, x0, t: float, mode: str = "forward") -> np.ndarray:
    """Propagate a state: e^{tA} x0 (forward) or e^{-tA^T} x0 (backward-adjoint)."""
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if x0.shape[0] != sys.n:
        raise ValueError(f"x0 must have length {sys.n}, got {x0.shape[0]}")
    if mode == "forward":
        return expm(sys.A, t) @ x0
    if mode == "backward-adjoint":
        return expm(sys.A.T, -t) @ x0
    raise ValueError(f"mode must be 'forward' or 'backward-adjoint', got {mode!r}")


def _pbh_controllable(A: np.ndarray, B: np.ndarray) -> bool:
    """Eigenvector test: no eigendirection of A^T is orthogonal to range(B).

    Each test is a well-conditioned local SVD, so it stays conclusive for
    stiff systems whose Kalman matrix is numerically graded beyond double
    precision.
    """
    n = A.shape[0]
    eye = np.eye(n)
    for lam in np.linalg.eigvals(A):
        if lam.imag < 0.0:
            continue  # real A: conjugate eigenvalues give the same test
        M = np.hstack([A - lam * eye, B.astype(complex)])
        sv = np.linalg.svd(M, compute_uv=False)
        if sv[-1] <= n * sv[0] * RANK_RTOL:
            return False
    return True


def controllability_rank(sys: LtiSystem) -> int:
    """Rank of the Kalman block matrix [B, AB, ..., A^{n-1}B].

    The blocks are built from the time-rescaled matrix A / max(1, ||A||),
    which leaves the rank unchanged but keeps the matrix from being graded
    over hundreds of orders of magnitude.  If the SVD rank still falls
    short of n while the eigenvector (PBH) test certifies controllability,
    the pair is reported as full rank: the SVD of a Kalman matrix is known
    to under-report for stiff oscillatory systems.  The system is
    admissible for feedback synthesis iff the result equals n.
    """
    A, B, n = sys.A, sys.B, sys.n
    scale = np.linalg.norm(A, 2)
    As = A / scale if scale > 1.0 else A
    blocks = [B]
    for _ in range(n - 1):
        blocks.append(As @ blocks[-1])
    sv = np.linalg.svd(np.hstack(blocks), compute_uv=False)
    if sv[0] == 0.0:
        return 0
    rank = int(np.count_nonzero(sv > n * sv[0] * RANK_RTOL))
    if rank < n and _pbh_controllable(A, B):
        rank = n
    return rank


def _panel_width(A: np.ndarray, extra: float = np.inf) -> float:
    """Panel width resolving both the propagator oscillation and `extra`."""
    rho = float(np.max(np.abs(np.linalg.eigvals(A)))) if A.size else 0.0
    width = min(1.0, extra)
    if rho > 0.0:
        width = min(width, 4.0 / rho)
    return width


def unweighted_gramian(sys: LtiSystem, T: float, nodes: int | None = None) -> np.ndarray:
    """Gramian M(T) = integral_0^T e^{-tA} B B^T e^{-tA^T} dt.

    Symmetric positive semidefinite; positive definite exactly when the
    pair (A, B) has full controllability rank.
    """
    if not T > 0.0:
        raise ValueError(f"horizon T must be positive, got {T}")
    nodes = node_count(nodes)
    grams, _ = propagator_gramians(
        sys.A, sys.B, [(0.0, float(T))], [np.ones_like],
        max_width=_panel_width(sys.A), nodes=nodes,
    )
    return grams[0]


def observability_constants(sys: LtiSystem, T: float,
                            nodes: int | None = None) -> ObservabilityConstants:
    """Largest/smallest eigenvalue of M(T), the two Gramian bounds."""
    if controllability_rank(sys) < sys.n:
        raise NotObservableError(
            f"system {sys.label or '(unnamed)'} is not observable: the lower "
            "Gramian constant would vanish"
        )
    ev = np.linalg.eigvalsh(unweighted_gramian(sys, T, nodes))
    return ObservabilityConstants(c1=float(ev[-1]), c2=float(ev[0]), horizon=float(T))


def growth_bound(sys: LtiSystem) -> GrowthBound:
    """Logarithmic-norm growth bound: c = 1, gamma = max eig of (-A - A^T)/2."""
    gamma = float(np.linalg.eigvalsh(-0.5 * (sys.A + sys.A.T))[-1])
    return GrowthBound(c=1.0, gamma=gamma)
