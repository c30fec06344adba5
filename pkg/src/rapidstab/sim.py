"""Closed-loop trajectories, Lyapunov envelopes, and empirical decay rates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .feedback import decay_bound, spectral_abscissa, synthesize
from .gramian import GramianBundle, _rk4_step_matrix
from .lti import LtiSystem

DIVERGENCE_LIMIT = 1e12


class DivergenceError(RuntimeError):
    """Trajectory norm exceeded the divergence limit; flagged unstable."""


@dataclass(frozen=True)
class Trajectory:
    """Fixed-step trajectory: times (k+1,), states (k+1, n)."""

    times: np.ndarray
    states: np.ndarray
    dt: float
    method: str = "rk4"

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        states = np.asarray(self.states, dtype=float)
        if times.shape[0] != states.shape[0]:
            raise ValueError("times and states must have matching lengths")
        if np.any(np.diff(times) <= 0.0):
            raise ValueError("times must be strictly increasing")
        if not np.all(np.isfinite(states)):
            raise ValueError("states must be finite")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)


@dataclass(frozen=True)
class LyapunovProfile:
    """Gramian-inverse energy V(t_i) against its exponential envelope."""

    values: np.ndarray
    envelope: np.ndarray
    max_violation: float


def integrate(a_cl, x0, t_final: float, dt: float = 1e-3) -> Trajectory:
    """Classical fixed-step RK4 for x' = a_cl x.

    For a linear autonomous system the four RK4 stages collapse to the
    degree-4 Taylor polynomial of the step propagator, which is applied as
    a single matrix per step; the recurrence is reproducible bit for bit
    across runs.  Raises DivergenceError once the state norm passes 1e12.
    """
    a_cl = np.asarray(a_cl, dtype=float)
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if a_cl.ndim != 2 or a_cl.shape[0] != a_cl.shape[1] or a_cl.shape[0] != x0.shape[0]:
        raise ValueError("closed-loop matrix and state dimensions do not match")
    if not (dt > 0.0 and t_final > 0.0):
        raise ValueError(f"need dt > 0 and t_final > 0, got dt={dt}, t_final={t_final}")
    ratio = t_final / dt
    if not math.isfinite(ratio) or ratio > 1e8:
        raise ValueError(f"step {dt} is vanishingly small against horizon {t_final}")
    steps = math.ceil(ratio * (1.0 - 1e-12))
    h = t_final / steps
    phi = _rk4_step_matrix(a_cl, h)
    states = np.empty((steps + 1, x0.shape[0]))
    states[0] = x0
    x = x0
    for i in range(1, steps + 1):
        x = phi @ x
        norm = np.linalg.norm(x)
        if not np.isfinite(norm) or norm > DIVERGENCE_LIMIT:
            raise DivergenceError(
                f"trajectory norm {norm:.3e} exceeded {DIVERGENCE_LIMIT:.0e} "
                f"at t = {i * h:.6g}; closed loop flagged unstable"
            )
        states[i] = x
    return Trajectory(times=np.linspace(0.0, t_final, steps + 1), states=states,
                      dt=h, method="rk4")


def lyapunov_profile(traj: Trajectory, g: GramianBundle, omega: float) -> LyapunovProfile:
    """Profile of V(t) = x(t)^T gram^{-1} x(t) against exp(-2*omega*t) V(0).

    Along a closed loop synthesized from `g` the theory guarantees
    V(t) <= exp(-2*omega*t) V(0), so max_violation (normalized by V(0))
    should not exceed the integration error.
    """
    if traj.states.shape[1] != g.gram.shape[0]:
        raise ValueError("trajectory and Gramian dimensions do not match")
    factor = scipy.linalg.cho_factor(g.gram)
    solved = scipy.linalg.cho_solve(factor, traj.states.T)
    values = np.einsum("ij,ij->j", traj.states.T, solved)
    v0 = values[0]
    envelope = np.exp(-2.0 * omega * traj.times) * v0
    if v0 == 0.0:
        return LyapunovProfile(values=values, envelope=envelope, max_violation=0.0)
    return LyapunovProfile(values=values, envelope=envelope,
                           max_violation=float(np.max((values - envelope) / v0)))


def fit_decay_rate(traj: Trajectory, settle_fraction: float = 0.2,
                   dominant_period: float | None = None) -> float:
    """Least-squares slope of log ||x(t)|| after the initial transient.

    The first settle_fraction of the samples is discarded; when the
    dominant oscillation period is known, the retained window is trimmed to
    a whole number of periods to avoid slope bias from the norm modulation
    of a complex eigenvalue pair.
    """
    if not 0.0 <= settle_fraction < 1.0:
        raise ValueError(f"settle_fraction must be in [0, 1), got {settle_fraction}")
    norms = np.linalg.norm(traj.states, axis=1)
    if np.max(norms) == 0.0:
        raise ValueError("degenerate trajectory: all states are zero")
    start = int(settle_fraction * norms.shape[0])
    t = traj.times[start:]
    y = norms[start:]
    if dominant_period is not None and dominant_period > 0.0:
        whole = math.floor((t[-1] - t[0]) / dominant_period)
        if whole >= 1:
            keep = t <= t[0] + whole * dominant_period + 1e-12 * dominant_period
            t, y = t[keep], y[keep]
    if t.shape[0] < 100:
        raise ValueError(
            f"only {t.shape[0]} samples retained after the transient; need >= 100"
        )
    if np.any(y == 0.0):
        raise ValueError("state norm hit zero; cannot fit a log-slope")
    return float(np.polyfit(t, np.log(y), 1)[0])


class SweepRow(NamedTuple):
    T: float
    spectral_abscissa: float
    bound_exponent: float
    lambda_condition: float


def sweep_T(sys: LtiSystem, omega: float, T0: float, Ts,
            nodes: int | None = None) -> list[SweepRow]:
    """Standard-variant synthesis at each plateau horizon T in Ts.

    Each row reports the closed-loop spectral abscissa, the decay-bound
    exponent, and the Gramian condition number.  Rows are independent of
    one another (they could run concurrently; here they run in sequence).
    """
    Ts = [float(T) for T in Ts]
    if any(T < T0 for T in Ts):
        raise ValueError(f"every sweep horizon must be >= T0={T0}")
    rows = []
    for T in Ts:
        law = synthesize(sys, omega, T0, T=T, variant="standard", nodes=nodes)
        bound = decay_bound(sys, omega, T0, T=T, nodes=nodes)
        rows.append(SweepRow(T=T,
                             spectral_abscissa=spectral_abscissa(law.closed_loop),
                             bound_exponent=bound.exponent,
                             lambda_condition=bound.c_prime / bound.c))
    return rows
