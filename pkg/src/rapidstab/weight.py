"""Decay weight: exponential plateau followed by a linear ramp to zero.

The weight used by the stabilizing Gramian is

    e(s) = exp(-2*omega*s)                          for 0 <= s <= knot,
    e(s) = 2*omega*exp(-2*omega*knot)*(end - s)     for knot <= s <= end,

with end = knot + 1/(2*omega).  The ramp slope is chosen so that the weight
is continuously differentiable at the knot and vanishes at the end, and so
that -e'(s) >= 2*omega*e(s) everywhere (with equality on the first piece).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class WeightProfile:
    """Weight parameters: decay rate omega > 0 and the knot time > 0."""

    omega: float
    knot: float

    def __post_init__(self):
        if not (self.omega > 0.0) or not np.isfinite(self.omega):
            raise ValueError(f"omega must be positive and finite, got {self.omega}")
        if not (self.knot > 0.0) or not np.isfinite(self.knot):
            raise ValueError(f"knot must be positive and finite, got {self.knot}")

    @property
    def end(self) -> float:
        """Time at which the weight reaches zero: knot + 1/(2*omega)."""
        return self.knot + 0.5 / self.omega


def _check_domain(w: WeightProfile, s):
    s = np.asarray(s, dtype=float)
    if np.any(s < 0.0) or np.any(s > w.end):
        raise ValueError(f"sample time outside [0, {w.end}]")
    return s


def weight_eval(w: WeightProfile, s):
    """Evaluate the weight at time(s) s in [0, end].

    Accepts a scalar or an ndarray; e(0) = 1 and e(end) = 0.
    """
    arr = _check_domain(w, s)
    two_omega = 2.0 * w.omega
    ramp = two_omega * np.exp(-two_omega * w.knot) * (w.end - arr)
    out = np.where(arr <= w.knot, np.exp(-two_omega * arr), ramp)
    return out if out.ndim else float(out)


def weight_derivative(w: WeightProfile, s):
    """Derivative of the weight; continuous even at the knot for this ramp slope."""
    arr = _check_domain(w, s)
    two_omega = 2.0 * w.omega
    ramp_slope = -two_omega * np.exp(-two_omega * w.knot)
    out = np.where(arr <= w.knot, -two_omega * np.exp(-two_omega * arr),
                   np.full_like(arr, ramp_slope))
    return out if out.ndim else float(out)
