"""Green kernel of the clamped fractional boundary value problem.

The kernel turns D^alpha u = h with u(0)=u(1)=u'(0)=u'(1)=0 into
u(t) = integral of G(t,s) h(s) ds.  This module evaluates G, the closed
form of its s^(-sigma)-weighted integral, the maximum of that integral
over t (the constant gating the contraction condition), and the explicit
bound on |H(t) - H(0)| for bounded regularized forcings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .specfun import beta, gamma

__all__ = [
    "GreenParams",
    "green_eval",
    "green_weight_integral",
    "green_weight_integral_max",
    "origin_continuity_bound",
]

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class GreenParams:
    """Problem parameters: fractional order alpha in (3, 4], singularity
    exponent sigma in (0, 1)."""

    alpha: float
    sigma: float

    def __post_init__(self) -> None:
        if not 3.0 < self.alpha <= 4.0:
            raise ValueError(f"alpha must be in (3, 4], got {self.alpha!r}")
        if not 0.0 < self.sigma < 1.0:
            raise ValueError(f"sigma must be in (0, 1), got {self.sigma!r}")


def green_eval(params: GreenParams, t, s):
    """Evaluate the kernel G(t, s) on [0,1]^2.

    Piecewise: for s <= t the kernel carries an extra (t-s)^(alpha-1)
    term; both branches agree at s = t, where the evaluation uses the
    branch without that term.  Accepts scalars or broadcastable arrays.
    """
    a = params.alpha
    t_arr = np.asarray(t, dtype=float)
    s_arr = np.asarray(s, dtype=float)
    if np.any((t_arr < 0.0) | (t_arr > 1.0)) or np.any((s_arr < 0.0) | (s_arr > 1.0)):
        raise ValueError("green_eval: t and s must lie in [0, 1]")
    smooth = (
        (1.0 - s_arr) ** (a - 2.0)
        * t_arr ** (a - 2.0)
        * ((s_arr - t_arr) + (a - 2.0) * (1.0 - t_arr) * s_arr)
    )
    kinked = np.where(s_arr < t_arr, np.maximum(t_arr - s_arr, 0.0) ** (a - 1.0), 0.0)
    out = (smooth + kinked) / gamma(a)
    # G vanishes identically on the boundary of the square; the t = 1 and
    # s = 0 cancellations are algebraic, so make them exact rather than
    # leaving one-ulp residue from x**(a-1) vs x**(a-2)*x
    boundary = (t_arr == 0.0) | (t_arr == 1.0) | (s_arr == 0.0) | (s_arr == 1.0)
    out = np.where(boundary, 0.0, out)
    if np.isscalar(t) and np.isscalar(s):
        return float(out)
    return out


def _weight_integral_coeffs(params: GreenParams) -> tuple[float, float, float, float]:
    """Prefactor and the three power coefficients of the closed form."""
    a, sg = params.alpha, params.sigma
    pre = beta(1.0 - sg, a - 1.0) / gamma(a)
    c_hi = (a - 1.0) / (a - sg)
    c_mid = -(1.0 + (a - 2.0) * (1.0 - sg) / (a - sg))
    c_lo = (a - 1.0) * (1.0 - sg) / (a - sg)
    return pre, c_hi, c_mid, c_lo


def green_weight_integral(params: GreenParams, t):
    """Closed form of integral over s of G(t,s) s^(-sigma).

    Vanishes at t = 0 and t = 1 (the power coefficients telescope).
    Accepts scalars or arrays.
    """
    a, sg = params.alpha, params.sigma
    t_arr = np.asarray(t, dtype=float)
    if np.any((t_arr < 0.0) | (t_arr > 1.0)):
        raise ValueError("green_weight_integral: t must lie in [0, 1]")
    pre, c_hi, c_mid, c_lo = _weight_integral_coeffs(params)
    out = pre * (
        c_hi * t_arr ** (a - sg)
        + c_mid * t_arr ** (a - 1.0)
        + c_lo * t_arr ** (a - 2.0)
    )
    if np.isscalar(t):
        return float(out)
    return out


def green_weight_integral_max(
    params: GreenParams, coarse: int = 1024, width_tol: float = 1e-10
) -> tuple[float, float]:
    """Maximum of the weighted kernel integral over t in [0, 1].

    Returns (value, argmax).  Coarse scan on a uniform grid, then
    golden-section refinement of the bracketing interval down to
    ``width_tol``.  Bracketed search; no derivative model is assumed.
    """
    ts = np.linspace(0.0, 1.0, coarse + 1)
    vals = green_weight_integral(params, ts)
    k = int(np.argmax(vals))
    lo = ts[max(k - 1, 0)]
    hi = ts[min(k + 1, coarse)]

    f = lambda x: green_weight_integral(params, x)
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > width_tol:
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = f(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = f(x1)
    t_star = 0.5 * (lo + hi)
    return float(f(t_star)), float(t_star)


def origin_continuity_bound(params: GreenParams, t: float, m: float) -> float:
    """Bound on |H(t) - H(0)| for H the kernel applied to a forcing whose
    regularized form is bounded by m in absolute value.

    Equals m*(alpha-1)*t^(alpha-2)*B(1-sigma, alpha-1)/Gamma(alpha)
         + m*t^(alpha-sigma)*B(1-sigma, alpha)/Gamma(alpha).
    """
    a, sg = params.alpha, params.sigma
    if not 0.0 <= t <= 1.0:
        raise ValueError("origin_continuity_bound: t must lie in [0, 1]")
    if m < 0.0:
        raise ValueError(f"origin_continuity_bound: m must be >= 0, got {m!r}")
    ga = gamma(a)
    return (
        m * (a - 1.0) * t ** (a - 2.0) * beta(1.0 - sg, a - 1.0) / ga
        + m * t ** (a - sg) * beta(1.0 - sg, a) / ga
    )
