"""Gauss-Jacobi quadrature on [0, 1] for the singular weight s^(-sigma),
and the split composite scheme integrating the Green kernel against
forcings that carry that singularity.

Rules come from the three-term recurrence of the Jacobi-type orthogonal
polynomials via eigen-decomposition of the symmetric tridiagonal
recurrence matrix.  The implicit-shift QL iteration is implemented here;
n <= 256 keeps that cheap and the package free of linear-algebra
dependencies.
"""

from __future__ import annotations

import math
import threading

from dataclasses import dataclass

import numpy as np

from .kernel import GreenParams, green_eval
from .specfun import beta

__all__ = [
    "QuadRule",
    "jacobi_rule",
    "legendre_rule",
    "integrate_green",
    "MAX_POINTS",
    "RuleConfigError",
]

MAX_POINTS = 256


class RuleConfigError(ValueError):
    """Requested quadrature rule is outside the supported configuration."""


@dataclass(frozen=True, eq=False)
class QuadRule:
    """Gauss rule for the weight s^exponent_b on ``interval``.

    ``nodes`` are strictly increasing and strictly inside the interval;
    ``weights`` are positive and absorb the weight function, so
    sum(w_i f(x_i)) approximates integral of s^exponent_b f(s) ds.
    """

    nodes: np.ndarray
    weights: np.ndarray
    exponent_b: float
    interval: tuple[float, float] = (0.0, 1.0)

    def integrate(self, f) -> float:
        vals = np.broadcast_to(np.asarray(f(self.nodes), dtype=float), self.nodes.shape)
        return float(np.dot(self.weights, vals))


def _imtqlx(d: np.ndarray, e: np.ndarray, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Diagonalize a symmetric tridiagonal matrix by implicit-shift QL.

    d: diagonal (n,), e: subdiagonal (n-1,), z: vector carried through the
    rotations (n,).  Returns eigenvalues in ascending order and the
    correspondingly rotated z (first eigenvector components when z = e1).
    """
    n = d.size
    d = d.astype(float).copy()
    z = z.astype(float).copy()
    if n == 1:
        return d, z
    e = np.append(e.astype(float), 0.0)
    eps = np.finfo(float).eps
    for l in range(n):
        sweeps = 0
        while True:
            m = l
            while m < n - 1 and abs(e[m]) > eps * (abs(d[m]) + abs(d[m + 1])):
                m += 1
            if m == l:
                break
            if sweeps >= 50:
                raise RuntimeError("tridiagonal QL iteration failed to converge")
            sweeps += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            underflow = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                f = z[i + 1]
                z[i + 1] = s * z[i] + c * f
                z[i] = c * z[i] - s * f
            if not underflow:
                d[l] -= p
                e[l] = g
                e[m] = 0.0
    order = np.argsort(d, kind="stable")
    return d[order], z[order]


def _jacobi01(n: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [0, 1] for the weight x^b (1-x)^a, a, b > -1.

    Standard Golub-Welsch: recurrence coefficients of the Jacobi
    polynomials fill a symmetric tridiagonal matrix whose eigenvalues are
    the nodes; weights come from the first eigenvector components scaled
    by the zeroth moment B(b+1, a+1).
    """
    ab = a + b
    diag = np.empty(n)
    sub = np.empty(max(n - 1, 0))
    diag[0] = (b - a) / (ab + 2.0)
    for k in range(1, n):
        diag[k] = (b * b - a * a) / ((2.0 * k + ab) * (2.0 * k + ab + 2.0))
    if n > 1:
        sub[0] = math.sqrt(4.0 * (a + 1.0) * (b + 1.0) / ((ab + 2.0) ** 2 * (ab + 3.0)))
    for k in range(2, n):
        num = 4.0 * k * (k + a) * (k + b) * (k + ab)
        den = (2.0 * k + ab) ** 2 * (2.0 * k + ab + 1.0) * (2.0 * k + ab - 1.0)
        sub[k - 1] = math.sqrt(num / den)
    z = np.zeros(n)
    z[0] = 1.0
    x, z = _imtqlx(diag, sub, z)
    nodes = 0.5 * (1.0 + x)
    weights = beta(b + 1.0, a + 1.0) * z**2
    return nodes, weights


_rule_cache: dict[tuple[int, float, float], tuple[np.ndarray, np.ndarray]] = {}
_cache_lock = threading.Lock()


def _cached_jacobi01(n: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """Concurrent-read cache; insertion serialized under a single lock."""
    key = (n, float(a), float(b))
    hit = _rule_cache.get(key)
    if hit is not None:
        return hit
    nodes, weights = _jacobi01(n, a, b)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    with _cache_lock:
        return _rule_cache.setdefault(key, (nodes, weights))


def _check_points(n: int) -> int:
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_POINTS:
        raise RuleConfigError(f"rule size must be an integer in [1, {MAX_POINTS}], got {n!r}")
    return int(n)


def jacobi_rule(n: int, sigma: float) -> QuadRule:
    """n-point Gauss rule on [0, 1] for the singular weight s^(-sigma).

    Exact on integrands s^k, k <= 2n-1: reproduces the moments
    1/(k+1-sigma).
    """
    n = _check_points(n)
    if not 0.0 < sigma < 1.0:
        raise RuleConfigError(f"sigma must be in (0, 1), got {sigma!r}")
    nodes, weights = _cached_jacobi01(n, 0.0, -sigma)
    return QuadRule(nodes=nodes, weights=weights, exponent_b=-sigma)


def legendre_rule(n: int) -> QuadRule:
    """n-point Gauss-Legendre rule on [0, 1] (unit weight)."""
    n = _check_points(n)
    nodes, weights = _cached_jacobi01(n, 0.0, 0.0)
    return QuadRule(nodes=nodes, weights=weights, exponent_b=0.0)


def integrate_green(params: GreenParams, t: float, f_reg, n: int) -> float:
    """Integral over s of G(t,s) s^(-sigma) f_reg(s), f_reg continuous.

    f_reg is the regularized forcing s^sigma F(s); it must accept numpy
    arrays.  The kernel has a derivative kink at s = t, so the integral
    splits there: on [0, t] the substitution s = t*x maps the weight to
    x^(-sigma) and reuses the canonical Jacobi rule (factor t^(1-sigma));
    on [t, 1] the integrand is smooth and a Legendre rule integrates it
    with s^(-sigma) folded in.
    """
    if not 0.0 <= t <= 1.0:
        raise ValueError("integrate_green: t must lie in [0, 1]")
    n = _check_points(n)
    sg = params.sigma
    total = 0.0
    if t > 0.0:
        rule = jacobi_rule(n, sg)
        s_left = t * rule.nodes
        total += t ** (1.0 - sg) * float(
            np.dot(rule.weights, green_eval(params, t, s_left) * f_reg(s_left))
        )
    if t < 1.0:
        rule = legendre_rule(n)
        s_right = t + (1.0 - t) * rule.nodes
        total += (1.0 - t) * float(
            np.dot(
                rule.weights,
                green_eval(params, t, s_right) * s_right ** (-sg) * f_reg(s_right),
            )
        )
    return total
