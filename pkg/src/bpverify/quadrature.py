"""Deterministic quadrature for Gaussian integrands with a singular volume weight.

Handles integrals over one or two points in R^n (n <= 3) of the form

    prod_j exp(-a_j |x_j - c_j|^2) * |v|^p * extra(x)

where ``v = x_0`` for one point and ``v = x_1 - x_0`` for two. The singular
direction is written in polar coordinates ``v = r * theta``; the factor
``r^(n-1+p)`` becomes the weight of a Gauss-Jacobi rule, so the remaining
integrand is smooth. For two points the free center is integrated with a
Gauss-Hermite rule after completing the square. Orders are refined per
variable group until raising any single group's order changes the value by
less than the relative tolerance.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import UnsupportedConfigurationError
from .functions import Gaussian, ScaledShift

MAX_DIM = 6
MAX_N = 3
# exp(-TAIL_EXPONENT) bounds the neglected radial tail relative to the peak
TAIL_EXPONENT = 32.0
MAX_LEVELS = 8
CHUNK_NODES = 400_000

# Gauss-Hermite converges geometrically but each step costs order^n nodes,
# so the center group grows additively.
_GROWTH = {
    "r": lambda m: 2 * m,
    "angle": lambda m: (3 * m) // 2,
    "center": lambda m: m + 4,
}


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error: float
    evaluations: int


def _gaussian_params(f):
    if isinstance(f, Gaussian):
        return f.a, np.zeros(f.n)
    if isinstance(f, ScaledShift) and isinstance(f.base, Gaussian):
        return f.base.a, np.asarray(f.center, dtype=float)
    raise UnsupportedConfigurationError(
        f"quadrature oracle needs Gaussian factors, got {type(f).__name__}"
    )


def _radial_rule(order, gamma, upper):
    x, w = special.roots_jacobi(order, 0.0, gamma)
    r = 0.5 * upper * (x + 1.0)
    return r, w * (0.5 * upper) ** (gamma + 1.0)


def _sphere_rule(n, order):
    """Nodes and weights on the unit sphere S^(n-1) for n in {1, 2, 3}."""
    if n == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    m = 2 * order
    phi = 2 * np.pi * np.arange(m) / m
    if n == 2:
        return np.stack([np.cos(phi), np.sin(phi)], axis=-1), np.full(m, 2 * np.pi / m)
    ct, wt = special.roots_legendre(order)
    st = np.sqrt(1.0 - ct**2)
    nodes = np.stack(
        [np.outer(st, np.cos(phi)), np.outer(st, np.sin(phi)), np.outer(ct, np.ones(m))],
        axis=-1,
    ).reshape(-1, 3)
    weights = np.outer(wt, np.full(m, 2 * np.pi / m)).ravel()
    return nodes, weights


def _hermite_rule(n, order):
    x, w = special.roots_hermite(order)
    nodes = np.array(list(itertools.product(x, repeat=n)))
    weights = np.prod(np.array(list(itertools.product(w, repeat=n))), axis=-1)
    return nodes, weights


class _Problem:
    def __init__(self, factors, power, extra):
        self.params = [_gaussian_params(f) for f in factors]
        self.m = len(factors)
        self.n = factors[0].n
        self.power = float(power)
        self.extra = extra
        self.gamma = self.n - 1 + self.power
        if self.m == 1:
            a, c = self.params[0]
            self.r_max = np.linalg.norm(c) + math.sqrt(TAIL_EXPONENT / a)
        else:
            (a0, c0), (a1, c1) = self.params
            a_red = a0 * a1 / (a0 + a1)
            self.r_max = np.linalg.norm(c1 - c0) + math.sqrt(TAIL_EXPONENT / a_red)

    def groups(self):
        return ("r", "angle") if self.m == 1 else ("r", "angle", "center")

    def evaluate(self, orders):
        r, wr = _radial_rule(orders["r"], self.gamma, self.r_max)
        theta, wth = _sphere_rule(self.n, orders["angle"])
        u = (r[:, None, None] * theta[None, :, :]).reshape(-1, self.n)
        wu = np.outer(wr, wth).ravel()
        if self.m == 1:
            return self._one_point(u, wu), u.shape[0]
        t, wt = _hermite_rule(self.n, orders["center"])
        return self._two_points(u, wu, t, wt), u.shape[0] * t.shape[0]

    def _apply_extra(self, xt, log_values):
        if self.extra is None:
            return np.exp(log_values)
        return np.exp(log_values) * self.extra(xt)

    def _one_point(self, u, wu):
        a, c = self.params[0]
        logv = -a * np.sum((u - c) ** 2, axis=-1)
        vals = self._apply_extra(u[:, :, None], logv)
        return float(np.sum(wu * vals))

    def _two_points(self, u, wu, t, wt):
        (a0, c0), (a1, c1) = self.params
        big_a = a0 + a1
        total = 0.0
        step = max(1, CHUNK_NODES // t.shape[0])
        for start in range(0, u.shape[0], step):
            uc = u[start:start + step]
            mu = (a0 * c0 + a1 * (c1 - uc)) / big_a
            w = mu[:, None, :] + t[None, :, :] / math.sqrt(big_a)
            x1 = w + uc[:, None, :]
            logv = (
                -a0 * np.sum((w - c0) ** 2, axis=-1)
                - a1 * np.sum((x1 - c1) ** 2, axis=-1)
                + np.sum(t**2, axis=-1)[None, :]
            )
            xt = np.stack([w, x1], axis=-1).reshape(-1, self.n, 2)
            vals = self._apply_extra(xt, logv.ravel()).reshape(logv.shape)
            total += float(np.sum(wu[start:start + step, None] * wt[None, :] * vals))
        return total * big_a ** (-self.n / 2)


def quadrature_oracle(factors, power, extra=None, rtol=1e-9):
    """Integrate Gaussian factors against a power of a point or difference length.

    Parameters
    ----------
    factors : sequence of Gaussian or shifted Gaussian
        One or two catalogue functions on R^n, one per point.
    power : float
        Exponent of ``|x_0|`` (one point) or ``|x_1 - x_0|`` (two points);
        must exceed ``-n`` for integrability.
    extra : callable, optional
        Smooth bounded factor; receives configurations of shape
        ``(N, n, len(factors))`` and returns ``N`` values.
    rtol : float
        Target relative accuracy of the refinement loop.

    Returns
    -------
    QuadratureResult
        Value, conservative error estimate and number of integrand evaluations.
    """
    factors = list(factors)
    if len(factors) not in (1, 2):
        raise UnsupportedConfigurationError("quadrature oracle handles one or two points")
    n = factors[0].n
    if any(f.n != n for f in factors):
        raise UnsupportedConfigurationError("factor dimensions differ")
    if n * len(factors) > MAX_DIM or n > MAX_N:
        raise UnsupportedConfigurationError(
            f"quadrature oracle supports total dimension <= {MAX_DIM} with n <= {MAX_N}, "
            f"got n={n} with {len(factors)} point(s)"
        )
    if not power > -n:
        raise UnsupportedConfigurationError(
            f"weight |v|^{power} is not integrable near v = 0 in R^{n}"
        )
    problem = _Problem(factors, power, extra)
    orders = {"r": 24, "angle": 8, "center": 8}
    cache = {}

    def value_at(o):
        key = tuple(sorted(o.items()))
        if key not in cache:
            cache[key] = problem.evaluate(o)
        return cache[key][0]

    for _ in range(MAX_LEVELS):
        base = value_at(orders)
        errors = {}
        for g in problem.groups():
            refined = dict(orders, **{g: _GROWTH[g](orders[g])})
            errors[g] = abs(value_at(refined) - base)
        unconverged = [g for g, e in errors.items() if e > rtol * abs(base)]
        if not unconverged:
            break
        for g in unconverged:
            orders[g] = _GROWTH[g](orders[g])
    evaluations = sum(count for _, count in cache.values())
    # neglected radial tail is below exp(-TAIL_EXPONENT) of the peak integrand
    tail = math.exp(-TAIL_EXPONENT) * abs(base)
    error = sum(errors.values()) + tail + 4 * np.finfo(float).eps * abs(base)
    return QuadratureResult(float(base), float(error), int(evaluations))
