"""Siegel gamma function, Stiefel volumes and the Blaschke-Petkantschin constants.

All closed forms are accumulated as log-gamma sums and exponentiated once, so
they stay finite for dimensions up to about 50.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import InvalidArgumentError, OutOfDomainError

__all__ = [
    "ConstantReport",
    "bp_affine_constant",
    "bp_constant",
    "constant_table",
    "log_siegel_gamma",
    "log_stiefel_volume",
    "siegel_gamma",
    "siegel_gamma_integral_check",
    "sphere_area",
    "stiefel_volume",
]

LOG_PI = math.log(math.pi)


@dataclass(frozen=True)
class ConstantReport:
    name: str
    parameters: tuple
    value: float
    formula_citation: str


def _check_int(name, value, low=1):
    if int(value) != value or value < low:
        raise InvalidArgumentError(f"{name} must be an integer >= {low}, got {value!r}")
    return int(value)


def log_siegel_gamma(k, alpha):
    k = _check_int("k", k)
    alpha = float(alpha)
    if not alpha > (k - 1) / 2:
        raise OutOfDomainError(
            f"Siegel gamma of order {k} diverges for alpha={alpha} <= {(k - 1) / 2}"
        )
    j = np.arange(k)
    return k * (k - 1) / 4 * LOG_PI + float(np.sum(special.gammaln(alpha - j / 2)))


def siegel_gamma(k, alpha):
    """Gamma function of the cone of positive definite ``k x k`` matrices.

    ``pi^(k(k-1)/4) * prod_{j<k} Gamma(alpha - j/2)``, defined only for
    ``alpha > (k-1)/2``. No continuation is returned outside that range.
    """
    return math.exp(log_siegel_gamma(k, alpha))


def log_stiefel_volume(n, k):
    n = _check_int("n", n)
    k = _check_int("k", k)
    if k > n:
        raise InvalidArgumentError(f"Stiefel manifold V(n={n}, k={k}) needs k <= n")
    return k * math.log(2.0) + n * k / 2 * LOG_PI - log_siegel_gamma(k, n / 2)


def stiefel_volume(n, k):
    """Total invariant measure of the Stiefel manifold of orthonormal k-frames in R^n."""
    return math.exp(log_stiefel_volume(n, k))


def sphere_area(n):
    """Surface area of the unit sphere in R^n, ``2 pi^(n/2) / Gamma(n/2)``."""
    n = _check_int("n", n)
    return math.exp(math.log(2.0) + n / 2 * LOG_PI - special.gammaln(n / 2))


def _check_order(n, k, q):
    n = _check_int("n", n)
    k = _check_int("k", k)
    q = _check_int("q", q)
    if not 1 <= q <= k <= n:
        raise InvalidArgumentError(f"need 1 <= q <= k <= n, got n={n}, k={k}, q={q}")
    return n, k, q


def bp_constant(n, k, q):
    """Ratio of Stiefel volumes ``sigma(n, q) / sigma(k, q)`` for subspace integration."""
    n, k, q = _check_order(n, k, q)
    return math.exp(log_stiefel_volume(n, q) - log_stiefel_volume(k, q))


def bp_affine_constant(n, k, q):
    """Constant ``(q!)^(n-k) sigma(n, q) / sigma(k, q)`` for affine-plane integration."""
    n, k, q = _check_order(n, k, q)
    log_c = (
        (n - k) * special.gammaln(q + 1)
        + log_stiefel_volume(n, q)
        - log_stiefel_volume(k, q)
    )
    return math.exp(log_c)


def _jacobi_rule(order, power, upper):
    """Gauss rule on [0, upper] for the weight ``t**power``."""
    x, w = special.roots_jacobi(order, 0.0, power)
    t = 0.5 * upper * (x + 1.0)
    return t, w * (0.5 * upper) ** (power + 1.0)


def _cone_integral(k, alpha, order, radius):
    # rho = L L^T with L lower triangular: d(rho) = 2^k prod_i l_ii^(k-i+1) dL,
    # |rho|^(alpha-(k+1)/2) = prod_i l_ii^(2 alpha - k - 1). The diagonal powers
    # are absorbed into Gauss-Jacobi weights; off-diagonals use Gauss-Legendre.
    diag_rules = []
    for i in range(1, k + 1):
        power = 2 * alpha - k - 1 + (k - i + 1)
        diag_rules.append(_jacobi_rule(order, power, radius))
    xo, wo = special.roots_legendre(order)
    off_rule = (radius * xo, radius * wo)
    n_off = k * (k - 1) // 2
    rules = diag_rules + [off_rule] * n_off
    grids = np.meshgrid(*[r[0] for r in rules], indexing="ij")
    weights = np.ones_like(grids[0])
    for axis, (_, w) in enumerate(rules):
        shape = [1] * len(rules)
        shape[axis] = -1
        weights = weights * w.reshape(shape)
    # tr(rho) = sum of squares of all entries of L
    trace = sum(g**2 for g in grids)
    return (2.0**k) * float(np.sum(weights * np.exp(-trace)))


def siegel_gamma_integral_check(k, alpha, order=None, radius=9.0, rtol=1e-12):
    """Evaluate the defining cone integral of the Siegel gamma function by quadrature.

    The cone of positive definite matrices is mapped onto an orthant through
    the Cholesky factor, and the resulting integral is computed with tensor
    Gauss rules, doubling the order until two successive values agree to
    `rtol`. Only ``k`` in ``{1, 2}`` is supported (integral dimension <= 3).
    """
    k = _check_int("k", k)
    if k not in (1, 2):
        raise InvalidArgumentError(f"cone-integral check supports k in {{1, 2}}, got {k}")
    alpha = float(alpha)
    if not alpha > (k - 1) / 2:
        raise OutOfDomainError(f"cone integral diverges for alpha={alpha} <= {(k - 1) / 2}")
    orders = [order] if order is not None else [24, 48, 96, 192]
    prev = None
    for m in orders:
        value = _cone_integral(k, alpha, m, radius)
        if prev is not None and abs(value - prev) <= rtol * abs(value):
            return value
        prev = value
    return prev


def constant_table(n_values, k_values, q_values):
    """Rows of constants for every valid ``q <= k <= n`` triple."""
    rows = []
    for n in n_values:
        for k in k_values:
            for q in q_values:
                if not 1 <= q <= k <= n:
                    continue
                rows.append(
                    {
                        "n": n,
                        "k": k,
                        "q": q,
                        "sigma_nk": stiefel_volume(n, k),
                        "siegel_gamma_k_half_n": siegel_gamma(k, n / 2),
                        "bp_constant": bp_constant(n, k, q),
                        "bp_affine_constant": bp_affine_constant(n, k, q),
                    }
                )
    return rows


def constant_reports(n, k, q):
    """Named constants for one triple, with the formula each value came from."""
    return [
        ConstantReport("stiefel_volume", (n, k), stiefel_volume(n, k),
                       "2^k pi^(nk/2) / Gamma_k(n/2)"),
        ConstantReport("siegel_gamma", (k, n / 2), siegel_gamma(k, n / 2),
                       "pi^(k(k-1)/4) prod_{j<k} Gamma(alpha - j/2)"),
        ConstantReport("bp_constant", (n, k, q), bp_constant(n, k, q),
                       "sigma_{n,q} / sigma_{k,q}"),
        ConstantReport("bp_affine_constant", (n, k, q), bp_affine_constant(n, k, q),
                       "(q!)^(n-k) sigma_{n,q} / sigma_{k,q}"),
    ]
