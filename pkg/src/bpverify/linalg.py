"""Small dense-matrix kernels: Gram and simplex volumes, polar factors, subspaces.

Every kernel accepts a single matrix of shape ``(n, q)`` or a stack of shape
``(..., n, q)``; columns are the points ``x_1, ..., x_q`` in R^n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InvalidArgumentError, SingularConfigurationError

#: sigma_min / sigma_max at or below this value counts as rank deficient.
RANK_TOL = 1e-12

__all__ = [
    "RANK_TOL",
    "AffinePlane",
    "Subspace",
    "gram_volume",
    "orthogonal_complement",
    "orthonormalize",
    "polar_decompose",
    "polar_factor",
    "projector",
    "simplex_volume",
]


def _as_matrix(x, name="x"):
    x = np.asarray(x, dtype=float)
    if x.ndim < 2:
        raise InvalidArgumentError(f"{name} must be at least 2-D, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InvalidArgumentError(f"{name} has non-finite entries")
    return x


def gram_volume(x):
    """Volume of the parallelepiped spanned by the columns of `x`.

    Mathematically ``sqrt(det(x^T x))``. Computed as ``|prod diag(R)|`` from a
    QR factorization, whose rounding error grows with cond(x) rather than
    cond(x)^2, so nearly degenerate configurations keep their relative accuracy.
    A diagonal entry at rounding level (``n * eps`` times the longest column)
    counts as exactly zero.
    """
    x = _as_matrix(x)
    n, q = x.shape[-2:]
    if q < 1 or n < q:
        raise InvalidArgumentError(f"gram_volume needs n >= q >= 1, got n={n}, q={q}")
    if q == 1:
        return np.linalg.norm(x[..., 0], axis=-1)
    r = np.linalg.qr(x, mode="r")
    diag = np.abs(np.diagonal(r, axis1=-2, axis2=-1))
    floor = n * np.finfo(float).eps * np.max(np.linalg.norm(x, axis=-2), axis=-1)
    return np.where(np.min(diag, axis=-1) <= floor, 0.0, np.prod(diag, axis=-1))


def simplex_volume(xt):
    """q-dimensional volume of the convex hull of the q+1 columns of `xt`."""
    xt = _as_matrix(xt, "xt")
    n, m = xt.shape[-2:]
    q = m - 1
    if q < 1 or n < q:
        raise InvalidArgumentError(
            f"simplex_volume needs n >= q >= 1 with q+1 columns, got n={n}, columns={m}"
        )
    diffs = xt[..., 1:] - xt[..., :1]
    return gram_volume(diffs) / math.factorial(q)


def _polar_batch(x):
    """Polar factors of a stack of full-rank matrices.

    Returns ``(v, rho, ok)`` where ``ok`` flags the matrices whose singular
    values pass the rank tolerance. Entries of `v` where ``ok`` is false are
    meaningless.
    """
    if x.shape[-1] == 1:
        norm = np.linalg.norm(x[..., 0], axis=-1)
        ok = norm > 0
        v = x / np.where(ok, norm, 1.0)[..., None, None]
        return v, (norm**2)[..., None, None], ok
    rho = np.swapaxes(x, -1, -2) @ x
    rho = 0.5 * (rho + np.swapaxes(rho, -1, -2))
    w, u = np.linalg.eigh(rho)
    w_max = w[..., -1]
    w_min = w[..., 0]
    # eigenvalues of rho are squared singular values of x
    ok = (w_max > 0) & (w_min > (RANK_TOL**2) * w_max)
    w_safe = np.where(ok[..., None], w, 1.0)
    inv_sqrt = (u * (1.0 / np.sqrt(w_safe))[..., None, :]) @ np.swapaxes(u, -1, -2)
    v = x @ inv_sqrt
    return v, rho, ok


def polar_decompose(x):
    """Split a full-rank ``n x k`` matrix as ``x = v @ sqrtm(rho)``.

    Parameters
    ----------
    x : array_like, shape (n, k) or (..., n, k)
        Matrix with ``n >= k`` and full column rank.

    Returns
    -------
    v : ndarray
        Orthonormal frame, ``v.T @ v = I_k``.
    rho : ndarray
        Positive definite ``x.T @ x``.

    Raises
    ------
    SingularConfigurationError
        If ``sigma_min(x) <= 1e-12 * sigma_max(x)`` for any matrix in the stack.
    """
    x = _as_matrix(x)
    n, k = x.shape[-2:]
    if k < 1 or n < k:
        raise InvalidArgumentError(f"polar_decompose needs n >= k >= 1, got n={n}, k={k}")
    v, rho, ok = _polar_batch(x)
    if not np.all(ok):
        raise SingularConfigurationError("matrix is rank deficient")
    return v, rho


def polar_factor(x):
    """Frame factor of :func:`polar_decompose`."""
    return polar_decompose(x)[0]


def orthonormalize(x):
    """Orthonormal frame spanning the column space of `x`."""
    return polar_factor(x)


def projector(basis):
    """Orthogonal projector ``B B^T`` onto the span of an orthonormal frame."""
    basis = np.asarray(basis, dtype=float)
    return basis @ np.swapaxes(basis, -1, -2)


def _complement_batch(basis):
    n, k = basis.shape[-2:]
    q, _ = np.linalg.qr(basis, mode="complete")
    return q[..., :, k:]


@dataclass(frozen=True, eq=False)
class Subspace:
    """k-dimensional linear subspace of R^n, represented by an orthonormal basis.

    Two subspaces compare equal when their projectors agree; the basis itself is
    only a representative.
    """

    basis: np.ndarray

    def __post_init__(self):
        basis = _as_matrix(self.basis, "basis").copy()
        if basis.ndim != 2:
            raise InvalidArgumentError("Subspace takes a single basis matrix")
        n, k = basis.shape
        if n < k:
            raise InvalidArgumentError(f"basis must have n >= k, got {basis.shape}")
        if np.max(np.abs(basis.T @ basis - np.eye(k))) > 1e-10:
            raise InvalidArgumentError("basis columns are not orthonormal")
        basis.setflags(write=False)
        object.__setattr__(self, "basis", basis)

    @classmethod
    def span(cls, x):
        """Subspace spanned by the columns of an arbitrary full-rank matrix."""
        return cls(orthonormalize(x))

    @property
    def n(self):
        return self.basis.shape[0]

    @property
    def k(self):
        return self.basis.shape[1]

    @cached_property
    def projector(self):
        p = projector(self.basis)
        p.setflags(write=False)
        return p

    def contains(self, y, tol=1e-10):
        y = np.asarray(y, dtype=float)
        return bool(np.max(np.abs(self.projector @ y - y)) <= tol)

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        if self.basis.shape != other.basis.shape:
            return False
        return bool(np.max(np.abs(self.projector - other.projector)) <= 1e-9)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class AffinePlane:
    """Affine k-plane ``direction + offset`` with the offset orthogonal to the direction."""

    direction: Subspace
    offset: np.ndarray = field(default=None)

    def __post_init__(self):
        n = self.direction.n
        z = np.zeros(n) if self.offset is None else np.asarray(self.offset, dtype=float)
        if z.shape != (n,):
            raise InvalidArgumentError(f"offset must have shape ({n},), got {z.shape}")
        if np.max(np.abs(self.direction.projector @ z), initial=0.0) > 1e-10 * max(1.0, np.linalg.norm(z)):
            raise InvalidArgumentError("offset is not orthogonal to the direction")
        z = z.copy()
        z.setflags(write=False)
        object.__setattr__(self, "offset", z)

    @property
    def n(self):
        return self.direction.n

    @property
    def k(self):
        return self.direction.k

    def distance(self, point):
        """Euclidean distance from `point` to the plane."""
        point = np.asarray(point, dtype=float)
        p = self.direction.projector
        return float(np.linalg.norm(point - p @ point - self.offset))

    def membership_residual(self, point):
        point = np.asarray(point, dtype=float)
        return self.distance(point)

    def __eq__(self, other):
        if not isinstance(other, AffinePlane):
            return NotImplemented
        return self.direction == other.direction and bool(
            np.max(np.abs(self.offset - other.offset)) <= 1e-9
        )

    __hash__ = None


def orthogonal_complement(s):
    """Orthonormal frame of shape ``(n, n-k)`` spanning the orthogonal complement of `s`."""
    if s.k >= s.n:
        raise InvalidArgumentError("orthogonal complement of the whole space is zero-dimensional")
    return _complement_batch(s.basis)
