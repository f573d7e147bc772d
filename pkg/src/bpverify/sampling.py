"""Reproducible samplers for matrices, frames, subspaces, points and affine planes.

Batch samplers (``*_batch``) return stacked arrays and log importance weights
and are what the verifiers use. The single-draw functions wrap them and return
the domain objects from :mod:`bpverify.linalg`.

Randomness comes from :class:`RngStream`, an immutable ``(seed, stream_id)``
pair mapped onto numpy's counter-based Philox generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from .constants import log_siegel_gamma
from .errors import BPVerifyError, InvalidArgumentError, SingularConfigurationError
from .linalg import AffinePlane, Subspace, _complement_batch, _polar_batch

DEFAULT_SCALE = 1 / math.sqrt(2)
MAX_REDRAWS = 100


@dataclass(frozen=True)
class RngStream:
    """Identifies one reproducible random stream.

    Every call to :meth:`generator` returns a fresh generator positioned at
    the start of the stream, so equal streams give equal draws.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            value = getattr(self, name)
            if not 0 <= value < 2**64:
                raise InvalidArgumentError(f"{name} must be a 64-bit unsigned integer")

    def generator(self):
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.Philox(ss))


RngLike = Union[RngStream, np.random.Generator]


def as_generator(rng):
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise InvalidArgumentError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


class WeightedSample(NamedTuple):
    value: object
    weight: float


def gaussian_log_weight(g, scale):
    """Log of ``1 / density`` for iid N(0, scale^2) coordinates in the last axis."""
    d = g.shape[-1]
    return 0.5 * d * math.log(2 * math.pi * scale**2) + np.sum(g**2, axis=-1) / (2 * scale**2)


def _check_scale(scale):
    if not scale > 0:
        raise InvalidArgumentError(f"proposal scale must be positive, got {scale}")


def _check_nk(n, k):
    if int(n) != n or int(k) != k or not 1 <= k <= n:
        raise InvalidArgumentError(f"need 1 <= k <= n, got n={n}, k={k}")


# ---------------------------------------------------------------- batch samplers


def gaussian_matrix_batch(n, q, gen, size):
    return gen.standard_normal((size, n, q))


def stiefel_batch(n, k, gen, size):
    """Haar-distributed frames as polar factors of Gaussian matrices.

    Returns ``(frames, redraws)``; rank-deficient Gaussian draws are replaced
    in place and counted.
    """
    x = gen.standard_normal((size, n, k))
    v, _, ok = _polar_batch(x)
    redraws = 0
    attempts = 0
    while not np.all(ok):
        bad = np.flatnonzero(~ok)
        redraws += bad.size
        attempts += 1
        if attempts > MAX_REDRAWS:
            raise BPVerifyError("Stiefel sampler failed to draw a full-rank matrix")
        vb, _, okb = _polar_batch(gen.standard_normal((bad.size, n, k)))
        v[bad] = vb
        ok[bad] = okb
    return v, redraws


def grassmann_batch(n, k, gen, size):
    return stiefel_batch(n, k, gen, size)


def subspace_points_batch(bases, npoints, scale, gen):
    """Gaussian points inside each subspace.

    Returns ``(points, log_weight)`` with points of shape ``(N, n, npoints)``
    and the summed log importance weight of shape ``(N,)`` for Lebesgue
    measure on ``xi^npoints``.
    """
    size, _, k = bases.shape
    g = scale * gen.standard_normal((size, npoints, k))
    points = np.einsum("snk,smk->snm", bases, g)
    logw = np.sum(gaussian_log_weight(g, scale), axis=-1)
    return points, logw


def affine_plane_batch(n, k, offset_scale, gen, size):
    """Weighted affine planes for the measure d(xi) x Lebesgue(xi-perp).

    Returns ``(bases, offsets, log_weight, redraws)``. For ``k == n`` the
    offset is zero and the weight is one (the bundle is a single plane).
    """
    bases, redraws = grassmann_batch(n, k, gen, size)
    if k == n:
        return bases, np.zeros((size, n)), np.zeros(size), redraws
    comp = _complement_batch(bases)
    h = offset_scale * gen.standard_normal((size, n - k))
    offsets = np.einsum("snj,sj->sn", comp, h)
    return bases, offsets, gaussian_log_weight(h, offset_scale), redraws


def wishart_batch(k, df, scale2, gen, size):
    """Wishart(df, scale2 * I_k) draws via the Bartlett decomposition."""
    lower = np.zeros((size, k, k))
    for i in range(k):
        lower[:, i, i] = np.sqrt(gen.chisquare(df - i, size=size))
        if i:
            lower[:, i, :i] = gen.standard_normal((size, i))
    return scale2 * (lower @ np.swapaxes(lower, -1, -2))


def wishart_logpdf(rho, df, scale2):
    """Log density of Wishart(df, scale2 * I_k) w.r.t. Lebesgue measure on symmetric matrices."""
    k = rho.shape[-1]
    sign, logdet = np.linalg.slogdet(rho)
    trace = np.trace(rho, axis1=-2, axis2=-1)
    log_norm = (
        df * k / 2 * math.log(2.0)
        + df * k / 2 * math.log(scale2)
        + log_siegel_gamma(k, df / 2)
    )
    out = (df - k - 1) / 2 * logdet - trace / (2 * scale2) - log_norm
    return np.where(sign > 0, out, -np.inf)


def sqrtm_psd_batch(rho):
    w, u = np.linalg.eigh(rho)
    return (u * np.sqrt(np.maximum(w, 0.0))[..., None, :]) @ np.swapaxes(u, -1, -2)


# ------------------------------------------------------------ single-draw API


def sample_gaussian_matrix(n, q, rng):
    """``n x q`` matrix of independent standard normals, drawn in row-major order."""
    if n < 1 or q < 1:
        raise InvalidArgumentError(f"need n, q >= 1, got n={n}, q={q}")
    return gaussian_matrix_batch(n, q, as_generator(rng), 1)[0]


def sample_stiefel(n, k, rng):
    """Haar-random orthonormal ``n x k`` frame."""
    _check_nk(n, k)
    return stiefel_batch(n, k, as_generator(rng), 1)[0][0]


def sample_grassmann(n, k, rng):
    """Uniformly random k-dimensional subspace of R^n."""
    return Subspace(sample_stiefel(n, k, rng))


def sample_point_in_subspace(s, scale, rng):
    """Gaussian point in `s` weighted to estimate Lebesgue integrals over `s`."""
    _check_scale(scale)
    gen = as_generator(rng)
    points, logw = subspace_points_batch(s.basis[None], 1, scale, gen)
    return WeightedSample(points[0, :, 0], float(np.exp(logw[0])))


def sample_affine_plane(n, k, offset_scale, rng):
    """Random affine k-plane weighted for the measure d(xi) x Lebesgue(xi-perp)."""
    _check_nk(n, k)
    _check_scale(offset_scale)
    if k == n:
        raise InvalidArgumentError("affine planes need k < n")
    bases, offsets, logw, _ = affine_plane_batch(n, k, offset_scale, as_generator(rng), 1)
    plane = AffinePlane(Subspace(bases[0]), offsets[0])
    return WeightedSample(plane, float(np.exp(logw[0])))


def planes_through_points_batch(xt):
    """Affine planes through the columns of each ``n x (k+1)`` configuration.

    Returns ``(bases, offsets, ok)``; ``ok`` is false for degenerate
    configurations, whose rows hold placeholder values.
    """
    diffs = xt[..., 1:] - xt[..., :1]
    bases, _, ok = _polar_batch(diffs)
    x0 = xt[..., 0]
    along = np.einsum("snk,sn->sk", bases, x0)
    offsets = x0 - np.einsum("snk,sk->sn", bases, along)
    return bases, offsets, ok


def plane_through_points(xt):
    """Unique affine k-plane through the ``k+1`` columns of `xt`."""
    xt = np.asarray(xt, dtype=float)
    if xt.ndim != 2 or xt.shape[1] < 2 or xt.shape[0] < xt.shape[1] - 1:
        raise InvalidArgumentError(f"need an n x (k+1) matrix with k <= n, got {xt.shape}")
    bases, offsets, ok = planes_through_points_batch(xt[None])
    if not ok[0]:
        raise SingularConfigurationError("points are not in general position")
    return AffinePlane(Subspace(bases[0]), offsets[0])

