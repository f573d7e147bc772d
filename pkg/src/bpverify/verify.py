"""Two-sided numerical checks of the Blaschke-Petkantschin family of identities.

Each ``verify_*`` function estimates both sides of one identity, compares
them with each other and with a closed form where one exists, and returns a
:class:`VerificationReport`. Monte-Carlo sides draw from streams tagged by
the kind of estimator (see ``TAG_*``), so two verifiers that estimate the
same integral with the same seed see the same samples.

Singular weights with negative exponents are never sampled directly: the dual
forms are checked with the weight cancelled into the integrand, and the
multilinear and Drury right-hand sides go through deterministic quadrature or
through the affine identity in its finite-variance direction.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .constants import (
    bp_affine_constant,
    bp_constant,
    log_stiefel_volume,
    siegel_gamma,
    stiefel_volume,
)
from .errors import InvalidArgumentError, OutOfDomainError, UnsupportedConfigurationError
from .functions import (
    Gaussian,
    MultiPointFunction,
    ScaledShift,
    as_multipoint,
    base_of,
    drury_lhs_closed,
    radon_batch,
)
from .linalg import gram_volume, simplex_volume
from .montecarlo import McEstimate, run_mc
from .quadrature import quadrature_oracle
from .sampling import (
    DEFAULT_SCALE,
    affine_plane_batch,
    gaussian_log_weight,
    grassmann_batch,
    planes_through_points_batch,
    sqrtm_psd_batch,
    stiefel_batch,
    subspace_points_batch,
    wishart_batch,
    wishart_logpdf,
)

__all__ = [
    "Check",
    "VerificationReport",
    "compare",
    "riesz_functional",
    "verify_affine_bp",
    "verify_affine_dual",
    "verify_bp",
    "verify_bp_dual",
    "verify_drury",
    "verify_multilinear",
    "verify_polar",
    "verify_riesz",
]

TAG_MATRIX = 1
TAG_POLAR = 2
TAG_GRASSMANN = 3
TAG_AFFINE = 4
TAG_PLANES = 5

DEFAULT_REL_TOL = 0.02
DEFAULT_Z_MAX = 3.0
# relative noise floor for comparing estimates that are exact up to rounding
FP_FLOOR = 1e-9
QUADRATURE_MAX_DIM = 6


@dataclass(frozen=True)
class Check:
    name: str
    a: float
    b: float
    z: float
    rel: float
    passed: bool

    def to_dict(self):
        return {"name": self.name, "a": self.a, "b": self.b, "z": self.z,
                "rel": self.rel, "pass": self.passed}


def _as_estimate(x):
    return x if isinstance(x, McEstimate) else McEstimate.exact(x)


def compare(name, a, b, rel_tol=DEFAULT_REL_TOL, z_max=DEFAULT_Z_MAX, reference=None):
    """Compare two estimates; pass needs ``z <= z_max`` and relative gap ``<= rel_tol``."""
    a, b = _as_estimate(a), _as_estimate(b)
    diff = abs(a.mean - b.mean)
    ref = abs(reference) if reference is not None else 0.5 * (abs(a.mean) + abs(b.mean))
    se = math.sqrt(a.stderr**2 + b.stderr**2 + (FP_FLOOR * ref) ** 2)
    z = diff / se if se > 0 else (0.0 if diff == 0 else math.inf)
    rel = diff / ref if ref > 0 else (0.0 if diff == 0 else math.inf)
    return Check(name, a.mean, b.mean, z, rel, bool(z <= z_max and rel <= rel_tol))


@dataclass
class VerificationReport:
    identity: str
    params: dict
    lhs: McEstimate
    rhs: McEstimate
    closed_form: float | None
    z: float
    passed: bool
    seed: int
    runtime_ms: float = 0.0
    checks: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    version: str = __version__

    def to_dict(self, timestamp=True):
        out = {
            "identity": self.identity,
            "params": dict(self.params),
            "lhs": self.lhs.to_dict(),
            "rhs": self.rhs.to_dict(),
            "closed_form": self.closed_form,
            "z": self.z,
            "pass": self.passed,
            "seed": self.seed,
        }
        if timestamp:
            out["runtime_ms"] = self.runtime_ms
        out["version"] = self.version
        out["checks"] = [c.to_dict() for c in self.checks]
        out["extra"] = {k: (v.to_dict() if isinstance(v, McEstimate) else v)
                        for k, v in self.extra.items()}
        out["notes"] = list(self.notes)
        return out


def _finish(identity, params, lhs, rhs, closed_form, checks, seed, start,
            extra=None, notes=None):
    notes = list(notes or [])
    estimates = [lhs, rhs] + [v for v in (extra or {}).values() if isinstance(v, McEstimate)]
    flagged = [e for e in estimates if e.flagged]
    if flagged:
        notes.append("rejected-draw fraction above 1e-4; run invalidated")
    primary = checks[0]
    return VerificationReport(
        identity=identity,
        params=params,
        lhs=lhs,
        rhs=rhs,
        closed_form=None if closed_form is None else float(closed_form),
        z=primary.z,
        passed=all(c.passed for c in checks) and not flagged,
        seed=seed,
        runtime_ms=round(1000 * (time.perf_counter() - start), 3),
        checks=checks,
        extra=extra or {},
        notes=notes,
    )


def _closed_checks(lhs, rhs, closed, rel_tol, z_max):
    checks = [compare("lhs~rhs", lhs, rhs, rel_tol, z_max, closed)]
    if closed is not None:
        checks.append(compare("lhs~closed", lhs, closed, rel_tol, z_max, closed))
        checks.append(compare("rhs~closed", rhs, closed, rel_tol, z_max, closed))
    return checks


def _require_order(n, k, q):
    for name, v in (("n", n), ("k", k), ("q", q)):
        if int(v) != v:
            raise InvalidArgumentError(f"{name} must be an integer, got {v!r}")
    if not 1 <= q <= k <= n:
        raise InvalidArgumentError(f"need 1 <= q <= k <= n, got n={n}, k={k}, q={q}")


def _require_factors(F, count, n):
    F = as_multipoint(F, count)
    if len(F) != count:
        raise InvalidArgumentError(f"expected {count} factors, got {len(F)}")
    if F.n != n:
        raise InvalidArgumentError(f"factors live in R^{F.n}, expected R^{n}")
    return F


def _recenter(F):
    """Translate F so the mean of its factor centers sits at the origin.

    Used by the affine identities, whose two sides are both translation
    invariant: the Gaussian proposals are centered at the origin, so
    recentering keeps the importance weights well behaved for shifted data.
    Returns ``(F, shift)``.
    """
    shift = np.mean([f.center for f in F.factors], axis=0)
    if not np.any(shift):
        return F, shift
    factors = []
    for f in F.factors:
        c = f.center - shift
        base = base_of(f)
        factors.append(ScaledShift(base, c) if np.any(c) else base)
    return MultiPointFunction(tuple(factors), F.power, F.volume), shift


def _recenter_note(shift):
    if not np.any(shift):
        return []
    return ["integrand translated by -(" + ",".join(f"{v:g}" for v in shift)
            + ") before sampling; both sides are translation invariant"]


def _require_scale(*scales):
    for s in scales:
        if not s > 0:
            raise InvalidArgumentError(f"proposal scales must be positive, got {s}")


# ------------------------------------------------------------------ kernels


def _matrix_kernel(F, n, m, scale):
    """Weighted Gaussian-proposal estimator of the integral of F over M_{n,m}."""

    def kernel(gen, size):
        x = scale * gen.standard_normal((size, n, m))
        logw = gaussian_log_weight(x.reshape(size, -1), scale)
        return np.exp(F.log_value(x) + logw), 0

    return kernel


def _polar_kernel(F, n, k, scale):
    """Estimator of int_V int_P F(v rho^{1/2}) |rho|^{(n-k-1)/2} d rho d v / vol(V)."""
    scale2 = scale**2

    def kernel(gen, size):
        frames, redraws = stiefel_batch(n, k, gen, size)
        rho = wishart_batch(k, n, scale2, gen, size)
        x = frames @ sqrtm_psd_batch(rho)
        _, logdet = np.linalg.slogdet(rho)
        logv = F.log_value(x) + (n - k - 1) / 2 * logdet - wishart_logpdf(rho, n, scale2)
        return np.exp(logv), redraws

    return kernel


def _grassmann_kernel(F, n, k, scale, power):
    """Estimator of int_G int_{xi^q} F(x) |x|_q^power dx d xi."""
    q = len(F)

    def kernel(gen, size):
        bases, redraws = grassmann_batch(n, k, gen, size)
        x, logw = subspace_points_batch(bases, q, scale, gen)
        logv = F.log_value(x) + logw
        if power:
            with np.errstate(divide="ignore"):
                logv = logv + power * np.log(gram_volume(x))
        return np.exp(logv), redraws

    return kernel


def _affine_kernel(F, n, k, scale, offset_scale, power, inner=None, inner_power=0):
    """Estimator of int_A int_{tau^{q+1}} F(x) Delta_q(x)^power [inner]^inner_power."""
    m = len(F)

    def kernel(gen, size):
        bases, offsets, logw_z, redraws = affine_plane_batch(n, k, offset_scale, gen, size)
        x, logw = subspace_points_batch(bases, m, scale, gen)
        x = x + offsets[:, :, None]
        logv = F.log_value(x) + logw + logw_z
        if power:
            with np.errstate(divide="ignore"):
                logv = logv + power * np.log(simplex_volume(x))
        values = np.exp(logv)
        rejected = redraws
        if inner is not None and inner_power:
            pb, po, ok = planes_through_points_batch(x)
            values = np.where(ok, values * radon_batch(inner, pb, po) ** inner_power, 0.0)
            rejected += int(np.count_nonzero(~ok))
        return values, rejected

    return kernel


def _planes_kernel(fs, n, k, offset_scale, exponent=1):
    """Estimator of int_A prod_j (R_k f_j)(tau)^exponent d tau."""

    def kernel(gen, size):
        bases, offsets, logw, redraws = affine_plane_batch(n, k, offset_scale, gen, size)
        values = np.exp(logw)
        for f in fs:
            values = values * radon_batch(f, bases, offsets) ** exponent
        return values, redraws

    return kernel


# ---------------------------------------------------------------- verifiers


def verify_polar(n, k, F, samples=1_000_000, seed=0, workers=1, *, scale=DEFAULT_SCALE,
                 rel_tol=DEFAULT_REL_TOL, z_max=DEFAULT_Z_MAX, constant_scale=1.0):
    """Integral over n x k matrices versus the frame / positive-cone split.

    The left side samples matrices from a Gaussian proposal; the right side
    samples a Haar frame and an independent Wishart matrix (Bartlett
    construction) and weights by the Wishart density.
    """
    start = time.perf_counter()
    if not (int(n) == n and int(k) == k and 1 <= k <= n):
        raise InvalidArgumentError(f"need 1 <= k <= n, got n={n}, k={k}")
    _require_scale(scale)
    F = _require_factors(F, k, n)
    lhs = run_mc(_matrix_kernel(F, n, k, scale), samples, seed, TAG_MATRIX, workers)
    const = constant_scale * math.exp(log_stiefel_volume(n, k) - k * math.log(2.0))
    rhs = run_mc(_polar_kernel(F, n, k, scale), samples, seed, TAG_POLAR, workers).scaled(const)
    closed = F.full_integral()
    params = {"n": n, "k": k, "f": _describe(F), "samples": samples, "scale": scale}
    return _finish("polar", params, lhs, rhs, closed,
                   _closed_checks(lhs, rhs, closed, rel_tol, z_max), seed, start)


def verify_bp(n, k, q, F, samples=1_000_000, seed=0, workers=1, *, scale=DEFAULT_SCALE,
              rel_tol=DEFAULT_REL_TOL, z_max=DEFAULT_Z_MAX, constant_scale=1.0):
    """Integral over M_{n,q} versus the Grassmannian integral with weight |x|_q^(n-k)."""
    start = time.perf_counter()
    _require_order(n, k, q)
    _require_scale(scale)
    F = _require_factors(F, q, n)
    lhs = run_mc(_matrix_kernel(F, n, q, scale), samples, seed, TAG_MATRIX, workers)
    const = constant_scale * bp_constant(n, k, q)
    rhs = run_mc(_grassmann_kernel(F, n, k, scale, n - k), samples, seed, TAG_GRASSMANN,
                 workers).scaled(const)
    closed = F.full_integral()
    params = {"n": n, "k": k, "q": q, "f": _describe(F), "samples": samples, "scale": scale,
              "constant": const}
    return _finish("bp", params, lhs, rhs, closed,
                   _closed_checks(lhs, rhs, closed, rel_tol, z_max), seed, start)


def verify_bp_dual(n, k, q, G, samples=1_000_000, seed=0, workers=1, *, scale=DEFAULT_SCALE,
                   rel_tol=DEFAULT_REL_TOL, z_max=DEFAULT_Z_MAX, constant_scale=1.0):
    """Subspace-first form: Grassmannian integral of G |x|^(n-k) against the inverse constant
    times the integral of G over M_{n,q}."""
    start = time.perf_counter()
    _require_order(n, k, q)
    _require_scale(scale)
    G = _require_factors(G, q, n)
    lhs = run_mc(_grassmann_kernel(G, n, k, scale, n - k), samples, seed, TAG_GRASSMANN, workers)
    const = constant_scale / bp_constant(n, k, q)
    rhs = run_mc(_matrix_kernel(G, n, q, scale), samples, seed, TAG_MATRIX, workers).scaled(const)
    closed = G.full_integral() / bp_constant(n, k, q)
    params = {"n": n, "k": k, "q": q, "f": _describe(G), "samples": samples, "scale": scale,
              "constant": const}
    notes = ["regularized form: singular weight |x|^(k-n) cancelled into the integrand"]
    return _finish("bp-dual", params, lhs, rhs, closed,
                   _closed_checks(lhs, rhs, closed, rel_tol, z_max), seed, start, notes=notes)


def verify_affine_bp(n, k, q, F, samples=1_000_000, seed=0, workers=1, *, scale=DEFAULT_SCALE,
                     offset_scale=DEFAULT_SCALE, rel_tol=DEFAULT_REL_TOL, z_max=DEFAULT_Z_MAX,
                     constant_scale=1.0):
    """Integral over q+1 points versus affine planes with weight Delta_q^(n-k)."""
    start = time.perf_counter()
    _require_order(n, k, q)
    _require_scale(scale, offset_scale)
    F = _require_factors(F, q + 1, n)
    described = _describe(F)
    F, shift = _recenter(F)
    lhs = run_mc(_matrix_kernel(F, n, q + 1, scale), samples, seed, TAG_MATRIX, workers)
    const = constant_scale * bp_affine_constant(n, k, q)
    rhs = run_mc(_affine_kernel(F, n, k, scale, offset_scale, n - k), samples, seed,
                 TAG_AFFINE, workers).scaled(const)
    closed = F.full_integral()
    params = {"n": n, "k": k, "q": q, "f": described, "samples": samples, "scale": scale,
              "offset_scale": offset_scale, "constant": const}
    notes = ["k = n: single plane, trivial Fubini case"] if k == n else []
    notes += _recenter_note(shift)
    return _finish("affine-bp", params, lhs, rhs, closed,
                   _closed_checks(lhs, rhs, closed, rel_tol, z_max), seed, start, notes=notes)


def verify_affine_dual(n, k, q, G, samples=1_000_000, seed=0, workers=1, *,
                       scale=DEFAULT_SCALE, offset_scale=DEFAULT_SCALE,
                       rel_tol=DEFAULT_REL_TOL, z_max=DEFAULT_Z_MAX, constant_scale=1.0):
    """Plane-first affine form, with the singular simplex weight cancelled into G."""
    start = time.perf_counter()
    _require_order(n, k, q)
    _require_scale(scale, offset_scale)
    G = _require_factors(G, q + 1, n)
    described = _describe(G)
    G, shift = _recenter(G)
    lhs = run_mc(_affine_kernel(G, n, k, scale, offset_scale, n - k), samples, seed,
                 TAG_AFFINE, workers)
    const = constant_scale / bp_affine_constant(n, k, q)
    rhs = run_mc(_matrix_kernel(G, n, q + 1, scale), samples, seed, TAG_MATRIX,
                 workers).scaled(const)
    closed = G.full_integral() / bp_affine_constant(n, k, q)
    params = {"n": n, "k": k, "q": q, "f": described, "samples": samples, "scale": scale,
              "offset_scale": offset_scale, "constant": const}
    notes = ["regularized form: singular weight Delta^(k-n) cancelled into the integrand"]
    notes += _recenter_note(shift)
    return _finish("affine-dual", params, lhs, rhs, closed,
                   _closed_checks(lhs, rhs, closed, rel_tol, z_max), seed, start, notes=notes)


def _choose_path(path, n, points, functions):
    quad_ok = n * points <= QUADRATURE_MAX_DIM and points == 2 and all(
        isinstance(f, Gaussian) or getattr(f, "base", None).__class__ is Gaussian
        for f in functions
    )
    if path == "auto":
        return "quadrature" if quad_ok else "regularized"
    if path == "quadrature" and not quad_ok:
        raise UnsupportedConfigurationError(
            "quadrature path needs Gaussian factors, two points and n*(q+1) <= 6; "
            "use the regularized path"
        )
    if path not in ("quadrature", "regularized"):
        raise InvalidArgumentError(f"unknown path {path!r}; use auto, quadrature or regularized")
    return path


def verify_multilinear(n, k, q, f_list, samples=1_000_000, seed=0, workers=1, *, path="auto",
                       scale=DEFAULT_SCALE, offset_scale=DEFAULT_SCALE,
                       rel_tol=DEFAULT_REL_TOL, z_max=DEFAULT_Z_MAX, constant_scale=1.0):
    """Integral over affine planes of a product of k-plane transforms.

    The right side is the (q+1)-point integral with weight Delta_q^(k-n),
    evaluated by quadrature when ``n*(q+1) <= 6`` and otherwise through the
    affine identity with the weight cancelled (points sampled on planes).
    """
    start = time.perf_counter()
    _require_order(n, k, q)
    if k >= n:
        raise InvalidArgumentError(f"multilinear form needs k < n, got n={n}, k={k}")
    _require_scale(scale, offset_scale)
    F = _require_factors(f_list, q + 1, n)
    described = _describe(F)
    F, shift = _recenter(F)
    fs = F.factors
    lhs = run_mc(_planes_kernel(fs, n, k, offset_scale), samples, seed, TAG_PLANES, workers)
    const = (constant_scale * math.factorial(q) ** (k - n)
             * math.exp(log_stiefel_volume(k, q) - log_stiefel_volume(n, q)))
    chosen = _choose_path(path, n, q + 1, fs)
    if chosen == "quadrature":
        res = quadrature_oracle(fs, power=k - n)
        rhs = McEstimate(res.value, res.error, 0, 0, "quadrature").scaled(const)
    else:
        c = bp_affine_constant(n, k, q)
        rhs = run_mc(_affine_kernel(F, n, k, scale, offset_scale, 0), samples, seed,
                     TAG_AFFINE, workers).scaled(const * c)
    closed = None
    if all(isinstance(f, Gaussian) for f in fs):
        a = [f.a for f in fs]
        closed = math.prod((math.pi / aj) ** (k / 2) for aj in a) * (
            math.pi / sum(a)) ** ((n - k) / 2)
    checks = [compare("lhs~rhs", lhs, rhs, rel_tol, z_max, closed)]
    if closed is not None:
        checks.append(compare("lhs~closed", lhs, closed, rel_tol, z_max, closed))
        checks.append(compare("rhs~closed", rhs, closed, rel_tol, z_max, closed))
    params = {"n": n, "k": k, "q": q, "f": described, "samples": samples, "path": chosen,
              "constant": const}
    return _finish("multilinear", params, lhs, rhs, closed, checks, seed, start,
                   notes=[f"rhs path: {chosen}"] + _recenter_note(shift))


def _drury_inner(f, ell):
    def extra(xt):
        bases, offsets, ok = planes_through_points_batch(xt)
        return np.where(ok, radon_batch(f, bases, offsets) ** ell, 0.0)

    return extra


def verify_drury(n, k, ell, a=1.0, samples=1_000_000, seed=0, workers=1, *, path="auto",
                 scale=DEFAULT_SCALE, offset_scale=DEFAULT_SCALE,
                 rel_tol=DEFAULT_REL_TOL, z_max=DEFAULT_Z_MAX, constant_scale=1.0):
    """Integral of the (k+ell+1)-th power of the k-plane transform of a Gaussian.

    The left side is exact and is cross-checked by Monte Carlo over affine
    planes. The right side is the (k+1)-point integral with weight
    Delta_k^(k-n) and ell extra transform factors over the plane through the
    points, by quadrature when ``n*(k+1) <= 6`` and otherwise by sampling
    points on planes with the weight cancelled.
    """
    start = time.perf_counter()
    if not (int(n) == n and int(k) == k and 1 <= k < n):
        raise InvalidArgumentError(f"need 1 <= k < n, got n={n}, k={k}")
    if int(ell) != ell or ell < 0:
        raise InvalidArgumentError(f"ell must be a nonnegative integer, got {ell}")
    _require_scale(scale, offset_scale)
    f = Gaussian(a, n)
    m = k + ell + 1
    lhs_closed = drury_lhs_closed(n, k, ell, a)
    lhs_mc = run_mc(_planes_kernel([f], n, k, offset_scale, exponent=m), samples, seed,
                    TAG_PLANES, workers)
    const = (constant_scale * math.factorial(k) ** (k - n)
             * math.exp(log_stiefel_volume(k, k) - log_stiefel_volume(n, k)))
    F = MultiPointFunction((f,) * (k + 1))
    chosen = _choose_path(path, n, k + 1, F.factors)
    inner = _drury_inner(f, ell) if ell else None
    if chosen == "quadrature":
        res = quadrature_oracle(F.factors, power=k - n, extra=inner)
        rhs = McEstimate(res.value, res.error, 0, 0, "quadrature").scaled(const)
    else:
        c = bp_affine_constant(n, k, k)
        rhs = run_mc(_affine_kernel(F, n, k, scale, offset_scale, 0, inner=f, inner_power=ell),
                     samples, seed, TAG_AFFINE, workers).scaled(const * c)
    lhs = McEstimate.exact(lhs_closed)
    checks = [
        compare("lhs~rhs", lhs, rhs, rel_tol, z_max, lhs_closed),
        compare("lhs_mc~lhs", lhs_mc, lhs, rel_tol, z_max, lhs_closed),
    ]
    params = {"n": n, "k": k, "ell": ell, "a": a, "samples": samples, "path": chosen,
              "constant": const}
    notes = [f"rhs path: {chosen}"]
    if k + ell + 1 == n:
        notes.append("classical case k + ell + 1 = n")
    return _finish("drury", params, lhs, rhs, lhs_closed, checks, seed, start,
                   extra={"lhs_mc": lhs_mc}, notes=notes)


def _riesz_closed(n, q, alpha, G):
    a = {f.a for f in G.factors if isinstance(f, Gaussian)}
    if len(a) != 1 or not all(isinstance(f, Gaussian) for f in G.factors):
        return None
    (a,) = a
    return 0.5**q * stiefel_volume(n, q) * a ** (-q * alpha / 2) * siegel_gamma(q, alpha / 2)


def _riesz_quadrature_ok(n, q, G):
    return q == 1 and n <= 3 and all(
        isinstance(f, Gaussian) or getattr(f, "base", None).__class__ is Gaussian
        for f in G.factors
    )


def riesz_functional(n, q, alpha, G, samples=1_000_000, seed=0, workers=1, *,
                     scale=DEFAULT_SCALE, method="auto"):
    """Estimate ``int_{M_{n,q}} G(x) |x|_q^(alpha-n) dx`` for real ``alpha > q-1``.

    Monte Carlo is used for ``alpha >= n`` (bounded weight); below that the
    estimate comes from quadrature, available for ``q = 1``, ``n <= 3`` and
    Gaussian factors. Other configurations in the heavy-tailed band are refused.
    At ``alpha = n`` the weight is identically one and the exact full integral
    is returned.
    """
    if not (int(n) == n and int(q) == q and 1 <= q <= n):
        raise InvalidArgumentError(f"need 1 <= q <= n, got n={n}, q={q}")
    alpha = float(alpha)
    if not alpha > q - 1:
        raise OutOfDomainError(f"integral diverges for alpha={alpha} <= q-1={q - 1}")
    G = _require_factors(G, q, n)
    if alpha == n and method in ("auto", "exact"):
        # weight |x|^0 is identically one
        return McEstimate.exact(G.full_integral(), method="exact")
    if method == "auto":
        method = "mc" if alpha >= n else "quadrature"
    if method == "mc":
        if alpha < n:
            raise UnsupportedConfigurationError(
                f"Monte Carlo needs alpha >= n={n} for a bounded weight; use quadrature"
            )
        _require_scale(scale)
        Gw = G.with_power(alpha - n, "gram") if alpha != n else G
        return run_mc(_matrix_kernel(Gw, n, q, scale), samples, seed, TAG_MATRIX, workers)
    if method == "quadrature":
        if not _riesz_quadrature_ok(n, q, G):
            raise UnsupportedConfigurationError(
                "quadrature path needs q = 1, n <= 3 and Gaussian factors"
            )
        res = quadrature_oracle(G.factors, power=alpha - n)
        return McEstimate(res.value, res.error, 0, 0, "quadrature")
    raise InvalidArgumentError(f"unknown method {method!r}")


def verify_riesz(n, q, alpha, G, samples=1_000_000, seed=0, workers=1, *, scale=DEFAULT_SCALE,
                 rel_tol=DEFAULT_REL_TOL, z_max=DEFAULT_Z_MAX):
    """Riesz functional against an independent reference.

    The reference is the closed form for equal-width centered Gaussians,
    otherwise the quadrature path when Monte Carlo ran and quadrature applies.
    """
    start = time.perf_counter()
    G = _require_factors(G, q, n)
    est = riesz_functional(n, q, alpha, G, samples, seed, workers, scale=scale)
    closed = _riesz_closed(n, q, alpha, G)
    if alpha == n:
        closed = G.full_integral()
    if closed is not None:
        ref = McEstimate.exact(closed)
    elif est.method == "mc" and _riesz_quadrature_ok(n, q, G):
        ref = riesz_functional(n, q, alpha, G, method="quadrature")
    else:
        raise UnsupportedConfigurationError(
            "no independent reference for this Riesz configuration; use centered Gaussians "
            "of equal width, or q = 1 with n <= 3"
        )
    checks = [compare("estimate~reference", est, ref, rel_tol, z_max, closed)]
    params = {"n": n, "q": q, "alpha": alpha, "f": _describe(G), "samples": samples,
              "method": est.method}
    return _finish("riesz", params, est, ref, closed, checks, seed, start)


def _describe(F):
    parts = []
    for f in F.factors:
        if isinstance(f, Gaussian):
            parts.append(f"gaussian:a={f.a:g}")
        elif hasattr(f, "R"):
            parts.append(f"ball:R={f.R:g}")
        else:
            c = ",".join(f"{v:g}" for v in f.center)
            parts.append(f"shifted-gaussian:a={f.base.a:g},c={c}")
    return ";".join(parts)
