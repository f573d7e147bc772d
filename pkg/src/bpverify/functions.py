"""Radially symmetric test functions with exact integrals and k-plane transforms.

Function specs use a small grammar, shared with the command line::

    gaussian:a=1.0
    ball:R=1.0
    shifted-gaussian:a=1.0,c=0.5,0,-1

Several specs joined by ``;`` describe a product over points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import special

from .errors import InvalidArgumentError, UnsupportedOracleError
from .linalg import AffinePlane, gram_volume, simplex_volume

__all__ = [
    "BallIndicator",
    "Gaussian",
    "MultiPointFunction",
    "ScaledShift",
    "ball_volume",
    "drury_lhs_closed",
    "evaluate",
    "full_integral",
    "parse_function_list",
    "parse_function_spec",
    "product_value",
    "radon_k_closed",
]


def ball_volume(k, radius=1.0):
    """Volume of the k-dimensional ball of the given radius."""
    return math.exp(k / 2 * math.log(math.pi) - special.gammaln(k / 2 + 1)) * radius**k


def _check_point(n, x):
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (n,):
        raise InvalidArgumentError(f"expected points in R^{n}, got shape {x.shape}")
    return x


@dataclass(frozen=True)
class Gaussian:
    """``f(x) = exp(-a |x|^2)`` on R^n."""

    a: float
    n: int

    def __post_init__(self):
        if not self.a > 0:
            raise InvalidArgumentError(f"Gaussian needs a > 0, got {self.a}")
        if self.n < 1:
            raise InvalidArgumentError(f"dimension must be positive, got {self.n}")

    @property
    def center(self):
        return np.zeros(self.n)

    def log_evaluate(self, x):
        x = _check_point(self.n, x)
        return -self.a * np.sum(x**2, axis=-1)

    def evaluate(self, x):
        return np.exp(self.log_evaluate(x))

    def full_integral(self):
        return (math.pi / self.a) ** (self.n / 2)

    def radon_from_distance(self, k, d):
        return (math.pi / self.a) ** (k / 2) * np.exp(-self.a * np.asarray(d) ** 2)


@dataclass(frozen=True)
class BallIndicator:
    """Indicator of the closed ball of radius `R` about the origin in R^n."""

    R: float
    n: int

    def __post_init__(self):
        if not self.R > 0:
            raise InvalidArgumentError(f"BallIndicator needs R > 0, got {self.R}")
        if self.n < 1:
            raise InvalidArgumentError(f"dimension must be positive, got {self.n}")

    @property
    def center(self):
        return np.zeros(self.n)

    def log_evaluate(self, x):
        x = _check_point(self.n, x)
        inside = np.sum(x**2, axis=-1) <= self.R**2
        return np.where(inside, 0.0, -np.inf)

    def evaluate(self, x):
        return np.exp(self.log_evaluate(x))

    def full_integral(self):
        return ball_volume(self.n, self.R)

    def radon_from_distance(self, k, d):
        d = np.asarray(d, dtype=float)
        r2 = np.maximum(self.R**2 - d**2, 0.0)
        return np.where(d < self.R, ball_volume(k) * r2 ** (k / 2), 0.0)


@dataclass(frozen=True)
class ScaledShift:
    """Catalogue function translated so that its center sits at `center`."""

    base: object
    center: np.ndarray = field(default=None)

    def __post_init__(self):
        c = np.zeros(self.base.n) if self.center is None else np.asarray(self.center, dtype=float)
        if c.shape != (self.base.n,):
            raise InvalidArgumentError(f"center must have shape ({self.base.n},), got {c.shape}")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "center", c)

    @property
    def n(self):
        return self.base.n

    def log_evaluate(self, x):
        x = _check_point(self.n, x)
        return self.base.log_evaluate(x - self.center)

    def evaluate(self, x):
        return np.exp(self.log_evaluate(x))

    def full_integral(self):
        return self.base.full_integral()

    def radon_from_distance(self, k, d):
        return self.base.radon_from_distance(k, d)

    def __eq__(self, other):
        if not isinstance(other, ScaledShift):
            return NotImplemented
        return self.base == other.base and np.array_equal(self.center, other.center)

    __hash__ = None


def is_centered(f):
    return not np.any(f.center)


def base_of(f):
    return f.base if isinstance(f, ScaledShift) else f


def evaluate(f, x):
    """Pointwise value of a catalogue function."""
    return f.evaluate(x)


def full_integral(f):
    """Lebesgue integral of `f` over R^n."""
    return f.full_integral()


def plane_distances(center, bases, offsets):
    """Distances from `center` to a stack of affine planes ``(bases, offsets)``."""
    along = np.einsum("snk,n->sk", bases, center)
    foot = offsets + np.einsum("snk,sk->sn", bases, along)
    return np.linalg.norm(center - foot, axis=-1)


def radon_batch(f, bases, offsets):
    """k-plane transform of `f` over a stack of planes."""
    k = bases.shape[-1]
    if isinstance(f, (Gaussian, BallIndicator)):
        d = np.linalg.norm(offsets, axis=-1)
    elif isinstance(f, ScaledShift):
        d = plane_distances(f.center, bases, offsets)
    else:
        raise UnsupportedOracleError(f"no closed-form transform for {type(f).__name__}")
    return f.radon_from_distance(k, d)


def radon_k_closed(f, tau: AffinePlane):
    """Integral of `f` over the affine plane `tau` (Lebesgue measure on the plane)."""
    if not isinstance(f, (Gaussian, BallIndicator, ScaledShift)):
        raise UnsupportedOracleError(f"no closed-form transform for {type(f).__name__}")
    if tau.n != f.n:
        raise InvalidArgumentError(f"plane lives in R^{tau.n}, function in R^{f.n}")
    return float(f.radon_from_distance(tau.k, tau.distance(f.center)))


def drury_lhs_closed(n, k, ell, a):
    """Exact integral over affine k-planes of the (k+ell+1)-th power of the
    k-plane transform of ``exp(-a|x|^2)`` on R^n."""
    if not (int(n) == n and int(k) == k and 1 <= k < n):
        raise InvalidArgumentError(f"need 1 <= k < n, got n={n}, k={k}")
    if int(ell) != ell or ell < 0:
        raise InvalidArgumentError(f"ell must be a nonnegative integer, got {ell}")
    if not a > 0:
        raise InvalidArgumentError(f"a must be positive, got {a}")
    m = k + ell + 1
    return (math.pi / a) ** (m * k / 2) * (math.pi / (m * a)) ** ((n - k) / 2)


@dataclass(frozen=True)
class MultiPointFunction:
    """Product ``f_0(x_0) f_1(x_1) ...`` over the columns of a configuration.

    `power` optionally multiplies by a power of the Gram volume of the columns
    (``volume="gram"``) or of the simplex they span (``volume="simplex"``).
    """

    factors: tuple
    power: float = 0.0
    volume: str = "gram"

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors:
            raise InvalidArgumentError("need at least one factor")
        dims = {f.n for f in factors}
        if len(dims) != 1:
            raise InvalidArgumentError(f"factor dimensions differ: {sorted(dims)}")
        if self.volume not in ("gram", "simplex"):
            raise InvalidArgumentError(f"volume must be 'gram' or 'simplex', got {self.volume!r}")
        object.__setattr__(self, "factors", factors)

    @property
    def n(self):
        return self.factors[0].n

    def __len__(self):
        return len(self.factors)

    def with_power(self, power, volume=None):
        return MultiPointFunction(self.factors, power, volume or self.volume)

    def log_value(self, xt):
        """Log of the product for a stack of ``n x m`` configurations."""
        xt = np.asarray(xt, dtype=float)
        if xt.shape[-2:] != (self.n, len(self.factors)):
            raise InvalidArgumentError(
                f"expected configurations of shape ({self.n}, {len(self.factors)}), got {xt.shape}"
            )
        out = sum(f.log_evaluate(xt[..., :, j]) for j, f in enumerate(self.factors))
        if self.power:
            vol = gram_volume(xt) if self.volume == "gram" else simplex_volume(xt)
            with np.errstate(divide="ignore"):
                out = out + self.power * np.log(vol)
        return out

    def full_integral(self):
        """Integral of the plain product (power ignored) over all configurations."""
        return math.prod(f.full_integral() for f in self.factors)

    def all_centered_gaussians(self):
        return all(isinstance(f, Gaussian) for f in self.factors)


def product_value(F, xt):
    """Value of a multi-point function at one or more configurations."""
    out = np.exp(F.log_value(xt))
    return float(out) if np.ndim(out) == 0 else out


def _parse_floats(text):
    return [float(t) for t in text.split(",") if t.strip()]


def parse_function_spec(spec, n):
    """Build one catalogue function in R^n from a spec such as ``gaussian:a=2``."""
    spec = spec.strip()
    kind, _, rest = spec.partition(":")
    kind = kind.strip().lower()
    params = {}
    if rest:
        # c=... swallows the remaining comma-separated floats
        head, sep, centre = rest.partition("c=")
        for item in head.split(","):
            item = item.strip()
            if not item:
                continue
            key, eq, value = item.partition("=")
            if not eq:
                raise InvalidArgumentError(f"malformed parameter {item!r} in {spec!r}")
            try:
                params[key.strip()] = float(value)
            except ValueError:
                raise InvalidArgumentError(f"non-numeric value in {spec!r}") from None
        if sep:
            try:
                params["c"] = _parse_floats(centre)
            except ValueError:
                raise InvalidArgumentError(f"non-numeric center in {spec!r}") from None
    if kind == "gaussian":
        f = Gaussian(params.pop("a", 1.0), n)
    elif kind == "ball":
        f = BallIndicator(params.pop("R", 1.0), n)
    elif kind == "shifted-gaussian":
        center = params.pop("c", None)
        if center is None:
            raise InvalidArgumentError(f"shifted-gaussian needs c=... in {spec!r}")
        f = ScaledShift(Gaussian(params.pop("a", 1.0), n), np.array(center))
    else:
        raise InvalidArgumentError(f"unknown function kind {kind!r}")
    if params:
        raise InvalidArgumentError(f"unknown parameters {sorted(params)} in {spec!r}")
    return f


def parse_function_list(spec, n, count):
    """Parse a ``;``-joined list; a single entry is repeated `count` times."""
    parts = [p for p in spec.split(";") if p.strip()]
    if not parts:
        raise InvalidArgumentError("empty function spec")
    funcs = [parse_function_spec(p, n) for p in parts]
    if len(funcs) == 1:
        funcs = funcs * count
    if len(funcs) != count:
        raise InvalidArgumentError(f"expected 1 or {count} functions, got {len(funcs)}")
    return funcs


def as_multipoint(F, count=None) -> MultiPointFunction:
    if isinstance(F, MultiPointFunction):
        return F
    if isinstance(F, (Gaussian, BallIndicator, ScaledShift)):
        if count is None:
            raise InvalidArgumentError("need a factor count to expand a single function")
        return MultiPointFunction((F,) * count)
    if isinstance(F, Sequence):
        return MultiPointFunction(tuple(F))
    raise InvalidArgumentError(f"cannot interpret {type(F).__name__} as a multi-point function")
