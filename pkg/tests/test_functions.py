import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate
from scipy.stats import ortho_group

from bpverify import (
    AffinePlane,
    BallIndicator,
    Gaussian,
    InvalidArgumentError,
    MultiPointFunction,
    RngStream,
    ScaledShift,
    Subspace,
    UnsupportedOracleError,
    drury_lhs_closed,
    full_integral,
    radon_k_closed,
)
from bpverify.functions import (
    evaluate,
    parse_function_list,
    parse_function_spec,
    product_value,
    radon_batch,
)
from bpverify.sampling import affine_plane_batch, subspace_points_batch


def test_evaluate_examples():
    assert evaluate(Gaussian(1, 2), np.zeros(2)) == 1.0
    assert evaluate(BallIndicator(1, 2), np.array([2.0, 0.0])) == 0.0
    assert evaluate(Gaussian(1, 3), np.array([1.0, 0, 0])) == pytest.approx(0.36787944117144233)
    assert evaluate(BallIndicator(1, 2), np.array([1.0, 0.0])) == 1.0
    with pytest.raises(InvalidArgumentError):
        evaluate(Gaussian(1, 2), np.zeros(3))


def test_full_integral_examples():
    assert full_integral(Gaussian(1, 2)) == pytest.approx(math.pi)
    assert full_integral(BallIndicator(1, 2)) == pytest.approx(math.pi)
    assert full_integral(Gaussian(1, 3)) == pytest.approx(5.568327996831708)
    assert full_integral(BallIndicator(2.0, 3)) == pytest.approx(4 / 3 * math.pi * 8)


def test_invalid_parameters():
    with pytest.raises(InvalidArgumentError):
        Gaussian(0, 2)
    with pytest.raises(InvalidArgumentError):
        BallIndicator(-1, 2)


def _line(n, d):
    e = np.eye(n)
    return AffinePlane(Subspace(e[:, :1]), d * e[:, 1])


def test_radon_examples():
    plane = AffinePlane(Subspace(np.eye(3)[:, :2]))
    assert radon_k_closed(Gaussian(1, 3), plane) == pytest.approx(math.pi)
    assert radon_k_closed(Gaussian(1, 2), _line(2, 1.0)) == pytest.approx(math.sqrt(math.pi) * math.exp(-1), rel=1e-14)
    assert radon_k_closed(BallIndicator(1, 2), _line(2, 1.0)) == 0.0
    assert radon_k_closed(BallIndicator(1, 2), _line(2, 1.5)) == 0.0
    # chord of the unit disc at distance 0.6 has length 1.6
    assert radon_k_closed(BallIndicator(1, 2), _line(2, 0.6)) == pytest.approx(1.6)
    with pytest.raises(UnsupportedOracleError):
        radon_k_closed(object(), plane)


@pytest.mark.parametrize("a", [0.5, 1.0, 3.0])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_radon_at_zero_is_lower_dim_integral(a, k):
    tau = AffinePlane(Subspace(np.eye(4)[:, :k]))
    assert radon_k_closed(Gaussian(a, 4), tau) == full_integral(Gaussian(a, k))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 3), st.floats(0.0, 2.0))
def test_radon_rotation_invariance(seed, k, d):
    n = 4
    g = ortho_group.rvs(n, random_state=seed)
    e = np.eye(n)
    tau = AffinePlane(Subspace(e[:, :k]), d * e[:, k])
    rot = AffinePlane(Subspace(g @ e[:, :k]), g @ (d * e[:, k]))
    for f in (Gaussian(1.3, n), BallIndicator(1.5, n)):
        v0, v1 = radon_k_closed(f, tau), radon_k_closed(f, rot)
        assert v1 == pytest.approx(v0, rel=1e-12, abs=1e-300)


def test_shifted_radon_uses_center_distance():
    c = np.array([0.3, -0.4, 1.0])
    f = ScaledShift(Gaussian(1, 3), c)
    tau = AffinePlane(Subspace(np.eye(3)[:, :2]), np.zeros(3))
    assert radon_k_closed(f, tau) == pytest.approx(math.pi * math.exp(-1.0))


CATALOGUE = [
    lambda n: Gaussian(1.0, n),
    lambda n: Gaussian(2.5, n),
    lambda n: BallIndicator(1.2, n),
    lambda n: ScaledShift(Gaussian(1.0, n), np.linspace(-0.5, 0.5, n)),
]


@pytest.mark.parametrize("make", CATALOGUE)
@pytest.mark.parametrize("n,k", [(2, 1), (3, 1), (3, 2), (4, 2), (4, 3)])
def test_weighted_plane_mc_matches_radon(make, n, k):
    f = make(n)
    gen = RngStream(21, n * 10 + k).generator()
    bases, offsets, _, _ = affine_plane_batch(n, k, 0.5, gen, 20)
    for s in range(bases.shape[0]):
        b = np.repeat(bases[s:s + 1], 20_000, axis=0)
        pts, logw = subspace_points_batch(b, 1, 0.8, gen)
        x = pts[..., 0] + offsets[s]
        vals = np.exp(logw) * f.evaluate(x)
        mean = vals.mean()
        se = vals.std(ddof=1) / math.sqrt(vals.size)
        exact = radon_batch(f, bases[s:s + 1], offsets[s:s + 1])[0]
        assert abs(mean - exact) <= 4 * se + 1e-12


def _drury_lhs_by_quad(n, k, ell, a):
    # integrate the offset profile over xi-perp with 1-D quadrature
    m = k + ell + 1
    shell = n - k
    area = 2 * math.pi ** (shell / 2) / math.gamma(shell / 2)
    val, _ = integrate.quad(
        lambda d: area * d ** (shell - 1) * ((math.pi / a) ** (k / 2) * math.exp(-a * d * d)) ** m,
        0, np.inf, epsabs=0, epsrel=1e-12)
    return val


@pytest.mark.parametrize("n,k,ell,a", [(2, 1, 0, 1.0), (3, 1, 1, 1.0), (3, 2, 0, 0.7),
                                       (4, 2, 3, 2.0), (5, 1, 0, 1.5)])
def test_drury_lhs_matches_radial_quadrature(n, k, ell, a):
    assert drury_lhs_closed(n, k, ell, a) == pytest.approx(_drury_lhs_by_quad(n, k, ell, a),
                                                          rel=1e-10)


def test_drury_lhs_examples():
    assert drury_lhs_closed(2, 1, 0, 1) == pytest.approx(math.pi * math.sqrt(math.pi / 2), rel=1e-14)
    assert drury_lhs_closed(3, 1, 1, 1) == pytest.approx(math.pi**1.5 * math.pi / 3, rel=1e-14)
    with pytest.raises(InvalidArgumentError):
        drury_lhs_closed(3, 1, -1, 1)
    with pytest.raises(InvalidArgumentError):
        drury_lhs_closed(2, 2, 0, 1)


def test_product_value_examples():
    F = MultiPointFunction((Gaussian(1, 3),) * 2)
    assert product_value(F, np.zeros((3, 2))) == 1.0
    assert product_value(F, np.eye(3)[:, :2]) == pytest.approx(math.exp(-2))
    B = MultiPointFunction((Gaussian(1, 2), BallIndicator(1, 2)))
    assert product_value(B, np.array([[0.0, 2.0], [0.0, 0.0]])) == 0.0
    with pytest.raises(InvalidArgumentError):
        MultiPointFunction((Gaussian(1, 2), Gaussian(1, 3)))


def test_parse_grammar():
    assert parse_function_spec("gaussian:a=2", 3) == Gaussian(2.0, 3)
    assert parse_function_spec("ball:R=0.5", 2) == BallIndicator(0.5, 2)
    f = parse_function_spec("shifted-gaussian:a=1.5,c=0.5,0,-1", 3)
    assert f == ScaledShift(Gaussian(1.5, 3), np.array([0.5, 0, -1]))
    fs = parse_function_list("gaussian:a=1;ball:R=2", 2, 2)
    assert fs == [Gaussian(1.0, 2), BallIndicator(2.0, 2)]
    assert parse_function_list("gaussian:a=1", 2, 3) == [Gaussian(1.0, 2)] * 3
    for bad in ("cauchy:a=1", "gaussian:b=1", "gaussian:a=x", "shifted-gaussian:a=1",
                "shifted-gaussian:a=1,c=1,2"):
        with pytest.raises(InvalidArgumentError):
            parse_function_spec(bad, 3)
    with pytest.raises(InvalidArgumentError):
        parse_function_list("gaussian:a=1;gaussian:a=2", 2, 3)
