import math

import numpy as np
import pytest
from scipy.stats import ortho_group

from bpverify import (
    BallIndicator,
    Gaussian,
    InvalidArgumentError,
    MultiPointFunction,
    OutOfDomainError,
    ScaledShift,
    UnsupportedConfigurationError,
    bp_constant,
    riesz_functional,
    verify_affine_bp,
    verify_affine_dual,
    verify_bp,
    verify_bp_dual,
    verify_drury,
    verify_multilinear,
    verify_polar,
    verify_riesz,
)
from bpverify.montecarlo import McEstimate, run_mc
from bpverify.verify import compare

PI = math.pi


def gauss(n, count, a=1.0):
    return MultiPointFunction((Gaussian(a, n),) * count)


def ball(n, count, R=1.0):
    return MultiPointFunction((BallIndicator(R, n),) * count)


def within(est, value, nse=3.0):
    return abs(est.mean - value) <= nse * est.stderr + 1e-9 * abs(value)


# ---- Monte Carlo plumbing


def test_run_mc_independent_of_workers():
    def kernel(gen, size):
        return gen.standard_normal(size) ** 2, 0

    a = run_mc(kernel, 100_000, 3, 9, workers=1)
    b = run_mc(kernel, 100_000, 3, 9, workers=4)
    assert a == b
    assert abs(a.mean - 1) <= 4 * a.stderr


def test_run_mc_flags_rejections():
    def kernel(gen, size):
        return np.ones(size), size // 100

    est = run_mc(kernel, 10_000, 0, 1)
    assert est.flagged and est.rejected > 0


def test_compare_and_rule():
    exact = McEstimate.exact(1.0)
    # small z but large relative gap fails
    assert not compare("x", McEstimate(1.05, 1.0, 10), exact).passed
    # small relative gap but huge z fails
    assert not compare("x", McEstimate(1.01, 1e-6, 10), exact).passed
    assert compare("x", McEstimate(1.001, 1e-3, 10), exact).passed


# ---- examples


def test_polar_examples():
    r = verify_polar(3, 2, gauss(3, 2), samples=200_000, seed=1)
    assert r.passed and r.closed_form == pytest.approx(PI**3)
    assert within(r.lhs, PI**3) and within(r.rhs, PI**3)
    r = verify_polar(1, 1, gauss(1, 1), samples=50_000, seed=1)
    assert r.passed and r.closed_form == pytest.approx(math.sqrt(PI))
    r = verify_polar(2, 1, ball(2, 1), samples=200_000, seed=2)
    assert r.passed and within(r.rhs, PI) and within(r.lhs, PI)


def test_bp_examples():
    r = verify_bp(3, 2, 1, gauss(3, 1), samples=200_000, seed=3)
    assert r.passed and r.closed_form == pytest.approx(PI**1.5)
    r = verify_bp(2, 1, 1, gauss(2, 1), samples=200_000, seed=3)
    assert r.passed and within(r.rhs, PI)
    assert r.params["constant"] == pytest.approx(PI)
    assert bp_constant(2, 1, 1) == pytest.approx(PI)


def test_bp_rejects_bad_order():
    with pytest.raises(InvalidArgumentError):
        verify_bp(2, 3, 1, gauss(2, 1), samples=1000)
    with pytest.raises(InvalidArgumentError):
        verify_bp(3, 2, 1, gauss(3, 2), samples=1000)


def test_affine_bp_examples():
    r = verify_affine_bp(2, 1, 1, gauss(2, 2), samples=200_000, seed=4)
    assert r.passed and r.closed_form == pytest.approx(PI**2)
    r = verify_affine_bp(3, 2, 1, gauss(3, 2), samples=200_000, seed=4)
    assert r.passed and r.closed_form == pytest.approx(PI**3)


def test_affine_translation():
    t = np.array([0.8, -0.3, 0.5])
    centered = verify_affine_bp(3, 2, 1, gauss(3, 2), samples=200_000, seed=5)
    shifted_f = MultiPointFunction((ScaledShift(Gaussian(1, 3), t),) * 2)
    shifted = verify_affine_bp(3, 2, 1, shifted_f, samples=200_000, seed=5)
    assert shifted.closed_form == centered.closed_form
    assert shifted.passed == centered.passed
    assert within(shifted.lhs, centered.closed_form) and within(shifted.rhs, centered.closed_form)


def test_bp_dual_matches_bp():
    G = gauss(3, 1)
    dual = verify_bp_dual(3, 2, 1, G, samples=200_000, seed=6)
    direct = verify_bp(3, 2, 1, G, samples=200_000, seed=6)
    assert dual.passed == direct.passed
    assert dual.closed_form == pytest.approx(PI**1.5 / bp_constant(3, 2, 1))
    same = verify_bp_dual(3, 3, 2, gauss(3, 2), samples=20_000, seed=6)
    assert same.passed and same.lhs.mean == pytest.approx(same.rhs.mean, rel=1e-9)


def test_affine_dual():
    r = verify_affine_dual(2, 1, 1, gauss(2, 2), samples=200_000, seed=7)
    assert r.passed


def test_multilinear_example():
    r = verify_multilinear(2, 1, 1, [Gaussian(1, 2)] * 2, samples=200_000, seed=8)
    assert r.passed and r.params["path"] == "quadrature"
    assert r.closed_form == pytest.approx(PI * math.sqrt(PI / 2), rel=1e-14)
    assert r.rhs.mean == pytest.approx(PI * math.sqrt(PI / 2), rel=1e-8)


def test_multilinear_permutation_invariance():
    fs = [Gaussian(1.0, 3), Gaussian(2.0, 3)]
    a = verify_multilinear(3, 2, 1, fs, samples=100_000, seed=9)
    b = verify_multilinear(3, 2, 1, fs[::-1], samples=100_000, seed=9)
    assert a.lhs.mean == pytest.approx(b.lhs.mean, rel=1e-12)
    assert a.passed and b.passed


def test_multilinear_rejects_k_equals_n():
    with pytest.raises(InvalidArgumentError):
        verify_multilinear(2, 2, 2, [Gaussian(1, 2)] * 3, samples=1000)


def test_drury_headline():
    r = verify_drury(2, 1, 0, 1.0, samples=200_000, seed=10)
    target = PI * math.sqrt(PI / 2)
    assert r.passed and r.params["path"] == "quadrature"
    assert r.lhs.mean == pytest.approx(target, rel=1e-12)
    assert r.rhs.mean == pytest.approx(target, rel=1e-8)
    assert within(r.extra["lhs_mc"], target)


def test_drury_regularized():
    r = verify_drury(3, 1, 1, 1.0, samples=300_000, seed=11, path="regularized")
    assert r.passed and r.closed_form == pytest.approx(PI**1.5 * PI / 3)


def test_drury_ell_positive_in_plane():
    r = verify_drury(2, 1, 2, 1.0, samples=200_000, seed=12)
    assert r.passed and r.params["path"] == "quadrature"


@pytest.mark.slow
def test_drury_3_1_1_quadrature():
    r = verify_drury(3, 1, 1, 1.0, samples=200_000, seed=11, path="quadrature")
    assert r.passed
    assert r.rhs.mean == pytest.approx(PI**1.5 * PI / 3, rel=1e-6)


def test_drury_domain():
    with pytest.raises(InvalidArgumentError):
        verify_drury(2, 2, 0, 1.0, samples=1000)
    with pytest.raises(InvalidArgumentError):
        verify_drury(2, 1, -1, 1.0, samples=1000)


def test_riesz_examples():
    G2 = gauss(2, 1)
    assert riesz_functional(2, 1, 1.0, G2).mean == pytest.approx(PI**1.5, rel=1e-9)
    assert riesz_functional(3, 1, 2.0, gauss(3, 1)).mean == pytest.approx(2 * PI, rel=1e-9)
    exact = riesz_functional(2, 1, 2.0, G2, samples=10_000)
    assert exact.mean == G2.full_integral() or abs(exact.mean - PI) <= 3 * exact.stderr
    r = verify_riesz(2, 1, 2.0, G2, samples=10_000)
    assert r.passed and r.rhs.mean == G2.full_integral()
    r = verify_riesz(3, 2, 3.5, gauss(3, 2), samples=200_000, seed=1)
    assert r.passed


def test_riesz_domain():
    with pytest.raises(OutOfDomainError):
        riesz_functional(2, 1, 0.0, gauss(2, 1))
    with pytest.raises(OutOfDomainError):
        riesz_functional(3, 2, 0.9, gauss(3, 2))
    # convergent but heavy tailed and no quadrature path
    with pytest.raises(UnsupportedConfigurationError):
        riesz_functional(3, 2, 2.0, gauss(3, 2))


# ---- invariants


@pytest.mark.parametrize("factor", [0.95, 1.05])
def test_constant_sensitivity(factor):
    r = verify_bp(3, 2, 1, gauss(3, 1), samples=1_000_000, seed=13, constant_scale=factor)
    assert not r.passed


def test_scaling_consistency():
    lam = 2.0
    n, k, q = 3, 2, 2
    base = verify_bp(n, k, q, gauss(n, q), samples=100_000, seed=14, scale=0.6)
    scaled = verify_bp(n, k, q, gauss(n, q, a=1 / lam**2), samples=100_000, seed=14,
                       scale=0.6 * lam)
    assert scaled.lhs.mean / base.lhs.mean == pytest.approx(lam ** (n * q), rel=1e-2)
    assert scaled.rhs.mean / base.rhs.mean == pytest.approx(lam ** (n * q), rel=1e-2)


def test_rotation_metamorphic():
    g = ortho_group.rvs(3, random_state=4)
    c0, c1 = np.array([0.5, 0.0, -0.2]), np.array([-0.3, 0.4, 0.1])
    F = MultiPointFunction((ScaledShift(Gaussian(1, 3), c0), ScaledShift(Gaussian(1, 3), c1)))
    Fg = MultiPointFunction((ScaledShift(Gaussian(1, 3), g @ c0),
                             ScaledShift(Gaussian(1, 3), g @ c1)))
    a = verify_affine_bp(3, 2, 1, F, samples=200_000, seed=15)
    b = verify_affine_bp(3, 2, 1, Fg, samples=200_000, seed=16)
    for x, y in ((a.lhs, b.lhs), (a.rhs, b.rhs)):
        assert abs(x.mean - y.mean) <= 4 * math.hypot(x.stderr, y.stderr)


def test_closed_form_coverage_over_seeds():
    hits = 0
    for seed in range(100):
        r = verify_bp(2, 1, 1, ball(2, 1), samples=20_000, seed=seed)
        hits += abs(r.rhs.mean - r.closed_form) <= 3 * r.rhs.stderr
    assert hits >= 99


def test_report_schema():
    r = verify_bp(2, 1, 1, gauss(2, 1), samples=5_000, seed=0)
    d = r.to_dict()
    for key in ("identity", "params", "lhs", "rhs", "closed_form", "z", "pass", "seed",
                "runtime_ms", "version"):
        assert key in d
    for key in ("mean", "stderr", "samples", "rejected"):
        assert key in d["lhs"] and key in d["rhs"]
    assert "runtime_ms" not in r.to_dict(timestamp=False)
