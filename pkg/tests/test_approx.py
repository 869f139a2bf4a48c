import json
import math

import mpmath
import numpy as np
import pytest
from numpy.polynomial import chebyshev as cheb

from qgfa.approx import (
    SAFETY_MARGIN, ChebyshevFit, Kind, TargetFunction, chebyshev_fit, eval_target, interpolate,
    qmia_degree, sup_norm_estimate,
)
from qgfa.errors import ParameterError
from qgfa.softabs import soft_abs, solve_epsilon_pair

from oracles import cheb_project

KAPPA_C = 37.018
T_C = 10 * KAPPA_C


@pytest.fixture(scope="module")
def eps_c():
    return solve_epsilon_pair(KAPPA_C, T_C, 1e-6)


def mp_g1(x, t, eps):
    with mpmath.workdps(40):
        x, t, eps = map(mpmath.mpf, (x, t, eps))
        return float(mpmath.exp(-eps * mpmath.log(2 * mpmath.cosh(x / eps)) * t))


def mp_g2(x, t, eps):
    with mpmath.workdps(40):
        x, t, eps = map(mpmath.mpf, (x, t, eps))
        y = eps * mpmath.log(2 * mpmath.cosh(x / eps)) * t
        return float(-mpmath.expm1(-y) / y)


def mp_ginv(x, kappa, e):
    with mpmath.workdps(40):
        x = mpmath.mpf(x)
        b = mpmath.mpf(kappa) ** 2 * mpmath.log(mpmath.mpf(kappa) / e)
        return float((1 - (1 - x * x) ** b) / x)


@pytest.mark.parametrize("x", [0.0, 1e-3, 0.01, 0.3, 1.0, -0.2])
def test_targets_vs_mpmath(x, eps_c):
    assert eval_target(TargetFunction.g1(T_C, eps_c), x) == pytest.approx(mp_g1(x, T_C, eps_c), rel=1e-12)
    assert eval_target(TargetFunction.g2tilde(T_C, eps_c), x) == pytest.approx(mp_g2(x, T_C, eps_c), rel=1e-12)
    if x != 0:
        assert eval_target(TargetFunction.ginv(KAPPA_C, 1e-3), x) == pytest.approx(
            mp_ginv(x, KAPPA_C, 1e-3), rel=1e-10)


def test_target_special_values(eps_c):
    y = 50 * 1e-3 * math.log(2)
    assert eval_target(TargetFunction.g2tilde(50.0, 1e-3), 0.0) == pytest.approx(-math.expm1(-y) / y, rel=1e-14)
    assert eval_target(TargetFunction.g2tilde(1e-3, 1e-3), 0.0) == pytest.approx(1.0, abs=1e-6)
    assert eval_target(TargetFunction.g1(T_C, eps_c), 0.0) == pytest.approx(
        math.exp(-eps_c * T_C * math.log(2)), rel=1e-14)
    assert eval_target(TargetFunction.ginv(KAPPA_C, 1e-3), 0.0) == 0.0


def test_g1_g2_identity(eps_c):
    x = np.linspace(-1, 1, 2001)
    st = soft_abs(x, eps_c) * T_C
    g1 = eval_target(TargetFunction.g1(T_C, eps_c), x)
    g2 = eval_target(TargetFunction.g2tilde(T_C, eps_c), x)
    np.testing.assert_allclose(1 - g1, st * g2, rtol=1e-13)


def test_target_ranges_and_parity(eps_c):
    x = np.linspace(0, 1, 1001)
    for f in (TargetFunction.g1(T_C, eps_c), TargetFunction.g2tilde(T_C, eps_c)):
        v = eval_target(f, x)
        assert np.all((v > 0) & (v <= 1))
        np.testing.assert_array_equal(eval_target(f, -x), v)
    ginv = TargetFunction.ginv(KAPPA_C, 1e-3)
    np.testing.assert_array_equal(eval_target(ginv, -x), -eval_target(ginv, x))
    assert ginv.parity == 1 and TargetFunction.g1(1, 1).parity == 0


def test_eval_target_domain_check():
    with pytest.raises(ParameterError):
        eval_target(TargetFunction.g1(1.0, 0.1), 1.5)


@pytest.mark.parametrize("kw", [dict(kind="g1", t=1.0), dict(kind="g1", t=-1.0, epsilon_smooth=0.1),
                                dict(kind="ginv", kappa=0.5, epsilon_apx=0.1), dict(kind="ginv", kappa=5),
                                dict(kind="const", value=2.0), dict(kind="nope")])
def test_target_validation(kw):
    with pytest.raises((ParameterError, ValueError)):
        TargetFunction(**kw)


def test_qmia_degree_direct_formula():
    for kappa, e in ((37.018, 1e-3), (32.1366, 0.1), (2.0, 0.5)):
        b = kappa**2 * math.log(kappa / e)
        assert qmia_degree(kappa, e) == math.ceil(math.sqrt(b * math.log(4 * b / e)))
    assert qmia_degree(37.018, 1e-3) == 508
    assert qmia_degree(2 * 10.0, 1e-3) > qmia_degree(10.0, 1e-3)
    assert qmia_degree(10.0, 1e-4) > qmia_degree(10.0, 1e-3)
    with pytest.raises(ParameterError):
        qmia_degree(0.5, 1e-3)
    with pytest.raises(ParameterError):
        qmia_degree(5.0, 1.0)


def test_interpolation_reproduces_polynomials():
    c = np.array([0.3, 0.0, -0.2, 0.0, 0.1])
    np.testing.assert_allclose(interpolate(lambda x: cheb.chebval(x, c), 5), c, atol=1e-15)


def test_constant_fit():
    fit = chebyshev_fit(TargetFunction.constant(1.0), 6)
    np.testing.assert_allclose(fit.coefficients, [1 - SAFETY_MARGIN] + [0] * 6, atol=1e-15)
    assert fit.safety == pytest.approx(1 - SAFETY_MARGIN, rel=1e-14)
    assert fit.sup_error <= 1e-14


def test_fit_against_independent_projection(eps_c):
    f = TargetFunction.g2tilde(2.0, 0.3)
    fit = chebyshev_fit(f, 60)
    ref = cheb_project(lambda x: eval_target(f, x), 60)
    ref[1::2] = 0
    # interpolation and projection differ only by aliasing of the (tiny) tail
    np.testing.assert_allclose(fit.coefficients / fit.safety, ref, atol=1e-12)


def test_parity_and_bound(eps_c):
    for f, deg in ((TargetFunction.g1(T_C, eps_c), 200), (TargetFunction.g2tilde(T_C, eps_c), 201),
                   (TargetFunction.ginv(KAPPA_C, 1e-3), 200)):
        fit = chebyshev_fit(f, deg)
        assert fit.degree % 2 == f.parity and fit.degree in (deg, deg - 1)
        assert np.all(fit.coefficients[1 - f.parity::2] == 0)
        x = np.linspace(-1, 1, 200_001)
        np.testing.assert_array_equal(fit(x), (-1) ** f.parity * fit(-x))
        assert np.max(np.abs(fit(x))) <= 1 - SAFETY_MARGIN + 1e-12
        k = np.arange(4 * fit.degree)
        nodes = np.cos(np.pi * (k + 0.5) / len(k))
        assert np.max(np.abs(fit(nodes))) <= 1 - SAFETY_MARGIN + 1e-12


def test_sup_norm_estimate_finds_narrow_peaks():
    # T_200 has extrema between any coarse grid points; the estimate must still find 1
    c = np.zeros(201)
    c[200] = 1.0
    assert sup_norm_estimate(c, 200) == pytest.approx(1.0, abs=1e-12)


def test_clenshaw_matches_direct_sum(eps_c):
    fit = chebyshev_fit(TargetFunction.g1(T_C, eps_c), 120)
    x = np.linspace(-1, 1, 101)
    direct = sum(c * np.cos(k * np.arccos(x)) for k, c in enumerate(fit.coefficients))
    np.testing.assert_allclose(fit(x), direct, atol=1e-12)


def test_sup_error_definition(eps_c):
    f = TargetFunction.g2tilde(T_C, eps_c)
    fit = chebyshev_fit(f, 100)
    x = np.linspace(0, 1, 1001)
    assert fit.sup_error == pytest.approx(np.max(np.abs(fit.unscaled(x) - eval_target(f, x))), rel=1e-10)


def test_convergence_when_degree_doubles(eps_c):
    for ctor in (TargetFunction.g1, TargetFunction.g2tilde):
        errs = [chebyshev_fit(ctor(T_C, eps_c), d).sup_error for d in (100, 200, 400, 800, 1600)]
        assert all(b <= a for a, b in zip(errs, errs[1:]))


def test_reference_g2tilde_error_at_1600(eps_c):
    fit = chebyshev_fit(TargetFunction.g2tilde(T_C, eps_c), 1599)
    assert fit.sup_error < 1e-6, f"G2tilde sup error {fit.sup_error:.3e} at degree {fit.degree}"


def test_reference_g1_error_order_at_1600(eps_c):
    fit = chebyshev_fit(TargetFunction.g1(T_C, eps_c), 1599)
    assert 1e-3 <= fit.sup_error <= 1e-1, f"G1 sup error {fit.sup_error:.3e} at degree {fit.degree}"


def test_ginv_error_near_small_x():
    f = TargetFunction.ginv(KAPPA_C, 1e-3)
    fit = chebyshev_fit(f, 1599)
    x = np.linspace(1 / KAPPA_C, 1, 5000)
    err = np.abs(fit.unscaled(x) - eval_target(f, x))
    assert x[np.argmax(err)] <= 2 / KAPPA_C
    assert np.max(err[x > 0.5]) <= 1e-8


def test_fit_errors():
    with pytest.raises(ParameterError):
        chebyshev_fit(TargetFunction.g1(1, 0.1), -1)
    with pytest.raises(ParameterError):
        chebyshev_fit(TargetFunction.ginv(5, 0.1), 0)
    with pytest.raises(ParameterError):
        chebyshev_fit(TargetFunction.g1(1, 0.1), 10, grid_size=5)


def test_json_roundtrip(eps_c):
    fit = chebyshev_fit(TargetFunction.g1(T_C, eps_c), 40)
    again = ChebyshevFit.from_json(json.loads(json.dumps(fit.to_json())))
    np.testing.assert_array_equal(again.coefficients, fit.coefficients)
    assert again.target == fit.target and again.target.kind is Kind.G1
    assert (again.safety, again.sup_error, again.degree) == (fit.safety, fit.sup_error, fit.degree)
