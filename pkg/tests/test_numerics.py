import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st
from mpmath import mp, mpf

from harperdisc.errors import DomainError, NoBracket, NonConvergence
from harperdisc.numerics import (
    EndpointRule,
    QuadratureSpec,
    big,
    bracket_root,
    check_precision,
    find_root,
    gauss_legendre,
    integrate,
    precision,
    working_precision,
)


def test_precision_rules():
    assert working_precision(3) == 128
    assert working_precision(301) == 1204
    with pytest.raises(DomainError):
        check_precision(52)
    with precision(200):
        assert mp.prec == 200


def test_big_parses_at_full_precision():
    x = big("0.1", 256)
    with mp.workprec(256):
        assert abs(x * 10 - 1) < mpf(2) ** -250


def test_gauss_legendre_integrates_polynomials_exactly():
    nodes, weights = gauss_legendre(10, 128)
    with mp.workprec(128):
        assert abs(mpmath.fsum(weights) - 2) < mpf(2) ** -120
        # degree 19 is the highest exact degree for 10 points
        val = mpmath.fsum(w * x ** 18 for x, w in zip(nodes, weights))
        assert abs(val - mpf(2) / 19) < mpf(2) ** -115


def test_integrate_smooth():
    val = integrate(mpmath.exp, 0, 1, QuadratureSpec(abs_tol=mpf("1e-30")), prec=128)
    with mp.workprec(128):
        assert abs(val - (mpmath.e - 1)) < mpf("1e-29")


def test_integrate_inverse_sqrt_endpoint():
    spec = QuadratureSpec(abs_tol=mpf("1e-25"), endpoint_rule=EndpointRule.sqrt_singularity)
    val = integrate(lambda t: 1 / mpmath.sqrt(t), 0, 1, spec, prec=128)
    assert abs(val - 2) < mpf("1e-24")


def test_integrate_catalan_integral():
    # int_0^1 K(k) dk = 2G with a log singularity at k = 1
    spec = QuadratureSpec(abs_tol=mpf("1e-18"), endpoint_rule=EndpointRule.sqrt_singularity)
    val = integrate(lambda k: mpmath.ellipk(k * k), 0, 1, spec, prec=128)
    with mp.workprec(128):
        assert abs(val - 2 * mpmath.catalan) < mpf("1e-15")


def test_integrate_rejects_bad_interval_and_budget():
    with pytest.raises(DomainError):
        integrate(lambda t: t, 1, 0)
    spec = QuadratureSpec(abs_tol=mpf("1e-30"), max_subdivisions=2, order=4)
    with pytest.raises(NonConvergence):
        integrate(lambda t: mpmath.sqrt(abs(t - mpf(1) / 3)), 0, 1, spec, prec=128)


def test_bracket_root_sqrt2():
    with mp.workprec(200):
        lo, hi = bracket_root(lambda x: x * x - 2, 0, 2, mpf(2) ** -180)
        assert hi - lo <= mpf(2) ** -180
        assert lo <= mpmath.sqrt(2) <= hi


def test_bracket_root_newton_and_no_bracket():
    with mp.workprec(128):
        lo, hi = bracket_root(lambda x: (mpmath.cos(x) - x, -mpmath.sin(x) - 1), 0, 1, mpf(2) ** -100, newton=True)
        assert (mpmath.cos(lo) - lo) * (mpmath.cos(hi) - hi) <= 0
        with pytest.raises(NoBracket):
            bracket_root(lambda x: x * x + 1, -1, 1, mpf("1e-10"))


def test_bracket_root_exact_zero():
    assert bracket_root(lambda x: x, -1, 1, mpf("1e-10"), prec=64) == (0, 0)


@given(st.floats(min_value=-50, max_value=50, allow_nan=False), st.integers(min_value=1, max_value=7))
def test_find_root_encloses_cubic_root(c, k):
    # x^3 + k x - c is strictly increasing, one real root
    with mp.workprec(96):
        f = lambda x: x ** 3 + k * x - c  # noqa: E731
        tol = mpf(2) ** -80
        lo, hi = bracket_root(f, -10, 10, tol)
        assert hi - lo <= tol
        assert f(lo) * f(hi) <= 0
        x = find_root(f, -10, 10, tol)
        assert lo - tol <= x <= hi + tol
