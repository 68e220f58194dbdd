import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st
from mpmath import mp, mpf

from harperdisc.errors import DomainError, NonConvergence
from harperdisc.specfun import (
    arg_gamma_half_plus_iy,
    catalan,
    elliptic_k,
    elliptic_k_complement,
    eta_const,
    euler_gamma,
    gamma_ratio_sq,
    log_gamma,
)


@pytest.mark.parametrize("prec", [53, 128, 512])
@pytest.mark.parametrize("x", ["0.001", "0.5", "1", "3.7", "25", "1e5"])
def test_log_gamma_matches_mpmath(prec, x):
    with mp.workprec(prec + 20):
        ref = mpmath.loggamma(mpf(x))
    val = log_gamma(x, prec)
    with mp.workprec(prec):
        assert abs(val - ref) <= mpf(2) ** (-prec + 4) * max(1, abs(ref))


def test_log_gamma_domain():
    for bad in (0, -1, "-0.5"):
        with pytest.raises(DomainError):
            log_gamma(bad, 64)


def test_gamma_ratio_sq_special_values():
    with mp.workprec(128):
        assert abs(gamma_ratio_sq(1, mpf(1) / 2, 128) - 1 / mpmath.pi) < mpf(2) ** -120
        # negative non-integer argument through reflection
        ref = (mpmath.gamma(mpf(-3) / 4) / mpmath.gamma(mpf(-1) / 4)) ** 2
        assert abs(gamma_ratio_sq(mpf(-3) / 4, mpf(-1) / 4, 128) - ref) < mpf(2) ** -115 * ref
    with pytest.raises(DomainError):
        gamma_ratio_sq(-2, mpf(1) / 2, 64)


@given(st.floats(min_value=-30, max_value=30, allow_nan=False))
def test_arg_gamma_matches_mpmath_continuous_branch(y):
    with mp.workprec(100):
        val = arg_gamma_half_plus_iy(y, 100)
        ref = mpmath.loggamma(mpmath.mpc(0.5, y)).imag  # loggamma is the continuous branch
        assert abs(val - ref) < mpf(2) ** -90 * (1 + abs(ref))
        assert abs(val + arg_gamma_half_plus_iy(-y, 100)) < mpf(2) ** -90 * (1 + abs(ref))


@pytest.mark.parametrize("k", ["0", "0.3", "0.9", "0.999999"])
def test_elliptic_k_modulus_convention(k):
    with mp.workprec(128):
        ref = mpmath.ellipk(mpf(k) ** 2)
        assert abs(elliptic_k(k, 128) - ref) < mpf(2) ** -118 * ref
    with pytest.raises(DomainError):
        elliptic_k(1, 64)


@given(st.floats(min_value=1e-12, max_value=1.0, exclude_min=False))
def test_elliptic_k_complement(lam):
    with mp.workprec(300):
        ref = mpmath.ellipk(1 - mpf(lam) ** 2)  # extra bits: 1 - lam^2 cancels for small lam
    with mp.workprec(100):
        assert abs(elliptic_k_complement(lam, 100) - ref) < mpf(2) ** -85 * ref


def test_constants():
    for prec in (64, 256, 1024):
        with mp.workprec(prec):
            assert abs(catalan(prec) - mpmath.catalan) < mpf(2) ** (-prec + 3)
            assert abs(euler_gamma(prec) - mpmath.euler) < mpf(2) ** (-prec + 3)


def test_eta_zero_closed_form():
    with mp.workprec(128):
        e = eta_const(0, mpf("1e-30"), prec=128)
        assert abs(e.value - (mpmath.log(16) + mpmath.euler - mpmath.pi)) < mpf("1e-30")
        assert e.tail_error_bound <= mpf("1e-30")


def _eta_brute(b, M):
    # partial sum with Richardson extrapolation in 1/M from two cutoffs
    def partial(m):
        return mpmath.fsum(
            (mpmath.gamma(k + b + mpf(1) / 2) / mpmath.gamma(k + b + 1)) ** 2 for k in range(1, m + 1)
        ) - mpmath.log(m)

    return 2 * partial(2 * M) - partial(M)


@pytest.mark.parametrize("b", ["-0.25", "0.5", "1", "-1.25", "-1.75"])
def test_eta_against_brute_force(b):
    with mp.workprec(80):
        b = mpf(b)
        ref = _eta_brute(b, 4000)
        assert abs(eta_const(b, mpf("1e-20"), prec=80).value - ref) < mpf("1e-6")


def test_eta_agrees_with_mpmath_sum():
    with mp.workprec(80):
        b = mpf(1) / 3
        ref = mpmath.nsum(
            lambda k: (mpmath.gamma(k + b + mpf(1) / 2) / mpmath.gamma(k + b + 1)) ** 2 - 1 / k, [1, mpmath.inf]
        ) + mpmath.euler
        assert abs(eta_const(b, mpf("1e-20"), prec=80).value - ref) < mpf("1e-15")


def test_eta_domain_and_resolution():
    with pytest.raises(DomainError):
        eta_const(mpf(-3) / 2)
    with pytest.raises(DomainError):
        eta_const(-3)
    with pytest.raises(NonConvergence):
        eta_const(0, mpf("1e-40"), prec=64)
