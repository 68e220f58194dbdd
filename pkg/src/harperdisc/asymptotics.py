"""Large-Q asymptotics: A_k blocks, Sigma'(0), the two uniform regimes of Sigma, DOS, bandwidths.

Asymptotic formulas carry o(1) errors, so they are evaluated at a fixed
moderate precision (``ASYM_PRECISION`` bits) regardless of the precision of
the exact model they are compared with.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import gcd

import mpmath
from mpmath import mp, mpf

from .errors import DomainError, SingularityError
from .exactdisc import FluxRatio, _require_decomposition, sigma_prime_zero_exact
from .numerics import EndpointRule, QuadratureSpec, integrate
from .specfun import (
    arg_gamma_half_plus_iy,
    catalan,
    elliptic_k_complement,
    eta_const,
    gamma_ratio_sq,
)

ASYM_PRECISION = 128


@dataclass(frozen=True)
class AsymptoticReport:
    flux: FluxRatio
    exact: mpf
    asymptotic: mpf
    abs_error: mpf
    rel_error: mpf


@dataclass(frozen=True)
class MuNu:
    lam: mpf
    mu: mpf
    nu: mpf


def _prec(flux: FluxRatio | None = None) -> int:
    if flux is None:
        return ASYM_PRECISION
    return min(flux.precision_bits, ASYM_PRECISION)


# -- A_k blocks -----------------------------------------------------------------------


def approx_A_even(flux: FluxRatio, k: int) -> mpf:
    """2 gamma Gamma^2(1 - ks/2P) / Gamma^2(1/2 - ks/2P), the large-r limit of A_{2k}."""
    _require_decomposition(flux)
    with mp.workprec(_prec(flux) + 10):
        x = mpf(k * flux.s) / (2 * flux.P)
        val = 2 * flux.gamma * gamma_ratio_sq(1 - x, mpf(1) / 2 - x)
    with mp.workprec(_prec(flux)):
        return +val


def approx_A_odd(flux: FluxRatio, k: int) -> mpf:
    """(1/2 gamma) Gamma^2(ks/2P) / Gamma^2(1/2 + ks/2P), the large-r limit of A_{2k-1}."""
    _require_decomposition(flux)
    if k < 1:
        raise DomainError(f"approx_A_odd needs k >= 1, got {k}")
    with mp.workprec(_prec(flux) + 10):
        x = mpf(k * flux.s) / (2 * flux.P)
        val = gamma_ratio_sq(x, mpf(1) / 2 + x) / (2 * flux.gamma)
    with mp.workprec(_prec(flux)):
        return +val


# -- Sigma'(0) --------------------------------------------------------------------------


@lru_cache(maxsize=512)
def _eta(b_num: int, b_den: int, prec: int) -> mpf:
    with mp.workprec(prec):
        return eta_const(mpf(b_num) / b_den, prec=prec).value


def _eta_frac(num: int, den: int, prec: int) -> mpf:
    g = gcd(num, den) or 1
    return _eta(num // g, den // g, prec)


def leading_cot_products(P: int, s: int, prec: int = ASYM_PRECISION) -> list:
    """prod_{i<=t} cot^2(pi s i / 2P) for t = 0..P-1: the weights of the ln Q terms."""
    with mp.workprec(prec):
        out = [mpf(1)]
        for i in range(1, P):
            out.append(out[-1] * mpmath.cot(mpmath.pi * s * i / (2 * P)) ** 2)
        return out


def sigma_prime_zero_asym(flux: FluxRatio) -> mpf:
    """Large-Q expansion of Sigma'(0) for fixed P along Q = 4Pr + s (error o(1))."""
    _require_decomposition(flux)
    P, Q, s = flux.P, flux.Q, flux.s
    prec = _prec(flux)
    with mp.workprec(prec + 10):
        half = mpf(1) / 2
        log_term = 2 * mpmath.log(mpf(Q) / (mpmath.pi * P))
        weights = leading_cot_products(P, s, prec + 10)
        total = []
        for t in range(P):
            # eta arguments -st/2P and (s-1)/2 - st/2P as exact fractions over 2P
            try:
                e1 = _eta_frac(-s * t, 2 * P, prec + 10)
                e2 = _eta_frac((s - 1) * P - s * t, 2 * P, prec + 10)
                g = gamma_ratio_sq(mpf(s) / 2 - mpf(s * t) / (2 * P), mpf(s + 1) / 2 - mpf(s * t) / (2 * P))
            except DomainError as exc:
                raise DomainError(f"asymptotic term undefined at P={P}, s={s}, t={t}: {exc}") from exc
            total.append(weights[t] * (log_term + e1 + e2 + g))
        central = mpmath.fsum(gamma_ratio_sq(m - half, m) for m in range(1, (s - 1) // 2 + 1))
        val = (-1) ** ((Q - 1) // 2) * Q * (mpmath.fsum(total) / mpmath.pi + 1 + central / mpmath.pi)
    with mp.workprec(prec):
        return +val


def sigma_prime_zero_asym_p1(Q: int) -> mpf:
    """(2/pi)(-1)^((Q-1)/2) Q (ln(Q/pi) + eta(0) + pi), the P = 1 case."""
    if Q % 2 == 0:
        raise DomainError(f"Q must be odd, got {Q}")
    prec = ASYM_PRECISION
    with mp.workprec(prec + 10):
        val = 2 / mpmath.pi * (-1) ** ((Q - 1) // 2) * Q * (
            mpmath.log(mpf(Q) / mpmath.pi) + _eta(0, 1, prec + 10) + mpmath.pi
        )
    with mp.workprec(prec):
        return +val


def sigma_prime_zero_report(flux: FluxRatio) -> AsymptoticReport:
    """Exact vs asymptotic Sigma'(0) with absolute and relative errors."""
    exact = sigma_prime_zero_exact(flux)
    asym = sigma_prime_zero_asym(flux)
    with mp.workprec(_prec(flux)):
        err = abs(exact - asym)
        return AsymptoticReport(flux, exact, asym, err, err / max(1, abs(exact)))


# -- uniform regimes of Sigma(x), P = 1 -------------------------------------------------


def uniform_center(Q: int, x) -> mpf:
    """Sigma(x) for |x| << 1 (P = 1): 4 cosh(lQ) cos((2lQ/pi) ln(4Q/pi) - 2 arg Gamma(1/2 + ilQ/pi) - pi Q/2)."""
    with mp.workprec(ASYM_PRECISION + 10):
        lam = mpf(x) / 4
        y = lam * Q / mpmath.pi
        phase = 2 * lam * Q / mpmath.pi * mpmath.log(4 * mpf(Q) / mpmath.pi)
        phase -= 2 * arg_gamma_half_plus_iy(y, ASYM_PRECISION + 10)
        phase -= mpmath.pi * Q / 2
        val = 4 * mpmath.cosh(lam * Q) * mpmath.cos(phase)
    with mp.workprec(ASYM_PRECISION):
        return +val


def _quad_spec(prec: int) -> QuadratureSpec:
    return QuadratureSpec(
        abs_tol=mpf(2) ** (-prec + 20), endpoint_rule=EndpointRule.sqrt_singularity, max_subdivisions=4000
    )


def mu_nu(lam, prec: int | None = None) -> MuNu:
    """mu = int_{t0}^{1/2} arccosh(2l - cos 2pi t) dt and nu = int_0^{t0} arccos(2l - cos 2pi t) dt.

    t0 = arccos(2l - 1) / 2pi is where the argument crosses 1; both
    integrands have square-root behaviour there, so each piece is integrated
    with the sqrt-endpoint substitution.
    """
    prec = prec or ASYM_PRECISION
    with mp.workprec(prec + 10):
        lam = mpf(lam)
        if not 0 < lam < 1:
            raise DomainError(f"lambda must lie in (0, 1), got {lam}")
        t0 = mpmath.acos(2 * lam - 1) / (2 * mpmath.pi)
        spec = _quad_spec(prec)

        def f_mu(t):
            return mpmath.acosh(max(mpf(1), 2 * lam - mpmath.cospi(2 * t)))

        def f_nu(t):
            return mpmath.acos(min(mpf(1), 2 * lam - mpmath.cospi(2 * t)))

        mu = integrate(f_mu, t0, mpf(1) / 2, spec, prec + 10)
        nu = integrate(f_nu, mpf(0), t0, spec, prec + 10)
    with mp.workprec(prec):
        return MuNu(+lam, +mu, +nu)


def uniform_away(Q: int, x) -> mpf:
    """Sigma(x) ~ 2 exp(2 Q mu) cos(2 Q nu) for xQ >> 1 (P = 1), lambda = |x|/4."""
    with mp.workprec(ASYM_PRECISION + 10):
        x = mpf(x)
        if not 0 < abs(x) < 4:
            raise DomainError(f"uniform_away needs 0 < |x| < 4, got {x}")
        mn = mu_nu(abs(x) / 4)
        val = 2 * mpmath.exp(2 * Q * mn.mu) * mpmath.cos(2 * Q * mn.nu)
        if x < 0 and Q % 2:
            val = -val
    with mp.workprec(ASYM_PRECISION):
        return +val


# -- density of states and bandwidths -------------------------------------------------


def dos(x, prec: int | None = None) -> mpf:
    """Limiting density of band centres, K'(|x|/4) / 2pi^2; it integrates to 1 over (-4, 4)."""
    prec = prec or ASYM_PRECISION
    with mp.workprec(prec + 10):
        x = mpf(x)
        if abs(x) >= 4:
            raise DomainError(f"dos is supported on |x| < 4, got {x}")
        if x == 0:
            raise SingularityError("dos has a logarithmic singularity at x = 0")
        val = elliptic_k_complement(abs(x) / 4, prec + 10) / (2 * mpmath.pi ** 2)
    with mp.workprec(prec):
        return +val


def central_band_width_asym(Q: int, t) -> mpf:
    """Width of the bands near lambda Q = t: (4 pi / (Q ln Q)) arcsin(sech t)."""
    if Q < 3:
        raise DomainError(f"Q must be >= 3, got {Q}")
    with mp.workprec(ASYM_PRECISION):
        t = abs(mpf(t))
        return 4 * mpmath.pi / (Q * mpmath.log(Q)) * mpmath.asin(mpmath.sech(t))


def thouless_w(Q: int) -> mpf:
    """Total bandwidth 32 beta(2) / (pi Q), beta(2) = Catalan's constant."""
    if Q < 3:
        raise DomainError(f"Q must be >= 3, got {Q}")
    with mp.workprec(ASYM_PRECISION):
        return 32 * catalan(ASYM_PRECISION) / (mpmath.pi * Q)


def arcsin_sech_integral(d, tol=mpf("1e-25")) -> tuple:
    """int_0^inf arcsin(sech t)^d dt on [0, T] plus the bound pi^d e^(-dT) / d on the tail.

    arcsin(sech t) <= (pi/2) sech t <= pi e^(-t) gives the bound. Returns
    (value, tail_bound).
    """
    with mp.workprec(ASYM_PRECISION + 10):
        d = mpf(d)
        if not 0 < d <= 1:
            raise DomainError(f"d must lie in (0, 1], got {d}")
        tol = mpf(tol)
        # pi^d e^{-dT} / d <= tol / 2
        T = mpmath.ceil((d * mpmath.log(mpmath.pi) - mpmath.log(d * tol / 2)) / d)
        spec = QuadratureSpec(abs_tol=tol / 4, max_subdivisions=4000)

        def f(t):
            return mpmath.asin(mpmath.sech(t)) ** d

        cuts = [mpf(0), mpf(1), mpf(4), mpf(16)]
        cuts = [c for c in cuts if c < T] + [T]
        val = mpmath.fsum(integrate(f, a, b, spec) for a, b in zip(cuts, cuts[1:]))
        bound = mpmath.pi ** d * mpmath.exp(-d * T) / d
    with mp.workprec(ASYM_PRECISION):
        return +val, +bound


def w_d_asym(Q: int, d) -> mpf:
    """W(d) ~ 4^(1+d) / (pi^(2-d) Q^d ln^(d-1) Q) int_0^inf arcsin^d(sech t) dt."""
    if Q < 3:
        raise DomainError(f"Q must be >= 3, got {Q}")
    integral, _ = arcsin_sech_integral(d)
    with mp.workprec(ASYM_PRECISION):
        d = mpf(d)
        lnQ = mpmath.log(Q)
        return 4 ** (1 + d) / (mpmath.pi ** (2 - d) * mpf(Q) ** d * lnQ ** (d - 1)) * integral
