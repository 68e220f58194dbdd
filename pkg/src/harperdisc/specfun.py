"""Special functions for the asymptotic formulas.

log-gamma and friends are computed here directly (shift + Stirling series)
rather than delegated, so the precision contract is explicit; mpmath supplies
only elementary functions and Bernoulli numbers.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import mpmath
from mpmath import mp, mpf

from .errors import DomainError, NonConvergence
from .numerics import check_precision, precision


@lru_cache(maxsize=None)
def _bernoulli_table(n_terms: int, prec: int):
    # B_2k / (2k (2k - 1)) for the Stirling series
    with mp.workprec(prec + 10):
        return tuple(mpmath.bernoulli(2 * k) / (2 * k * (2 * k - 1)) for k in range(1, n_terms + 1))


def _stirling_params(prec: int):
    # shift the argument to >= x0 so the smallest series term is below 2^-prec
    x0 = max(20, int(0.12 * prec) + 1)
    n_terms = max(8, int(3.2 * x0))
    return x0, n_terms


def _stirling_tail(z, prec):
    """sum_k B_2k / (2k(2k-1) z^(2k-1)); z real or complex with |z| large."""
    _, n_terms = _stirling_params(prec)
    coeffs = _bernoulli_table(n_terms, prec)
    eps = mpf(2) ** (-prec - 4)
    inv = 1 / z
    inv2 = inv * inv
    power = inv
    total = 0
    last = None
    for c in coeffs:
        term = c * power
        mag = abs(term)
        if last is not None and mag > last:
            break  # asymptotic series started to diverge
        total += term
        if mag < eps * abs(z):
            break
        last = mag
        power *= inv2
    return total


def log_gamma(x, prec=None) -> mpf:
    """ln Gamma(x) for real x > 0."""
    prec = check_precision(prec if prec is not None else mp.prec)
    with mp.workprec(prec + 20):
        x = mpf(x)
        if not x > 0:
            raise DomainError(f"log_gamma requires x > 0, got {x}")
        x0, _ = _stirling_params(prec)
        shift = mpf(1)
        z = x
        while z < x0:
            shift *= z
            z += 1
        half_log_2pi = mpmath.log(2 * mpmath.pi) / 2
        val = (z - mpf(1) / 2) * mpmath.log(z) - z + half_log_2pi + _stirling_tail(z, prec)
        val -= mpmath.log(shift)
    with mp.workprec(prec):
        return +val


def _log_abs_gamma(x, prec):
    """ln|Gamma(x)| for real x that is not a nonpositive integer (reflection for x < 1/2)."""
    with mp.workprec(prec + 20):
        x = mpf(x)
        if x <= 0 and x == mpmath.floor(x):
            raise DomainError(f"Gamma has a pole at {x}")
        if x > 0:
            return log_gamma(x, prec + 20)
        # Gamma(x) Gamma(1 - x) = pi / sin(pi x)
        return mpmath.log(mpmath.pi) - mpmath.log(abs(mpmath.sinpi(x))) - log_gamma(1 - x, prec + 20)


def gamma_ratio_sq(a, b, prec=None) -> mpf:
    """Gamma(a)^2 / Gamma(b)^2.

    Negative non-integer arguments are accepted through the reflection
    formula (the asymptotic formulas evaluate Gamma at arguments such as
    1 - k s / 2P that can drop below zero); a pole at either argument raises
    DomainError.
    """
    prec = check_precision(prec if prec is not None else mp.prec)
    with mp.workprec(prec + 20):
        a, b = mpf(a), mpf(b)
        val = mpmath.exp(2 * (_log_abs_gamma(a, prec) - _log_abs_gamma(b, prec)))
    with mp.workprec(prec):
        return +val


def arg_gamma_half_plus_iy(y, prec=None) -> mpf:
    """Continuous branch of arg Gamma(1/2 + i y), zero at y = 0 and odd in y."""
    prec = check_precision(prec if prec is not None else mp.prec)
    with mp.workprec(prec + 20):
        y = mpf(y)
        if y == 0:
            return mpf(0)
        if y < 0:
            val = -arg_gamma_half_plus_iy(-y, prec + 20)
        else:
            x0, _ = _stirling_params(prec)
            # arg Gamma(z) = arg Gamma(z + n) - sum_k arg(z + k); each z + k has Re > 0
            n = max(0, int(mpmath.ceil(x0 - y)))
            shift_arg = mpmath.fsum(mpmath.atan2(y, mpf(1) / 2 + k) for k in range(n))
            z = mpmath.mpc(mpf(1) / 2 + n, y)
            logg = (z - mpf(1) / 2) * mpmath.log(z) - z + _stirling_tail(z, prec)
            val = logg.imag - shift_arg
    with mp.workprec(prec):
        return +val


def elliptic_k(k, prec=None) -> mpf:
    """Complete elliptic integral K(k) = int_0^{pi/2} (1 - k^2 sin^2 u)^(-1/2) du.

    Takes the modulus k, not the parameter m = k^2. Evaluated with the
    arithmetic-geometric mean, K(k) = pi / (2 AGM(1, sqrt(1 - k^2))).
    """
    prec = check_precision(prec if prec is not None else mp.prec)
    with mp.workprec(prec + 20):
        k = mpf(k)
        if k < 0 or k >= 1:
            raise DomainError(f"elliptic_k requires modulus in [0, 1), got {k}")
        a, b = mpf(1), mpmath.sqrt(1 - k * k)
        eps = mpf(2) ** (-prec - 10)
        while abs(a - b) > eps * a:
            a, b = (a + b) / 2, mpmath.sqrt(a * b)
        val = mpmath.pi / (a + b)
    with mp.workprec(prec):
        return +val


def elliptic_k_complement(lam, prec=None) -> mpf:
    """K'(lambda) = K(sqrt(1 - lambda^2)) for 0 < lambda <= 1."""
    prec = check_precision(prec if prec is not None else mp.prec)
    with mp.workprec(prec + 20):
        lam = mpf(lam)
        if not 0 < lam <= 1:
            raise DomainError(f"K' requires 0 < lambda <= 1, got {lam}")
        # AGM form avoids the cancellation in sqrt(1 - lambda^2) near lambda = 0
        a, b = mpf(1), lam
        eps = mpf(2) ** (-prec - 10)
        while abs(a - b) > eps * a:
            a, b = (a + b) / 2, mpmath.sqrt(a * b)
        val = mpmath.pi / (a + b)
    with mp.workprec(prec):
        return +val


def catalan(prec=None) -> mpf:
    """Catalan's constant beta(2) = sum_k (-1)^k / (2k + 1)^2.

    The alternating series is summed with the Cohen-Rodriguez Villegas-Zagier
    acceleration; n terms give relative error about 5.83^-n.
    """
    return _catalan(check_precision(prec if prec is not None else mp.prec))


@lru_cache(maxsize=32)
def _catalan(prec: int) -> mpf:
    with mp.workprec(prec + 20):
        n = int((prec + 20) * 0.3935) + 2  # log(2)/log(3 + sqrt 8)
        d = (3 + mpmath.sqrt(8)) ** n
        d = (d + 1 / d) / 2
        b, c, s = mpf(-1), -d, mpf(0)
        for k in range(n):
            c = b - c
            s += c / mpf(2 * k + 1) ** 2
            b = b * (k + n) * (k - n) / ((k + mpf(1) / 2) * (k + 1))
        val = s / d
    with mp.workprec(prec):
        return +val


def euler_gamma(prec=None) -> mpf:
    """Euler's constant C = lim (H_M - ln M), Euler-Maclaurin corrected."""
    return _euler_gamma(check_precision(prec if prec is not None else mp.prec))


@lru_cache(maxsize=32)
def _euler_gamma(prec: int) -> mpf:
    with mp.workprec(prec + 20):
        M = max(32, int(0.12 * prec) + 8)
        harmonic = mpmath.fsum(mpf(1) / k for k in range(1, M + 1))
        val = harmonic - mpmath.log(M) - mpf(1) / (2 * M)
        eps = mpf(2) ** (-prec - 10)
        Mp = mpf(M)
        for i in range(1, 4 * M):
            term = mpmath.bernoulli(2 * i) / (2 * i * Mp ** (2 * i))
            val += term
            if abs(term) < eps:
                break
    with mp.workprec(prec):
        return +val


# -- Euler-type constants ---------------------------------------------------------


@dataclass(frozen=True)
class EtaConstant:
    b: mpf
    value: mpf
    tail_error_bound: mpf
    cutoff_M: int


def _check_eta_domain(b):
    # summand Gamma^2(k + b + 1/2) / Gamma^2(k + b + 1) must be finite and nonzero for k >= 1
    for arg in (b + mpf(3) / 2, b + 2):
        if arg <= 0 and arg == mpmath.floor(arg):
            raise DomainError(f"eta(b) undefined at b={b}: Gamma pole in the summand")


def _summand_coefficients(c, n_terms):
    """Coefficients a_j with Gamma^2(k + c) / Gamma^2(k + c + 1/2) ~ sum_{j>=1} a_j k^-j.

    log Gamma(k + p) - log Gamma(k + q) = (p - q) log k
        + sum_n (-1)^(n+1) (B_{n+1}(p) - B_{n+1}(q)) / (n (n+1) k^n),
    doubled and exponentiated as a power series in 1/k.
    """
    half = mpf(1) / 2
    e = [mpf(0)] + [
        2 * (-1) ** (n + 1) * (mpmath.bernpoly(n + 1, c) - mpmath.bernpoly(n + 1, c + half)) / (n * (n + 1))
        for n in range(1, n_terms)
    ]
    d = [mpf(1)]
    for j in range(1, n_terms):
        d.append(mpmath.fsum(n * e[n] * d[j - n] for n in range(1, j + 1)) / j)
    return [mpf(0)] + d  # a[j] for j = 0..n_terms


def _eta_at_cutoff(b, M, n_terms, n_em):
    """Partial sum to M plus Euler-Maclaurin tail; returns (value, tail_bound)."""
    half = mpf(1) / 2
    c = b + half
    g = gamma_ratio_sq(1 + c, 1 + c + half, mp.prec)
    partial = []
    for k in range(1, M + 1):
        partial.append(g)
        g *= ((k + c) / (k + c + half)) ** 2
    partial_sum = mpmath.fsum(partial)
    g_M = partial[-1]

    a = _summand_coefficients(c, n_terms)
    Mf = mpf(M)
    # integral_M^inf (g(x) - 1/x) dx, from the expansion
    integral = mpmath.fsum(a[j] * Mf ** (1 - j) / (j - 1) for j in range(2, n_terms + 1))
    # odd-derivative corrections at the lower limit
    corrections = []
    for i in range(1, n_em + 1):
        coef = mpmath.bernoulli(2 * i) / mpmath.factorial(2 * i)
        deriv = mpmath.fsum(
            a[j] * mpmath.rf(-j - 2 * i + 2, 2 * i - 1) * Mf ** (-j - 2 * i + 1) for j in range(1, n_terms + 1)
        )
        corrections.append(coef * deriv)
    tail = integral - g_M / 2 - mpmath.fsum(corrections)
    value = partial_sum - mpmath.log(Mf) + tail

    # truncation estimate: magnitude of the last kept term of each series, doubled
    bound = 2 * (abs(a[n_terms] * Mf ** (1 - n_terms) / (n_terms - 1)) + abs(corrections[-1]))
    bound = max(bound, mpf(2) ** (-mp.prec + 8) * (1 + abs(value)))
    return value, bound


def eta_const(b, target_err=None, prec=None, cutoff: int | None = None) -> EtaConstant:
    """Euler-type constant eta(b) = lim_M (sum_{k<=M} Gamma^2(k+b+1/2)/Gamma^2(k+b+1) - ln M).

    The cutoff M doubles from 32 until the tail bound is below ``target_err``
    and the values at M and 2M agree to within it. Pass ``cutoff`` to evaluate
    at one fixed M instead.
    """
    prec = check_precision(prec if prec is not None else mp.prec)
    with mp.workprec(prec + 20):
        b = mpf(b)
        _check_eta_domain(b)
        target = mpf(target_err) if target_err is not None else mpf(2) ** (-prec + 4)
        if not target > 0:
            raise DomainError("target_err must be positive")
        if target < mpf(2) ** (-prec + 2):
            raise NonConvergence(f"target_err below the resolution of {prec}-bit arithmetic")
        n_terms, n_em = 16, 8
        if cutoff is not None:
            value, bound = _eta_at_cutoff(b, int(cutoff), n_terms, n_em)
            M = int(cutoff)
        else:
            M = 32
            value, bound = _eta_at_cutoff(b, M, n_terms, n_em)
            while True:
                value2, bound2 = _eta_at_cutoff(b, 2 * M, n_terms, n_em)
                if bound2 <= target and abs(value2 - value) <= target + bound:
                    value, bound, M = value2, bound2, 2 * M
                    break
                value, bound, M = value2, bound2, 2 * M
                if M > 2 ** 16:
                    raise NonConvergence(f"eta({mpmath.nstr(b, 8)}) tail bound stuck at {mpmath.nstr(bound, 3)}")
    with mp.workprec(prec):
        return EtaConstant(b=+b, value=+value, tail_error_bound=+bound, cutoff_M=M)
