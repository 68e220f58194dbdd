"""Exact evaluation of the discriminant Sigma(x) of Harper's equation at flux P/Q.

For odd Q, Sigma(x) = -det(L - x I), with L the Q x Q tridiagonal matrix of zero
diagonal and off-diagonal entries 2 sin(pi P k / Q), k = 1..Q-1. For any Q,
Sigma(x) = tr M(x, theta) + 2 cos(Q theta), where M is the one-period transfer
matrix of psi_{n-1} + 2 cos(2 pi P n / Q + theta) psi_n + psi_{n+1} = x psi_n.
The two routes agree with no extra sign (checked in the test-suite for odd Q
up to 199).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import gmpy2
import mpmath
import numpy as np
from mpmath import mp, mpf
from scipy.linalg import eigvalsh_tridiagonal

from .errors import DecompositionError, NotCoprime, ParityError, PrecisionTooLow
from .numerics import bracket_root, check_precision, working_precision


class Route(str, enum.Enum):
    determinant = "determinant"
    transfer_matrix = "transfer_matrix"


@dataclass(frozen=True)
class FluxRatio:
    """Flux P/Q with gamma = pi P / Q and, for odd Q, the split Q = 4 P r + s."""

    P: int
    Q: int
    gamma: mpf
    s: int | None
    r: int | None
    precision_bits: int

    @property
    def odd(self) -> bool:
        return self.Q % 2 == 1


def flux_ratio(P: int, Q: int, prec: int | None = None) -> FluxRatio:
    P, Q = int(P), int(Q)
    if P < 1 or Q < 1:
        raise NotCoprime(f"P and Q must be positive, got P={P}, Q={Q}")
    if math.gcd(P, Q) != 1:
        raise NotCoprime(f"gcd({P}, {Q}) = {math.gcd(P, Q)}")
    prec = check_precision(prec if prec is not None else working_precision(Q))
    s = r = None
    if Q % 2 == 1:
        r, s = divmod(Q, 4 * P)
    with mp.workprec(prec):
        gamma = mpmath.pi * P / Q
    return FluxRatio(P=P, Q=Q, gamma=gamma, s=s, r=r, precision_bits=prec)


@dataclass(frozen=True)
class DiscriminantModel:
    flux: FluxRatio
    offdiag: tuple
    precision_bits: int
    identity_residual: mpf | None = None
    _offdiag_sq: tuple = field(default=(), repr=False, compare=False)
    _potential: tuple = field(default=(), repr=False, compare=False)
    _g_offdiag_sq: tuple = field(default=(), repr=False, compare=False)
    _g_potential: tuple = field(default=(), repr=False, compare=False)

    @property
    def Q(self) -> int:
        return self.flux.Q

    @property
    def P(self) -> int:
        return self.flux.P


@dataclass(frozen=True)
class DiscriminantValue:
    x: mpf
    sigma: mpf
    sigma_prime: mpf
    route: Route


def build_model(P: int, Q: int, precision_bits: int | None = None) -> DiscriminantModel:
    """Off-diagonal data of L (and the default-phase potential) at the given precision.

    For odd Q the product identity prod_{k=1}^{(Q-1)/2} (2 sin(2 pi P k / Q))^2 = Q
    is checked; a relative residual above 2^(-precision_bits/2) raises
    PrecisionTooLow.
    """
    prec = check_precision(precision_bits if precision_bits is not None else working_precision(Q))
    flux = flux_ratio(P, Q, prec)
    with mp.workprec(prec):
        offdiag = tuple(2 * mpmath.sinpi(mpf(P * k) / Q) for k in range(1, Q))
        offdiag_sq = tuple(b * b for b in offdiag)
        theta = mpmath.pi / (2 * Q)
        potential = tuple(2 * mpmath.cos(2 * mpmath.pi * P * n / Q + theta) for n in range(1, Q + 1))
        with _gctx(prec):
            g_offdiag_sq = tuple(_to_g(v) for v in offdiag_sq)
            g_potential = tuple(_to_g(v) for v in potential)
        residual = None
        if Q % 2 == 1:
            prod = mpmath.fprod(offdiag_sq[2 * k - 1] for k in range(1, (Q - 1) // 2 + 1))
            residual = abs(prod - Q) / Q
            if residual > mpf(2) ** (-prec / 2):
                raise PrecisionTooLow(
                    f"sine-product identity residual {mpmath.nstr(residual, 3)} at {prec} bits (Q={Q})"
                )
    return DiscriminantModel(
        flux=flux,
        offdiag=offdiag,
        precision_bits=prec,
        identity_residual=residual,
        _offdiag_sq=offdiag_sq,
        _potential=potential,
        _g_offdiag_sq=g_offdiag_sq,
        _g_potential=g_potential,
    )


def with_precision(model: DiscriminantModel, precision_bits: int) -> DiscriminantModel:
    return build_model(model.P, model.Q, precision_bits)


# -- evaluators ---------------------------------------------------------------------
#
# The inner loops run on gmpy2 mpfr values (the C backend mpmath itself uses);
# inputs and outputs are mpmath mpf at the model precision.


def _gctx(prec: int):
    return gmpy2.context(precision=prec)


def _to_g(x):
    sign, man, exp, _ = mpf(x)._mpf_
    if not man:
        return gmpy2.mpfr(0)
    v = gmpy2.mul_2exp(gmpy2.mpfr(man), exp)
    return -v if sign else v


def _to_mpf(v):
    if gmpy2.is_zero(v):
        return mpf(0)
    m, e = v.as_mantissa_exp()
    return mpf((int(m), int(e)))


def _det_eval(model: DiscriminantModel, x, order: int = 1):
    """(Sigma, Sigma', Sigma'') by the characteristic-polynomial recurrence.

    p_m = -x p_{m-1} - b_{m-1}^2 p_{m-2} is differentiated alongside, so the
    derivatives are exact for the computed recurrence.
    """
    with _gctx(model.precision_bits):
        xg = _to_g(x)
        p_prev, p = gmpy2.mpfr(1), -xg
        d_prev, d = gmpy2.mpfr(0), gmpy2.mpfr(-1)
        if order < 2:
            for bb in model._g_offdiag_sq:
                p_prev, p, d_prev, d = p, -xg * p - bb * p_prev, d, -p - xg * d - bb * d_prev
            return _to_mpf(-p), _to_mpf(-d), None
        s_prev = s = gmpy2.mpfr(0)
        for bb in model._g_offdiag_sq:
            p_prev, p, d_prev, d, s_prev, s = (
                p,
                -xg * p - bb * p_prev,
                d,
                -p - xg * d - bb * d_prev,
                s,
                -2 * d - xg * s - bb * s_prev,
            )
        return _to_mpf(-p), _to_mpf(-d), _to_mpf(-s)


def _potential_g(model: DiscriminantModel, theta):
    if theta is None:
        return model._g_potential, gmpy2.mpfr(0)
    Q, P = model.Q, model.P
    with mp.workprec(model.precision_bits + 10):
        theta = mpf(theta)
        potential = [2 * mpmath.cos(2 * mpmath.pi * P * n / Q + theta) for n in range(1, Q + 1)]
        cos_term = 2 * mpmath.cos(Q * theta)
    return [_to_g(v) for v in potential], _to_g(cos_term)


def _transfer_eval(model: DiscriminantModel, x, theta=None, order: int = 1):
    """(Sigma, Sigma', Sigma'') from the one-period transfer-matrix product."""
    with _gctx(model.precision_bits):
        potential, cos_term = _potential_g(model, theta)
        xg = _to_g(x)
        one, zero = gmpy2.mpfr(1), gmpy2.mpfr(0)
        # M = [[a, b], [c, d]]; T_n = [[v_n, -1], [1, 0]]
        a, b, c, d = one, zero, zero, one
        da = db = dc = dd = zero
        sa = sb = sc = sd = zero
        for V in potential:
            v = xg - V
            if order >= 2:
                sa, sb, sc, sd = v * sa - sc + 2 * da, v * sb - sd + 2 * db, sa, sb
            da, db, dc, dd = v * da - dc + a, v * db - dd + b, da, db
            a, b, c, d = v * a - c, v * b - d, a, b
        second = _to_mpf(sa + sd) if order >= 2 else None
        return _to_mpf(a + d + cos_term), _to_mpf(da + dd), second


def taylor_coefficients(model: DiscriminantModel, x, degree: int, route: Route | str | None = None) -> list:
    """Coefficients c_j with Sigma(x + u) = sum_j c_j u^j, j = 0..degree (Taylor-mode recurrence)."""
    route = _default_route(model, route)
    K = int(degree)
    with _gctx(model.precision_bits):
        xg = _to_g(x)
        zero, one = gmpy2.mpfr(0), gmpy2.mpfr(1)
        if route is Route.determinant:
            _require_odd(model, "determinant route")
            prev = [one] + [zero] * K
            cur = [-xg, -one] + [zero] * (K - 1) if K >= 1 else [-xg]
            for bb in model._g_offdiag_sq:
                new = [-(xg * cur[0]) - bb * prev[0]]
                new += [-(xg * cur[j] + cur[j - 1]) - bb * prev[j] for j in range(1, K + 1)]
                prev, cur = cur, new
            return [_to_mpf(-v) for v in cur]
        a = [one] + [zero] * K
        b = [zero] * (K + 1)
        c = [zero] * (K + 1)
        d = [one] + [zero] * K
        for V in model._g_potential:
            v = xg - V
            na = [v * a[0] - c[0]] + [v * a[j] + a[j - 1] - c[j] for j in range(1, K + 1)]
            nb = [v * b[0] - d[0]] + [v * b[j] + b[j - 1] - d[j] for j in range(1, K + 1)]
            a, b, c, d = na, nb, a, b
        return [_to_mpf(a[j] + d[j]) for j in range(K + 1)]


def _require_odd(model_or_flux, what: str):
    if model_or_flux.Q % 2 == 0:
        raise ParityError(f"{what} requires odd Q, got Q={model_or_flux.Q}")


def sigma_det(model: DiscriminantModel, x) -> DiscriminantValue:
    """Sigma(x) and Sigma'(x) via -det(L - x I); odd Q only."""
    _require_odd(model, "sigma_det")
    with mp.workprec(model.precision_bits):
        x = mpf(x)
        s, ds, _ = _det_eval(model, x)
        return DiscriminantValue(x=x, sigma=s, sigma_prime=ds, route=Route.determinant)


def sigma_transfer(model: DiscriminantModel, x, theta=None) -> DiscriminantValue:
    """Sigma(x) = tr M(x, theta) + 2 cos(Q theta), any parity of Q.

    ``theta`` defaults to pi / (2Q), where cos(Q theta) = 0.
    """
    with mp.workprec(model.precision_bits):
        x = mpf(x)
        s, ds, _ = _transfer_eval(model, x, theta)
        return DiscriminantValue(x=x, sigma=s, sigma_prime=ds, route=Route.transfer_matrix)


def _default_route(model, route) -> Route:
    if route is None:
        return Route.determinant if model.Q % 2 else Route.transfer_matrix
    return Route(route)


def evaluator(model: DiscriminantModel, route: Route | str | None = None, order: int = 1):
    """A bare callable x -> (Sigma, Sigma'[, Sigma'']) for root finders.

    Defaults to the determinant route for odd Q and the transfer route for
    even Q.
    """
    route = _default_route(model, route)
    if route is Route.determinant:
        _require_odd(model, "determinant route")
        fn = _det_eval
    else:
        fn = _transfer_eval

    if order >= 2:
        return lambda x: fn(model, x, order=2)
    return lambda x: fn(model, x)[:2]


# -- Sigma'(0) in closed form ---------------------------------------------------------


def _sin_sq(arg_over_pi):
    return mpmath.sinpi(arg_over_pi) ** 2


def sigma_prime_zero_exact(flux: FluxRatio) -> mpf:
    """(-1)^((Q-1)/2) Q (1 + S), S = sum_k prod_{j<=k} sin^2((2j-1) gamma) / sin^2(2j gamma)."""
    _require_odd(flux, "sigma_prime_zero_exact")
    with mp.workprec(flux.precision_bits + 10):
        S = _s_direct(flux)
        val = (-1) ** ((flux.Q - 1) // 2) * flux.Q * (1 + S)
    with mp.workprec(flux.precision_bits):
        return +val


def _s_direct(flux: FluxRatio):
    P, Q = flux.P, flux.Q
    terms = []
    running = mpf(1)
    for k in range(1, (Q - 1) // 2 + 1):
        running *= _sin_sq(mpf((2 * k - 1) * P) / Q) / _sin_sq(mpf(2 * k * P) / Q)
        terms.append(running)
    return mpmath.fsum(terms)


def s_direct(flux: FluxRatio) -> mpf:
    """The sum S of the closed form, by running products."""
    _require_odd(flux, "s_direct")
    with mp.workprec(flux.precision_bits + 10):
        val = _s_direct(flux)
    with mp.workprec(flux.precision_bits):
        return +val


def _ratio_product(flux: FluxRatio, num_shift, den_shift, count: int):
    """prod_{j=1}^{count} sin^2((2j + num_shift) gamma) / sin^2((2j + den_shift) gamma)."""
    P, Q = flux.P, flux.Q
    prod = mpf(1)
    for j in range(1, count + 1):
        prod *= _sin_sq((2 * j + num_shift) * P / Q) / _sin_sq((2 * j + den_shift) * P / Q)
    return prod


def _require_decomposition(flux: FluxRatio):
    _require_odd(flux, "the Q = 4Pr + s regrouping")
    if flux.r < 1:
        raise DecompositionError(f"Q={flux.Q} <= s={flux.s}: regrouping needs r >= 1")


def a_factor(flux: FluxRatio, i: int) -> mpf:
    """Exact block product A_i of length r = (Q - s) / 4P.

    A_{2k}   = prod_j sin^2((2j - 1 - ks/P) gamma) / sin^2((2j - ks/P) gamma)
    A_{2k-1} = prod_j sin^2((2j - 1 + ks/P) gamma) / sin^2((2j - 2 + ks/P) gamma)
    """
    _require_decomposition(flux)
    with mp.workprec(flux.precision_bits + 10):
        val = _a_factor(flux, i)
    with mp.workprec(flux.precision_bits):
        return +val


def _a_factor(flux: FluxRatio, i: int):
    P, s, r = flux.P, flux.s, flux.r
    if i % 2 == 0:
        ks = mpf((i // 2) * s) / P
        return _ratio_product(flux, -1 - ks, -ks, r)
    ks = mpf(((i + 1) // 2) * s) / P
    return _ratio_product(flux, -1 + ks, -2 + ks, r)


def s_regrouped(flux: FluxRatio) -> mpf:
    """S evaluated through the block regrouping with the A_i factors.

    S = sum_{t=0}^{P-1} A_0...A_{2t-1} { sum_{m=1}^{r} ( prod_{j<=m} sin^2((2j-1-ts/P)g)/sin^2((2j-ts/P)g)
          + A_{2t} A_{2t+1} prod_{j<=m} sin^2((2j-2+(t+1)s/P)g)/sin^2((2j-1+(t+1)s/P)g) )
          + A_{2t} (A_{2t+1} - 1) }
      + A_0...A_{2P-1} sum_{m=1}^{(s-1)/2} prod_{j<=m} sin^2((2j-1-s)g)/sin^2((2j-s)g)

    It is an exact rearrangement of the direct sum, so the two must agree to
    working precision.
    """
    _require_decomposition(flux)
    P, Q, s, r = flux.P, flux.Q, flux.s, flux.r
    with mp.workprec(flux.precision_bits + 10):
        A = [_a_factor(flux, i) for i in range(2 * P)]
        total = []
        prefix = mpf(1)
        for t in range(P):
            down = mpf(t * s) / P
            up = mpf((t + 1) * s) / P
            inner = []
            p1 = p2 = mpf(1)
            for m in range(1, r + 1):
                p1 *= _sin_sq((2 * m - 1 - down) * P / Q) / _sin_sq((2 * m - down) * P / Q)
                p2 *= _sin_sq((2 * m - 2 + up) * P / Q) / _sin_sq((2 * m - 1 + up) * P / Q)
                inner.append(p1 + A[2 * t] * A[2 * t + 1] * p2)
            total.append(prefix * (mpmath.fsum(inner) + A[2 * t] * (A[2 * t + 1] - 1)))
            prefix *= A[2 * t] * A[2 * t + 1]
        tail = []
        p = mpf(1)
        for m in range(1, (s - 1) // 2 + 1):
            p *= _sin_sq(mpf((2 * m - 1 - s) * P) / Q) / _sin_sq(mpf((2 * m - s) * P) / Q)
            tail.append(p)
        val = mpmath.fsum(total) + prefix * mpmath.fsum(tail)
    with mp.workprec(flux.precision_bits):
        return +val


# -- zeros ---------------------------------------------------------------------------


def sturm_count(model: DiscriminantModel, x) -> int:
    """Number of eigenvalues of L strictly below x (LDL^T pivot signs)."""
    prec = model.precision_bits
    with _gctx(prec):
        xg = _to_g(x)
        tiny = gmpy2.mul_2exp(gmpy2.mpfr(1), -2 * prec)
        d = -xg
        if gmpy2.is_zero(d):
            d = -tiny
        count = 1 if d < 0 else 0
        for bb in model._g_offdiag_sq:
            d = -xg - bb / d
            if gmpy2.is_zero(d):
                d = -tiny
            if d < 0:
                count += 1
    return count


def _isolate(model, lo, hi, c_lo, c_hi, out):
    """Split [lo, hi] by Sturm-count bisection until each piece holds one eigenvalue."""
    if c_hi - c_lo == 0:
        return
    if c_hi - c_lo == 1:
        out.append((lo, hi, None))
        return
    mid = (lo + hi) / 2
    c_mid = sturm_count(model, mid)
    _isolate(model, lo, mid, c_lo, c_mid, out)
    _isolate(model, mid, hi, c_mid, c_hi, out)


def _seeds(model: DiscriminantModel, route: Route):
    """Double-precision approximations of the Q zeros of Sigma.

    Odd Q, determinant route: eigenvalues of L. Otherwise: eigenvalues of the
    Q-periodic Harper matrix at theta = pi/2Q with Bloch phase pi/2, which are
    exactly the x where tr M(x, theta) = 0.
    """
    Q = model.Q
    if Q == 1:
        return np.array([0.0])
    if route is Route.determinant:
        return eigvalsh_tridiagonal(np.zeros(Q), np.array([float(b) for b in model.offdiag]))
    V = np.array([float(v) for v in model._potential])
    H = np.diag(V).astype(complex)
    for n in range(Q - 1):
        H[n, n + 1] += 1
        H[n + 1, n] += 1
    H[Q - 1, 0] += 1j
    H[0, Q - 1] += -1j
    return np.sort(np.linalg.eigvalsh(H))


def _split_cluster(model, route, seeds, lo, hi):
    """Approximate k zeros that double precision cannot separate.

    Newton on Sigma^(k-1) (which has a single simple root inside the cluster
    for a real-rooted polynomial) finds an interior point c; the roots of the
    degree-k Taylor polynomial of Sigma at c then approximate the cluster
    zeros with relative error ~ (cluster width / distance to other zeros).
    """
    k = len(seeds)
    prec = model.precision_bits
    c = mpmath.fsum(mpf(v) for v in seeds) / k
    eps = mpf(2) ** (-prec + 8) * (1 + abs(c))
    for _ in range(4 * prec):
        tc = taylor_coefficients(model, c, k, route)
        if tc[k] == 0:
            return None
        step = tc[k - 1] / (k * tc[k])
        c -= step
        if not lo < c < hi:
            return None
        if abs(step) <= eps:
            break
    else:
        return None
    tc = taylor_coefficients(model, c, k, route)
    scale = abs(tc[0] / tc[k]) ** (mpf(1) / k)
    if scale == 0:
        scale = mpf(2) ** (-prec)
    # roots of sum_j tc[j] (scale v)^j, computed in the rescaled variable
    coeffs = [tc[j] * scale ** j for j in range(k, -1, -1)]
    try:
        roots = mpmath.polyroots(coeffs, maxsteps=400, extraprec=prec)
    except mpmath.libmp.NoConvergence:
        return None
    return sorted(c + scale * mpmath.re(r) for r in roots)


def _isolating_intervals(model: DiscriminantModel, route: Route):
    """Intervals (a, b, x0), each holding exactly one zero of Sigma, ascending."""
    Q = model.Q
    seeds = [float(v) for v in _seeds(model, route)]
    # group seeds that double precision cannot tell apart
    groups = [[seeds[0]]]
    for v in seeds[1:]:
        if v - groups[-1][-1] < 1e-9 * max(1.0, abs(v)):
            groups[-1].append(v)
        else:
            groups.append([v])
    outer = [mpf(-5)] + [mpf((g[-1] + h[0]) / 2) for g, h in zip(groups, groups[1:])] + [mpf(5)]

    approx = []
    for g, lo, hi in zip(groups, outer, outer[1:]):
        if len(g) == 1:
            approx.append([mpf(g[0])])
            continue
        split = _split_cluster(model, route, g, lo, hi)
        approx.append(split if split is not None and len(split) == len(g) else None)

    intervals = []
    for g, pts, lo, hi in zip(groups, approx, outer, outer[1:]):
        if pts is None:
            cuts = [lo, hi]
        else:
            cuts = [lo] + [(u + v) / 2 for u, v in zip(pts, pts[1:])] + [hi]
        if pts is not None and _cuts_isolate(model, route, cuts):
            intervals += [(a, b, x0) for a, b, x0 in zip(cuts, cuts[1:], pts)]
        elif route is Route.determinant:
            found = []
            _isolate(model, lo, hi, sturm_count(model, lo), sturm_count(model, hi), found)
            intervals += found
        else:
            raise PrecisionTooLow(f"zero isolation failed for P={model.P}, Q={Q} near {float(lo)}")
    if len(intervals) != Q:
        raise PrecisionTooLow(f"isolated {len(intervals)} zeros, expected Q={Q}")
    return intervals


def _cuts_isolate(model, route, cuts) -> bool:
    """True if every consecutive pair of cuts encloses exactly one zero."""
    if route is Route.determinant:
        counts = [sturm_count(model, c) for c in cuts]
        return all(b - a == 1 for a, b in zip(counts, counts[1:]))
    f = evaluator(model, route)
    signs = [mpmath.sign(f(c)[0]) for c in cuts]
    return all(a * b < 0 for a, b in zip(signs, signs[1:]))


def zero_enclosures(model: DiscriminantModel, tol=None, route: Route | str | None = None):
    """Sign-change enclosures (lo, hi) of all Q zeros of Sigma, ascending."""
    route = _default_route(model, route)
    if route is Route.determinant:
        _require_odd(model, "zeros_of_sigma")
    prec = model.precision_bits
    with mp.workprec(prec):
        tol = mpf(tol) if tol is not None else mpf(2) ** (-prec // 2)
        intervals = _isolating_intervals(model, route)
        f = evaluator(model, route)
        out = []
        for a, b, x0 in intervals:
            # tighten to the cluster scale so the tolerance is relative to the local spacing
            local = max(min(tol, (b - a) * mpf(2) ** (-prec // 2)), (1 + abs(b)) * mpf(2) ** (-prec + 16))
            out.append(bracket_root(f, a, b, local, newton=True, x0=x0))
        return out


def zeros_of_sigma(model: DiscriminantModel, tol=None) -> list:
    """The Q real zeros of Sigma (eigenvalues of L), ascending; odd Q only.

    Double-precision eigenvalues of L seed the isolation; Sturm counts certify
    that each interval holds exactly one zero (plain Sturm bisection is the
    fallback), and safeguarded Newton refines each zero to an enclosure of
    width <= tol (default 2^(-precision_bits/2)).
    """
    _require_odd(model, "zeros_of_sigma")
    with mp.workprec(model.precision_bits):
        return [(a + b) / 2 for a, b in zero_enclosures(model, tol, Route.determinant)]


def last_wilkinson_sum(model: DiscriminantModel, route: Route | str | None = None) -> mpf:
    """sum_k 1 / |Sigma'(x_k)| over the zeros x_k; equals 1/Q.

    The default route is the determinant for odd Q; pass
    ``route="transfer_matrix"`` to evaluate even Q as well.
    """
    if route is None:
        _require_odd(model, "last_wilkinson_sum")
    route = _default_route(model, route)
    # the sum is first order in the zero error, so refine well past the default
    encl = zero_enclosures(model, mpf(2) ** (-model.precision_bits + 24), route)
    with mp.workprec(model.precision_bits):
        f = evaluator(model, route)
        return mpmath.fsum(1 / abs(f((a + b) / 2)[1]) for a, b in encl)
