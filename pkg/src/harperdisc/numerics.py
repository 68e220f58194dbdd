"""Extended-precision plumbing: precision control, adaptive quadrature, root bracketing.

Every real scalar in harperdisc is an ``mpmath.mpf``. Precision is always
explicit: public operations take ``prec`` (bits) and evaluate inside
``mpmath.workprec``, so results carry the requested precision regardless of the
caller's global mpmath setting.
"""

from __future__ import annotations

import enum
from contextlib import contextmanager
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import mpmath
from mpmath import mp, mpf

from .errors import DomainError, NoBracket, NonConvergence

BigFloat = mpf

MIN_PRECISION = 53
DEFAULT_PRECISION = 128


def working_precision(Q: int) -> int:
    """Default precision for a computation parameterized by Q: max(128, 4Q) bits."""
    return max(DEFAULT_PRECISION, 4 * int(Q))


def check_precision(prec) -> int:
    if prec is None:
        return max(mp.prec, MIN_PRECISION)
    prec = int(prec)
    if prec < MIN_PRECISION:
        raise DomainError(f"precision_bits must be >= {MIN_PRECISION}, got {prec}")
    return prec


@contextmanager
def precision(bits):
    """Run a block at ``bits`` of working precision (validated, >= 53)."""
    with mp.workprec(check_precision(bits)):
        yield


def big(value, prec=None) -> mpf:
    """Convert ``value`` to an mpf at the given (or current) precision.

    Strings are parsed at full precision, so ``big("0.1", 256)`` is the
    correctly rounded 256-bit value rather than the double nearest 0.1.
    """
    with precision(prec if prec is not None else mp.prec):
        return +mpf(value)


# -- quadrature ---------------------------------------------------------------


class EndpointRule(str, enum.Enum):
    plain = "plain"
    sqrt_singularity = "sqrt_singularity"


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: mpf = mpf("1e-20")
    max_subdivisions: int = 4000
    endpoint_rule: EndpointRule = EndpointRule.plain
    order: int = 20

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise DomainError("abs_tol must be positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1")
        object.__setattr__(self, "endpoint_rule", EndpointRule(self.endpoint_rule))


@lru_cache(maxsize=64)
def gauss_legendre(order: int, prec: int):
    """Nodes and weights of the ``order``-point Gauss-Legendre rule on [-1, 1].

    Computed by Newton iteration on P_n with the three-term recurrence; cached
    per (order, precision) and returned as immutable tuples.
    """
    with mp.workprec(prec + 20):
        nodes, weights = [], []
        n = order
        for i in range(1, (n + 1) // 2 + 1):
            x = mpmath.cos(mpmath.pi * (i - mpf(1) / 4) / (n + mpf(1) / 2))
            for _ in range(100):
                p0, p1 = mpf(1), x
                for k in range(2, n + 1):
                    p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
                dp = n * (x * p1 - p0) / (x * x - 1)
                dx = p1 / dp
                x -= dx
                if abs(dx) < mpf(2) ** (-prec - 10):
                    break
            p0, p1 = mpf(1), x
            for k in range(2, n + 1):
                p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
            dp = n * (x * p1 - p0) / (x * x - 1)
            w = 2 / ((1 - x * x) * dp * dp)
            nodes.append(x)
            weights.append(w)
        full_nodes, full_weights = [], []
        for x, w in zip(nodes, weights):
            if x == 0 or abs(x) < mpf(2) ** (-prec - 5):
                full_nodes.append(mpf(0))
                full_weights.append(w)
            else:
                full_nodes += [-x, x]
                full_weights += [w, w]
    with mp.workprec(prec):
        return tuple(+x for x in full_nodes), tuple(+w for w in full_weights)


def _panel(f, a, b, nodes, weights):
    half = (b - a) / 2
    mid = (a + b) / 2
    return half * mpmath.fsum(w * f(mid + half * x) for x, w in zip(nodes, weights))


def _adaptive(f, a, b, tol, spec: QuadratureSpec, budget: list):
    nodes, weights = gauss_legendre(spec.order, mp.prec)
    total_len = b - a
    whole = _panel(f, a, b, nodes, weights)
    stack = [(a, b, whole)]
    accepted = []
    while stack:
        lo, hi, est = stack.pop()
        mid = (lo + hi) / 2
        left = _panel(f, lo, mid, nodes, weights)
        right = _panel(f, mid, hi, nodes, weights)
        refined = left + right
        if abs(refined - est) <= tol * (hi - lo) / total_len:
            accepted.append(refined)
            continue
        budget[0] += 1
        if budget[0] > spec.max_subdivisions:
            raise NonConvergence(
                f"quadrature did not reach abs_tol={mpmath.nstr(spec.abs_tol, 5)} "
                f"within {spec.max_subdivisions} subdivisions"
            )
        stack.append((mid, hi, right))
        stack.append((lo, mid, left))
    return mpmath.fsum(accepted)


def integrate(f: Callable, a, b, spec: QuadratureSpec | None = None, prec=None) -> mpf:
    """Adaptive Gauss-Legendre integral of ``f`` over [a, b] to ``spec.abs_tol``.

    With ``endpoint_rule=sqrt_singularity`` the interval is split at its midpoint
    and each half is mapped by t = endpoint +/- u**2, which removes integrable
    inverse-square-root singularities and square-root kinks at either end.
    """
    spec = spec or QuadratureSpec()
    with precision(prec if prec is not None else mp.prec):
        a, b = mpf(a), mpf(b)
        if not a < b:
            raise DomainError(f"integrate requires a < b, got [{a}, {b}]")
        tol = mpf(spec.abs_tol)
        budget = [0]
        if spec.endpoint_rule is EndpointRule.plain:
            return _adaptive(f, a, b, tol, spec, budget)
        m = (a + b) / 2
        ua = mpmath.sqrt(m - a)
        ub = mpmath.sqrt(b - m)
        left = _adaptive(lambda u: 2 * u * f(a + u * u), mpf(0), ua, tol / 2, spec, budget)
        right = _adaptive(lambda u: 2 * u * f(b - u * u), mpf(0), ub, tol / 2, spec, budget)
        return left + right


# -- root finding -------------------------------------------------------------


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def bracket_root(
    f: Callable, lo, hi, tol, *, newton: bool = False, x0=None, prec=None, maxiter: int | None = None
):
    """Shrink a sign-change bracket of ``f`` to width <= ``tol``.

    Returns ``(lo, hi)`` with f(lo), f(hi) of opposite sign (or an exact zero,
    in which case lo == hi). With ``newton=True``, ``f`` returns
    ``(value, derivative)`` and safeguarded Newton steps are used; otherwise
    Illinois-modified regula falsi. Either way a bisection step is forced
    whenever the step length fails to halve over two iterations. ``x0``, if
    inside the bracket, is the first point evaluated.
    """
    with precision(prec if prec is not None else mp.prec):
        lo, hi, tol = mpf(lo), mpf(hi), mpf(tol)
        if not tol > 0:
            raise DomainError("tol must be positive")
        if lo > hi:
            lo, hi = hi, lo

        def ev(x):
            if newton:
                v, d = f(x)
                return mpf(v), mpf(d)
            return mpf(f(x)), None

        flo, _ = ev(lo)
        fhi, _ = ev(hi)
        slo, shi = _sign(flo), _sign(fhi)
        if slo * shi >= 0:
            raise NoBracket(f"f(lo)*f(hi) >= 0 on [{mpmath.nstr(lo, 10)}, {mpmath.nstr(hi, 10)}]")
        if maxiter is None:
            maxiter = 4 * mp.prec + 200

        x = mpf(x0) if x0 is not None else lo - flo * (hi - lo) / (fhi - flo)
        if not lo < x < hi:
            x = (lo + hi) / 2
        step_prev = step_prev2 = hi - lo
        side = 0
        for _ in range(maxiter):
            fx, dfx = ev(x)
            sx = _sign(fx)
            if sx == 0:
                return x, x
            if sx == slo:
                lo, flo = x, fx
                if side == -1 and not newton:
                    fhi /= 2
                side = -1
            else:
                hi, fhi = x, fx
                if side == 1 and not newton:
                    flo /= 2
                side = 1
            if hi - lo <= tol:
                return lo, hi

            if newton and dfx:
                cand = x - fx / dfx
            else:
                cand = lo - flo * (hi - lo) / (fhi - flo)
            step = abs(cand - x)
            # the converged test comes first: a step below the ulp lands exactly on lo or hi
            if step < tol / 4 and lo <= cand <= hi:
                # converged to within tol: certify with a tight bracket around cand
                a = max(lo, cand - tol / 4)
                b = min(hi, cand + tol / 4)
                fa, _ = ev(a)
                fb, _ = ev(b)
                sa, sb = _sign(fa), _sign(fb)
                if sa == 0:
                    return a, a
                if sb == 0:
                    return b, b
                if sa == slo and sb == -slo:
                    return a, b
                if sa == slo:
                    lo, flo = a, fa
                if sb == -slo:
                    hi, fhi = b, fb
                cand = (lo + hi) / 2
                step = (hi - lo) / 2
            elif not (lo < cand < hi) or step > step_prev2 / 2:
                cand = (lo + hi) / 2
                step = (hi - lo) / 2
            step_prev2, step_prev = step_prev, step
            x = cand
        if hi - lo <= tol:
            return lo, hi
        raise NonConvergence(f"root bracket did not shrink below tol after {maxiter} iterations")


def find_root(f: Callable, lo, hi, tol, *, newton: bool = False, prec=None) -> mpf:
    """Root of ``f`` in [lo, hi]: midpoint of a certified sign-change enclosure of width <= tol."""
    with precision(prec if prec is not None else mp.prec):
        a, b = bracket_root(f, lo, hi, tol, newton=newton)
        return (a + b) / 2
