"""Exact band structure: the preimage of [-4, 4] under Sigma, widths, clusters and W(d)."""

from __future__ import annotations

import os
import statistics
from dataclasses import dataclass, field

import mpmath
from mpmath import mp, mpf

from .errors import (
    ClusteringAmbiguous,
    DomainError,
    EdgeNotFound,
    NoBracket,
    NonConvergence,
    PrecisionTooLow,
)
from .exactdisc import (
    DiscriminantModel,
    FluxRatio,
    Route,
    _default_route,
    _require_odd,
    evaluator,
    sigma_prime_zero_exact,
    with_precision,
    zero_enclosures,
)
from .numerics import EndpointRule, QuadratureSpec, bracket_root, integrate, working_precision
from .asymptotics import dos

DEFAULT_WD = (mpf(1) / 4, mpf(1) / 2, mpf(3) / 4, mpf(1))
WIDE_GAP_FACTOR = 5


@dataclass(frozen=True)
class Band:
    lo: mpf
    hi: mpf
    index: int
    cluster_id: int
    width: mpf


@dataclass(frozen=True)
class SpectrumSummary:
    flux: FluxRatio
    bands: list
    total_width: mpf
    centermost_width: mpf
    w_d: dict
    precision_bits: int = 0
    zeros: list = field(default_factory=list, repr=False)
    gap_heights: list = field(default_factory=list, repr=False)


def max_precision(Q: int) -> int:
    """Precision cap for escalation: $HARPERDISC_MAX_PRECISION, else 16Q (at least 256)."""
    env = os.environ.get("HARPERDISC_MAX_PRECISION")
    if env:
        return int(env)
    return max(16 * Q, 256)


def _ulp_floor(x, prec):
    return (1 + abs(x)) * mpf(2) ** (-prec + 16)


def _critical_point(f2, a, b, prec):
    """Root of Sigma' strictly between consecutive zeros a < b."""
    tol = max((b - a) * mpf(2) ** (-prec // 2), _ulp_floor(b, prec))
    lo, hi = bracket_root(lambda x: f2(x)[1:], a, b, tol, newton=True)
    return (lo + hi) / 2


def _edge(f, target, a, b, x0, tol):
    """Solve Sigma(x) = target on [a, b], Sigma monotone there."""
    lo, hi = bracket_root(lambda x: ((v := f(x))[0] - target, v[1]), a, b, tol, newton=True, x0=x0)
    return lo, hi


def _bands_once(model: DiscriminantModel, edge_tol, route: Route):
    prec = model.precision_bits
    Q = model.Q
    f = evaluator(model, route)
    f2 = evaluator(model, route, order=2)
    with mp.workprec(prec):
        four = mpf(4)
        zeros = [(a + b) / 2 for a, b in zero_enclosures(model, route=route)]
        slopes = [f(z)[1] for z in zeros]

        # critical points between consecutive zeros, with |Sigma| >= 4 there
        crit = []
        for k in range(Q - 1):
            c = _critical_point(f2, zeros[k], zeros[k + 1], prec)
            val = f(c)[0]
            touch_tol = mpf(2) ** (-prec // 2) * 64
            if abs(val) < four - touch_tol:
                raise EdgeNotFound(
                    f"|Sigma| = {mpmath.nstr(abs(val), 8)} < 4 between zeros {k + 1} and {k + 2}: "
                    "zeros not resolved at this precision"
                )
            crit.append((c, val, abs(abs(val) - four) <= touch_tol))

        bands = []
        for k in range(Q):
            z = zeros[k]
            estimate = 4 / abs(slopes[k])
            tol = min(edge_tol, estimate * mpf(2) ** -20)
            tol = max(tol, _ulp_floor(z, prec))
            ends = []
            for side in (-1, 1):
                j = k - 1 if side < 0 else k
                if 0 <= j < Q - 1:
                    c, cval, touching = crit[j]
                    if touching:
                        ends.append(c)
                        continue
                    target = four if cval > 0 else -four
                else:
                    c = mpf(5) * side
                    cval = f(c)[0]
                    if abs(cval) <= four:
                        raise EdgeNotFound(f"|Sigma({side * 5})| <= 4: spectrum not inside [-4, 4]")
                    target = four if cval > 0 else -four
                a, b = (c, z) if side < 0 else (z, c)
                x0 = z + side * estimate
                if not a < x0 < b:
                    x0 = None
                lo, hi = _edge(f, target, a, b, x0, tol)
                ends.append((lo + hi) / 2)
            lo, hi = ends
            if not lo < z < hi:
                raise EdgeNotFound(f"band {k + 1} edges do not straddle its zero")
            bands.append((lo, hi))
        heights = [mpf(0) if touching else mpmath.log(abs(cval) / 4) for _, cval, touching in crit]
        return zeros, bands, heights


def _assign_clusters(flux: FluxRatio, heights) -> list:
    """Cluster ids (0-based, ascending) from the gap threshold.

    Gaps are measured by their height h = ln(|Sigma(c)| / 4) at the critical
    point c inside the gap, which is 0 for touching bands and grows with the
    gap's strength. Raw gap lengths are not used because they scale with the
    local band density, which varies by an order of magnitude across the
    spectrum. A gap is wide if h exceeds 5 times the median height.
    """
    n = len(heights) + 1
    if n == 1:
        return [0]
    if flux.P == 1:
        return list(range(n))
    threshold = WIDE_GAP_FACTOR * statistics.median(heights)
    ids, cid = [0], 0
    for h in heights:
        if h > threshold:
            cid += 1
        ids.append(cid)
    return ids


def compute_bands(
    model: DiscriminantModel,
    edge_tol=None,
    route: Route | str | None = None,
    wd_exponents=DEFAULT_WD,
) -> SpectrumSummary:
    """All Q bands as [lo, hi] with Sigma(lo), Sigma(hi) = +/-4.

    Between consecutive zeros Sigma' has exactly one root c; |Sigma(c)| >= 4
    (equality means two bands touch, which happens at 0 for even Q). Each
    band edge is bracketed between its zero and the neighbouring critical
    point, where Sigma is monotone, and refined by safeguarded Newton. Each
    edge is resolved to min(edge_tol, 2^-20 times the band's width estimate),
    so exponentially narrow bands still get relative accuracy. Failures
    double the precision up to ``max_precision(Q)``.
    """
    route = _default_route(model, route)
    if route is Route.determinant:
        _require_odd(model, "compute_bands with the determinant route")
    prec = max(model.precision_bits, working_precision(model.Q))
    cap = max(max_precision(model.Q), prec)
    last = None
    while prec <= cap:
        m = model if prec == model.precision_bits else with_precision(model, prec)
        with mp.workprec(prec):
            tol = mpf(edge_tol) if edge_tol is not None else mpf(2) ** (-prec // 2)
            if not tol > 0:
                raise DomainError("edge_tol must be positive")
        try:
            zeros, edges, heights = _bands_once(m, tol, route)
            break
        except (EdgeNotFound, NoBracket, NonConvergence, PrecisionTooLow) as exc:
            last = exc
            prec *= 2
    else:
        raise EdgeNotFound(f"band edges not resolved up to {cap} bits: {last}")

    flux = m.flux
    with mp.workprec(prec):
        ids = _assign_clusters(flux, heights)
        bands = [
            Band(lo=lo, hi=hi, index=k + 1, cluster_id=ids[k], width=hi - lo) for k, (lo, hi) in enumerate(edges)
        ]
        total = mpmath.fsum(b.width for b in bands)
        center = min(bands, key=lambda b: abs(b.lo + b.hi))
        summary = SpectrumSummary(
            flux=flux,
            bands=bands,
            total_width=total,
            centermost_width=center.width,
            w_d={},
            precision_bits=prec,
            zeros=zeros,
            gap_heights=heights,
        )
        summary.w_d.update({mpf(d): hausdorff_wd(summary, d) for d in wd_exponents})
    return summary


def centermost_band(summary: SpectrumSummary) -> Band:
    return min(summary.bands, key=lambda b: abs(b.lo + b.hi))


@dataclass(frozen=True)
class CentermostReport:
    width: mpf
    bound_ratio: mpf
    max_derivative: mpf
    sigma_prime_zero: mpf


def centermost_lower_bound_report(
    summary: SpectrumSummary, model: DiscriminantModel, samples: int = 64
) -> CentermostReport:
    """Centermost width against 8/|Sigma'(0)|, plus max |Sigma'| over the band.

    Sigma runs monotonically from -4 to 4 across the band, so
    width * max|Sigma'| >= 8 must hold.
    """
    _require_odd(model, "centermost_lower_bound_report")
    prec = summary.precision_bits or model.precision_bits
    if model.precision_bits < prec:
        model = with_precision(model, prec)
    band = centermost_band(summary)
    f2 = evaluator(model, order=2)
    with mp.workprec(prec):
        dp0 = sigma_prime_zero_exact(model.flux)
        xs = [band.lo + band.width * k / samples for k in range(samples + 1)]
        vals = [abs(f2(x)[1]) for x in xs]
        k = max(range(len(vals)), key=vals.__getitem__)
        best = vals[k]
        # refine: a local maximum of |Sigma'| is a root of Sigma'' inside the neighbouring samples
        a, b = xs[max(k - 1, 0)], xs[min(k + 1, samples)]
        try:
            lo, hi = bracket_root(lambda x: f2(x)[2], a, b, band.width * mpf(2) ** -40)
            best = max(best, abs(f2((lo + hi) / 2)[1]))
        except NoBracket:
            pass
        return CentermostReport(
            width=band.width,
            bound_ratio=band.width * abs(dp0) / 8,
            max_derivative=best,
            sigma_prime_zero=dp0,
        )


@dataclass(frozen=True)
class ClusterStat:
    cluster_id: int
    band_count: int
    span: mpf
    gap_to_next: mpf | None


def cluster_stats(summary: SpectrumSummary, min_separation: float = 2.0) -> list:
    """Per-cluster band counts, spans and gaps.

    For P >= 2 the gap heights must be bimodal: the smallest wide-gap
    height has to exceed the largest narrow one by the factor
    ``min_separation``, otherwise ClusteringAmbiguous is raised.
    """
    bands = summary.bands
    with mp.workprec(summary.precision_bits or mp.prec):
        if summary.flux.P > 1 and len(bands) > 1:
            narrow, wide = [], []
            for left, right, h in zip(bands, bands[1:], summary.gap_heights):
                (wide if right.cluster_id != left.cluster_id else narrow).append(h)
            if not wide or not narrow or min(wide) < min_separation * max(narrow):
                raise ClusteringAmbiguous(
                    f"gap distribution for P={summary.flux.P}, Q={summary.flux.Q} is not clearly bimodal"
                )
        out = []
        groups: dict = {}
        for b in bands:
            groups.setdefault(b.cluster_id, []).append(b)
        ids = sorted(groups)
        for i, cid in enumerate(ids):
            members = groups[cid]
            gap = groups[ids[i + 1]][0].lo - members[-1].hi if i + 1 < len(ids) else None
            out.append(ClusterStat(cid, len(members), members[-1].hi - members[0].lo, gap))
        return out


def central_cluster(summary: SpectrumSummary) -> int:
    """Id of the cluster holding the centermost band."""
    return centermost_band(summary).cluster_id


def hausdorff_wd(summary: SpectrumSummary, d) -> mpf:
    """W(d) = sum of width^d over all bands."""
    with mp.workprec(summary.precision_bits or mp.prec):
        d = mpf(d)
        if not 0 < d <= 1:
            raise DomainError(f"d must lie in (0, 1], got {d}")
        return mpmath.fsum(b.width ** d for b in summary.bands)


@dataclass(frozen=True)
class DensityCheck:
    counted: int
    predicted: mpf


def integrated_dos(a, b, prec: int = 128) -> mpf:
    """int_a^b rho(x) dx, split at 0 where rho has a log singularity."""
    with mp.workprec(prec):
        a, b = mpf(a), mpf(b)
        if not -4 <= a < b <= 4:
            raise DomainError(f"window must satisfy -4 <= a < b <= 4, got [{a}, {b}]")
        spec = QuadratureSpec(abs_tol=mpf(2) ** (-prec + 24), endpoint_rule=EndpointRule.sqrt_singularity)
        pieces = [a] + ([mpf(0)] if a < 0 < b else []) + [b]

        def rho(x):
            return dos(x, prec)

        return mpmath.fsum(integrate(rho, lo, hi, spec, prec) for lo, hi in zip(pieces, pieces[1:]))


def band_density_check(summary: SpectrumSummary, window) -> DensityCheck:
    """Band centres counted in ``window`` against Q * int_window rho.

    rho is normalised to total mass 1 on (-4, 4), so Q * int rho is the
    predicted number of bands.
    """
    a, b = (mpf(w) for w in window)
    with mp.workprec(summary.precision_bits or mp.prec):
        counted = sum(1 for band in summary.bands if a <= (band.lo + band.hi) / 2 <= b)
    predicted = summary.flux.Q * integrated_dos(a, b)
    return DensityCheck(counted, predicted)
