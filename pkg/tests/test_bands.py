import math

import mpmath
import numpy as np
import pytest
from mpmath import mp, mpf

from harperdisc.asymptotics import mu_nu
from harperdisc.bands import (
    band_density_check,
    central_cluster,
    centermost_lower_bound_report,
    cluster_stats,
    compute_bands,
    hausdorff_wd,
    integrated_dos,
)
from harperdisc.errors import ClusteringAmbiguous, DomainError, ParityError
from harperdisc.exactdisc import Route, build_model, evaluator, sigma_prime_zero_exact


def test_q1_single_band():
    S = compute_bands(build_model(1, 1))
    (b,) = S.bands
    with mp.workprec(S.precision_bits):
        assert abs(b.lo + 4) < mpf(2) ** -60 and abs(b.hi - 4) < mpf(2) ** -60
        assert abs(S.total_width - 8) < mpf(2) ** -60


def test_q3_cubic_oracle(band_runs):
    S = band_runs(1, 3)
    with mp.workprec(S.precision_bits):
        r3 = mpmath.sqrt(3)
        # |x^3 - 6x| <= 4 with x^3 - 6x + 4 = (x - 2)(x^2 + 2x - 2)
        ref = [(-1 - r3, -2), (1 - r3, r3 - 1), (2, 1 + r3)]
        for b, (lo, hi) in zip(S.bands, ref):
            assert abs(b.lo - lo) < mpf(2) ** -60 and abs(b.hi - hi) < mpf(2) ** -60
        assert abs(S.centermost_width - 2 * (r3 - 1)) < mpf(2) ** -60
        assert abs(S.total_width - (2 * (r3 - 1) + 2 * (r3 - 1))) < mpf(2) ** -60
        rep = centermost_lower_bound_report(S, build_model(1, 3))
        assert abs(rep.bound_ratio - 2 * (r3 - 1) * 6 / 8) < mpf(2) ** -60
        assert abs(rep.bound_ratio - mpf("1.098")) < mpf("1e-3")


@pytest.mark.parametrize("P,Q", [(1, 4), (3, 8), (1, 10), (3, 10)])
def test_even_q_bands_touch_at_zero(P, Q):
    S = compute_bands(build_model(P, Q), route=Route.transfer_matrix)
    assert len(S.bands) == Q
    with mp.workprec(S.precision_bits):
        shared = [(a, b) for a, b in zip(S.bands, S.bands[1:]) if a.hi == b.lo]
        assert len(shared) == 1
        assert abs(shared[0][0].hi) < mpf(2) ** -40


def test_even_q_needs_transfer_route():
    with pytest.raises(ParityError):
        compute_bands(build_model(1, 4), route=Route.determinant)


@pytest.mark.parametrize("P,Q", [(1, 21), (2, 21), (3, 41), (5, 33), (1, 41), (4, 45)])
def test_band_invariants(P, Q, band_runs):
    S = band_runs(P, Q)
    m = build_model(P, Q, S.precision_bits)
    f = evaluator(m)
    with mp.workprec(S.precision_bits):
        assert len(S.bands) == Q
        assert [b.index for b in S.bands] == list(range(1, Q + 1))
        assert abs(S.total_width - mpmath.fsum(b.width for b in S.bands)) < mpf(2) ** -100
        assert -4 <= S.bands[0].lo and S.bands[-1].hi <= 4
        for b, nxt in zip(S.bands, S.bands[1:]):
            assert b.hi < nxt.lo
        for b, z in zip(S.bands, S.zeros):
            assert b.lo < z < b.hi
            assert b.width == b.hi - b.lo
            for e in (b.lo, b.hi):
                v, d = f(e)
                assert abs(abs(v) - 4) <= max(b.width * mpf(2) ** -18, mpf(2) ** (-S.precision_bits // 2)) * abs(d)
            # monotone across the band: Sigma' keeps its sign on a sample grid
            signs = {mpmath.sign(f(b.lo + b.width * k / 16)[1]) for k in range(1, 16)}
            assert len(signs) == 1
        # mirror symmetry of the spectrum
        for b, c in zip(S.bands, reversed(S.bands)):
            assert abs(b.lo + c.hi) < mpf(2) ** -60 * (1 + abs(b.lo))
            assert abs(b.width - c.width) <= mpf(2) ** -16 * b.width


@pytest.mark.parametrize("P,Q", [(1, 21), (3, 41), (2, 45), (5, 33)])
def test_centermost_mean_value_bound(P, Q, band_runs):
    S = band_runs(P, Q)
    rep = centermost_lower_bound_report(S, build_model(P, Q))
    with mp.workprec(S.precision_bits):
        assert rep.width * rep.max_derivative >= 8 * (1 - mpf(2) ** -30)
        assert rep.sigma_prime_zero == sigma_prime_zero_exact(build_model(P, Q, S.precision_bits).flux)
        assert rep.bound_ratio > 0


def test_p1_clusters_are_single_bands(band_runs):
    stats = cluster_stats(band_runs(1, 21))
    assert len(stats) == 21 and all(c.band_count == 1 for c in stats)


def test_p3_q41_clusters(band_runs):
    S = band_runs(3, 41)
    stats = cluster_stats(S)
    counts = [c.band_count for c in stats]
    mid = central_cluster(S)
    assert counts[mid] == 5
    assert all(c == 3 for i, c in enumerate(counts) if i != mid)
    assert all(c.gap_to_next > 0 for c in stats[:-1]) and stats[-1].gap_to_next is None


def test_p2_q33_is_ambiguous(band_runs):
    # gaps inside P = 2 clusters are not well separated from the wide ones at this Q
    with pytest.raises(ClusteringAmbiguous):
        cluster_stats(band_runs(2, 33))


def test_hausdorff_wd(band_runs):
    S = band_runs(1, 21)
    with mp.workprec(S.precision_bits):
        assert abs(hausdorff_wd(S, 1) - S.total_width) < mpf(2) ** -100
        assert abs(hausdorff_wd(S, mpf("1e-12")) - 21) < mpf("1e-9")
        assert S.w_d[mpf(1) / 2] == hausdorff_wd(S, mpf(1) / 2)
    for bad in (0, "1.1", -1):
        with pytest.raises(DomainError):
            hausdorff_wd(S, bad)


def test_hausdorff_half_decreases(band_runs):
    w = [hausdorff_wd(band_runs(1, Q), mpf(1) / 2) for Q in (21, 41, 61)]
    assert w[0] > w[1] > w[2]


def test_integrated_dos_normalisation():
    assert abs(integrated_dos(-4, 4) - 1) < mpf("1e-25")
    assert abs(integrated_dos(1, 2) - integrated_dos(-2, -1)) < mpf("1e-30")
    with pytest.raises(DomainError):
        integrated_dos(1, 5)


def test_density_counts(band_runs):
    S = band_runs(1, 101)
    full = band_density_check(S, (-4, 4))
    assert full.counted == 101 and abs(full.predicted - 101) < mpf("1e-20")
    left, right = band_density_check(S, (-1.5, -1)), band_density_check(S, (1, 1.5))
    assert left.counted == right.counted
    assert abs(right.counted - right.predicted) <= 2


def test_widths_decay_exponentially(band_runs):
    # ln(width) against 2 Q mu(|x|/4) for bands well away from the centre
    Q = 101
    S = band_runs(1, Q)
    xs, ys = [], []
    with mp.workprec(S.precision_bits):
        for b in S.bands:
            c = (b.lo + b.hi) / 2
            if 1 <= c <= 3.5:
                xs.append(float(2 * Q * mu_nu(c / 4).mu))
                ys.append(float(mpmath.log(b.width)))
    slope, _ = np.polyfit(xs, ys, 1)
    assert abs(slope + 1) < 0.1


def test_edge_tolerance_is_respected():
    S = compute_bands(build_model(2, 21), edge_tol=mpf("1e-30"))
    f = evaluator(build_model(2, 21, S.precision_bits))
    with mp.workprec(S.precision_bits):
        for b in S.bands:
            for e in (b.lo, b.hi):
                v, d = f(e)
                assert abs(abs(v) - 4) <= mpf("1e-30") * abs(d)
    with pytest.raises(DomainError):
        compute_bands(build_model(1, 3), edge_tol=0)


def test_precision_escalation_reports_final_precision(monkeypatch):
    monkeypatch.setenv("HARPERDISC_MAX_PRECISION", "4096")
    S = compute_bands(build_model(1, 61, 128))
    assert S.precision_bits >= max(128, 4 * 61)
    assert math.isfinite(float(S.total_width * 61))
