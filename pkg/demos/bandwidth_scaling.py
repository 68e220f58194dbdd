"""
Total bandwidth and W(d) at P = 1
=================================

The total bandwidth times Q tends slowly to 32 beta(2) / pi, and the sums
W(d) = sum of width^d decrease with Q for every d > 0, the finite-Q trace of
a spectrum of Hausdorff dimension zero. The centermost band is compared with
its leading-order width 2 pi^2 / (Q ln Q), which is approached only
logarithmically.
"""

from mpmath import mp, nstr

from harperdisc import build_model, central_band_width_asym, compute_bands, thouless_w

print("   Q      W*Q    target    W(1/2)   centre/asym")
for Q in (21, 41, 81, 161):
    S = compute_bands(build_model(1, Q))
    with mp.workprec(S.precision_bits):
        ratio = S.centermost_width / central_band_width_asym(Q, 0)
        print(
            f"{Q:4d}  {nstr(S.total_width * Q, 6):>7}  {nstr(thouless_w(Q) * Q, 6):>7}"
            f"  {nstr(S.w_d[mp.mpf(1) / 2], 5):>8}  {nstr(ratio, 3):>6}"
        )
