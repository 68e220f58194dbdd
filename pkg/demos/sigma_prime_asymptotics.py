"""
Sigma'(0): exact sums against the large-Q expansion
===================================================

Sigma'(0) has a closed form as a finite sum over k. For fixed P and
Q = 4Pr + s the large-Q expansion depends on s, so errors are compared
along fixed-s subsequences.
"""

from mpmath import mp, nstr

from harperdisc import flux_ratio, sigma_prime_zero_report

for P, ss in ((1, (1,)), (2, (1, 3)), (3, (1, 5))):
    for s in ss:
        print(f"P={P} s={s}")
        for r in (2, 4, 8, 16):
            Q = 4 * P * r + s
            rep = sigma_prime_zero_report(flux_ratio(P, Q, 128))
            with mp.workprec(128):
                print(
                    f"  Q={Q:4d}  exact={nstr(rep.exact, 12):>18}  asym={nstr(rep.asymptotic, 12):>18}"
                    f"  rel.err={nstr(rep.rel_error, 3)}"
                )

# along each subsequence the absolute error roughly halves when Q doubles,
# while Sigma'(0) itself grows like Q ln Q. For P=2, Sigma'(0)/Q settles on
# visibly different values for s=1 and s=3.
