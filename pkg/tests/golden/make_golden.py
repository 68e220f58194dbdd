"""Regenerate thresholds.json: empirical error levels of the asymptotic formulas.

The asymptotic statements only promise o(1) errors, so the thresholds are the
errors observed at the reference Q values, widened by MARGIN, and frozen.
Run once; rerun only when a formula or reference grid is deliberately changed.

    python3 tests/golden/make_golden.py
"""

import json
from pathlib import Path

from mpmath import mp, mpf

from harperdisc import build_model, flux_ratio, sigma_det, sigma_prime_zero_exact
from harperdisc.asymptotics import (
    mu_nu,
    sigma_prime_zero_asym,
    sigma_prime_zero_asym_p1,
    uniform_center,
)

MARGIN = 1.25
OUT = Path(__file__).with_name("thresholds.json")

# fixed-s subsequences used by the Sigma'(0) checks: Q = 4Pr + s for these r
SUBSEQ_R = (3, 6, 12)
SUBSEQ = {2: (1, 3, 5, 7), 3: (1, 5, 7, 11)}


def main():
    out = {"margin": MARGIN}

    err = abs(sigma_prime_zero_exact(flux_ratio(1, 401, 128)) - sigma_prime_zero_asym_p1(401))
    out["dprime_p1_q401_abs_error"] = float(err) * MARGIN

    per_s = {}
    for P, ss in SUBSEQ.items():
        for s in ss:
            Q = 4 * P * SUBSEQ_R[-1] + s
            f = flux_ratio(P, Q, 128)
            per_s[f"{P},{s}"] = float(abs(sigma_prime_zero_exact(f) - sigma_prime_zero_asym(f))) * MARGIN
    out["dprime_largest_q_abs_error"] = per_s
    out["dprime_subsequence_r"] = list(SUBSEQ_R)

    Q = 201
    model = build_model(1, Q, 4 * Q)
    with mp.workprec(4 * Q):
        rel = {}
        for t in ("0.5", "1", "2"):
            x = mpf(t) / Q
            exact = sigma_det(model, x).sigma
            rel[t] = float(abs(uniform_center(Q, x) / exact - 1)) * MARGIN
        out["uniform_center_q201_rel_error"] = rel
        ln_exact = mp.log(abs(sigma_det(model, 1).sigma))
        ln_asym = 2 * Q * mu_nu(mpf(1) / 4).mu + mp.log(2)
        out["uniform_away_q201_log_rel_error"] = float(abs(ln_asym / ln_exact - 1)) * MARGIN

    OUT.write_text(json.dumps(out, indent=2, sort_keys=True) + "\n")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
