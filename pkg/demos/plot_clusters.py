"""
Clusters of P bands
===================

For P > 1 the bands group into clusters of P, separated by wide gaps,
except for a central cluster of s bands where Q = 4Pr + s. Gap strength is
measured by ln(|Sigma| / 4) at the critical point inside each gap.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
from mpmath import mp

from harperdisc import build_model, cluster_stats, compute_bands, flux_ratio

P, Q = 3, 41
f = flux_ratio(P, Q)
print(f"Q = 4*{P}*{f.r} + {f.s}")

summary = compute_bands(build_model(P, Q))
for c in cluster_stats(summary):
    print(f"cluster {c.cluster_id:2d}: {c.band_count} bands")

with mp.workprec(summary.precision_bits):
    heights = np.array([float(h) for h in summary.gap_heights])
    centres = np.array([float((a.hi + b.lo) / 2) for a, b in zip(summary.bands, summary.bands[1:])])

fig, ax = plt.subplots(figsize=(9, 4))
ax.semilogy(centres, heights, "o")
ax.axhline(5 * np.median(heights), color="grey", ls="--", label="wide-gap threshold")
ax.set_xlabel("gap position")
ax.set_ylabel("ln(|Sigma(c)| / 4)")
ax.set_title(f"gap heights at P/Q = {P}/{Q}")
ax.legend()
fig.tight_layout()
fig.savefig("clusters.png", dpi=120)
