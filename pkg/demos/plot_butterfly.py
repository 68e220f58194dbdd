"""
A small butterfly
=================

Bands for every coprime P/Q with Q <= N, drawn against the flux. Even Q use
the transfer-matrix route; the two bands at 0 touch there.
"""

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from harperdisc import Route, build_model, compute_bands

N = 15
fig, ax = plt.subplots(figsize=(7, 7))
for Q in range(1, N + 1):
    for P in range(1, Q + 1):
        if math.gcd(P, Q) != 1:
            continue
        route = Route.determinant if Q % 2 else Route.transfer_matrix
        S = compute_bands(build_model(P, Q), route=route)
        for b in S.bands:
            ax.plot([float(b.lo), float(b.hi)], [P / Q, P / Q], color="black", lw=0.8)
ax.set_xlabel("x")
ax.set_ylabel("P/Q")
ax.set_xlim(-4, 4)
fig.tight_layout()
fig.savefig("butterfly.png", dpi=120)
