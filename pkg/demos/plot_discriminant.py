"""
The discriminant and its bands
==============================

At flux P/Q the spectrum of Harper's equation is the set of x where
|Sigma(x)| <= 4. Sigma is a degree-Q polynomial; here we plot it for a
small Q and mark the bands.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
from mpmath import mp

from harperdisc import build_model, compute_bands, sigma_det

P, Q = 2, 11
model = build_model(P, Q)

# Sigma grows like x^Q outside [-4, 4], so plot sign(Sigma) * log(1 + |Sigma|)
xs = np.linspace(-4.2, 4.2, 2000)
with mp.workprec(model.precision_bits):
    sig = np.array([float(sigma_det(model, x).sigma) for x in xs])

summary = compute_bands(model)

fig, ax = plt.subplots(figsize=(9, 4))
ax.plot(xs, np.sign(sig) * np.log1p(np.abs(sig)), lw=1)
for level in (4, -4):
    ax.axhline(np.sign(level) * np.log1p(4), color="grey", ls="--", lw=0.8)
for band in summary.bands:
    ax.axvspan(float(band.lo), float(band.hi), color="orange", alpha=0.3)
ax.set_xlabel("x")
ax.set_ylabel("sign(Sigma) log(1 + |Sigma|)")
ax.set_title(f"P/Q = {P}/{Q}: {Q} bands, total width {float(summary.total_width):.4f}")
fig.tight_layout()
fig.savefig("discriminant.png", dpi=120)

# the zeros of Sigma are the eigenvalues of a Q x Q tridiagonal matrix,
# one inside each band
for band, z in zip(summary.bands, summary.zeros):
    print(f"band {band.index:2d}  [{float(band.lo):+.6f}, {float(band.hi):+.6f}]  zero {float(z) + 0.0:+.6f}")
