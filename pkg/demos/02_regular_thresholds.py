"""Density-evolution thresholds of the best regular (3,6) kernels.

Each kernel is optimized over the gain-factor grid 1.0..12.0 (step 0.1).
Expect roughly 1.643 dB for min-sum and 1.41 dB for the best 3-bit kernel.
"""

import time

from nsfaid.code import DegreeDistribution
from nsfaid.density import optimize_mu
from nsfaid.framing import identity, parse_lut

dist = DegreeDistribution.regular(3, 6)
kernels = {
    "MS (q=4)": identity(7),
    "w=3  [0,1,1,3,3,3,7,7]": parse_lut("[0,1,1,3,3,3,7,7]"),
    "w=2  [+-1,1,1,1,1,6,6,6]": parse_lut("[+-1,1,1,1,1,6,6,6]"),
    "w=2  [0,0,0,0,0,6,6,6]": parse_lut("[0,0,0,0,0,6,6,6]"),
}

for name, f in kernels.items():
    t = time.time()
    r = optimize_mu(dist, f, eta=0.0)
    print(f"{name:28s} {r.snr_db:.3f} dB  mu*={r.mu_opt:.1f}  ({time.time() - t:.0f} s)")
