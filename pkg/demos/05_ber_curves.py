"""Bit-error-rate curves of min-sum and NS-FAID kernels, layered decoding, 20 iterations.

Random codewords are sent: with F(0) = +-1 and a fixed tie sign the
all-zero codeword would look far better than it is. Desk scale: each point
stops after 60 frame errors. The SNR where each
curve crosses BER 1e-4 is interpolated and compared against min-sum.
Pass ``wimax`` to run the irregular code instead of the (3,6) one.
"""

import sys

from nsfaid.code import builtin_code, find_pipeline_row_order
from nsfaid.decoder import LAYERED, KernelSpec
from nsfaid.framing import identity, named_lut, parse_lut
from nsfaid.montecarlo import GF2Encoder, SimPlan, default_threads, random_codeword_mode, snr_at_ber

if len(sys.argv) > 1 and sys.argv[1] == "wimax":
    code = builtin_code("wimax_r12")
    order = tuple(find_pipeline_row_order(code))
    kernels = {
        "MS(4,6)": (identity(7), 3.2),
        "NS-FAID-433": ({2: named_lut(0), 3: named_lut(3), 6: named_lut(2)}, 2.8),
        "NS-FAID-222": ({2: named_lut(7), 3: named_lut(5), 6: named_lut(5)}, 2.3),
    }
else:
    code = builtin_code("regular_3_6")
    order = None
    kernels = {
        "MS(4,6)": (identity(7), 5.6),
        "NS-FAID w=3": (parse_lut("[0,1,1,3,3,3,7,7]"), 3.8),
        "NS-FAID w=2": (parse_lut("[+-1,1,1,1,1,6,6,6]"), 6.4),
    }

encoder = GF2Encoder(code)
crossing = {}
for name, (f, mu) in kernels.items():
    spec = KernelSpec(f, mu=mu, schedule=LAYERED, max_iter=20, row_order=order)
    points, snr = [], 1.0
    while True:
        plan = SimPlan(code, spec, (snr,), min_frame_errors=60, max_frames=300_000, seed=1,
                       threads=default_threads())
        (p,) = random_codeword_mode(plan, encoder)
        points.append(p)
        print(f"{name:12s} {snr:5.2f} dB  BER {p.ber:.2e}  FER {p.fer:.2e}  frames {p.frames}")
        if p.ber < 1e-4:
            break
        snr = round(snr + (0.1 if p.ber < 1e-2 else 0.25), 2)
    crossing[name] = snr_at_ber(points, 1e-4)

ref = crossing["MS(4,6)"]
for name, s in crossing.items():
    print(f"{name:12s} BER 1e-4 at {s:.3f} dB  ({ref - s:+.3f} dB vs MS)")
