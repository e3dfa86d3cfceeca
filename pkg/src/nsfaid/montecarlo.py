"""Frame-level BER/FER simulation over BPSK-AWGN.

The noise of every frame comes from its own generator, seeded by
``(seed, SNR in milli-dB, frame index)``. Frames run in fixed-size batches
and the stopping rule is checked at batch boundaries in batch order, so
results do not depend on how many worker threads are used.
"""

from __future__ import annotations

import csv
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import quantize, sigma_from_snr, transmit
from .code import QcCode, TannerGraph
from .decoder import Decoder, KernelSpec
from .framing import ALWAYS_POSITIVE

BATCH = 32
_SNR_OFFSET = 1_000_000


@dataclass(frozen=True)
class SimPlan:
    code: QcCode | TannerGraph
    spec: KernelSpec
    snrs: tuple[float, ...]
    min_frame_errors: int = 100
    max_frames: int = 10_000_000
    seed: int = 0
    threads: int = 1
    batch: int = BATCH

    def __post_init__(self):
        snrs = tuple(float(s) for s in self.snrs)
        object.__setattr__(self, "snrs", snrs)
        if not snrs:
            raise ValueError("no SNR points")
        if any(b <= a for a, b in zip(snrs, snrs[1:])):
            raise ValueError("SNRs must be strictly increasing")
        if self.min_frame_errors < 1:
            raise ValueError("min_frame_errors must be >= 1")
        if self.max_frames < 1 or self.batch < 1 or self.threads < 1:
            raise ValueError("max_frames, batch and threads must be positive")


@dataclass(frozen=True)
class BerPoint:
    snr_db: float
    frames: int
    bit_errors: int
    frame_errors: int
    n_bits: int
    iterations: int

    @property
    def ber(self) -> float:
        return self.bit_errors / (self.frames * self.n_bits)

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames

    @property
    def avg_iters(self) -> float:
        return self.iterations / self.frames


def frame_rng(seed: int, snr_db: float, frame: int) -> np.random.Generator:
    key = int(round(snr_db * 1000)) + _SNR_OFFSET
    return np.random.default_rng([seed, key, frame])


class GF2Encoder:
    """Systematic encoder from Gaussian elimination of ``H`` over GF(2).

    Pivot columns carry parity; the remaining ``K`` columns carry the data
    bits, and parity is recovered by ``p = P u (mod 2)``.
    """

    def __init__(self, code):
        g = code.expand() if isinstance(code, QcCode) else code
        H = g.to_dense().astype(np.uint8)
        M, N = H.shape
        H = H.copy()
        pivots = []
        row = 0
        for col in range(N):
            if row == M:
                break
            nz = np.flatnonzero(H[row:, col])
            if nz.size == 0:
                continue
            r = row + nz[0]
            if r != row:
                H[[row, r]] = H[[r, row]]
            hits = np.flatnonzero(H[:, col])
            hits = hits[hits != row]
            H[hits] ^= H[row]
            pivots.append(col)
            row += 1
        self.N = N
        self.rank = row
        self.parity_cols = np.array(pivots, dtype=np.int64)
        self.info_cols = np.setdiff1d(np.arange(N), self.parity_cols)
        self.K = self.info_cols.size
        # reduced rows: x_pivot(r) = sum_j H[r, info_j] u_j
        self.P = H[:row][:, self.info_cols].astype(np.int64)
        self.graph = g

    def encode(self, info) -> np.ndarray:
        u = np.asarray(info, dtype=np.int64)
        if u.shape != (self.K,):
            raise ValueError(f"expected {self.K} data bits")
        x = np.zeros(self.N, dtype=np.uint8)
        x[self.info_cols] = u
        x[self.parity_cols] = (self.P @ u) & 1
        return x


def _run_batch(dec: Decoder, plan: SimPlan, snr: float, start: int, count: int, encoder):
    sigma = sigma_from_snr(snr)
    Q = plan.spec.alphabet.Q
    N = dec.graph.N
    bit_err = frame_err = iters = 0
    zeros = np.zeros(N, dtype=np.uint8)
    for f in range(start, start + count):
        rng = frame_rng(plan.seed, snr, f)
        if encoder is None:
            x = zeros
        else:
            x = encoder.encode(rng.integers(0, 2, encoder.K))
        y = transmit(x, sigma, rng)
        tie_seed = int(rng.integers(0, 2**63))
        res = dec.decode(quantize(y, plan.spec.mu, Q), seed=tie_seed)
        e = int(np.count_nonzero(res.bits != x))
        bit_err += e
        frame_err += e > 0
        iters += res.iterations_used
    return count, bit_err, frame_err, iters


def _simulate(plan: SimPlan, encoder=None, progress=None) -> list[BerPoint]:
    dec = Decoder(plan.code, plan.spec)
    N = dec.graph.N
    points = []
    with ThreadPoolExecutor(max_workers=plan.threads) as pool:
        for snr in plan.snrs:
            frames = bits = ferr = iters = 0
            next_start = 0
            done = False
            while not done:
                jobs = []
                for _ in range(plan.threads):
                    if next_start >= plan.max_frames:
                        break
                    cnt = min(plan.batch, plan.max_frames - next_start)
                    jobs.append(pool.submit(_run_batch, dec, plan, snr, next_start, cnt, encoder))
                    next_start += cnt
                for job in jobs:
                    c, b, fe, it = job.result()
                    if done:
                        continue  # batches past the stopping point are discarded
                    frames += c
                    bits += b
                    ferr += fe
                    iters += it
                    if ferr >= plan.min_frame_errors or frames >= plan.max_frames:
                        done = True
                if not jobs:
                    done = True
            pt = BerPoint(snr, frames, bits, ferr, N, iters)
            points.append(pt)
            if progress:
                progress(pt)
    return points


def run(plan: SimPlan, progress=None) -> list[BerPoint]:
    """All-zero codeword simulation of every SNR in the plan.

    Only unbiased for sign-symmetric decoders. With ``F(0) != 0`` and the
    ``always_positive`` tie rule every zero sum is pushed towards the sent
    bit, so results are far too optimistic; use :func:`random_codeword_mode`
    or the ``randomized`` tie rule for such kernels.
    """
    spec = plan.spec
    if spec.has_lambda and spec.tie_mode == ALWAYS_POSITIVE:
        warnings.warn("all-zero codeword with always_positive ties on a kernel with F(0) != 0 "
                      "overstates performance; use random codewords", stacklevel=2)
    return _simulate(plan, None, progress)


def random_codeword_mode(plan: SimPlan, encoder: GF2Encoder | None = None, progress=None) -> list[BerPoint]:
    """Same statistics on random codewords from ``encoder`` (built from the code when omitted)."""
    if encoder is None:
        encoder = GF2Encoder(plan.code)
    return _simulate(plan, encoder, progress)


def default_threads() -> int:
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


def ber_interval(pt: BerPoint, z: float = 1.96) -> tuple[float, float]:
    """Normal-approximation interval on the BER, counting frames as the independent unit."""
    if pt.frames < 2:
        return (0.0, 1.0)
    p = pt.ber
    se = math.sqrt(max(p * (1 - p), 1e-300) / (pt.frames * pt.n_bits))
    return (max(p - z * se, 0.0), p + z * se)


def monotonicity_violations(points: list[BerPoint], z: float = 5.0) -> list[tuple[float, float]]:
    """SNR pairs where BER increases by more than ``z`` standard errors."""
    out = []
    for a, b in zip(points, points[1:]):
        if b.ber <= a.ber:
            continue
        se = math.sqrt(a.ber * (1 - a.ber) / (a.frames * a.n_bits) + b.ber * (1 - b.ber) / (b.frames * b.n_bits))
        if b.ber - a.ber > z * se:
            out.append((a.snr_db, b.snr_db))
    return out


def snr_at_ber(points: list[BerPoint], target: float) -> float:
    """SNR where the BER curve crosses ``target``, interpolating ``log10(BER)`` linearly."""
    pts = [(p.snr_db, p.ber) for p in points]
    for (s0, b0), (s1, b1) in zip(pts, pts[1:]):
        if b0 >= target >= b1 and b0 > 0:
            if b1 <= 0:
                return s1
            l0, l1, lt = math.log10(b0), math.log10(b1), math.log10(target)
            return s0 + (s1 - s0) * (l0 - lt) / (l0 - l1) if l0 != l1 else s0
    raise ValueError(f"BER {target:g} not bracketed by the simulated points")


def write_csv(path, points: list[BerPoint]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["snr_db", "frames", "bit_errors", "frame_errors", "ber", "fer", "avg_iters"])
        for p in points:
            w.writerow([f"{p.snr_db:.3f}", p.frames, p.bit_errors, p.frame_errors,
                        f"{p.ber:.6e}", f"{p.fer:.6e}", f"{p.avg_iters:.3f}"])
