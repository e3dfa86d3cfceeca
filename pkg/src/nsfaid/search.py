"""Design-space search over framing functions.

Regular search ranks every framing of a given weight by its optimized
threshold. The irregular search works per VN degree: uniform kernels are
screened into best-sets ``U_w``, and degree-indexed tuples drawn from those
sets are kept when every image set is contained in the image of the
widest framing.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

import numpy as np

from .code import DegreeDistribution
from .density import (MU_GRID, DegenerateKernelError, ThresholdResult, exists_mu_below,
                      optimize_mu)
from .framing import FramingFunction, count_framings, enumerate_framings, format_lut, identity

DEFAULT_CUTOFFS = {2: 5.0, 3: 3.0}


@dataclass
class RegularEntry:
    framing: FramingFunction
    threshold: ThresholdResult | None

    @property
    def snr_db(self) -> float:
        return math.inf if self.threshold is None else self.threshold.snr_db


def _progress_iter(items, progress):
    for i, item in enumerate(items):
        if progress:
            progress(i, item)
        yield item


def search_regular(dist: DegreeDistribution, q: int = 4, W: int = 4, eta: float = 0.0,
                   mu_grid=MU_GRID, framings: Iterable[FramingFunction] | None = None,
                   progress=None) -> list[RegularEntry]:
    """Optimize ``mu`` for every weight-``W`` framing and rank by threshold (best first).

    Kernels without a threshold in the search range rank last.
    """
    Q = 2 ** (q - 1) - 1
    pool = list(framings) if framings is not None else list(enumerate_framings(Q, W))
    out = []
    for f in _progress_iter(pool, progress):
        try:
            res = optimize_mu(dist, f, eta, mu_grid)
        except DegenerateKernelError:
            res = None
        out.append(RegularEntry(f, res))
    out.sort(key=lambda e: (e.snr_db, e.framing.lut))
    return out


def best_per_lambda(ranked: list[RegularEntry]) -> dict[int, RegularEntry]:
    """Best entry for each value of ``|F(0)|``."""
    best = {}
    for e in ranked:
        if e.threshold is not None and e.framing.lam not in best:
            best[e.framing.lam] = e
    return dict(sorted(best.items()))


# uniform best-sets


def w_to_weight(w: int) -> int:
    """Largest weight storable on ``w`` bits."""
    return 2 ** (w - 1)


@dataclass
class UniformSet:
    w: int
    cutoff_db: float | None
    members: list[FramingFunction]
    witness_mu: list[float | None]
    screened: int


def build_best_uniform_sets(dist: DegreeDistribution, q: int = 4, cutoffs=None,
                            eta: float = 1e-6, mu_grid=MU_GRID,
                            progress=None) -> dict[int, UniformSet]:
    """Uniform kernels whose optimized threshold is at most the cutoff, per bit-length.

    A kernel qualifies as soon as one gain factor in the grid makes DE converge
    at the cutoff SNR, which is the same as its optimized threshold being at most
    the cutoff. The full-width set ``w = q`` is the MS kernel alone.
    """
    cutoffs = dict(DEFAULT_CUTOFFS if cutoffs is None else cutoffs)
    Q = 2 ** (q - 1) - 1
    sets = {}
    for w, cut in sorted(cutoffs.items()):
        if w >= q:
            continue
        pool = list(enumerate_framings(Q, w_to_weight(w)))
        members, mus = [], []
        for f in _progress_iter(pool, progress):
            mu = exists_mu_below(dist, f, cut, eta, mu_grid)
            if mu is not None:
                members.append(f)
                mus.append(mu)
        sets[w] = UniformSet(w, cut, members, mus, len(pool))
    sets[q] = UniformSet(q, None, [identity(Q)], [None], 1)
    return sets


def total_uniform_candidates(Q: int = 7, bit_lengths=(2, 3, 4)) -> int:
    """Number of framings available when each degree may use any of ``bit_lengths``."""
    return sum(count_framings(Q, w_to_weight(w)) for w in bit_lengths)


# irregular candidates


def widest_degree(w_profile: Mapping[int, int]) -> int:
    """Degree attaining the largest bit-length, ties broken towards the larger degree."""
    return max(w_profile, key=lambda d: (w_profile[d], d))


def images_admissible(framings: Mapping[int, FramingFunction]) -> bool:
    """Every image set is contained in the image of the widest framing."""
    w_profile = {d: f.bit_length for d, f in framings.items()}
    top = framings[widest_degree(w_profile)].image
    return all(f.image <= top for f in framings.values())


def _image_mask(f: FramingFunction) -> int:
    Q = f.Q
    return sum(1 << (v + Q) for v in f.image)


@dataclass
class IrregularCandidate:
    framings: dict[int, FramingFunction]
    threshold: ThresholdResult | None = None
    memory: "MemoryReduction | None" = None

    @property
    def w_profile(self) -> dict[int, int]:
        return {d: f.bit_length for d, f in sorted(self.framings.items())}

    @property
    def label(self) -> str:
        return "".join(str(w) for w in self.w_profile.values())


def _profiles(usets: Mapping[int, UniformSet], degrees) -> Iterator[tuple[int, ...]]:
    return itertools.product(sorted(usets), repeat=len(degrees))


def enumerate_irregular(usets: Mapping[int, UniformSet], degrees=(2, 3, 6),
                        profile: tuple[int, ...] | None = None) -> Iterator[IrregularCandidate]:
    """Stream degree-indexed framing tuples drawn from the best-sets that satisfy image inclusion."""
    degrees = tuple(degrees)
    profiles = [profile] if profile is not None else _profiles(usets, degrees)
    for prof in profiles:
        wmap = dict(zip(degrees, prof))
        top = widest_degree(wmap)
        for ftop in usets[wmap[top]].members:
            img = ftop.image
            pools = []
            for d in degrees:
                if d == top:
                    pools.append([ftop])
                else:
                    pools.append([f for f in usets[wmap[d]].members if f.image <= img])
            for combo in itertools.product(*pools):
                yield IrregularCandidate(dict(zip(degrees, combo)))


def count_irregular(usets: Mapping[int, UniformSet], degrees=(2, 3, 6),
                    by_profile: bool = False):
    """Exact number of candidates ``enumerate_irregular`` would emit, without materializing them."""
    degrees = tuple(degrees)
    masks = {w: np.array([_image_mask(f) for f in s.members], dtype=np.int64)
             for w, s in usets.items()}
    counts = {}
    for prof in _profiles(usets, degrees):
        wmap = dict(zip(degrees, prof))
        top = widest_degree(wmap)
        others = [wmap[d] for d in degrees if d != top]
        total = 0
        for m in masks[wmap[top]]:
            prod = 1
            for w in others:
                prod *= int(np.count_nonzero((masks[w] & ~m) == 0))
                if not prod:
                    break
            total += prod
        counts[prof] = total
    return counts if by_profile else sum(counts.values())


# memory accounting


@dataclass(frozen=True)
class MemoryReduction:
    """Fractional memory savings relative to full-width (``q``-bit) messages; negative = smaller."""

    vn: float
    cn_uncompressed: float
    cn_compressed: float

    def percentages(self) -> tuple[float, float, float]:
        return tuple(round(100.0 * v, 2) + 0.0 for v in (self.vn, self.cn_uncompressed, self.cn_compressed))


def compressed_cn_bits(dc: int, mag_bits: int) -> int:
    """Signs, two minima and the index of the first minimum."""
    return dc + 2 * mag_bits + math.ceil(math.log2(dc))


def memory_reduction(w_profile: Mapping[int, int], dist: DegreeDistribution, q: int = 4) -> MemoryReduction:
    """Savings of VN messages, uncompressed CN messages and compressed CN storage.

    VN messages are weighted by edge fractions ``lambda_d``; compressed CN
    storage is averaged over check nodes (node-perspective ``rho``).
    """
    missing = [d for d in dist.lam if d not in w_profile]
    if missing:
        raise ValueError(f"no bit-length for VN degree(s) {missing}")
    wmax = max(w_profile[d] for d in dist.lam)
    vn = sum(dist.lam[d] * w_profile[d] for d in dist.lam) / q
    cn_u = wmax / q
    node = dist.cn_node_fractions
    full = sum(node[d] * compressed_cn_bits(d, q - 1) for d in node)
    saved = 2 * (q - wmax)
    return MemoryReduction(-(1.0 - vn), -(1.0 - cn_u), -saved / full)


# ensemble evaluation


@dataclass
class EnsembleTable:
    best: dict[str, IrregularCandidate] = field(default_factory=dict)
    evaluated: int = 0
    partial: bool = False


def evaluate_ensemble(candidates: Iterable[IrregularCandidate], dist: DegreeDistribution,
                      eta: float = 1e-6, budget: int | None = None, mu_grid=MU_GRID,
                      q: int = 4, progress=None) -> EnsembleTable:
    """Optimized threshold of each candidate, keeping the best per bit-length profile.

    Stops after ``budget`` evaluations and flags the table as partial.
    """
    table = EnsembleTable()
    for cand in candidates:
        if budget is not None and table.evaluated >= budget:
            table.partial = True
            break
        try:
            cand.threshold = optimize_mu(dist, cand.framings, eta, mu_grid)
        except DegenerateKernelError:
            cand.threshold = None
        table.evaluated += 1
        if progress:
            progress(table.evaluated, cand)
        if cand.threshold is None:
            continue
        cand.memory = memory_reduction(cand.w_profile, dist, q)
        cur = table.best.get(cand.label)
        if cur is None or cand.threshold.snr_db < cur.threshold.snr_db:
            table.best[cand.label] = cand
    return table


def candidate_record(cand: IrregularCandidate, ms_threshold_db: float | None = None) -> dict:
    vn, cn_u, cn_c = cand.memory.percentages() if cand.memory else (None, None, None)
    th = cand.threshold
    gain = None
    if th is not None and ms_threshold_db is not None:
        gain = round(ms_threshold_db - th.snr_db, 3)
    return {
        "w_profile": cand.label,
        "luts": {str(d): format_lut(f) for d, f in sorted(cand.framings.items())},
        "threshold_db": None if th is None else th.snr_db,
        "mu": None if th is None else th.mu_opt,
        "gain_vs_ms_db": gain,
        "mem_vn": vn,
        "mem_cn_u": cn_u,
        "mem_cn_c": cn_c,
    }


def write_records_json(path, records) -> None:
    with open(path, "w") as fh:
        json.dump(records, fh, indent=2)


def write_records_csv(path, records) -> None:
    cols = ["w_profile", "luts", "threshold_db", "mu", "gain_vs_ms_db", "mem_vn", "mem_cn_u", "mem_cn_c"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for r in records:
            row = dict(r)
            row["luts"] = " ".join(f"{d}:{v}" for d, v in r["luts"].items())
            w.writerow([row[c] for c in cols])
