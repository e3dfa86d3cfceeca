"""Architecture-level analysis: pipelining, VN-to-VNU mapping and throughput."""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .code import QcCode, group_layers
from .framing import FramingFunction

PIPELINED = "pipelined"
FULL_LAYER = "full_layer"
VARIANT_DELTA = {PIPELINED: 1, FULL_LAYER: 0}


def throughput(N: int, f_max: float, L: int, n_iter: int, variant: str = PIPELINED) -> float:
    """Decoded bits per second: ``N f_max / (delta + L n_iter)``.

    ``delta`` is one extra layer slot for the pipelined data path and zero for
    the full-layer architecture.
    """
    if variant not in VARIANT_DELTA:
        raise ValueError(f"unknown variant {variant!r}")
    if min(N, f_max, L, n_iter) <= 0:
        raise ValueError("throughput inputs must be positive")
    return N * f_max / (VARIANT_DELTA[variant] + L * n_iter)


def throughput_mbps(N: int, f_mhz: float, L: int, n_iter: int, variant: str = PIPELINED) -> int:
    """Throughput floored to whole Mbps (``f_mhz`` in MHz)."""
    return math.floor(throughput(N, f_mhz, L, n_iter, variant) + 1e-9)


@dataclass(frozen=True)
class PipelineReport:
    ok: bool
    violations: tuple[tuple[int, int, int], ...]


def check_pipeline(code: QcCode, row_order=None, rpl: int = 1) -> PipelineReport:
    """Consecutive layers (cyclically) must not share a column; violations are ``(layer, next, column)``."""
    sched = group_layers(code, rpl, row_order)
    viol = tuple((a, b, c) for (a, b), cols in sched.boundary_overlaps.items() for c in cols)
    return PipelineReport(not viol, viol)


# VN-to-VNU mapping


@dataclass
class VnuMapping:
    """Per-layer assignment of active base columns to VNU slots.

    ``assignment[l][k]`` is the base column processed by slot ``k`` in layer
    ``l``, or ``-1`` when the slot idles. ``slot_framings[k]`` lists the framing
    classes (labels) slot ``k`` must implement.
    """

    layers: list[list[int]]
    assignment: list[list[int]]
    slot_framings: list[tuple]
    cost: tuple[int, int]

    @property
    def slots(self) -> int:
        return len(self.slot_framings)

    def multiplicity_histogram(self) -> dict[int, int]:
        hist = {}
        for s in self.slot_framings:
            hist[len(s)] = hist.get(len(s), 0) + 1
        return dict(sorted(hist.items()))

    def report(self, degree_of=None) -> str:
        lines = ["layer | " + " ".join(f"VNU{k + 1:<3}" for k in range(self.slots))]
        for l, row in enumerate(self.assignment):
            cells = []
            for c in row:
                if c < 0:
                    cells.append("  -   ")
                elif degree_of is not None:
                    cells.append(f"{c:>2}(d{degree_of[c]})")
                else:
                    cells.append(f"{c:>6}")
            lines.append(f"{l:>5} | " + " ".join(cells))
        lines.append("  F's | " + " ".join(f"{','.join(map(str, s)):<6}" for s in self.slot_framings))
        return "\n".join(lines)


def mapping_cost(slot_sets) -> tuple[int, int]:
    """Lexicographic cost: slots needing more than one framing, then total framing instances."""
    return (sum(1 for s in slot_sets if len(s) > 1), sum(len(s) for s in slot_sets))


def _framing_classes(code: QcCode, framings) -> np.ndarray:
    """Class label per base column: the VN degree, merged when degrees share a framing."""
    deg = code.column_degrees
    if framings is None:
        return deg.copy()
    if isinstance(framings, FramingFunction):
        return np.zeros_like(deg)
    rep = {}
    labels = np.empty_like(deg)
    for j, d in enumerate(deg):
        f = framings[int(d)]
        key = f.lut
        rep.setdefault(key, int(d))
        labels[j] = rep[key]
    return labels


def _feasible(layer_counts: list[dict], slot_sets, classes) -> bool:
    """Hall's condition: each layer's columns fit into slots able to frame them."""
    for counts in layer_counts:
        for r in range(1, len(classes) + 1):
            for T in itertools.combinations(classes, r):
                need = sum(counts.get(c, 0) for c in T)
                have = sum(1 for s in slot_sets if s & set(T))
                if need > have:
                    return False
    return True


def _assign_layer(cols, labels, slot_sets) -> list[int]:
    """Match a layer's columns to slots (augmenting paths)."""
    S = len(slot_sets)
    owner = [-1] * S

    def try_col(i, seen):
        for k in range(S):
            if labels[cols[i]] in slot_sets[k] and k not in seen:
                seen.add(k)
                if owner[k] < 0 or try_col(owner[k], seen):
                    owner[k] = i
                    return True
        return False

    for i in range(len(cols)):
        if not try_col(i, set()):
            raise RuntimeError("no matching for a feasible slot configuration")
    return [cols[i] if i >= 0 else -1 for i in owner]


def optimize_vnu_mapping(code: QcCode, row_order=None,
                         framings: Mapping[int, FramingFunction] | FramingFunction | None = None,
                         rpl: int = 1) -> VnuMapping:
    """Column-to-slot assignment minimizing framing blocks per VNU slot.

    Only the framing class of each column matters, so the search runs over
    multisets of per-slot class sets, cheapest first, and keeps the first one
    every layer can be matched into. This is exact. ``framings`` maps VN degree
    to framing; ``None`` treats each degree as its own class.
    """
    sched = group_layers(code, rpl, row_order)
    mask = code.mask
    labels = _framing_classes(code, framings)
    layers = [sorted(int(c) for r in layer for c in np.flatnonzero(mask[r])) for layer in sched.layers]
    S = max(len(cols) for cols in layers)
    classes = sorted({int(labels[c]) for cols in layers for c in cols})
    layer_counts = []
    for cols in layers:
        counts = {}
        for c in cols:
            counts[int(labels[c])] = counts.get(int(labels[c]), 0) + 1
        layer_counts.append(counts)
    subsets = [frozenset(s) for r in range(1, len(classes) + 1)
               for s in itertools.combinations(classes, r)]
    configs = sorted(itertools.combinations_with_replacement(subsets, S),
                     key=lambda cfg: (mapping_cost(cfg), [sorted(s) for s in cfg]))
    for cfg in configs:
        if _feasible(layer_counts, cfg, classes):
            slot_sets = [set(s) for s in cfg]
            assignment = [_assign_layer(cols, labels, slot_sets) for cols in layers]
            return VnuMapping(layers, assignment, [tuple(sorted(s)) for s in cfg], mapping_cost(cfg))
    raise RuntimeError("no feasible slot configuration")  # unreachable: all-classes slots always fit


def naive_mapping(code: QcCode, row_order=None, framings=None, rpl: int = 1) -> VnuMapping:
    """Columns placed in ascending order into slots 1, 2, ... in every layer."""
    sched = group_layers(code, rpl, row_order)
    labels = _framing_classes(code, framings)
    layers = [sorted(int(c) for r in layer for c in np.flatnonzero(code.mask[r])) for layer in sched.layers]
    S = max(len(cols) for cols in layers)
    assignment = [cols + [-1] * (S - len(cols)) for cols in layers]
    sets = [set() for _ in range(S)]
    for row in assignment:
        for k, c in enumerate(row):
            if c >= 0:
                sets[k].add(int(labels[c]))
    return VnuMapping(layers, assignment, [tuple(sorted(s)) for s in sets], mapping_cost(sets))


def write_throughput_csv(path, rows) -> None:
    """Rows of dicts with keys ``label, N, f_mhz, L, n_iter, variant``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["label", "N", "f_mhz", "L", "n_iter", "variant", "mbps"])
        for r in rows:
            w.writerow([r["label"], r["N"], r["f_mhz"], r["L"], r["n_iter"], r["variant"],
                        throughput_mbps(r["N"], r["f_mhz"], r["L"], r["n_iter"], r["variant"])])
