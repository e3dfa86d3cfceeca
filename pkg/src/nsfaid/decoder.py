"""Bit-exact fixed-point MS / NS-FAID decoding, flooding and layered.

All message arithmetic is integer. Channel values and CN messages live in
``M = [-Q, Q]``; in layered mode AP-LLRs are kept on ``q_tilde`` bits and
saturated to ``[-Q_tilde, Q_tilde]`` after every update. A zero AP-LLR decides
bit 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping

import numpy as np
from numba import njit

from .code import LayerSchedule, QcCode, TannerGraph, group_layers
from .framing import (ALWAYS_POSITIVE, RANDOMIZED, TIE_MODES, Alphabet, FramingFunction,
                      frame, identity, parse_lut)

FLOODING = "flooding"
LAYERED = "layered"
UNCOMPRESSED = "uncompressed"
COMPRESSED = "compressed"


class KernelConfigError(ValueError):
    pass


@dataclass(frozen=True)
class KernelSpec:
    """Everything a decoder needs besides the code and the channel values.

    ``framings`` maps VN degree to framing function; a single framing is used
    for every degree when given directly. ``rpl`` and ``row_order`` define the
    layers of a layered schedule on a QC code.
    """

    framings: Mapping[int, FramingFunction] | FramingFunction
    mu: float = 1.0
    alphabet: Alphabet = Alphabet()
    schedule: str = FLOODING
    cn_storage: str = UNCOMPRESSED
    max_iter: int = 20
    tie_mode: str = ALWAYS_POSITIVE
    rpl: int = 1
    row_order: tuple[int, ...] | None = None
    early_exit: bool = True

    def __post_init__(self):
        if not self.mu > 0:
            raise KernelConfigError(f"mu must be positive, got {self.mu}")
        if self.max_iter < 1:
            raise KernelConfigError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.schedule not in (FLOODING, LAYERED):
            raise KernelConfigError(f"unknown schedule {self.schedule!r}")
        if self.cn_storage not in (UNCOMPRESSED, COMPRESSED):
            raise KernelConfigError(f"unknown cn_storage {self.cn_storage!r}")
        if self.tie_mode not in TIE_MODES:
            raise KernelConfigError(f"unknown tie_mode {self.tie_mode!r}")
        fs = [self.framings] if isinstance(self.framings, FramingFunction) else list(self.framings.values())
        for f in fs:
            if f.Q != self.alphabet.Q:
                raise KernelConfigError(f"framing {f} does not match q={self.alphabet.q}")

    def framing_for(self, degree: int) -> FramingFunction:
        if isinstance(self.framings, FramingFunction):
            return self.framings
        try:
            return self.framings[degree]
        except KeyError:
            raise KernelConfigError(f"no framing function for VN degree {degree}") from None

    @property
    def has_lambda(self) -> bool:
        fs = [self.framings] if isinstance(self.framings, FramingFunction) else self.framings.values()
        return any(f.lam for f in fs)

    @classmethod
    def min_sum(cls, q: int = 4, q_tilde: int = 6, **kw) -> "KernelSpec":
        a = Alphabet(q, q_tilde)
        return cls(identity(a.Q), alphabet=a, **kw)


@dataclass
class DecodeResult:
    bits: np.ndarray
    iterations_used: int
    converged: bool
    ap: np.ndarray
    trace: np.ndarray | None = None


# scalar reference operations


def cn_update(inputs) -> int:
    """Sign product times minimum magnitude."""
    vals = [int(v) for v in inputs]
    if not vals:
        raise ValueError("cn_update needs at least one input")
    neg = sum(1 for v in vals if v < 0)
    mag = min(abs(v) for v in vals)
    return -mag if neg % 2 else mag


@dataclass(frozen=True)
class CompressedCnState:
    """Sign bits of all inputs, the two smallest magnitudes and where the smallest sits."""

    signs: tuple[int, ...]
    min1: int
    min2: int
    indx_min1: int


def cn_update_compressed(inputs) -> CompressedCnState:
    vals = [int(v) for v in inputs]
    if len(vals) < 2:
        raise ValueError("a check needs at least two inputs")
    mags = [abs(v) for v in vals]
    idx = min(range(len(vals)), key=lambda i: (mags[i], i))
    min2 = min(m for i, m in enumerate(mags) if i != idx)
    return CompressedCnState(tuple(int(v < 0) for v in vals), mags[idx], min2, idx)


def extract(state: CompressedCnState, edge: int) -> int:
    """Outgoing message on ``edge``: all inputs except that edge."""
    neg = (sum(state.signs) - state.signs[edge]) % 2
    mag = state.min2 if edge == state.indx_min1 else state.min1
    return -mag if neg else mag


def vn_update(gamma: int, incoming, f: FramingFunction, rng=None) -> int:
    """``F(s_M(gamma + sum(incoming)))`` with the sum taken at full width."""
    return frame(f, int(gamma) + sum(int(v) for v in incoming), rng=rng)


def syndrome(code, bits) -> bool:
    """True when every parity check is satisfied."""
    g = code.expand() if isinstance(code, QcCode) else code
    return g.is_codeword(bits)


# numba kernels


@njit(cache=True, nogil=True)
def _splitmix(state):
    state[0] += np.uint64(0x9E3779B97F4A7C15)
    z = state[0]
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(cache=True, nogil=True)
def _frame(x, table, lam, Q, randomized, rng):
    m = min(max(x, -Q), Q)
    if m == 0 and lam > 0:
        if randomized and (_splitmix(rng) & np.uint64(1)) == 0:
            return -lam
        return lam
    return table[m + Q]


@njit(cache=True, nogil=True)
def _syndrome_ok(bits, cn_ptr, cn_vn):
    for m in range(cn_ptr.size - 1):
        p = 0
        for e in range(cn_ptr[m], cn_ptr[m + 1]):
            p ^= bits[cn_vn[e]]
        if p:
            return False
    return True


@njit(cache=True, nogil=True)
def _min_sum_row(vals, out, d):
    """Min-sum update of ``d`` inputs in place: ``out[k]`` excludes ``vals[k]``."""
    min1 = 1 << 30
    min2 = 1 << 30
    idx = -1
    neg = 0
    for k in range(d):
        v = vals[k]
        a = -v if v < 0 else v
        if v < 0:
            neg ^= 1
        if a < min1:
            min2 = min1
            min1 = a
            idx = k
        elif a < min2:
            min2 = a
    for k in range(d):
        mag = min2 if k == idx else min1
        s = neg ^ (1 if vals[k] < 0 else 0)
        out[k] = -mag if s else mag
    return min1, min2, idx, neg


@njit(cache=True, nogil=True)
def _decode_flooding(gamma, cn_ptr, cn_vn, vn_ptr, vn_edges, vn_cls, tables, lams,
                     Q, Qt, max_iter, early, randomized, seed, trace):
    N = gamma.size
    E = cn_vn.size
    beta = np.zeros(E, dtype=np.int64)
    alpha = np.zeros(E, dtype=np.int64)
    ap = np.zeros(N, dtype=np.int64)
    bits = np.zeros(N, dtype=np.uint8)
    rng = np.array([seed], dtype=np.uint64)
    dmax = 0
    for m in range(cn_ptr.size - 1):
        dmax = max(dmax, cn_ptr[m + 1] - cn_ptr[m])
    vals = np.zeros(dmax, dtype=np.int64)
    outs = np.zeros(dmax, dtype=np.int64)
    snap = np.zeros((max_iter if trace else 0, N), dtype=np.int64)
    used = 0
    ok = False
    for it in range(max_iter):
        # VN processing
        for n in range(N):
            tot = gamma[n]
            for j in range(vn_ptr[n], vn_ptr[n + 1]):
                tot += beta[vn_edges[j]]
            c = vn_cls[n]
            for j in range(vn_ptr[n], vn_ptr[n + 1]):
                e = vn_edges[j]
                alpha[e] = _frame(tot - beta[e], tables[c], lams[c], Q, randomized, rng)
        # CN processing
        for m in range(cn_ptr.size - 1):
            d = cn_ptr[m + 1] - cn_ptr[m]
            for k in range(d):
                vals[k] = alpha[cn_ptr[m] + k]
            _min_sum_row(vals, outs, d)
            for k in range(d):
                beta[cn_ptr[m] + k] = outs[k]
        # AP update and hard decision
        for n in range(N):
            tot = gamma[n]
            for j in range(vn_ptr[n], vn_ptr[n + 1]):
                tot += beta[vn_edges[j]]
            ap[n] = min(max(tot, -Qt), Qt)
            bits[n] = 1 if ap[n] < 0 else 0
        if trace:
            snap[it, :] = ap
        used = it + 1
        ok = _syndrome_ok(bits, cn_ptr, cn_vn)
        if ok and early:
            break
    return bits, used, ok, ap, snap


@njit(cache=True, nogil=True)
def _decode_layered(gamma, cn_ptr, cn_vn, vn_cls, tables, lams, layer_ptr, layer_checks,
                    Q, Qt, max_iter, early, randomized, compressed, seed, trace):
    N = gamma.size
    E = cn_vn.size
    M = cn_ptr.size - 1
    ap = np.zeros(N, dtype=np.int64)
    for n in range(N):
        ap[n] = min(max(gamma[n], -Qt), Qt)
    beta = np.zeros(E, dtype=np.int64)
    # compressed storage: sign bit per edge, two minima and index per check
    sgn = np.zeros(E, dtype=np.uint8)
    cmin1 = np.zeros(M, dtype=np.int64)
    cmin2 = np.zeros(M, dtype=np.int64)
    cidx = np.zeros(M, dtype=np.int64)
    cneg = np.zeros(M, dtype=np.int64)
    bits = np.zeros(N, dtype=np.uint8)
    rng = np.array([seed], dtype=np.uint64)
    dmax = 0
    for m in range(M):
        dmax = max(dmax, cn_ptr[m + 1] - cn_ptr[m])
    alpha = np.zeros(dmax, dtype=np.int64)
    framed = np.zeros(dmax, dtype=np.int64)
    outs = np.zeros(dmax, dtype=np.int64)
    snap = np.zeros((max_iter if trace else 0, N), dtype=np.int64)
    used = 0
    ok = False
    for it in range(max_iter):
        for l in range(layer_ptr.size - 1):
            for li in range(layer_ptr[l], layer_ptr[l + 1]):
                m = layer_checks[li]
                base = cn_ptr[m]
                d = cn_ptr[m + 1] - base
                for k in range(d):
                    e = base + k
                    if compressed:
                        mag = cmin2[m] if k == cidx[m] else cmin1[m]
                        old = -mag if (cneg[m] ^ sgn[e]) else mag
                    else:
                        old = beta[e]
                    n = cn_vn[e]
                    a = min(max(ap[n] - old, -Qt), Qt)
                    alpha[k] = a
                    c = vn_cls[n]
                    framed[k] = _frame(a, tables[c], lams[c], Q, randomized, rng)
                min1, min2, idx, neg = _min_sum_row(framed, outs, d)
                for k in range(d):
                    e = base + k
                    n = cn_vn[e]
                    ap[n] = min(max(alpha[k] + outs[k], -Qt), Qt)
                    if compressed:
                        sgn[e] = 1 if framed[k] < 0 else 0
                    else:
                        beta[e] = outs[k]
                cmin1[m] = min1
                cmin2[m] = min2
                cidx[m] = idx
                cneg[m] = neg
        for n in range(N):
            bits[n] = 1 if ap[n] < 0 else 0
        if trace:
            snap[it, :] = ap
        used = it + 1
        ok = _syndrome_ok(bits, cn_ptr, cn_vn)
        if ok and early:
            break
    return bits, used, ok, ap, snap


# decoder front end


def _layer_checks(code: QcCode, graph: TannerGraph, sched: LayerSchedule):
    z = code.z
    checks, ptr = [], [0]
    for layer in sched.layers:
        for r in layer:
            checks.extend(range(r * z, (r + 1) * z))
        ptr.append(len(checks))
    return np.array(ptr, dtype=np.int64), np.array(checks, dtype=np.int64)


class Decoder:
    """Precomputed decoding state for one (code, kernel) pair; ``decode`` is reentrant."""

    def __init__(self, code, spec: KernelSpec, layers=None):
        self.spec = spec
        self.code = code if isinstance(code, QcCode) else None
        self.graph = code.expand() if isinstance(code, QcCode) else code
        g = self.graph
        degs = g.vn_degrees
        present = sorted({int(d) for d in degs if d > 0})
        self.degrees = present
        self.tables = np.zeros((max(present, default=0) + 1, 2 * spec.alphabet.Q + 1), dtype=np.int64)
        self.lams = np.zeros(self.tables.shape[0], dtype=np.int64)
        for d in present:
            f = spec.framing_for(d)
            self.tables[d] = f.table
            self.lams[d] = f.lam
        self.vn_cls = degs.astype(np.int64)
        self.schedule = None
        if spec.schedule == LAYERED:
            if layers is not None:
                self.layer_ptr, self.layer_checks = layers
            else:
                if self.code is None:
                    raise KernelConfigError("layered decoding needs a QC code or explicit layers")
                self.schedule = group_layers(self.code, spec.rpl, spec.row_order)
                self.layer_ptr, self.layer_checks = _layer_checks(self.code, g, self.schedule)
            if sorted(self.layer_checks.tolist()) != list(range(g.M)):
                raise KernelConfigError("layers must cover every check exactly once")

    def decode(self, llrs, seed: int = 0, trace: bool = False, max_iter: int | None = None,
               early_exit: bool | None = None) -> DecodeResult:
        s = self.spec
        gamma = np.asarray(llrs, dtype=np.int64)
        if gamma.shape != (self.graph.N,):
            raise ValueError(f"expected {self.graph.N} channel values, got shape {gamma.shape}")
        Q, Qt = s.alphabet.Q, s.alphabet.Q_tilde
        if np.abs(gamma).max(initial=0) > Q:
            raise ValueError(f"channel values must lie in [-{Q}, {Q}]")
        it_max = s.max_iter if max_iter is None else max_iter
        early = s.early_exit if early_exit is None else early_exit
        randomized = s.tie_mode == RANDOMIZED
        g = self.graph
        seed = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
        if s.schedule == FLOODING:
            bits, used, ok, ap, snap = _decode_flooding(
                gamma, g.cn_ptr, g.cn_vn, g.vn_ptr, g.vn_edges, self.vn_cls, self.tables, self.lams,
                Q, Qt, it_max, early, randomized, seed, trace)
        else:
            bits, used, ok, ap, snap = _decode_layered(
                gamma, g.cn_ptr, g.cn_vn, self.vn_cls, self.tables, self.lams, self.layer_ptr,
                self.layer_checks, Q, Qt, it_max, early, randomized, s.cn_storage == COMPRESSED,
                seed, trace)
        return DecodeResult(bits, int(used), bool(ok), ap, snap if trace else None)


def decode_flooding(code, spec: KernelSpec, llrs, **kw) -> DecodeResult:
    return Decoder(code, replace(spec, schedule=FLOODING)).decode(llrs, **kw)


def decode_layered(code, spec: KernelSpec, llrs, **kw) -> DecodeResult:
    return Decoder(code, replace(spec, schedule=LAYERED)).decode(llrs, **kw)


# kernel configuration files


def _load_mapping(path: Path) -> dict:
    text = path.read_text()
    if path.suffix.lower() == ".json":
        return json.loads(text)
    try:
        import tomllib
    except ImportError:  # Python < 3.11
        import tomli as tomllib
    return tomllib.loads(text)


def kernel_from_dict(cfg: Mapping) -> KernelSpec:
    """Build a KernelSpec from config keys.

    Recognized keys: ``q``, ``q_tilde``, ``mu``, ``schedule``, ``cn_storage``,
    ``max_iter``, ``tie_mode``, ``rpl``, ``row_order``, ``early_exit`` and either
    ``lut`` (one LUT literal for all degrees) or ``luts`` (degree -> literal).
    """
    known = {"q", "q_tilde", "mu", "schedule", "cn_storage", "max_iter", "tie_mode", "rpl",
             "row_order", "early_exit", "lut", "luts", "name"}
    unknown = set(cfg) - known
    if unknown:
        raise KernelConfigError(f"unknown kernel keys: {sorted(unknown)}")
    try:
        alphabet = Alphabet(int(cfg.get("q", 4)), int(cfg.get("q_tilde", 6)))
        tie = cfg.get("tie_mode", ALWAYS_POSITIVE)
        if "luts" in cfg:
            framings = {int(d): parse_lut(str(v), tie) for d, v in cfg["luts"].items()}
        elif "lut" in cfg:
            framings = parse_lut(str(cfg["lut"]), tie)
        else:
            framings = identity(alphabet.Q)
        order = cfg.get("row_order")
        return KernelSpec(
            framings=framings,
            mu=float(cfg.get("mu", 1.0)),
            alphabet=alphabet,
            schedule=cfg.get("schedule", FLOODING),
            cn_storage=cfg.get("cn_storage", UNCOMPRESSED),
            max_iter=int(cfg.get("max_iter", 20)),
            tie_mode=tie,
            rpl=int(cfg.get("rpl", 1)),
            row_order=None if order is None else tuple(int(r) for r in order),
            early_exit=bool(cfg.get("early_exit", True)),
        )
    except KernelConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise KernelConfigError(str(exc)) from None


def load_kernel(path) -> KernelSpec:
    path = Path(path)
    try:
        cfg = _load_mapping(path)
    except Exception as exc:
        raise KernelConfigError(f"cannot read kernel file {path}: {exc}") from None
    return kernel_from_dict(cfg)
