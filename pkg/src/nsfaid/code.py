"""Quasi-cyclic LDPC codes: base matrices, expansion, degree distributions, layers."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np


class CodeFormatError(ValueError):
    pass


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class TannerGraph:
    """Sparse parity structure in CSR form, edges numbered check by check.

    ``cn_vn[cn_ptr[m]:cn_ptr[m+1]]`` are the VNs of check ``m`` (``H(m)``);
    ``vn_edges[vn_ptr[n]:vn_ptr[n+1]]`` are the edge ids touching VN ``n``.
    For QC codes ``edge_row``/``edge_col`` give the base-matrix entry each edge
    came from; they are -1 for graphs read from alist files.
    """

    M: int
    N: int
    cn_ptr: np.ndarray
    cn_vn: np.ndarray
    vn_ptr: np.ndarray
    vn_edges: np.ndarray
    edge_row: np.ndarray
    edge_col: np.ndarray

    @classmethod
    def from_checks(cls, checks: list[list[int]], N: int, edge_row=None, edge_col=None) -> "TannerGraph":
        cn_ptr = np.zeros(len(checks) + 1, dtype=np.int64)
        cn_ptr[1:] = np.cumsum([len(c) for c in checks])
        cn_vn = np.array([v for c in checks for v in c], dtype=np.int64)
        if cn_vn.size and (cn_vn.min() < 0 or cn_vn.max() >= N):
            raise CodeFormatError("VN index out of range")
        order = np.argsort(cn_vn, kind="stable")
        counts = np.bincount(cn_vn, minlength=N)
        vn_ptr = np.zeros(N + 1, dtype=np.int64)
        vn_ptr[1:] = np.cumsum(counts)
        E = cn_vn.size
        if edge_row is None:
            edge_row = np.full(E, -1, dtype=np.int64)
            edge_col = np.full(E, -1, dtype=np.int64)
        return cls(len(checks), N, cn_ptr, cn_vn, vn_ptr, order.astype(np.int64),
                   np.asarray(edge_row, dtype=np.int64), np.asarray(edge_col, dtype=np.int64))

    @property
    def n_edges(self) -> int:
        return int(self.cn_vn.size)

    @property
    def vn_degrees(self) -> np.ndarray:
        return np.diff(self.vn_ptr)

    @property
    def cn_degrees(self) -> np.ndarray:
        return np.diff(self.cn_ptr)

    def check(self, m: int) -> np.ndarray:
        return self.cn_vn[self.cn_ptr[m]:self.cn_ptr[m + 1]]

    def to_dense(self) -> np.ndarray:
        H = np.zeros((self.M, self.N), dtype=np.uint8)
        for m in range(self.M):
            H[m, self.check(m)] ^= 1
        return H

    def syndrome(self, bits) -> np.ndarray:
        bits = np.asarray(bits, dtype=np.int64) & 1
        s = np.add.reduceat(bits[self.cn_vn], self.cn_ptr[:-1]) & 1
        s[np.diff(self.cn_ptr) == 0] = 0
        return s

    def is_codeword(self, bits) -> bool:
        return not self.syndrome(bits).any()


@dataclass(frozen=True)
class DegreeDistribution:
    """Edge-perspective degree distributions ``lambda`` (VNs) and ``rho`` (CNs)."""

    lam: dict[int, float]
    rho: dict[int, float]

    def __post_init__(self):
        for name, dist in (("lambda", self.lam), ("rho", self.rho)):
            if not dist:
                raise ValueError(f"{name} is empty")
            if any(d < 1 for d in dist):
                raise ValueError(f"{name} has a degree < 1")
            if any(v < 0 for v in dist.values()):
                raise ValueError(f"{name} has a negative fraction")
            if abs(sum(dist.values()) - 1.0) > 1e-12:
                raise ValueError(f"{name} fractions sum to {sum(dist.values())}, not 1")

    @classmethod
    def regular(cls, dv: int, dc: int) -> "DegreeDistribution":
        return cls({dv: 1.0}, {dc: 1.0})

    @classmethod
    def from_degrees(cls, vn_degrees, cn_degrees) -> "DegreeDistribution":
        vn = np.asarray(vn_degrees)
        cn = np.asarray(cn_degrees)
        vn = vn[vn > 0]
        cn = cn[cn > 0]
        E = vn.sum()
        if E != cn.sum():
            raise ValueError("VN and CN edge counts differ")
        lam = {int(d): float(d * np.count_nonzero(vn == d) / E) for d in np.unique(vn)}
        rho = {int(d): float(d * np.count_nonzero(cn == d) / E) for d in np.unique(cn)}
        return cls(_renorm(lam), _renorm(rho))

    @classmethod
    def parse(cls, text: str) -> "DegreeDistribution":
        """``"3,6"`` for a regular ensemble, or ``"2:0.2895,3:0.3158,6:0.3947/6:0.6316,7:0.3684"``."""
        if "/" not in text:
            dv, dc = (int(s) for s in text.split(","))
            return cls.regular(dv, dc)
        left, right = text.split("/")

        def poly(s):
            out = {}
            for item in s.split(","):
                d, v = item.split(":")
                out[int(d)] = float(v)
            return _renorm(out)

        return cls(poly(left), poly(right))

    @property
    def vn_degrees(self) -> list[int]:
        return sorted(self.lam)

    @property
    def is_regular(self) -> bool:
        return len(self.lam) == 1 and len(self.rho) == 1

    @property
    def vn_node_fractions(self) -> dict[int, float]:
        tot = sum(v / d for d, v in self.lam.items())
        return {d: v / d / tot for d, v in self.lam.items()}

    @property
    def cn_node_fractions(self) -> dict[int, float]:
        tot = sum(v / d for d, v in self.rho.items())
        return {d: v / d / tot for d, v in self.rho.items()}

    @property
    def rate(self) -> float:
        """Design rate ``1 - (sum rho_d/d) / (sum lambda_d/d)``."""
        return 1.0 - sum(v / d for d, v in self.rho.items()) / sum(v / d for d, v in self.lam.items())


def _renorm(dist: dict[int, float]) -> dict[int, float]:
    tot = sum(dist.values())
    return {d: v / tot for d, v in dist.items()}


@dataclass(frozen=True)
class QcCode:
    """QC-LDPC code from an ``R x C`` base matrix (``-1`` = empty block) and lift ``z``."""

    base: np.ndarray
    z: int
    name: str = ""
    _graph: list = field(default_factory=list, init=False, repr=False, compare=False)

    def __post_init__(self):
        base = np.array(self.base, dtype=np.int64)
        if base.ndim != 2 or base.size == 0:
            raise CodeFormatError("base matrix must be a non-empty 2-D array")
        if self.z < 1:
            raise CodeFormatError(f"expansion factor must be positive, got {self.z}")
        bad = (base < -1) | (base >= self.z)
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise CodeFormatError(f"entry B[{i},{j}]={base[i, j]} not in {{-1}} U [0, {self.z})")
        base.setflags(write=False)
        object.__setattr__(self, "base", base)

    @property
    def R(self) -> int:
        return self.base.shape[0]

    @property
    def C(self) -> int:
        return self.base.shape[1]

    @property
    def M(self) -> int:
        return self.z * self.R

    @property
    def N(self) -> int:
        return self.z * self.C

    @property
    def mask(self) -> np.ndarray:
        return self.base >= 0

    @property
    def column_degrees(self) -> np.ndarray:
        return self.mask.sum(axis=0)

    @property
    def row_degrees(self) -> np.ndarray:
        return self.mask.sum(axis=1)

    def expand(self) -> TannerGraph:
        """Lift the base matrix; block ``b`` links row ``r`` of the block to column ``(r + b) mod z``."""
        if not self._graph:
            self._graph.append(expand(self))
        return self._graph[0]

    def vn_degree_of(self) -> np.ndarray:
        """Degree of every expanded VN."""
        return np.repeat(self.column_degrees, self.z)

    def degree_distributions(self) -> DegreeDistribution:
        return degree_distributions(self)

    def rows(self, order) -> "QcCode":
        """Same code with base rows permuted (the parity structure is unchanged up to check order)."""
        return QcCode(self.base[list(order)], self.z, self.name)

    def to_text(self) -> str:
        lines = [f"{self.R} {self.C} {self.z}"]
        width = max(len(str(v)) for v in self.base.ravel())
        for row in self.base:
            lines.append(" ".join(f"{v:>{width}}" for v in row))
        return "\n".join(lines) + "\n"


def parse_base_matrix(text: str, name: str = "") -> QcCode:
    """Read ``R C z`` followed by ``R`` rows of ``C`` integers; ``#`` starts a comment."""
    tokens = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            tokens.append(line.split())
    if not tokens or len(tokens[0]) != 3:
        raise CodeFormatError("header must be 'R C z'")
    try:
        R, C, z = (int(t) for t in tokens[0])
        rows = [[int(t) for t in row] for row in tokens[1:]]
    except ValueError as exc:
        raise CodeFormatError(str(exc)) from None
    if R < 1 or C < 1:
        raise CodeFormatError(f"bad dimensions {R}x{C}")
    if len(rows) != R:
        raise CodeFormatError(f"expected {R} rows, found {len(rows)}")
    for i, row in enumerate(rows):
        if len(row) != C:
            raise CodeFormatError(f"row {i} has {len(row)} entries, expected {C}")
    return QcCode(np.array(rows, dtype=np.int64), z, name)


def load_base_matrix(path) -> QcCode:
    path = Path(path)
    return parse_base_matrix(path.read_text(), name=path.stem)


def expand(code: QcCode) -> TannerGraph:
    z = code.z
    checks = []
    rows, cols = [], []
    for i in range(code.R):
        nz = [(j, int(code.base[i, j])) for j in range(code.C) if code.base[i, j] >= 0]
        for r in range(z):
            checks.append([j * z + (r + b) % z for j, b in nz])
            rows.extend([i] * len(nz))
            cols.extend(j for j, _ in nz)
    return TannerGraph.from_checks(checks, code.N, rows, cols)


def degree_distributions(code) -> DegreeDistribution:
    g = code.expand() if isinstance(code, QcCode) else code
    return DegreeDistribution.from_degrees(g.vn_degrees, g.cn_degrees)


# alist interchange for expanded parity-check matrices


def parse_alist(text: str) -> TannerGraph:
    nums = [int(t) for t in text.split()]
    it = iter(nums)
    try:
        N, M = next(it), next(it)
        next(it), next(it)
        col_deg = [next(it) for _ in range(N)]
        row_deg = [next(it) for _ in range(M)]
        # column lists (may be zero padded to the max degree)
        max_col = max(col_deg) if col_deg else 0
        for _ in range(N):
            for _ in range(max_col):
                next(it)
        max_row = max(row_deg) if row_deg else 0
        checks = []
        for m in range(M):
            entries = [next(it) for _ in range(max_row)]
            checks.append([e - 1 for e in entries if e > 0][: row_deg[m]])
    except StopIteration:
        raise CodeFormatError("truncated alist file") from None
    for m, c in enumerate(checks):
        if len(c) != row_deg[m]:
            raise CodeFormatError(f"row {m} lists {len(c)} entries, header says {row_deg[m]}")
    return TannerGraph.from_checks(checks, N)


def to_alist(graph: TannerGraph) -> str:
    cols = [[] for _ in range(graph.N)]
    for m in range(graph.M):
        for n in graph.check(m):
            cols[n].append(m + 1)
    max_col = max(len(c) for c in cols)
    max_row = int(graph.cn_degrees.max())
    out = [f"{graph.N} {graph.M}", f"{max_col} {max_row}",
           " ".join(str(len(c)) for c in cols),
           " ".join(str(int(d)) for d in graph.cn_degrees)]
    for c in cols:
        out.append(" ".join(str(v) for v in c + [0] * (max_col - len(c))))
    for m in range(graph.M):
        row = [int(n) + 1 for n in graph.check(m)]
        out.append(" ".join(str(v) for v in row + [0] * (max_row - len(row))))
    return "\n".join(out) + "\n"


# decoding layers


@dataclass(frozen=True)
class LayerSchedule:
    """Rows of the base matrix grouped into decoding layers.

    ``layers`` are lists of base-row indices, processed in order. ``boundary_overlaps``
    maps a layer pair ``(l, l+1 mod L)`` to the columns they share.
    """

    rpl: int
    layers: tuple[tuple[int, ...], ...]
    full_flags: tuple[bool, ...]
    pipeline_ok: bool
    boundary_overlaps: dict = field(default_factory=dict)

    @property
    def L(self) -> int:
        return len(self.layers)

    @property
    def row_order(self) -> list[int]:
        return [r for layer in self.layers for r in layer]

    def to_json(self) -> str:
        return json.dumps({
            "rpl": self.rpl,
            "layers": [list(l) for l in self.layers],
            "full_flags": list(self.full_flags),
            "pipeline_ok": self.pipeline_ok,
            "boundary_overlaps": [
                {"layers": list(k), "columns": list(v)} for k, v in self.boundary_overlaps.items()
            ],
        }, indent=2)


def _layer_columns(mask: np.ndarray, rows) -> np.ndarray:
    return mask[list(rows)].sum(axis=0)


def group_layers(code: QcCode, rpl: int, row_order=None) -> LayerSchedule:
    """Group consecutive rows (in ``row_order``) into layers of ``rpl`` rows."""
    order = list(range(code.R)) if row_order is None else [int(r) for r in row_order]
    if sorted(order) != list(range(code.R)):
        raise ScheduleError("row_order is not a permutation of the base rows")
    if rpl < 1 or code.R % rpl:
        raise ScheduleError(f"rpl={rpl} does not divide R={code.R}")
    mask = code.mask
    layers = tuple(tuple(order[k:k + rpl]) for k in range(0, code.R, rpl))
    full = []
    for idx, layer in enumerate(layers):
        counts = _layer_columns(mask, layer)
        if (counts > 1).any():
            col = int(np.argmax(counts > 1))
            raise ScheduleError(f"layer {idx} (rows {list(layer)}) overlaps in column {col}")
        full.append(bool((counts == 1).all()))
    overlaps = {}
    L = len(layers)
    if L > 1:
        for a in range(L):
            b = (a + 1) % L
            if L == 2 and a == 1:
                break
            shared = np.flatnonzero(_layer_columns(mask, layers[a]) & _layer_columns(mask, layers[b]))
            if shared.size:
                overlaps[(a, b)] = tuple(int(c) for c in shared)
    return LayerSchedule(rpl, layers, tuple(full), not overlaps, overlaps)


def find_pipeline_row_order(code: QcCode, start: int = 0) -> list[int]:
    """Backtracking search for a cyclic row order with no two consecutive rows overlapping."""
    R = code.R
    if R == 1:
        return [0]
    mask = code.mask
    disjoint = ~((mask[:, None, :] & mask[None, :, :]).any(axis=2))
    if R == 2:
        if disjoint[0, 1]:
            return [0, 1]
        raise ScheduleError("no pipeline-compatible row order exists")
    order = [start]
    used = [False] * R
    used[start] = True

    def extend() -> bool:
        if len(order) == R:
            return bool(disjoint[order[-1], order[0]])
        last = order[-1]
        cands = [r for r in range(R) if not used[r] and disjoint[last, r]]
        # fewest onward options first keeps the search shallow on dense matrices
        cands.sort(key=lambda r: sum(1 for s in range(R) if not used[s] and disjoint[r, s]))
        for r in cands:
            used[r] = True
            order.append(r)
            if extend():
                return True
            order.pop()
            used[r] = False
        return False

    # identity order is preferred when it already works
    if all(disjoint[r, (r + 1) % R] for r in range(R)):
        return list(range(R))
    if extend():
        return order
    raise ScheduleError("no pipeline-compatible row order exists")


# short cycles of the lifted graph


def qc_cycles(base: np.ndarray, z: int, max_len: int = 6) -> list[tuple]:
    """Base-graph cycles of length <= ``max_len`` that survive the lift.

    A closed walk ``(r0,c0),(r0,c1),(r1,c1),...`` lifts to cycles iff the
    alternating sum of its shifts is ``0 mod z``. Returned as tuples of
    ``(row, col)`` entries.
    """
    mask = base >= 0
    R, C = base.shape
    found = []
    seen = set()
    for half in range(2, max_len // 2 + 1):
        for rows in itertools.product(range(R), repeat=half):
            if rows[0] != min(rows):
                continue
            if any(rows[k] == rows[(k + 1) % half] for k in range(half)):
                continue
            for cols in itertools.product(range(C), repeat=half):
                if any(cols[k] == cols[(k + 1) % half] for k in range(half)):
                    continue
                ok = True
                total = 0
                for k in range(half):
                    r, c1, c2 = rows[k], cols[k], cols[(k + 1) % half]
                    if not (mask[r, c1] and mask[r, c2]):
                        ok = False
                        break
                    total += base[r, c1] - base[r, c2]
                if ok and total % z == 0:
                    key = frozenset((rows[k], cols[k], cols[(k + 1) % half]) for k in range(half))
                    if key not in seen:
                        seen.add(key)
                        found.append(tuple((rows[k], cols[k]) for k in range(half)))
    return found


def _cycles_through(base: np.ndarray, z: int, i: int, j: int, max_len: int) -> bool:
    """Whether a lifted closed walk of length <= ``max_len`` uses entry ``(i, j)``.

    The walk visits entries ``(r0,c0),(r1,c0),(r1,c1),...,(r0,c_{k-1})`` with
    ``(r0, c0) = (i, j)``; it lifts to a cycle iff
    ``sum_t B[r_t,c_t] - B[r_{t+1},c_t] = 0 mod z``.
    """
    mask = base >= 0
    R, C = base.shape
    if not mask[i, j]:
        return False

    def rec(r, c_prev, length, acc):
        for c in range(C):
            if c == c_prev or not mask[r, c]:
                continue
            a = acc + base[r, c]
            if c != j and mask[i, c] and length + 2 <= max_len and (a - base[i, c]) % z == 0:
                return True
            if length + 4 > max_len:
                continue
            for r2 in range(R):
                if r2 == r or r2 == i or not mask[r2, c]:
                    continue
                if rec(r2, c, length + 2, a - base[r2, c]):
                    return True
        return False

    for r1 in range(R):
        if r1 != i and mask[r1, j] and rec(r1, j, 2, base[i, j] - base[r1, j]):
            return True
    return False


def lifted_girth_ok(base: np.ndarray, z: int, girth: int) -> bool:
    """True when the lifted graph has no cycle shorter than ``girth``."""
    base = np.asarray(base)
    return not any(_cycles_through(base, z, int(i), int(j), girth - 2) for i, j in np.argwhere(base >= 0))


def random_qc_code(mask: np.ndarray, z: int, girth: int = 8, seed: int = 0,
                   max_tries: int = 200, name: str = "") -> QcCode:
    """Assign random shifts to ``mask`` entries, rejecting short lifted cycles.

    Shifts are drawn entry by entry; an entry is redrawn while the partial
    matrix contains a cycle shorter than ``girth`` through it.
    """
    rng = np.random.default_rng(seed)
    mask = np.asarray(mask, dtype=bool)
    R, C = mask.shape
    entries = [tuple(e) for e in np.argwhere(mask)]
    for _ in range(max_tries):
        base = np.full((R, C), -1, dtype=np.int64)
        ok = True
        for (i, j) in entries:
            for _attempt in range(4 * z):
                base[i, j] = rng.integers(z)
                if not _cycles_through(base, z, i, j, girth - 2):
                    break
            else:
                ok = False
                break
        if ok and lifted_girth_ok(base, z, girth):
            return QcCode(base, z, name)
    raise ScheduleError(f"could not reach girth {girth} with z={z}")


def regular_layer_mask(dv: int = 3, dc: int = 6, rpl: int = 4, seed: int = 0,
                       max_shared: int = 2) -> np.ndarray:
    """Base mask of a ``(dv, dc)``-regular code built from ``dv`` full layers.

    Each layer partitions the ``rpl * dc`` columns into ``rpl`` rows. Rows
    inside a layer are ordered so that the last row of a layer and the first
    row of the next (cyclically) share no column; the one-row-per-layer
    pipeline and the full-layer schedule are then both valid. Rows of
    different layers share at most ``max_shared`` columns.
    """
    rng = np.random.default_rng(seed)
    C = rpl * dc
    for _ in range(100000):
        groups = []
        for _layer in range(dv):
            perm = rng.permutation(C)
            groups.append([frozenset(int(c) for c in perm[k * dc:(k + 1) * dc]) for k in range(rpl)])
        flat = [g for layer in groups for g in layer]
        if any(len(a & b) > max_shared for a, b in itertools.combinations(flat, 2)):
            continue
        ends = [[(f, l) for f in range(rpl) for l in range(rpl) if f != l or rpl == 1] for _ in range(dv)]
        for choice in itertools.product(*ends):
            if all(not (groups[k][choice[k][1]] & groups[(k + 1) % dv][choice[(k + 1) % dv][0]])
                   for k in range(dv)):
                break
        else:
            continue
        mask = np.zeros((dv * rpl, C), dtype=bool)
        i = 0
        for k, (f, l) in enumerate(choice):
            middle = [g for g in range(rpl) if g not in (f, l)]
            for g in [f] + middle + ([l] if l != f else []):
                mask[i, sorted(groups[k][g])] = True
                i += 1
        return mask
    raise ScheduleError("no layered mask found")


# shipped base matrices


BUILTIN_CODES = {"wimax_r12": "wimax_r12_z96.bm", "regular_3_6": "regular_3_6_z54.bm"}


def builtin_code(name: str) -> QcCode:
    """Load a shipped base matrix: ``wimax_r12`` (z=96) or ``regular_3_6`` (z=54).

    ``regular_3_6`` is a generated girth-10 stand-in with three full layers of
    four rows, pipeline-compatible in its natural row order.
    """
    fname = BUILTIN_CODES.get(name, name)
    text = resources.files("nsfaid.data").joinpath(fname).read_text()
    return parse_base_matrix(text, name=name)


def lift(code: QcCode, z: int) -> QcCode:
    """Re-lift with expansion ``z`` using the ``floor(b * z / z0)`` shift scaling."""
    base = np.where(code.base >= 0, (code.base * z) // code.z, -1)
    return QcCode(base, z, code.name)
