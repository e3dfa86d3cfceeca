"""Exact density evolution for NS-FAID kernels over the quantized AWGN channel.

All pmfs live on the integer alphabet ``[-Q, Q]`` and are stored as arrays
indexed by ``m + Q``. The all-zero codeword is assumed (the kernels are
symmetric), so the error probability is the mass on negative AP-LLRs plus half
the mass at zero.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .channel import channel_pmf, sigma_from_snr
from .code import DegreeDistribution
from .framing import FramingFunction

ETA_ZERO_EFF = 1e-10
DEFAULT_MAX_ITER = 2000
SNR_TOL = 0.001
SNR_RANGE = (-2.0, 12.0)
MU_GRID = tuple(round(1.0 + 0.1 * k, 1) for k in range(111))
MASS_TOL = 1e-12


class DegenerateKernelError(ValueError):
    """No SNR in the search range brings the error probability under ``eta``."""


@dataclass(frozen=True)
class Pmf:
    """Probability mass over the contiguous integers ``lo, lo+1, ...``."""

    probs: np.ndarray
    lo: int

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("pmf must be a non-empty vector")
        if (p < 0).any():
            raise ValueError("negative probability")
        if abs(p.sum() - 1.0) > MASS_TOL:
            raise ValueError(f"pmf mass is {p.sum()!r}, not 1")
        object.__setattr__(self, "probs", p)

    @classmethod
    def centered(cls, probs) -> "Pmf":
        """Pmf over ``[-Q, Q]`` given ``2Q + 1`` probabilities."""
        probs = np.asarray(probs, dtype=np.float64)
        return cls(probs, -(probs.size // 2))

    @classmethod
    def point(cls, value: int, Q: int) -> "Pmf":
        p = np.zeros(2 * Q + 1)
        p[value + Q] = 1.0
        return cls(p, -Q)

    @property
    def hi(self) -> int:
        return self.lo + self.probs.size - 1

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1)

    def __getitem__(self, value: int) -> float:
        i = value - self.lo
        return float(self.probs[i]) if 0 <= i < self.probs.size else 0.0

    def mass(self) -> float:
        return float(self.probs.sum())

    def error_probability(self) -> float:
        """``P(m < 0) + P(m = 0) / 2``."""
        return float(sum(p for m, p in zip(self.support, self.probs) if m < 0) + 0.5 * self[0])


# numba kernels, arrays indexed by m + Q


@njit(cache=True)
def _convolve(a, b):
    out = np.zeros(a.size + b.size - 1)
    for i in range(a.size):
        ai = a[i]
        if ai == 0.0:
            continue
        for j in range(b.size):
            out[i + j] += ai * b[j]
    return out


@njit(cache=True)
def _cn_kernel(p, k, Q):
    """Pmf of sign-product times min-magnitude of ``k`` i.i.d. messages."""
    a = np.zeros(Q + 2)
    b = np.zeros(Q + 2)
    for t in range(Q, 0, -1):
        pos = p[Q + t]
        neg = p[Q - t]
        a[t] = a[t + 1] + pos + neg
        b[t] = b[t + 1] + pos - neg
    ge = np.zeros(Q + 2)
    le = np.zeros(Q + 2)
    for t in range(1, Q + 1):
        ak = a[t] ** k
        bk = b[t] ** k
        ge[t] = 0.5 * (ak + bk)
        le[t] = 0.5 * (ak - bk)
    out = np.zeros(2 * Q + 1)
    for t in range(1, Q + 1):
        out[Q + t] = max(ge[t] - ge[t + 1], 0.0)
        out[Q - t] = max(le[t] - le[t + 1], 0.0)
    out[Q] = max(1.0 - ge[1] - le[1], 0.0)
    # renormalize: rounding in a^k would otherwise be amplified k-fold per iteration
    return out / out.sum()


@njit(cache=True)
def _sum_pmf(ch, c, n):
    s = ch.copy()
    for _ in range(n):
        s = _convolve(s, c)
    return s


@njit(cache=True)
def _vn_kernel(ch, c, dv, table, lam, Q):
    """Pmf of ``F(s_M(gamma + sum of dv-1 CN messages))``; ties at 0 split onto +-lam."""
    s = _sum_pmf(ch, c, dv - 1)
    h = (s.size - 1) // 2
    out = np.zeros(2 * Q + 1)
    for i in range(s.size):
        m = min(max(i - h, -Q), Q)
        if m == 0 and lam > 0:
            out[Q + lam] += 0.5 * s[i]
            out[Q - lam] += 0.5 * s[i]
        else:
            out[Q + table[m + Q]] += s[i]
    return out / out.sum()


@njit(cache=True)
def _ap_error(ch, c, dv):
    s = _sum_pmf(ch, c, dv)
    h = (s.size - 1) // 2
    pe = 0.5 * s[h]
    for i in range(h):
        pe += s[i]
    return pe


@njit(cache=True)
def _evolve(ch, vdeg, vw, vnode, tables, lams, cdeg, cw, eta, max_iter, Q, pe_trace):
    """Run DE until ``p_e <= eta``, a fixed point, or ``max_iter``.

    Returns ``(converged, iterations, final p_e)``; ``pe_trace[l]`` receives
    ``p_e`` after ``l`` iterations (``pe_trace[0]`` is the channel alone).
    """
    K = 2 * Q + 1
    c = np.zeros(K)
    c[Q] = 1.0
    pe = 0.0
    for d in range(vdeg.size):
        pe += vnode[d] * _ap_error(ch, c, 0)
    if pe_trace.size > 0:
        pe_trace[0] = pe
    if pe <= eta:
        return True, 0, pe
    for it in range(1, max_iter + 1):
        a = np.zeros(K)
        for d in range(vdeg.size):
            a += vw[d] * _vn_kernel(ch, c, vdeg[d], tables[d], lams[d], Q)
        new = np.zeros(K)
        for d in range(cdeg.size):
            new += cw[d] * _cn_kernel(a, cdeg[d] - 1, Q)
        change = np.abs(new - c).max()
        c = new
        pe = 0.0
        for d in range(vdeg.size):
            pe += vnode[d] * _ap_error(ch, c, vdeg[d])
        if it < pe_trace.size:
            pe_trace[it] = pe
        if pe <= eta:
            return True, it, pe
        if change < 1e-16:
            return False, it, pe
    return False, max_iter, pe


# public interface


def de_cn(pmf_in: Pmf, dc: int) -> Pmf:
    """CN-output pmf for ``dc - 1`` i.i.d. inputs distributed as ``pmf_in``."""
    Q = -pmf_in.lo
    if pmf_in.hi != Q:
        raise ValueError("CN input pmf must be centered on [-Q, Q]")
    return Pmf(_cn_kernel(pmf_in.probs, dc - 1, Q), -Q)


def de_vn(ch: Pmf, cn: Pmf, dv: int, f: FramingFunction) -> Pmf:
    """VN-output pmf: channel plus ``dv - 1`` CN messages, saturated and framed."""
    Q = f.Q
    for p in (ch, cn):
        if p.lo != -Q or p.hi != Q:
            raise ValueError(f"pmf support must be [-{Q}, {Q}]")
    return Pmf(_vn_kernel(ch.probs, cn.probs, dv, f.table, f.lam, Q), -Q)


def ap_error_probability(ch: Pmf, cn: Pmf, dv: int) -> float:
    """``P(gamma_tilde < 0) + P(gamma_tilde = 0)/2`` for a degree-``dv`` VN, no saturation."""
    return float(_ap_error(ch.probs, cn.probs, dv))


def _framing_map(dist: DegreeDistribution, framings) -> dict[int, FramingFunction]:
    if isinstance(framings, FramingFunction):
        return {d: framings for d in dist.lam}
    missing = [d for d in dist.lam if d not in framings]
    if missing:
        raise ValueError(f"no framing function for VN degree(s) {missing}")
    return {d: framings[d] for d in dist.lam}


class _Ensemble:
    """DegreeDistribution plus framings flattened to numba-friendly arrays."""

    def __init__(self, dist: DegreeDistribution, framings):
        fmap = _framing_map(dist, framings)
        Qs = {f.Q for f in fmap.values()}
        if len(Qs) != 1:
            raise ValueError("all framing functions must share one alphabet")
        self.Q = Qs.pop()
        degs = sorted(dist.lam)
        node = dist.vn_node_fractions
        self.vdeg = np.array(degs, dtype=np.int64)
        self.vw = np.array([dist.lam[d] for d in degs])
        self.vnode = np.array([node[d] for d in degs])
        self.tables = np.array([fmap[d].table for d in degs], dtype=np.int64)
        self.lams = np.array([fmap[d].lam for d in degs], dtype=np.int64)
        cdegs = sorted(dist.rho)
        self.cdeg = np.array(cdegs, dtype=np.int64)
        self.cw = np.array([dist.rho[d] for d in cdegs])

    def run(self, snr_db: float, mu: float, eta: float, max_iter: int, trace: bool = False):
        ch = channel_pmf(sigma_from_snr(snr_db), mu, self.Q)
        pe_trace = np.full(max_iter + 1 if trace else 0, np.nan)
        ok, it, pe = _evolve(ch, self.vdeg, self.vw, self.vnode, self.tables, self.lams,
                             self.cdeg, self.cw, eta, max_iter, self.Q, pe_trace)
        return bool(ok), int(it), float(pe), pe_trace


def effective_eta(eta: float) -> float:
    if eta < 0:
        raise ValueError(f"eta must be non-negative, got {eta}")
    return ETA_ZERO_EFF if eta == 0 else float(eta)


def de_iterate(dist: DegreeDistribution, framings, ch: Pmf, max_iter: int,
               eta: float = 0.0) -> np.ndarray:
    """Error probability after ``0..max_iter`` iterations (stops early once ``p_e <= eta``).

    Entries after an early stop are ``nan``.
    """
    ens = _Ensemble(dist, framings)
    if ch.lo != -ens.Q or ch.hi != ens.Q:
        raise ValueError("channel pmf support does not match the framing alphabet")
    trace = np.full(max_iter + 1, np.nan)
    _evolve(ch.probs, ens.vdeg, ens.vw, ens.vnode, ens.tables, ens.lams, ens.cdeg, ens.cw,
            eta, max_iter, ens.Q, trace)
    return trace


def converges(dist: DegreeDistribution, framings, mu: float, snr_db: float, eta: float,
              max_iter: int = DEFAULT_MAX_ITER) -> bool:
    """True when DE at ``snr_db`` reaches ``p_e <= eta`` within ``max_iter`` iterations."""
    return _Ensemble(dist, framings).run(snr_db, mu, effective_eta(eta), max_iter)[0]


@dataclass
class ThresholdResult:
    snr_db: float
    mu_opt: float
    eta: float
    iterations_to_converge: int
    pe_curve: np.ndarray | None = None
    per_mu: dict = field(default_factory=dict)


def _grid_index(snr_db: float) -> int:
    return int(round(snr_db / SNR_TOL))


class _Bisector:
    """Threshold search on the SNR grid ``k * SNR_TOL`` for one ``(ensemble, mu)``.

    The threshold is the smallest grid SNR at which DE converges, assuming
    convergence is monotone in SNR.
    """

    def __init__(self, ens: _Ensemble, mu: float, eta: float, max_iter: int):
        self.ens, self.mu, self.eta, self.max_iter = ens, mu, eta, max_iter
        self.cache = {}

    def ok(self, k: int) -> bool:
        if k not in self.cache:
            self.cache[k] = self.ens.run(k * SNR_TOL, self.mu, self.eta, self.max_iter)
        return self.cache[k][0]

    def search(self, lo: int, hi: int) -> int | None:
        """Smallest ``k`` in ``(lo, hi]`` with ``ok(k)``, given ``ok(hi)``; ``None`` if not ``ok(hi)``."""
        if not self.ok(hi):
            return None
        if self.ok(lo):
            return lo
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.ok(mid):
                hi = mid
            else:
                lo = mid
        return hi


def eta_threshold(dist: DegreeDistribution, framings, mu: float, eta: float = 0.0,
                  max_iter: int = DEFAULT_MAX_ITER, snr_range=SNR_RANGE,
                  trace: bool = False) -> ThresholdResult:
    """Smallest SNR (to ``SNR_TOL`` dB) at which DE drives ``p_e`` to at most ``eta``."""
    ens = _Ensemble(dist, framings)
    eta_eff = effective_eta(eta)
    b = _Bisector(ens, mu, eta_eff, max_iter)
    k = b.search(_grid_index(snr_range[0]), _grid_index(snr_range[1]))
    if k is None:
        raise DegenerateKernelError(f"no threshold in [{snr_range[0]}, {snr_range[1]}] dB at mu={mu}")
    snr = round(k * SNR_TOL, 3)
    _, it, _, curve = ens.run(snr, mu, eta_eff, max_iter, trace=trace)
    return ThresholdResult(snr, mu, eta, it, curve if trace else None)


def optimize_mu(dist: DegreeDistribution, framings, eta: float = 0.0, mu_grid=MU_GRID,
                max_iter: int = DEFAULT_MAX_ITER, snr_range=SNR_RANGE,
                record_all: bool = False) -> ThresholdResult:
    """Best threshold over the gain-factor grid; ties keep the first ``mu``.

    After the first finite threshold, each further ``mu`` is tested just below
    the current best and bisected only when it can improve on it. With
    ``record_all`` every ``mu`` is bisected and reported in ``per_mu``.
    """
    mu_grid = list(mu_grid)
    if not mu_grid:
        raise ValueError("empty mu grid")
    ens = _Ensemble(dist, framings)
    eta_eff = effective_eta(eta)
    lo, hi = _grid_index(snr_range[0]), _grid_index(snr_range[1])
    best_k, best_mu = None, None
    per_mu = {}
    for mu in mu_grid:
        b = _Bisector(ens, mu, eta_eff, max_iter)
        if record_all or best_k is None:
            k = b.search(lo, hi)
            per_mu[mu] = None if k is None else round(k * SNR_TOL, 3)
        elif b.ok(best_k - 1):
            k = b.search(lo, best_k - 1)
        else:
            k = None
        if k is not None and (best_k is None or k < best_k):
            best_k, best_mu = k, mu
    if best_k is None:
        raise DegenerateKernelError("no threshold at any gain factor")
    snr = round(best_k * SNR_TOL, 3)
    _, it, _, _ = ens.run(snr, best_mu, eta_eff, max_iter)
    return ThresholdResult(snr, best_mu, eta, it, None, per_mu)


def exists_mu_below(dist: DegreeDistribution, framings, snr_db: float, eta: float = 0.0,
                    mu_grid=MU_GRID, max_iter: int = DEFAULT_MAX_ITER):
    """First ``mu`` in the grid for which DE converges at ``snr_db``, or ``None``.

    This decides "optimized threshold <= snr_db" without bisecting.
    """
    ens = _Ensemble(dist, framings)
    eta_eff = effective_eta(eta)
    for mu in mu_grid:
        if ens.run(snr_db, mu, eta_eff, max_iter)[0]:
            return mu
    return None


def write_thresholds_csv(path, rows) -> None:
    """Rows of ``(kernel label, ThresholdResult)``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["kernel", "mu", "eta", "threshold_db", "iterations"])
        for label, res in rows:
            w.writerow([label, f"{res.mu_opt:.1f}", f"{res.eta:g}", f"{res.snr_db:.3f}",
                        res.iterations_to_converge])
