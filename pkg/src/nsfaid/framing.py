"""Framing functions of non-surjective finite alphabet decoders.

A framing function ``F`` maps the saturated VN sum in ``M = {-Q..Q}`` onto a
(possibly strict) subset of ``M``. It is odd and non-decreasing, so it is
fully described by its look-up table ``[|F(0)|, F(1), ..., F(Q)]``. A non-zero
``|F(0)| = lam`` means ``F(0)`` takes the value ``+lam`` or ``-lam``.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

import numpy as np

ALWAYS_POSITIVE = "always_positive"
RANDOMIZED = "randomized"
TIE_MODES = (ALWAYS_POSITIVE, RANDOMIZED)


@dataclass(frozen=True)
class Alphabet:
    """Message alphabet ``M`` (``q`` bits) and AP-LLR range (``q_tilde`` bits)."""

    q: int = 4
    q_tilde: int = 6

    def __post_init__(self):
        if self.q < 2:
            raise ValueError(f"q must be >= 2, got {self.q}")
        if self.q_tilde <= self.q:
            raise ValueError(f"q_tilde ({self.q_tilde}) must exceed q ({self.q})")

    @property
    def Q(self) -> int:
        return 2 ** (self.q - 1) - 1

    @property
    def Q_tilde(self) -> int:
        return 2 ** (self.q_tilde - 1) - 1

    def saturate(self, x):
        """``s_M(x) = sgn(x) min(|x|, Q)``, elementwise on arrays."""
        return np.clip(x, -self.Q, self.Q)


def max_level(q: int) -> int:
    return 2 ** (q - 1) - 1


@dataclass(frozen=True)
class FramingFunction:
    """Odd, non-decreasing map ``M -> M`` given by its LUT.

    Parameters
    ----------
    lut : sequence of int
        ``[|F(0)|, F(1), ..., F(Q)]``, non-decreasing with values in ``[0, Q]``.
    tie_mode : str
        How ``F(0)`` is resolved when ``lam > 0``: ``"always_positive"`` maps
        it to ``+lam``; ``"randomized"`` draws the sign uniformly.
    """

    lut: tuple[int, ...]
    tie_mode: str = ALWAYS_POSITIVE
    _table: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        lut = tuple(int(v) for v in self.lut)
        object.__setattr__(self, "lut", lut)
        if len(lut) < 2:
            raise ValueError("LUT needs at least Q+1 = 2 entries")
        Q = len(lut) - 1
        if (Q + 1) & Q:
            raise ValueError(f"LUT length {len(lut)} is not Q+1 for Q = 2^(q-1)-1")
        for v in lut:
            if not 0 <= v <= Q:
                raise ValueError(f"LUT value {v} outside [0, {Q}]")
        if any(a > b for a, b in zip(lut, lut[1:])):
            raise ValueError(f"LUT {list(lut)} is not non-decreasing")
        if self.tie_mode not in TIE_MODES:
            raise ValueError(f"unknown tie_mode {self.tie_mode!r}")
        # table over M indexed by m + Q, F(0) resolved to +lam
        table = np.array([-v for v in lut[:0:-1]] + list(lut), dtype=np.int64)
        table.setflags(write=False)
        object.__setattr__(self, "_table", table)

    @property
    def Q(self) -> int:
        return len(self.lut) - 1

    @property
    def q(self) -> int:
        return int(math.log2(self.Q + 1)) + 1

    @property
    def lam(self) -> int:
        return self.lut[0]

    @property
    def weight(self) -> int:
        return len(set(self.lut))

    @property
    def bit_length(self) -> int:
        return math.ceil(math.log2(self.weight)) + 1

    @property
    def magnitudes(self) -> tuple[int, ...]:
        """Distinct output magnitudes, ascending."""
        return tuple(sorted(set(self.lut)))

    @property
    def image(self) -> frozenset[int]:
        """Signed image set ``Im(F)``."""
        out = set()
        for v in self.lut[1:]:
            out.update((v, -v))
        if self.lam:
            out.update((self.lam, -self.lam))
        else:
            out.add(0)
        return frozenset(out)

    @property
    def is_identity(self) -> bool:
        return self.lut == tuple(range(self.Q + 1))

    @property
    def table(self) -> np.ndarray:
        """``F`` over ``M`` as an array indexed by ``m + Q`` (``F(0) = +lam``)."""
        return self._table

    def __call__(self, m: int, rng: np.random.Generator | None = None) -> int:
        return frame(self, m, rng=rng)

    def __str__(self) -> str:
        return format_lut(self)


def frame(f: FramingFunction, x: int, Q_tilde: int | None = None, rng=None) -> int:
    """Apply ``F(s_M(x))`` to an integer sum ``x``.

    In randomized tie mode a zero argument with ``lam > 0`` yields ``-lam`` or
    ``+lam`` with equal probability, using ``rng`` (a numpy Generator).
    """
    Q = f.Q
    x = int(x)
    if Q_tilde is not None:
        x = max(-Q_tilde, min(Q_tilde, x))
    m = max(-Q, min(Q, x))
    if m == 0 and f.lam and f.tie_mode == RANDOMIZED:
        if rng is None:
            raise ValueError("randomized tie mode needs an rng")
        return f.lam if rng.integers(2) else -f.lam
    return int(f.table[m + Q])


def identity(Q: int = 7) -> FramingFunction:
    """Identity framing, i.e. the finite-alphabet min-sum kernel."""
    return FramingFunction(tuple(range(Q + 1)))


def oms_framing(Q: int, theta: int) -> FramingFunction:
    """Offset min-sum: ``F(m) = sgn(m) max(|m| - theta, 0)``."""
    if not 1 <= theta <= Q - 1:
        raise ValueError(f"offset {theta} outside [1, {Q - 1}]")
    return FramingFunction(tuple(max(m - theta, 0) for m in range(Q + 1)))


def poms_framing(Q: int) -> FramingFunction:
    """Partially offset min-sum: odd magnitudes are decremented by one."""
    return FramingFunction(tuple(m if m % 2 == 0 else m - 1 for m in range(Q + 1)))


def count_framings(Q: int, W: int) -> int:
    """Number of framing LUTs over ``{-Q..Q}`` with exactly ``W`` distinct entries."""
    if not 1 <= W <= Q + 1:
        return 0
    return math.comb(Q, W - 1) * math.comb(Q + 1, W)


def enumerate_framings(Q: int, W: int, tie_mode: str = ALWAYS_POSITIVE) -> Iterator[FramingFunction]:
    """Yield every framing function of weight ``W``, in lexicographic LUT order.

    A LUT of weight ``W`` is a choice of ``W`` distinct values in ``[0, Q]``
    together with the ``W - 1`` positions in ``1..Q`` where the LUT steps up.
    """
    if not 1 <= W <= Q + 1:
        return
    luts = []
    for values in itertools.combinations(range(Q + 1), W):
        for steps in itertools.combinations(range(1, Q + 1), W - 1):
            lut = []
            level = 0
            bounds = set(steps)
            for m in range(Q + 1):
                if m in bounds:
                    level += 1
                lut.append(values[level])
            luts.append(tuple(lut))
    for lut in sorted(luts):
        yield FramingFunction(lut, tie_mode=tie_mode)


def framings_for_bit_length(Q: int, w: int) -> list[FramingFunction]:
    """All framings whose weight is ``2^(w-1)``, the largest weight fitting ``w`` bits."""
    return list(enumerate_framings(Q, 2 ** (w - 1)))


# w-bit sign-magnitude codec between Im(F) and the stored message


def encode_w(f: FramingFunction, value: int) -> tuple[int, int]:
    """Re-quantize ``value`` in ``Im(F)`` to ``(sign, rank)``.

    ``sign`` is 1 for negative values, ``rank`` indexes the ascending distinct
    magnitudes of ``F``. Together they fit in ``f.bit_length`` bits.
    """
    value = int(value)
    if value not in f.image:
        raise ValueError(f"{value} is not in Im(F) = {sorted(f.image)}")
    return int(value < 0), f.magnitudes.index(abs(value))


def decode_w(f: FramingFunction, code: tuple[int, int]) -> int:
    sign, rank = code
    mags = f.magnitudes
    if sign not in (0, 1) or not 0 <= rank < len(mags):
        raise ValueError(f"code {code} out of range for W={len(mags)}")
    mag = mags[rank]
    return -mag if sign else mag


def pack_w(f: FramingFunction, value: int) -> int:
    """``encode_w`` flattened into one integer: sign bit above the rank bits."""
    sign, rank = encode_w(f, value)
    return (sign << (f.bit_length - 1)) | rank


def unpack_w(f: FramingFunction, word: int) -> int:
    nbits = f.bit_length - 1
    return decode_w(f, (word >> nbits, word & ((1 << nbits) - 1)))


def cn_message_width(framings: Mapping[int, FramingFunction] | Iterable[FramingFunction],
                     degrees: Iterable[int] | None = None) -> int:
    """Bits needed for CN messages: ``ceil(log2 |union of Im(F_d)|)``."""
    if isinstance(framings, Mapping):
        chosen = [framings[d] for d in (degrees if degrees is not None else framings)]
    else:
        chosen = list(framings)
    union = set()
    for f in chosen:
        union |= f.image
    return math.ceil(math.log2(len(union)))


# LUT literal syntax: "[+-1, 1, 1, 1, 1, 6, 6, 6]"

_LUT_RE = re.compile(r"^\s*\[?(.*?)\]?\s*$")


def parse_lut(text: str, tie_mode: str = ALWAYS_POSITIVE) -> FramingFunction:
    """Parse ``[l0, l1, ..., lQ]``; a ``+-``/``±`` prefix on ``l0`` marks ``lam > 0``."""
    body = _LUT_RE.match(text).group(1)
    items = [s.strip() for s in body.split(",") if s.strip()]
    if not items:
        raise ValueError(f"empty LUT literal {text!r}")
    first = items[0]
    signed = first.startswith(("+-", "±", "+/-"))
    first = first.lstrip("+-±/ ")
    values = [int(first)] + [int(s) for s in items[1:]]
    if signed and values[0] == 0:
        raise ValueError("'+-' prefix needs a non-zero F(0)")
    if not signed and values[0] != 0:
        raise ValueError(f"non-zero F(0)={values[0]} must be written as +-{values[0]}")
    return FramingFunction(tuple(values), tie_mode=tie_mode)


def format_lut(f: FramingFunction) -> str:
    head = f"+-{f.lam}" if f.lam else "0"
    return "[" + ", ".join([head] + [str(v) for v in f.lut[1:]]) + "]"


# LUTs of the irregular kernels from the trade-off study (Q = 7)
TRADEOFF_LUTS = {
    0: (0, 1, 2, 3, 4, 5, 6, 7),
    1: (0, 0, 2, 2, 3, 3, 7, 7),
    2: (0, 1, 1, 2, 2, 7, 7, 7),
    3: (0, 1, 1, 3, 3, 3, 7, 7),
    4: (0, 1, 1, 3, 3, 7, 7, 7),
    5: (1, 1, 1, 1, 5, 5, 5, 5),
    6: (1, 1, 1, 1, 7, 7, 7, 7),
    7: (1, 1, 1, 5, 5, 5, 5, 5),
}


def named_lut(index: int, tie_mode: str = ALWAYS_POSITIVE) -> FramingFunction:
    return FramingFunction(TRADEOFF_LUTS[index], tie_mode=tie_mode)
