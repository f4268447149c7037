"""Points of the Cantor group, the metric delta_gamma and standard intervals.

Coordinates are 1-based. Internally a point is stored as an integer code in
which coordinate ``i`` occupies bit ``i - 1``, so the first ``n`` coordinates
of a point are ``code & (2**n - 1)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

__all__ = [
    "GammaParam",
    "as_gamma",
    "CantorPoint",
    "StandardInterval",
    "first_disagreement",
    "delta_gamma",
    "standard_interval_of",
    "standard_intervals",
    "cover_sum",
    "first_disagreement_codes",
    "delta_gamma_codes",
]


@dataclass(frozen=True)
class GammaParam:
    """A contraction ratio ``0 < gamma < 1``."""

    gamma: float

    def __post_init__(self):
        g = float(self.gamma)
        if not (0.0 < g < 1.0) or math.isnan(g):
            raise ValueError(f"gamma must lie in the open interval (0, 1), got {self.gamma!r}")
        object.__setattr__(self, "gamma", g)

    def __float__(self):
        return self.gamma

    @property
    def dimension(self) -> float:
        """log 2 / (-log gamma)."""
        return math.log(2.0) / -math.log(self.gamma)


def as_gamma(g) -> GammaParam:
    return g if isinstance(g, GammaParam) else GammaParam(g)


class CantorPoint:
    """A finitely supported point of the infinite product of Z_2.

    Parameters
    ----------
    bits : iterable of 0/1, or int code
        Coordinates ``x(1), x(2), ...``; all later coordinates are zero.
    support_level : int, optional
        Level ``L`` such that every coordinate past ``L`` vanishes. Defaults
        to the number of bits given.
    """

    __slots__ = ("_code", "_support_level")

    def __init__(self, bits: Iterable[int] | int = (), support_level: int | None = None):
        if isinstance(bits, (int, np.integer)):
            code = int(bits)
            if code < 0:
                raise ValueError("point code must be nonnegative")
            nbits = code.bit_length()
        else:
            code = 0
            nbits = 0
            for i, b in enumerate(bits):
                b = int(b)
                if b not in (0, 1):
                    raise ValueError(f"coordinate {i + 1} is {b}; coordinates must be 0 or 1")
                code |= b << i
                nbits = i + 1
        if support_level is None:
            support_level = nbits
        if support_level < code.bit_length():
            raise ValueError("support_level is smaller than the last nonzero coordinate")
        self._code = code
        self._support_level = int(support_level)

    @classmethod
    def parse(cls, text: str) -> "CantorPoint":
        """Parse a bit string such as ``"0110"`` (coordinate 1 leftmost)."""
        text = text.strip()
        if not text or any(ch not in "01" for ch in text):
            raise ValueError(f"invalid bit string {text!r}")
        return cls((int(ch) for ch in text), support_level=len(text))

    @classmethod
    def from_code(cls, code: int, level: int) -> "CantorPoint":
        return cls(int(code), support_level=level)

    @property
    def code(self) -> int:
        return self._code

    @property
    def support_level(self) -> int:
        return self._support_level

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple((self._code >> i) & 1 for i in range(self._support_level))

    def __getitem__(self, n: int) -> int:
        """Coordinate ``x(n)`` for ``n >= 1``."""
        if n < 1:
            raise IndexError("coordinates are indexed from 1")
        return (self._code >> (n - 1)) & 1

    def truncate(self, n: int) -> "CantorPoint":
        """The projection onto the first ``n`` coordinates (later ones set to 0)."""
        return CantorPoint(self._code & ((1 << n) - 1), support_level=n)

    def with_level(self, level: int) -> "CantorPoint":
        return CantorPoint(self._code, support_level=level)

    def __eq__(self, other):
        if not isinstance(other, CantorPoint):
            return NotImplemented
        return self._code == other._code

    def __hash__(self):
        return hash(("CantorPoint", self._code))

    def __str__(self):
        return "".join(str(b) for b in self.bits) or "0"

    def __repr__(self):
        return f"CantorPoint({str(self)!r})"


def first_disagreement(x: CantorPoint, y: CantorPoint) -> int | None:
    """Least ``n`` with ``x(n) != y(n)``; ``None`` when ``x == y``."""
    diff = x.code ^ y.code
    if diff == 0:
        return None
    return (diff & -diff).bit_length()


def delta_gamma(x: CantorPoint, y: CantorPoint, g) -> float:
    """sum_n |x(n) - y(n)| gamma^(n-1) (1 - gamma), summed exactly over the finite support."""
    gamma = as_gamma(g).gamma
    diff = x.code ^ y.code
    terms = []
    n = 1
    while diff:
        if diff & 1:
            terms.append(gamma ** (n - 1) * (1.0 - gamma))
        diff >>= 1
        n += 1
    return math.fsum(terms)


def first_disagreement_codes(x, y) -> np.ndarray:
    """Vectorised first disagreement index; 0 marks equal codes."""
    diff = np.bitwise_xor(np.asarray(x, dtype=np.int64), np.asarray(y, dtype=np.int64))
    low = diff & -diff
    out = np.zeros(diff.shape, dtype=np.int64)
    nz = low != 0
    out[nz] = np.log2(low[nz].astype(np.float64)).astype(np.int64) + 1
    return out


def delta_gamma_codes(x, y, g, level: int) -> np.ndarray:
    """Vectorised delta_gamma for integer codes supported within ``level``."""
    gamma = as_gamma(g).gamma
    diff = np.bitwise_xor(np.asarray(x, dtype=np.int64), np.asarray(y, dtype=np.int64))
    weights = gamma ** np.arange(level) * (1.0 - gamma)
    bits = (diff[..., None] >> np.arange(level)) & 1
    return bits @ weights


@dataclass(frozen=True)
class StandardInterval:
    """The cylinder set V(s, n) of points whose first ``n`` coordinates equal ``s``."""

    prefix: CantorPoint
    level: int

    def __post_init__(self):
        if self.level < 0:
            raise ValueError("level must be nonnegative")
        if self.prefix.code >> self.level:
            raise ValueError("prefix has a nonzero coordinate past the interval level")

    def contains(self, x: CantorPoint) -> bool:
        mask = (1 << self.level) - 1
        return (x.code & mask) == self.prefix.code

    def diameter(self, g) -> float:
        return as_gamma(g).gamma ** self.level


def standard_intervals(n: int) -> Iterator[StandardInterval]:
    """All 2**n standard intervals of level ``n``."""
    for code in range(1 << n):
        yield StandardInterval(CantorPoint.from_code(code, n), n)


def standard_interval_of(u: CantorPoint, diameter_bound: float, g) -> StandardInterval:
    """Standard interval containing every set of diameter ``diameter_bound`` through ``u``.

    The level is the least ``n >= 1`` with ``gamma**n <= diameter_bound / (1 - gamma)``.
    The logarithmic ceiling is corrected a posteriori in both directions, since
    overshooting the level would break containment and undershooting would
    break the diameter bound.
    """
    gamma = as_gamma(g).gamma
    if not diameter_bound > 0:
        raise ValueError("diameter_bound must be positive")
    if diameter_bound >= 1.0 - gamma:
        raise ValueError(
            f"diameter_bound {diameter_bound} must be smaller than 1 - gamma = {1.0 - gamma}"
        )
    ratio = diameter_bound / (1.0 - gamma)
    n = max(1, math.ceil(math.log(ratio) / math.log(gamma)))
    while gamma**n > ratio:
        n += 1
    while n > 1 and gamma ** (n - 1) <= ratio:
        n -= 1
    return StandardInterval(u.truncate(n), n)


def cover_sum(level: int, t: float, g) -> float:
    """sum over the 2**n level-n standard intervals of diameter**t, i.e. 2^n gamma^(n t)."""
    gamma = as_gamma(g).gamma
    if level < 1:
        raise ValueError("level must be at least 1")
    return 2.0**level * gamma ** (level * t)
