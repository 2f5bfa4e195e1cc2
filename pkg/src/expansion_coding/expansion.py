"""Binary expansion of exponential variables over a finite window of levels.

An Exp(lam) variable is the sum over all integers ``l`` of ``2**l * B_l`` with
independent ``B_l ~ Bernoulli(1 / (1 + exp(lam * 2**l)))``. Here the sum is cut
to the window ``-L1 <= l <= L2``.

Every per-level vector in this package is indexed in ascending level order:
entry ``i`` belongs to level ``l = i - L1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._chunks import map_chunks
from .numerics import logistic_level


@dataclass(frozen=True)
class LevelRange:
    L1: int
    L2: int

    def __post_init__(self):
        for name in ("L1", "L2"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {v!r}")
            object.__setattr__(self, name, int(v))

    @property
    def size(self) -> int:
        return self.L1 + self.L2 + 1

    @property
    def levels(self) -> np.ndarray:
        return np.arange(-self.L1, self.L2 + 1)

    @property
    def weights(self) -> np.ndarray:
        return np.ldexp(1.0, self.levels)

    def index(self, level: int) -> int:
        if not -self.L1 <= level <= self.L2:
            raise IndexError(f"level {level} outside [-{self.L1}, {self.L2}]")
        return level + self.L1

    def truncation_bound(self, lam: float) -> float:
        """Upper bound ``2**-L2 / lam + 2**-L1`` on the discarded-level distortion."""
        return math.ldexp(1.0, -self.L2) / lam + math.ldexp(1.0, -self.L1)


@dataclass(frozen=True)
class LevelProfile:
    range: LevelRange
    lam: float
    p: np.ndarray = field(repr=False)

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.shape != (self.range.size,):
            raise ValueError(f"expected {self.range.size} level probabilities, got shape {p.shape}")
        if np.any((p < 0) | (p > 1)):
            raise ValueError("level probabilities must lie in [0, 1]")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @property
    def levels(self) -> np.ndarray:
        return self.range.levels

    def at(self, level: int) -> float:
        return float(self.p[self.range.index(level)])


@dataclass
class BitPlanes:
    """Sign and per-level bits of ``n`` symbols (rows), levels ascending (columns)."""

    sign: np.ndarray
    bits: np.ndarray
    overflow_count: int = 0

    @property
    def n(self) -> int:
        return self.bits.shape[0]

    def values(self, range_: LevelRange) -> np.ndarray:
        return self.sign * (self.bits @ range_.weights)


def level_params(lam: float, range_: LevelRange) -> LevelProfile:
    """Bernoulli parameters ``p_l = 1 / (1 + exp(lam * 2**l))`` for the window."""
    if not (np.isfinite(lam) and lam > 0):
        raise ValueError(f"lambda must be positive, got {lam!r}")
    return LevelProfile(range_, float(lam), logistic_level(lam * range_.weights))


def expand(x: float, range_: LevelRange) -> tuple[int, np.ndarray, bool]:
    """Floor ``|x|`` onto the dyadic grid of the window.

    Returns ``(sign, bits, overflowed)``. Magnitudes at or above ``2**(L2+1)``
    saturate to all ones with ``overflowed=True``.
    """
    if not math.isfinite(x):
        raise ValueError("cannot expand a non-finite value")
    sign = -1 if x < 0 else 1
    ax = abs(x)
    if ax >= math.ldexp(1.0, range_.L2 + 1):
        return sign, np.ones(range_.size, dtype=np.uint8), True
    m = math.floor(math.ldexp(ax, range_.L1))
    bits = np.array([(m >> i) & 1 for i in range(range_.size)], dtype=np.uint8)
    return sign, bits, False


def expand_many(x, range_: LevelRange) -> BitPlanes:
    """Vectorised :func:`expand`."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("cannot expand non-finite values")
    sign = np.where(x < 0, -1, 1).astype(np.int8)
    ax = np.abs(x)
    over = ax >= math.ldexp(1.0, range_.L2 + 1)
    m = np.floor(np.ldexp(np.where(over, 0.0, ax), range_.L1))
    # m is integer-valued, so halving and flooring stays exact
    bits = np.empty((x.size, range_.size), dtype=np.uint8)
    for i in range(range_.size):
        bits[:, i] = np.mod(np.floor(np.ldexp(m, -i)), 2.0)
    bits[over] = 1
    return BitPlanes(sign, bits, int(over.sum()))


def reconstruct(sign: int, bits, range_: LevelRange) -> float:
    bits = np.asarray(bits)
    if bits.shape != (range_.size,):
        raise ValueError(f"expected {range_.size} bits, got shape {bits.shape}")
    if sign not in (-1, 1):
        raise ValueError("sign must be -1 or +1")
    mag = math.fsum(math.ldexp(1.0, int(l)) for l, b in zip(range_.levels, bits) if b)
    return sign * mag


def sample_bit_planes(profile: LevelProfile, n: int, seed: int, signed: bool = False,
                      workers: int = 1) -> BitPlanes:
    """Draw ``n`` symbols level by level, ``B_l ~ Bernoulli(p_l)`` independently.

    With ``signed=True`` each symbol also gets an independent uniform sign.
    """
    p = profile.p

    def draw(rng, size):
        bits = (rng.random((size, p.size)) < p).astype(np.uint8)
        if signed:
            sign = (2 * rng.integers(0, 2, size) - 1).astype(np.int8)
        else:
            sign = np.ones(size, dtype=np.int8)
        return sign, bits

    parts = map_chunks(draw, n, seed, workers)
    return BitPlanes(np.concatenate([s for s, _ in parts]), np.concatenate([b for _, b in parts]))


def sample_by_levels(profile: LevelProfile, n: int, seed: int, signed: bool = False,
                     workers: int = 1) -> np.ndarray:
    return sample_bit_planes(profile, n, seed, signed, workers).values(profile.range)


def mgf_partial_product(lam: float, t: float, range_: LevelRange) -> float:
    """Product of ``E[exp(t * 2**l * B_l)]`` over the window.

    Tends to ``lam / (lam - t)`` as the window grows.
    """
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if t >= lam:
        raise ValueError(f"moment generating function diverges for t >= lambda ({t} >= {lam})")
    w = range_.weights
    logs = np.logaddexp(0.0, (t - lam) * w) - np.logaddexp(0.0, -lam * w)
    return math.exp(math.fsum(logs))


def bit_marginal_series(lam: float, level: int, tol: float = 1e-18) -> float:
    """``Pr{B_l = 1}`` summed directly over the intervals ``[2**l (2k-1), 2**l 2k)``."""
    a = lam * math.ldexp(1.0, level)
    total = 0.0
    k0 = 1
    block = 1 << 16
    while True:
        k = np.arange(k0, k0 + block, dtype=float)
        terms = np.exp(-a * (2 * k - 1)) - np.exp(-2 * a * k)
        total += math.fsum(terms)
        if terms[-1] < tol:
            return total
        k0 += block
        block = min(block * 2, 1 << 22)
