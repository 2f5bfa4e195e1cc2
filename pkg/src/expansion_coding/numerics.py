"""Scalar primitives shared across the package.

All logarithms are base 2, so every rate is in bits. Functions accept
scalars or numpy arrays and return the matching shape.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

LOG2E = float(np.log2(np.e))

# H(p) is reported as exactly 0 below this probability
_TINY = 1e-300


class SourceKind(str, enum.Enum):
    EXPONENTIAL = "exponential"
    LAPLACE = "laplace"


@dataclass(frozen=True)
class SourceModel:
    """Exponential (one-sided) or Laplacian (two-sided) source with rate ``lam``.

    The mean of ``|X|`` is ``1 / lam`` for both kinds.
    """

    kind: SourceKind
    lam: float

    def __post_init__(self):
        object.__setattr__(self, "kind", SourceKind(self.kind))
        if not (np.isfinite(self.lam) and self.lam > 0):
            raise ValueError(f"lambda must be a positive finite real, got {self.lam!r}")

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind is SourceKind.EXPONENTIAL:
            return np.where(x > 0, -np.expm1(-self.lam * np.maximum(x, 0.0)), 0.0)
        tail = 0.5 * np.exp(-self.lam * np.abs(x))
        return np.where(x >= 0, 1.0 - tail, tail)


def binary_entropy(p):
    """Binary entropy in bits, with ``0 log 0 = 0``.

    >>> float(binary_entropy(0.5))
    1.0
    """
    p = np.asarray(p, dtype=float)
    if np.any((p < 0) | (p > 1)) or np.any(np.isnan(p)):
        raise ValueError("binary_entropy expects probabilities in [0, 1]")
    q = 1.0 - p
    small = np.minimum(p, q)
    safe = np.where(small < _TINY, 0.5, p)
    h = -(safe * np.log2(safe) + np.log1p(-safe) * (1.0 - safe) * LOG2E)
    h = np.where(small < _TINY, 0.0, h)
    h = np.clip(h, 0.0, 1.0)
    return h[()] if h.ndim == 0 else h


def logistic_level(a):
    """Evaluate ``1 / (1 + e^a)`` without overflow for large ``|a|``."""
    a = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(a)):
        raise ValueError("logistic_level requires finite input")
    ex = np.exp(-np.abs(a))
    out = np.where(a >= 0, ex / (1.0 + ex), 1.0 / (1.0 + ex))
    return out[()] if out.ndim == 0 else out


def shannon_rd(model: SourceModel, D):
    """Shannon rate-distortion function ``-log2(lam * D)`` in bits.

    The same closed form holds for the exponential source under one-sided
    error distortion and for the Laplacian source under absolute error.
    Returns 0 for ``D >= 1/lam`` and ``inf`` at ``D == 0``.
    """
    D = np.asarray(D, dtype=float)
    if np.any(D < 0) or np.any(np.isnan(D)):
        raise ValueError("distortion must be non-negative")
    with np.errstate(divide="ignore"):
        r = np.where(D * model.lam >= 1.0, 0.0, -np.log2(model.lam * D))
    r = np.where(D == 0, np.inf, r)
    r = r + 0.0  # normalise -0.0
    return r[()] if r.ndim == 0 else r
