"""Achievable rate-distortion points for the exponential source.

Two per-level coding schemes are supported:

* ``EXP_Z``: each level is coded independently against a Z test channel
  (reproduction bit never exceeds the source bit).
* ``EXP_SUCCESSIVE``: levels are coded from the top down. A level uses the Z
  channel while all higher levels matched, and a binary symmetric channel
  with the same mean difference otherwise.

For both, the distortion is ``sum 2**l d_l`` plus the truncation bound
``2**-L2 / lam + 2**-L1``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .expansion import LevelProfile, LevelRange, level_params
from .numerics import LOG2E, SourceKind, SourceModel, binary_entropy, logistic_level, shannon_rd

GAP_CONSTANT = 6 * LOG2E

_EPS = 1e-15


class Scheme(str, enum.Enum):
    EXP_Z = "ExpZ"
    EXP_SUCCESSIVE = "ExpSuccessive"
    LAPLACE_BASE = "LaplaceBase"
    LAPLACE_TIME_SHARED = "LaplaceTimeShared"


@dataclass(frozen=True)
class Allocation:
    """Per-level distortion parameters ``d_l`` (ascending levels)."""

    range: LevelRange
    d: np.ndarray = field(repr=False)
    target_D: float | None = None

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float)
        if d.shape != (self.range.size,):
            raise ValueError(f"expected {self.range.size} level distortions, got shape {d.shape}")
        if np.any((d < 0) | (d > 0.5)) or np.any(np.isnan(d)):
            raise ValueError("level distortions must lie in [0, 0.5]")
        d.setflags(write=False)
        object.__setattr__(self, "d", d)


@dataclass
class RDPoint:
    rate_bits: float
    distortion: float
    per_level_rates: np.ndarray
    q: np.ndarray
    truncation_term: float
    scheme: Scheme
    alpha: float = 0.0
    trace: object = None


class ZChannel(NamedTuple):
    rate: float
    hat_p: float
    crossover: float


class BSChannel(NamedTuple):
    rate: float
    hat_p: float
    crossover: float


def heuristic_allocation(D: float, range_: LevelRange) -> Allocation:
    """``d_l = 1 / (1 + exp(2**l / D))``, i.e. the levels of an Exp(1/D) noise."""
    if not D > 0:
        raise ValueError(f"target distortion must be positive, got {D!r}")
    return Allocation(range_, logistic_level(range_.weights / D), float(D))


def _check_pd(p, d):
    p = np.asarray(p, dtype=float)
    d = np.asarray(d, dtype=float)
    if np.any((p < 0) | (p > 0.5)):
        raise ValueError("source bit probability must lie in [0, 0.5]")
    if np.any(d < 0):
        raise ValueError("level distortion must be non-negative")
    if np.any(d > p):
        raise ValueError("level distortion exceeds the source bit probability; code the level as uncoded")
    return p, d


def _z_parts(p, d):
    c = 1.0 - p + d
    cross = d / c
    rate = binary_entropy(p) - c * binary_entropy(cross)
    return np.maximum(rate, 0.0), p - d, cross


def _bsc_parts(p, d):
    denom = 1.0 - 2.0 * p + 2.0 * d
    with np.errstate(invalid="ignore", divide="ignore"):
        eps = np.where(denom > 0, d / np.where(denom > 0, denom, 1.0), 0.0)
        eps = np.minimum(eps, 0.5)
        hat_p = np.where(0.5 - eps > _EPS, (p - eps) / (1.0 - 2.0 * eps), 0.5)
    hat_p = np.clip(hat_p, 0.0, 1.0)
    rate = binary_entropy(p) - binary_entropy(eps)
    return np.maximum(rate, 0.0), hat_p, eps


def z_channel(p, d) -> ZChannel:
    """Z test channel for a Bernoulli(p) level at mean distortion ``d``.

    The reproduction has ``Pr{1} = p - d`` and a reproduced 0 turns into a
    source 1 with probability ``d / (1 - p + d)``.
    """
    p, d = _check_pd(p, d)
    rate, hat_p, cross = _z_parts(p, d)
    return ZChannel(rate[()], hat_p[()], cross[()])


def z_channel_rate(p, d):
    return z_channel(p, d).rate


def bsc(p, d) -> BSChannel:
    """Symmetric test channel for a Bernoulli(p) level with ``E[X - X_hat] = d``.

    Crossover is ``d / (1 - 2p + 2d)``.
    """
    p, d = _check_pd(p, d)
    rate, hat_p, eps = _bsc_parts(p, d)
    return BSChannel(rate[()], hat_p[()], eps[()])


def bsc_rate(p, d):
    return bsc(p, d).rate


def successive_q(d) -> np.ndarray:
    """``q_l = prod_{k > l} (1 - d_k)``, one pass from the top level down."""
    d = np.asarray(d, dtype=float)
    q = np.empty_like(d)
    run = 1.0
    for i in range(d.size - 1, -1, -1):
        q[i] = run
        run *= 1.0 - d[i]
    return q


def scheme_point(profile: LevelProfile, alloc: Allocation, scheme: Scheme | str) -> RDPoint:
    scheme = Scheme(scheme)
    if scheme not in (Scheme.EXP_Z, Scheme.EXP_SUCCESSIVE):
        raise ValueError(f"{scheme.value} is not an exponential scheme")
    if profile.range != alloc.range:
        raise ValueError(f"profile range {profile.range} does not match allocation range {alloc.range}")
    p, d = _check_pd(profile.p, alloc.d)
    weights = profile.range.weights
    r_z = _z_parts(p, d)[0]
    if scheme is Scheme.EXP_Z:
        per_level = r_z
        q = np.empty(0)
    else:
        q = successive_q(d)
        per_level = q * r_z + (1.0 - q) * _bsc_parts(p, d)[0]
    trunc = profile.range.truncation_bound(profile.lam)
    distortion = math.fsum(weights * d) + trunc
    return RDPoint(math.fsum(per_level), distortion, per_level, q, trunc, scheme)


@dataclass(frozen=True)
class GapRow:
    scheme: Scheme
    D_target: float
    rate_bits: float
    distortion: float
    shannon_rate: float
    gap_bits: float
    alpha: float = 0.0


def min_levels_for(model_lam: float, D: float) -> int:
    """Smallest integer ``L`` with ``L > -log2(lam * D)``."""
    return max(0, math.floor(-math.log2(model_lam * D)) + 1)


def check_level_count(lam: float, range_: LevelRange, D_grid) -> None:
    for D in D_grid:
        if not 0 < D <= 1 / lam:
            raise ValueError(f"target distortion {D} outside (0, 1/lambda] = (0, {1 / lam}]")
        need = min_levels_for(lam, D)
        if range_.L1 < need or range_.L2 < need:
            raise ValueError(
                f"level-count condition L1, L2 > -log2(lambda*D) violated at D={D}: "
                f"need L1 >= {need} and L2 >= {need}, got L1={range_.L1}, L2={range_.L2}"
            )


def exp_sweep(model: SourceModel, range_: LevelRange, D_grid) -> list[GapRow]:
    """Both exponential schemes along a grid of target distortions.

    Targets above ``1/lam`` are allowed; levels where the heuristic gives
    ``d_l > p_l`` are then left uncoded (rate 0, contribution ``2**l p_l``).
    Rows are sorted by target distortion, ExpZ before ExpSuccessive.
    """
    profile = level_params(model.lam, range_)
    rows = []
    for D in sorted(float(x) for x in D_grid):
        alloc = heuristic_allocation(D, range_)
        clipped = Allocation(range_, np.minimum(alloc.d, profile.p), D)
        for scheme in (Scheme.EXP_Z, Scheme.EXP_SUCCESSIVE):
            pt = scheme_point(profile, clipped, scheme)
            r_sh = float(shannon_rd(model, pt.distortion))
            rows.append(GapRow(scheme, D, pt.rate_bits, pt.distortion, r_sh, pt.rate_bits - r_sh))
    return rows


def gap_report(model: SourceModel, range_: LevelRange, D_grid) -> list[GapRow]:
    """Gap to the Shannon limit for both schemes at each target distortion.

    Enforces ``0 < D <= 1/lam`` and ``L1, L2 > -log2(lam * D)``.
    """
    if SourceKind(model.kind) is not SourceKind.EXPONENTIAL:
        raise ValueError("gap_report covers the exponential source; use laplace_gap_report")
    check_level_count(model.lam, range_, D_grid)
    return exp_sweep(model, range_, D_grid)
