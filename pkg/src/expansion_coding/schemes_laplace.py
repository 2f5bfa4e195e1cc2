"""Laplacian source: sign bit plus per-level symmetric test channels.

Level ``l`` reproduces ``X_hat_l ~ Bernoulli(hat_p_l)`` and the source bit is
obtained through a binary symmetric channel with crossover ``d_l``, so
``hat_p_l = (p_l - d_l) / (1 - 2 d_l)``. The sign is sent uncoded (1 bit).

The absolute-error distortion within the window is computed by a level-wise
recursion. Write ``e_l = X_l - X_hat_l`` and ``A_k = sum_{l<=k} 2**l e_l``.
Because ``|A_{k-1}| < 2**k``,

    E|A_k| = (1 - d_k) E|A_{k-1}| + 2**k d_k + E[e_k] E[A_{k-1}],

with ``E[e_l] = d_l (1 - 2 p_l) / (1 - 2 d_l)``. The ``"published"`` form
multiplies the last term by an extra ``2**k`` and disagrees with exact
enumeration; it is kept only for comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .expansion import LevelProfile, LevelRange, level_params
from .numerics import SourceKind, SourceModel, binary_entropy, shannon_rd
from .schemes_exp import (
    Allocation,
    GapRow,
    RDPoint,
    Scheme,
    check_level_count,
    heuristic_allocation,
)

ORACLE_MAX_LEVELS = 14
RECURSION_FORMS = ("exact", "published")


@dataclass
class LaplaceDistortionTrace:
    D_acc: np.ndarray
    S_acc: np.ndarray
    form: str = "exact"


@dataclass(frozen=True)
class TimeShareParams:
    alpha: float

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha!r}")


def _check(profile: LevelProfile, alloc: Allocation):
    if profile.range != alloc.range:
        raise ValueError(f"profile range {profile.range} does not match allocation range {alloc.range}")
    p, d = profile.p, alloc.d
    if np.any(d >= 0.5):
        raise ValueError("every level distortion must be below 0.5")
    if np.any(d > p):
        raise ValueError("level distortion exceeds the source bit probability")
    return p, d


def hat_probabilities(profile: LevelProfile, alloc: Allocation) -> np.ndarray:
    p, d = _check(profile, alloc)
    return np.clip((p - d) / (1.0 - 2.0 * d), 0.0, 0.5)


def distortion_trace(profile: LevelProfile, alloc: Allocation, form: str = "exact") -> LaplaceDistortionTrace:
    """Accumulated ``E|sum_{l<=k} 2**l (X_l - X_hat_l)|`` for every level ``k``."""
    if form not in RECURSION_FORMS:
        raise ValueError(f"form must be one of {RECURSION_FORMS}")
    p, d = _check(profile, alloc)
    w = profile.range.weights
    mean_diff = d * (1.0 - 2.0 * p) / (1.0 - 2.0 * d)
    D_acc = np.empty_like(d)
    S_acc = np.empty_like(d)
    D_acc[0] = w[0] * d[0]
    S_acc[0] = w[0] * mean_diff[0]
    for k in range(1, d.size):
        cross = mean_diff[k] * S_acc[k - 1]
        if form == "published":
            cross *= w[k]
        D_acc[k] = D_acc[k - 1] * (1.0 - d[k]) + w[k] * d[k] + cross
        S_acc[k] = S_acc[k - 1] + w[k] * mean_diff[k]
    return LaplaceDistortionTrace(D_acc, S_acc, form)


def laplace_point(profile: LevelProfile, alloc: Allocation, form: str = "exact",
                  include_truncation: bool = False) -> RDPoint:
    """Rate ``1 + sum max(H(p_l) - H(d_l), 0)`` and the recursion's distortion.

    With ``include_truncation`` the bound ``2**-L2/lam + 2**-L1`` on the
    discarded levels is added to the distortion and reported in
    ``truncation_term``; otherwise ``truncation_term`` is 0.
    """
    trace = distortion_trace(profile, alloc, form)
    per_level = np.maximum(binary_entropy(profile.p) - binary_entropy(alloc.d), 0.0)
    trunc = profile.range.truncation_bound(profile.lam) if include_truncation else 0.0
    return RDPoint(1.0 + math.fsum(per_level), float(trace.D_acc[-1]) + trunc, per_level,
                   np.empty(0), trunc, Scheme.LAPLACE_BASE, trace=trace)


def distortion_oracle(profile: LevelProfile, alloc: Allocation) -> float:
    """Exact ``E|sum 2**l (X_l - X_hat_l)|`` by enumerating all joint level outcomes.

    The error scaled by ``2**L1`` is an integer in ``(-2**levels, 2**levels)``,
    so its full law is carried on that grid and convolved level by level with
    the three outcomes of ``X_l - X_hat_l``.
    """
    if profile.range.size > ORACLE_MAX_LEVELS:
        raise ValueError(f"enumeration limited to {ORACLE_MAX_LEVELS} levels, got {profile.range.size}")
    hat_p = hat_probabilities(profile, alloc)
    size = profile.range.size
    off = (1 << size) - 1
    mass = np.zeros(2 * off + 1)
    mass[off] = 1.0
    for i, (hp, dl) in enumerate(zip(hat_p, alloc.d)):
        step = 1 << i
        up = (1 - hp) * dl      # x=1, x_hat=0
        down = hp * dl          # x=0, x_hat=1
        nxt = (1 - dl) * mass
        nxt[step:] += up * mass[:-step]
        nxt[:-step] += down * mass[step:]
        mass = nxt
    values = np.abs(np.arange(-off, off + 1, dtype=float)) * math.ldexp(1.0, -profile.range.L1)
    return math.fsum(mass * values)


def time_share(base: RDPoint, params: TimeShareParams | float, lam: float) -> RDPoint:
    """Send a fraction ``alpha`` of blocks to the all-zero codeword."""
    if not isinstance(params, TimeShareParams):
        params = TimeShareParams(float(params))
    if base.scheme is not Scheme.LAPLACE_BASE:
        raise ValueError("time sharing applies to a LaplaceBase point")
    a = params.alpha
    return RDPoint((1 - a) * base.rate_bits, (1 - a) * base.distortion + a / lam,
                   (1 - a) * base.per_level_rates, base.q, (1 - a) * base.truncation_term,
                   Scheme.LAPLACE_TIME_SHARED, a)


def lower_convex_envelope(distortion, rate) -> tuple[np.ndarray, np.ndarray]:
    """Vertices of the lower convex hull of points in the (distortion, rate) plane.

    The hull stops at its minimum-rate vertex: extra distortion never costs rate.
    """
    pts = sorted(zip(np.asarray(distortion, float), np.asarray(rate, float)))
    hull: list[tuple[float, float]] = []
    for x, y in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1) <= 0:
                hull.pop()
            else:
                break
        if hull and hull[-1][0] == x:
            if y < hull[-1][1]:
                hull[-1] = (x, y)
            continue
        hull.append((x, y))
    hx, hy = map(np.array, zip(*hull))
    stop = int(np.argmin(hy)) + 1
    return hx[:stop], hy[:stop]


def laplace_sweep(range_: LevelRange, lam: float, D_grid, alpha_grid=None) -> list[GapRow]:
    """Base and time-shared points along a grid of target distortions.

    The time-shared rate at a row is the lower convex envelope of every
    ``time_share(base_j, alpha)`` with ``alpha`` on the grid, evaluated at the
    row's base distortion. Its ``alpha`` field is the grid value of the
    cheapest single time-shared point whose distortion does not exceed it.
    """
    if alpha_grid is None:
        alpha_grid = np.linspace(0.0, 1.0, 101)
    alpha_grid = np.asarray(alpha_grid, dtype=float)
    model = SourceModel(SourceKind.LAPLACE, lam)
    profile = level_params(lam, range_)
    Ds = sorted(float(x) for x in D_grid)
    bases = []
    for D in Ds:
        alloc = heuristic_allocation(D, range_)
        alloc = Allocation(range_, np.minimum(alloc.d, profile.p), D)
        bases.append(laplace_point(profile, alloc, include_truncation=True))
    cand_d, cand_r, cand_a = [], [], []
    for b in bases:
        for a in alpha_grid:
            ts = time_share(b, a, lam)
            cand_d.append(ts.distortion)
            cand_r.append(ts.rate_bits)
            cand_a.append(a)
    hx, hy = lower_convex_envelope(cand_d, cand_r)
    cand_d, cand_r, cand_a = map(np.asarray, (cand_d, cand_r, cand_a))
    rows = []
    for D, b in zip(Ds, bases):
        r_sh = float(shannon_rd(model, b.distortion))
        rows.append(GapRow(Scheme.LAPLACE_BASE, D, b.rate_bits, b.distortion, r_sh, b.rate_bits - r_sh))
        env = float(np.interp(b.distortion, hx, hy))
        feasible = cand_d <= b.distortion
        alpha = float(cand_a[feasible][np.argmin(cand_r[feasible])]) if feasible.any() else 0.0
        rows.append(GapRow(Scheme.LAPLACE_TIME_SHARED, D, env, b.distortion, r_sh, env - r_sh, alpha))
    return rows


def laplace_gap_report(range_: LevelRange, lam: float, D_grid, alpha_grid=None) -> list[GapRow]:
    check_level_count(lam, range_, D_grid)
    return laplace_sweep(range_, lam, D_grid, alpha_grid)


def oracle_battery(seed: int, trials: int, max_levels: int = 12):
    """Random small instances ``(profile, alloc)`` for recursion-vs-enumeration checks.

    Even trials use the heuristic allocation at a random target in
    ``(0, 1/lam]``; odd trials draw ``d_l`` uniformly in ``[0, min(p_l, 0.45)]``.
    """
    if not 1 <= max_levels <= ORACLE_MAX_LEVELS:
        raise ValueError(f"max_levels must lie in [1, {ORACLE_MAX_LEVELS}]")
    rng = np.random.default_rng(seed)
    for t in range(trials):
        size = int(rng.integers(1, max_levels + 1))
        L1 = int(rng.integers(0, size))
        range_ = LevelRange(L1, size - 1 - L1)
        lam = float(rng.choice([0.5, 1.0, 2.0]))
        profile = level_params(lam, range_)
        if t % 2 == 0:
            D = float(rng.uniform(0.01, 1.0)) / lam
            alloc = heuristic_allocation(D, range_)
        else:
            alloc = Allocation(range_, rng.uniform(0.0, np.minimum(profile.p, 0.45)))
        yield profile, alloc
