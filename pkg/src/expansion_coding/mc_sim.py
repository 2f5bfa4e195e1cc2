"""Per-symbol Monte Carlo check of the analytic distortion bookkeeping.

The source is drawn level by level, including levels outside the coding
window (down to ``EXTRA_LOW`` levels below it and up to the level where
``p_l`` underflows to 0), so the truncation defect shows up empirically.
Reproduction bits are then drawn from the reverse conditional
``Pr{X_hat_l | X_l}`` of each level's test channel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._chunks import map_chunks
from .expansion import LevelRange, level_params
from .numerics import SourceKind, SourceModel
from .schemes_exp import Allocation, Scheme, _bsc_parts, _check_pd
from .schemes_laplace import distortion_trace, hat_probabilities

EXTRA_LOW = 52
KS_CRITICAL_1PCT = 1.63

_SIM_SCHEMES = (Scheme.EXP_Z, Scheme.EXP_SUCCESSIVE, Scheme.LAPLACE_BASE)


@dataclass
class SimReport:
    n: int
    seed: int
    scheme: Scheme
    empirical_distortion: float
    ci_radius: float
    window_distortion: float
    window_ci_radius: float
    truncation_defect: float
    overflow_fraction: float
    per_level_mismatch: np.ndarray = field(repr=False)
    empirical_q: np.ndarray = field(repr=False)
    joint_counts: np.ndarray = field(repr=False)


def _top_level(lam: float, L2: int) -> int:
    # above this level lam * 2**l > 745 and p_l is exactly 0 in double precision
    return max(L2, math.ceil(math.log2(746.0 / lam)))


def _reverse_tables(p, d, hat_p, eps):
    """``Pr{X_hat=1 | X=1}`` and ``Pr{X_hat=1 | X=0}`` for the Z and symmetric channels."""
    with np.errstate(invalid="ignore", divide="ignore"):
        z1 = np.where(p > 0, (p - d) / np.where(p > 0, p, 1.0), 0.0)
        s1 = np.where(p > 0, hat_p * (1 - eps) / np.where(p > 0, p, 1.0), 0.0)
        s0 = np.where(p < 1, hat_p * eps / np.where(p < 1, 1 - p, 1.0), 0.0)
    return np.clip(z1, 0, 1), np.clip(s1, 0, 1), np.clip(s0, 0, 1)


def simulate(model: SourceModel, range_: LevelRange, alloc: Allocation, scheme: Scheme | str,
             n: int, seed: int, workers: int = 1) -> SimReport:
    scheme = Scheme(scheme)
    if scheme not in _SIM_SCHEMES:
        raise ValueError(f"cannot simulate scheme {scheme.value}")
    laplace = scheme is Scheme.LAPLACE_BASE
    if laplace != (SourceKind(model.kind) is SourceKind.LAPLACE):
        raise ValueError(f"scheme {scheme.value} does not match source kind {model.kind.value}")
    if alloc.range != range_:
        raise ValueError("allocation range does not match the level range")
    lam = model.lam
    profile = level_params(lam, range_)
    p, d = profile.p, alloc.d
    if laplace:
        hat_p = hat_probabilities(profile, alloc)
        eps = d.copy()
    else:
        _check_pd(p, d)
        _, hat_p, eps = _bsc_parts(p, d)
    z1, s1, s0 = _reverse_tables(p, d, hat_p, eps)
    w = range_.weights
    low = level_params(lam, LevelRange(range_.L1 + EXTRA_LOW, 0)).p[:EXTRA_LOW]
    w_low = np.ldexp(1.0, np.arange(-range_.L1 - EXTRA_LOW, -range_.L1))
    top = _top_level(lam, range_.L2)
    w_high = np.ldexp(1.0, np.arange(range_.L2 + 1, top + 1))
    high = level_params(lam, LevelRange(0, top)).p[-w_high.size:] if w_high.size else np.empty(0)
    size = range_.size

    def run(rng, m):
        below = (rng.random((m, low.size)) < low) @ w_low
        above = (rng.random((m, high.size)) < high) @ w_high if high.size else np.zeros(m)
        if laplace:
            rng.integers(0, 2, m)  # sign; reproduced exactly, so it cancels in |X - X_hat|
        x_win = np.zeros(m)
        xh_win = np.zeros(m)
        matched = np.ones(m, dtype=bool)
        mismatch = np.zeros(size, dtype=np.int64)
        q_count = np.zeros(size, dtype=np.int64)
        joint = np.zeros((size, 2, 2), dtype=np.int64)
        for i in range(size - 1, -1, -1):
            x = rng.random(m) < p[i]
            u = rng.random(m)
            sym = u < np.where(x, s1[i], s0[i])
            if scheme is Scheme.EXP_Z:
                xh = x & (u < z1[i])
            elif scheme is Scheme.EXP_SUCCESSIVE:
                xh = np.where(matched, x & (u < z1[i]), sym)
                q_count[i] = matched.sum()
            else:
                xh = sym
            x_win += w[i] * x
            xh_win += w[i] * xh
            diff = x != xh
            mismatch[i] = diff.sum()
            matched &= ~diff
            joint[i] = np.bincount(2 * x + xh, minlength=4).reshape(2, 2)
        trunc = below + above
        win = x_win - xh_win
        if laplace:
            total = np.abs(win + trunc)
            win = np.abs(win)
        else:
            if np.any(win < 0):
                raise AssertionError("one-sided distortion violated: reproduction exceeds source")
            total = win + trunc
        return (math.fsum(total), math.fsum(total * total), math.fsum(win), math.fsum(win * win),
                math.fsum(trunc), int((above > 0).sum()), mismatch, q_count, joint)

    parts = map_chunks(run, n, seed, workers)
    s_tot = s2_tot = s_win = s2_win = s_tr = 0.0
    over = 0
    mismatch = np.zeros(size, dtype=np.int64)
    q_count = np.zeros(size, dtype=np.int64)
    joint = np.zeros((size, 2, 2), dtype=np.int64)
    for a, b, c, e, f, g, mm, qc, jt in parts:
        s_tot += a
        s2_tot += b
        s_win += c
        s2_win += e
        s_tr += f
        over += g
        mismatch += mm
        q_count += qc
        joint += jt

    def mean_ci(s, s2):
        mean = s / n
        var = max(s2 - s * s / n, 0.0) / (n - 1) if n > 1 else 0.0
        return mean, 3.0 * math.sqrt(var / n)

    tot, ci = mean_ci(s_tot, s2_tot)
    win_mean, win_ci = mean_ci(s_win, s2_win)
    emp_q = q_count / n if scheme is Scheme.EXP_SUCCESSIVE else np.empty(0)
    return SimReport(n, seed, scheme, tot, ci, win_mean, win_ci, s_tr / n, over / n,
                     mismatch / n, emp_q, joint)


def analytic_window_distortion(model: SourceModel, alloc: Allocation, scheme: Scheme | str) -> float:
    """Within-window distortion predicted by the analytic formulas."""
    scheme = Scheme(scheme)
    if scheme is Scheme.LAPLACE_BASE:
        profile = level_params(model.lam, alloc.range)
        return float(distortion_trace(profile, alloc).D_acc[-1])
    return math.fsum(alloc.range.weights * alloc.d)


def sample_level_pairs(p: float, d: float, channel: str, n: int, seed: int,
                       direction: str = "reverse") -> tuple[np.ndarray, np.ndarray]:
    """Draw ``(X, X_hat)`` for one level, either source-first or reproduction-first.

    ``channel`` is ``"z"``, ``"bsc"`` (mean difference ``d``) or ``"laplace"``
    (crossover ``d``). Both directions sample the same joint law.
    """
    p_arr, d_arr = np.asarray(p, float), np.asarray(d, float)
    if channel == "z":
        _check_pd(p_arr, d_arr)
        hat_p, eps = p - d, d / (1 - p + d)
    elif channel == "bsc":
        _check_pd(p_arr, d_arr)
        _, hp, ep = _bsc_parts(p_arr, d_arr)
        hat_p, eps = float(hp), float(ep)
    elif channel == "laplace":
        if d > p or d >= 0.5:
            raise ValueError("laplace channel needs d <= p and d < 0.5")
        hat_p, eps = (p - d) / (1 - 2 * d), d
    else:
        raise ValueError(f"unknown channel {channel!r}")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    u, v = rng.random(n), rng.random(n)
    if direction == "forward":
        xh = u < hat_p
        if channel == "z":
            x = xh | (v < eps)
        else:
            x = xh ^ (v < eps)
        return x, xh
    if direction != "reverse":
        raise ValueError("direction must be 'reverse' or 'forward'")
    x = u < p
    if channel == "z":
        r1, r0 = (p - d) / p if p > 0 else 0.0, 0.0
    else:
        r1 = hat_p * (1 - eps) / p if p > 0 else 0.0
        r0 = hat_p * eps / (1 - p)
    xh = v < np.where(x, r1, r0)
    return x, xh


def ks_statistic(samples, model: SourceModel) -> float:
    """Sup distance between the empirical CDF of ``samples`` and the model CDF."""
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise ValueError("ks_statistic needs at least one sample")
    if np.any(np.diff(x) < 0):
        x = np.sort(x)
    n = x.size
    F = model.cdf(x)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


def ks_critical(n: int, coefficient: float = KS_CRITICAL_1PCT) -> float:
    return coefficient / math.sqrt(n)
