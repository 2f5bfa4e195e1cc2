import math

import numpy as np
import pytest

from expansion_coding.expansion import LevelProfile, LevelRange, level_params
from expansion_coding.numerics import SourceModel, binary_entropy, shannon_rd
from expansion_coding.schemes_exp import Allocation, Scheme, heuristic_allocation, scheme_point
from expansion_coding.schemes_laplace import (
    TimeShareParams,
    distortion_oracle,
    distortion_trace,
    laplace_gap_report,
    laplace_point,
    lower_convex_envelope,
    oracle_battery,
    time_share,
)

from oracles import laplace_abs_distortion

LAP1 = SourceModel("laplace", 1.0)


class TestLaplacePoint:
    def test_lossless(self):
        r = LevelRange(6, 6)
        prof = level_params(1.0, r)
        pt = laplace_point(prof, Allocation(r, np.zeros(r.size)))
        assert pt.rate_bits == pytest.approx(1 + math.fsum(binary_entropy(prof.p)), rel=1e-14)
        assert pt.distortion == 0.0
        assert pt.scheme is Scheme.LAPLACE_BASE

    def test_single_level_initialisation(self):
        r = LevelRange(0, 0)
        pt = laplace_point(level_params(1.0, r), Allocation(r, [0.1]))
        assert pt.distortion == pytest.approx(0.1, abs=1e-15)
        assert pt.trace.D_acc.tolist() == [pytest.approx(0.1)]

    def test_two_levels_match_enumeration(self):
        r = LevelRange(1, 0)
        prof = level_params(1.0, r)
        a = Allocation(r, [0.1, 0.1])
        ref = laplace_abs_distortion(prof.p, a.d, r.levels)
        assert laplace_point(prof, a).distortion == pytest.approx(ref, abs=1e-12)
        assert distortion_oracle(prof, a) == pytest.approx(ref, abs=1e-12)

    def test_rate_decomposition_and_sign_bit(self):
        r = LevelRange(8, 8)
        prof = level_params(1.0, r)
        rng = np.random.default_rng(0)
        for _ in range(50):
            a = Allocation(r, rng.uniform(0, np.minimum(prof.p, 0.45)))
            pt = laplace_point(prof, a)
            per = np.maximum(binary_entropy(prof.p) - binary_entropy(a.d), 0)
            assert pt.rate_bits - 1 == pytest.approx(math.fsum(per), abs=1e-13)
            assert pt.rate_bits >= 1

    def test_truncation_flag(self):
        r = LevelRange(4, 4)
        prof = level_params(1.0, r)
        a = heuristic_allocation(0.2, r)
        bare = laplace_point(prof, a)
        full = laplace_point(prof, a, include_truncation=True)
        assert bare.truncation_term == 0.0
        assert full.truncation_term == r.truncation_bound(1.0)
        assert full.distortion == pytest.approx(bare.distortion + full.truncation_term)

    def test_errors(self):
        r = LevelRange(1, 1)
        prof = level_params(1.0, r)
        with pytest.raises(ValueError):
            laplace_point(LevelProfile(r, 1.0, [0.5, 0.5, 0.5]), Allocation(r, [0.5, 0.1, 0.1]))
        with pytest.raises(ValueError):
            laplace_point(prof, Allocation(r, [0.1, 0.1, 0.2]))
        with pytest.raises(ValueError):
            distortion_trace(prof, Allocation(r, [0.0] * 3), form="other")


class TestOracle:
    def test_zero_allocation(self):
        r = LevelRange(3, 3)
        assert distortion_oracle(level_params(1.0, r), Allocation(r, np.zeros(7))) == 0.0

    @pytest.mark.parametrize("level", [-2, 0, 3])
    def test_single_level_mismatch(self, level):
        r = LevelRange(-level, 0) if level <= 0 else LevelRange(0, level)
        p = np.zeros(r.size)
        d = np.zeros(r.size)
        p[r.index(level)] = 0.25
        d[r.index(level)] = 0.1
        got = distortion_oracle(LevelProfile(r, 1.0, p), Allocation(r, d))
        assert got == pytest.approx(2.0**level * 0.1, rel=1e-14)

    def test_against_loop_enumeration(self):
        for prof, alloc in oracle_battery(5, 30, max_levels=6):
            ref = laplace_abs_distortion(prof.p, alloc.d, prof.levels)
            assert distortion_oracle(prof, alloc) == pytest.approx(ref, abs=1e-13)

    def test_too_many_levels(self):
        r = LevelRange(10, 10)
        with pytest.raises(ValueError):
            distortion_oracle(level_params(1.0, r), heuristic_allocation(0.1, r))


class TestRecursionVsOracle:
    def test_exact_form_matches(self):
        worst = 0.0
        for prof, alloc in oracle_battery(17, 200, max_levels=10):
            worst = max(worst, abs(distortion_trace(prof, alloc).D_acc[-1] - distortion_oracle(prof, alloc)))
        assert worst <= 1e-10

    def test_published_form_deviates(self):
        worst = 0.0
        for prof, alloc in oracle_battery(17, 60, max_levels=8):
            got = distortion_trace(prof, alloc, form="published").D_acc[-1]
            worst = max(worst, abs(got - distortion_oracle(prof, alloc)))
        assert worst > 1e-3

    def test_forms_agree_when_only_level_zero_has_cross_terms(self):
        # the extra factor 2**k is 1 at k = 0, the only level with lower levels here
        r = LevelRange(1, 0)
        prof = level_params(1.0, r)
        a = Allocation(r, [0.2, 0.1])
        exact = distortion_trace(prof, a).D_acc
        published = distortion_trace(prof, a, form="published").D_acc
        np.testing.assert_allclose(exact, published, rtol=1e-15)

    def test_trace_non_negative(self):
        for prof, alloc in oracle_battery(2, 50, max_levels=12):
            tr = distortion_trace(prof, alloc)
            assert np.all(tr.D_acc >= 0) and np.all(np.isfinite(tr.D_acc))
            assert tr.D_acc[0] == pytest.approx(prof.range.weights[0] * alloc.d[0])


class TestTimeShare:
    def base(self, rate=2.0, dist=0.1):
        r = LevelRange(0, 0)
        pt = laplace_point(level_params(1.0, r), Allocation(r, [0.0]))
        pt.rate_bits, pt.distortion = rate, dist
        return pt

    def test_endpoints(self):
        b = self.base()
        t0 = time_share(b, 0.0, 1.0)
        assert (t0.rate_bits, t0.distortion) == (b.rate_bits, b.distortion)
        t1 = time_share(b, TimeShareParams(1.0), 2.0)
        assert (t1.rate_bits, t1.distortion) == (0.0, 0.5)
        assert t1.scheme is Scheme.LAPLACE_TIME_SHARED

    def test_half(self):
        t = time_share(self.base(), 0.5, 1.0)
        assert t.rate_bits == pytest.approx(1.0) and t.distortion == pytest.approx(0.55)

    def test_points_on_segment(self):
        b = self.base(3.7, 0.21)
        lam = 1.5
        for a in np.linspace(0, 1, 23):
            t = time_share(b, a, lam)
            # collinear with (b.distortion, b.rate) and (1/lam, 0)
            cross = (t.distortion - b.distortion) * (0 - b.rate_bits) - (t.rate_bits - b.rate_bits) * (1 / lam - b.distortion)
            assert abs(cross) <= 1e-12

    def test_errors(self):
        with pytest.raises(ValueError):
            TimeShareParams(1.2)
        r = LevelRange(3, 3)
        exp_pt = scheme_point(level_params(1.0, r), heuristic_allocation(0.1, r), "ExpZ")
        with pytest.raises(ValueError):
            time_share(exp_pt, 0.5, 1.0)


def test_lower_convex_envelope():
    x = [0.0, 1.0, 2.0, 3.0, 4.0, 2.0]
    y = [4.0, 3.0, 0.5, 1.0, 0.0, 2.0]
    hx, hy = lower_convex_envelope(x, y)
    assert hx.tolist() == [0.0, 2.0, 4.0]
    assert hy.tolist() == [4.0, 0.5, 0.0]
    hx, hy = lower_convex_envelope([0.0, 1.0, 2.0], [2.0, 0.0, 1.0])
    assert hx.tolist() == [0.0, 1.0]


class TestLaplaceGapReport:
    r = LevelRange(25, 25)

    def test_low_distortion_gap(self):
        rows = laplace_gap_report(self.r, 1.0, [2.0**-8])
        base = next(x for x in rows if x.scheme is Scheme.LAPLACE_BASE)
        assert base.gap_bits == pytest.approx(0.52, abs=0.05)

    def test_sweep_within_one_bit(self):
        rows = laplace_gap_report(self.r, 1.0, np.geomspace(2.0**-8, 1.0, 40))
        assert max(x.gap_bits for x in rows) <= 1.0
        for x in rows:
            assert x.shannon_rate == shannon_rd(LAP1, x.distortion)

    def test_time_sharing_helps_at_high_distortion(self):
        rows = laplace_gap_report(self.r, 1.0, np.geomspace(0.05, 1.0, 30))
        pairs = list(zip(rows[::2], rows[1::2]))
        assert all(ts.gap_bits <= b.gap_bits + 1e-12 for b, ts in pairs)
        high = [(b, ts) for b, ts in pairs if 0.7 <= b.D_target < 1.0]
        assert high and all(ts.gap_bits < b.gap_bits - 0.05 and ts.alpha > 0 for b, ts in high)

    def test_precondition(self):
        with pytest.raises(ValueError, match="need L1 >= 9"):
            laplace_gap_report(LevelRange(5, 25), 1.0, [2.0**-8 * 0.99])
