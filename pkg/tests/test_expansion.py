import math

import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from expansion_coding.expansion import (
    LevelProfile,
    LevelRange,
    bit_marginal_series,
    expand,
    expand_many,
    level_params,
    mgf_partial_product,
    reconstruct,
    sample_bit_planes,
    sample_by_levels,
)
from expansion_coding.mc_sim import ks_statistic
from expansion_coding.numerics import SourceModel, logistic_level


class TestLevelParams:
    def test_examples(self):
        prof = level_params(1.0, LevelRange(10, 10))
        assert prof.at(0) == pytest.approx(0.26894142136999512, rel=1e-15)
        assert prof.at(-5) == pytest.approx(0.49218813572079557, rel=1e-15)
        assert prof.at(5) == pytest.approx(1.2664165549094015e-14, rel=1e-13)
        assert prof.at(5) > 0

    @pytest.mark.parametrize("lam", [0.25, 1.0, 3.0])
    def test_bit_exact_and_monotone(self, lam):
        r = LevelRange(30, 8)
        prof = level_params(lam, r)
        for l in r.levels:
            assert prof.at(l) == logistic_level(lam * 2.0**l)
        assert np.all(np.diff(prof.p) < 0)
        assert np.all(prof.p < 0.5)
        assert 0.5 - prof.p[0] < 1e-8

    def test_rejects_bad_lambda(self):
        with pytest.raises(ValueError):
            level_params(0.0, LevelRange(1, 1))
        with pytest.raises(ValueError):
            level_params(-2.0, LevelRange(1, 1))

    def test_level_range_validation(self):
        assert LevelRange(2, 3).size == 6
        with pytest.raises(ValueError):
            LevelRange(-1, 2)
        with pytest.raises(ValueError):
            LevelRange(1.5, 2)


class TestExpandReconstruct:
    def test_zero(self):
        sign, bits, over = expand(0.0, LevelRange(3, 4))
        assert sign == 1 and not over and not bits.any()

    def test_five_and_a_quarter(self):
        r = LevelRange(2, 2)
        sign, bits, over = expand(5.25, r)
        assert (sign, over) == (1, False)
        # ascending levels -2..2
        assert bits.tolist() == [1, 0, 1, 0, 1]
        assert reconstruct(sign, bits, r) == 5.25

    def test_ascending_order_is_used(self):
        r = LevelRange(2, 2)
        _, bits, _ = expand(4.5, r)
        assert bits.tolist() == [0, 1, 0, 0, 1]

    def test_overflow_saturates(self):
        sign, bits, over = expand(9.0, LevelRange(1, 2))
        assert over and bits.tolist() == [1, 1, 1, 1]

    def test_negative_sign(self):
        r = LevelRange(2, 2)
        assert reconstruct(-1, [0, 0, 1, 0, 0], r) == -1.0
        sign, bits, _ = expand(-1.0, r)
        assert sign == -1 and reconstruct(sign, bits, r) == -1.0

    def test_reconstruct_examples(self):
        r = LevelRange(2, 2)
        assert reconstruct(1, np.zeros(5), r) == 0.0
        assert reconstruct(1, [1, 0, 1, 0, 1], r) == 5.25

    def test_errors(self):
        with pytest.raises(ValueError):
            expand(math.nan, LevelRange(1, 1))
        with pytest.raises(ValueError):
            reconstruct(1, [1, 0], LevelRange(1, 1))

    def test_round_trip_random(self):
        r = LevelRange(12, 9)
        rng = np.random.default_rng(11)
        x = rng.uniform(0, 2.0 ** (r.L2 + 1), 10_000)
        planes = expand_many(x, r)
        assert planes.overflow_count == 0
        err = x - planes.values(r)
        assert np.all(err >= 0) and np.all(err < 2.0**-r.L1)

    @settings(max_examples=300)
    @given(st.floats(-2000, 2000, allow_nan=False), st.integers(0, 20), st.integers(0, 12))
    def test_scalar_and_vector_agree(self, x, L1, L2):
        r = LevelRange(L1, L2)
        sign, bits, over = expand(x, r)
        planes = expand_many([x], r)
        assert planes.bits[0].tolist() == bits.tolist()
        assert int(planes.sign[0]) == sign
        assert planes.overflow_count == int(over)
        if not over:
            err = abs(x) - reconstruct(1, bits, r)
            assert 0 <= err < 2.0**-L1


class TestSampling:
    def test_degenerate_profile(self):
        r = LevelRange(3, 3)
        prof = LevelProfile(r, 1.0, np.zeros(r.size))
        assert not sample_by_levels(prof, 1000, 1).any()

    def test_deterministic_and_worker_independent(self):
        prof = level_params(1.0, LevelRange(10, 6))
        a = sample_by_levels(prof, 200_000, 42, workers=1)
        b = sample_by_levels(prof, 200_000, 42, workers=4)
        c = sample_by_levels(prof, 200_000, 43)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_signed_samples_are_symmetric(self):
        prof = level_params(1.0, LevelRange(20, 20))
        x = sample_by_levels(prof, 200_000, 5, signed=True)
        assert abs(np.mean(x > 0) - 0.5) < 4 * 0.5 / math.sqrt(x.size)
        assert ks_statistic(x, SourceModel("laplace", 1.0)) < 1.63 / math.sqrt(x.size)

    def test_mean_lambda_one(self):
        prof = level_params(1.0, LevelRange(30, 30))
        x = sample_by_levels(prof, 1_000_000, 2024)
        assert abs(x.mean() - 1.0) < 0.01

    def test_ks_against_exp2(self):
        n = 1_000_000
        prof = level_params(2.0, LevelRange(30, 30))
        x = np.sort(sample_by_levels(prof, n, 99))
        stat = ks_statistic(x, SourceModel("exponential", 2.0))
        assert stat < 1.63 / math.sqrt(n)
        ref = scipy.stats.kstest(x, scipy.stats.expon(scale=0.5).cdf).statistic
        assert stat == pytest.approx(ref, abs=1e-12)

    def test_bit_planes_independent(self):
        n = 1_000_000
        planes = sample_bit_planes(level_params(1.0, LevelRange(10, 3)), n, 8)
        corr = np.corrcoef(planes.bits.T.astype(float))
        off = corr[~np.eye(corr.shape[0], dtype=bool)]
        assert np.max(np.abs(off)) < 4 / math.sqrt(n)


class TestMGF:
    def test_zero_t(self):
        for r in (LevelRange(0, 0), LevelRange(5, 2), LevelRange(40, 40)):
            assert mgf_partial_product(1.3, 0.0, r) == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("t,expected", [(0.5, 2.0), (-1.0, 0.5)])
    def test_limit(self, t, expected):
        assert mgf_partial_product(1.0, t, LevelRange(60, 60)) == pytest.approx(expected, abs=1e-6)

    def test_rejects_divergent_t(self):
        with pytest.raises(ValueError):
            mgf_partial_product(1.0, 1.0, LevelRange(2, 2))

    @pytest.mark.parametrize("lam,t", [(1.0, 0.5), (1.0, -1.0), (2.0, 1.5), (0.5, -3.0)])
    def test_monotone_approach(self, lam, t):
        target = lam / (lam - t)
        errs = [abs(mgf_partial_product(lam, t, LevelRange(w, w)) - target) for w in range(61)]
        assert all(b <= a + 1e-15 for a, b in zip(errs, errs[1:]))
        for grow_low in (True, False):
            e = []
            for w in range(40):
                r = LevelRange(w, 5) if grow_low else LevelRange(5, w)
                e.append(abs(mgf_partial_product(lam, t, r) - target))
            assert all(b <= a + 1e-15 for a, b in zip(e, e[1:]))


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
def test_marginal_series_matches_level_probability(lam):
    for l in range(-8, 7):
        assert bit_marginal_series(lam, l) == pytest.approx(logistic_level(lam * 2.0**l), abs=1e-10)
