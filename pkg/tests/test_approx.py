import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate
from scipy.special import expit

from bdsfs.approx import (
    approx_r_ge2,
    approx_r_ge2_terms,
    approx_r_k,
    approx_r_k_terms,
    logistic_from_uniform,
    order_coupling,
    sample_approx,
)
from bdsfs.bdmath import RateParams, SamplingFrame, delta, q_prob
from bdsfs.errors import DuplicateValues
from bdsfs.harness.stats import ks_distance
from bdsfs.rng import replicate_rng
from bdsfs.sfsstats import asymptotic_r_mean

P = RateParams(2.0, 1.0)


def large_frame(n, c=2.0):
    return SamplingFrame(n, c * math.log(n) / P.r)


def ranks(v):
    return np.argsort(np.argsort(v))


class TestLogistic:
    def test_median(self):
        assert logistic_from_uniform(0.5) == 0.0

    def test_ks(self):
        u = logistic_from_uniform(np.random.default_rng(0).random(100_000))
        assert ks_distance(u, expit) < 0.006

    def test_straddle_probability(self):
        # P(U_i <= 0 <= U_{i+1}) = 1/4
        rng = np.random.default_rng(1)
        u = logistic_from_uniform(rng.random((100_000, 2)))
        hit = np.mean((u[:, 0] <= 0) & (u[:, 1] >= 0))
        assert abs(hit - 0.25) < 3 * math.sqrt(0.25 * 0.75 / 100_000)


class TestDraw:
    def test_fields(self):
        frame = large_frame(200)
        d = sample_approx(P, frame, np.random.default_rng(2))
        assert d.U.shape == (199,) and d.H.shape == (199,)
        assert d.Y == pytest.approx(200 * delta(P, frame.T) / d.W)
        np.testing.assert_allclose(d.H, frame.T - (math.log(200) - math.log(d.W) + d.U) / P.r)
        assert d.y_eff == min(d.Y, 1.0) and d.clamped == (d.Y > 1)

    def test_small_n_rejected(self):
        with pytest.raises(ValueError):
            sample_approx(P, SamplingFrame(1, 1.0), np.random.default_rng(0))
        with pytest.raises(ValueError):
            approx_r_ge2(P, SamplingFrame(2, 1.0), np.random.default_rng(0))


class TestCounts:
    def test_red_probability(self):
        frame = large_frame(50)
        reds = []
        for i in range(2000):
            d = sample_approx(P, frame, replicate_rng(3, i))
            reds.append(np.mean(d.H[1:] <= d.H[:-1]))
        reds = np.array(reds)
        assert abs(reds.mean() - 0.5) < 3 * reds.std() / math.sqrt(reds.size)

    def test_per_branch_mean_r_ge2(self):
        frame = large_frame(200, c=4)
        terms = np.concatenate([approx_r_ge2_terms(P, frame, replicate_rng(4, i)) for i in range(200)])
        assert abs(terms.mean() / (P.lam / P.r) - 1) < 0.02

    def test_total_r_ge2(self):
        frame = SamplingFrame(2000, 2 * math.log(2000) / P.r)
        vals = np.array([approx_r_ge2(P, frame, replicate_rng(5, i)) for i in range(200)])
        assert abs(vals.mean() / 2000 / 2 - 1) < 0.02

    def test_nu_independent(self):
        frame = large_frame(100)
        a = approx_r_ge2(RateParams(2.0, 1.0, 0.0), frame, np.random.default_rng(6))
        b = approx_r_ge2(RateParams(2.0, 1.0, 5.0), frame, np.random.default_rng(6))
        assert a == b

    def test_r_k_empty_at_top(self):
        assert approx_r_k(P, SamplingFrame(5, 4.0), 4, np.random.default_rng(0)) == 0
        with pytest.raises(ValueError):
            approx_r_k(P, SamplingFrame(5, 4.0), 5, np.random.default_rng(0))
        with pytest.raises(ValueError):
            approx_r_k(P, SamplingFrame(5, 4.0), 1, np.random.default_rng(0))

    def test_r2_red_indicator(self):
        # red indicator for k=2: H_{i+1} <= H_i <= H_{i+2}, probability 1/6 for i.i.d. U
        frame = large_frame(50)
        ind = []
        for i in range(2000):
            d = sample_approx(P, frame, replicate_rng(7, i))
            H = d.H
            ind.append(np.mean((H[1:-1] <= H[:-2]) & (H[:-2] <= H[2:])))
        ind = np.array(ind)
        assert abs(ind.mean() - 1 / 6) < 3 * ind.std() / math.sqrt(ind.size)

    def test_r_k_single_branch_limit(self):
        # 1e5 draws of one interior branch; n^(c-1) large keeps the [0, T] clipping negligible
        frame = SamplingFrame(8, 6 * math.log(8) / P.r)
        rng = np.random.default_rng(8)
        vals = np.array([approx_r_k_terms(P, frame, 2, rng)[2] for _ in range(100_000)])
        assert abs(vals.mean() / asymptotic_r_mean(P, 2) - 1) < 0.02

    def test_r_k_finite_n_quadrature(self):
        # at n=60, T=2 log n / r the clipping at t=0 matters; compare with the
        # exact expectation of the approximate model, by quadrature over t and W
        n, k = 60, 2
        frame = large_frame(n)
        T, r = frame.T, P.r
        ws = -np.log1p(-(np.arange(400) + 0.5) / 400)
        blue = []
        for W in ws:
            y = min(n * delta(P, T) / W, 1.0)

            def f(t):
                s = r * (T - t) - math.log(n) + math.log(W)
                return expit(s) ** 2 * expit(-s) * P.lam * q_prob(P, y, t)

            blue.append(integrate.quad(f, 0, T, limit=200)[0])
        expected = 1 / 6 + float(np.mean(blue))
        rng = np.random.default_rng(9)
        vals = np.concatenate([approx_r_k_terms(P, frame, k, rng) for _ in range(3000)])
        per_draw = vals.reshape(3000, -1).mean(axis=1)
        se = per_draw.std() / math.sqrt(per_draw.size)
        assert abs(vals.mean() - expected) < 3 * se
        assert expected < 0.95  # the boundary effect is real at this n

    def test_r3_mean(self):
        frame = SamplingFrame(8, 6 * math.log(8) / P.r)
        rng = np.random.default_rng(10)
        vals = np.array([approx_r_k_terms(P, frame, 3, rng)[1] for _ in range(20_000)])
        target = asymptotic_r_mean(P, 3)
        assert abs(vals.mean() - target) < 3 * vals.std() / math.sqrt(vals.size)

    def test_r_k_terms_match_definition(self):
        frame = large_frame(30)
        for i in range(20):
            d = sample_approx(P, frame, replicate_rng(9, i))
            for k in (2, 3, 5):
                terms = approx_r_k_terms(P, frame, k, replicate_rng(10, i), d)
                H = np.concatenate([[np.nan], d.H])
                for j, val in enumerate(terms, start=1):
                    lo = H[j + 1 : j + k].max()
                    red = lo <= H[j] <= H[j + k]
                    if lo > min(H[j], H[j + k]):
                        # empty interval: only the red indicator can count
                        assert val == int(red)
                    else:
                        assert val >= int(red)


class TestOrderCoupling:
    def test_sorted_xs(self):
        ys = [3.0, 1.0, 2.0]
        np.testing.assert_array_equal(order_coupling([1, 2, 3], ys), [1, 2, 3])

    def test_hand_example(self):
        np.testing.assert_array_equal(order_coupling([3, 1, 2], [10, 30, 20]), [30, 10, 20])

    def test_duplicates_rejected(self):
        with pytest.raises(DuplicateValues):
            order_coupling([1, 1], [2, 3])
        with pytest.raises(ValueError):
            order_coupling([1, 2], [2, 3, 4])

    def test_brute_force_minimal(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            m = int(rng.integers(1, 7))
            xs, ys = rng.normal(size=m), rng.normal(size=m)
            out = order_coupling(xs, ys)
            costs = [np.abs(xs - np.array(p)).sum() for p in itertools.permutations(ys)]
            assert np.abs(xs - out).sum() <= min(costs) + 1e-12
            iso = [p for p in itertools.permutations(ys) if np.array_equal(ranks(p), ranks(xs))]
            assert len(iso) == 1 and np.array_equal(iso[0], out)

    @given(st.lists(st.tuples(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6)), min_size=1, max_size=50))
    def test_properties(self, pairs):
        xs = np.array([p[0] for p in pairs])
        ys = np.array([p[1] for p in pairs])
        if len(set(xs)) < len(xs) or len(set(ys)) < len(ys):
            return
        out = order_coupling(xs, ys)
        np.testing.assert_array_equal(np.sort(out), np.sort(ys))
        np.testing.assert_array_equal(ranks(out), ranks(xs))
        assert np.abs(xs - out).sum() <= np.abs(xs - ys).sum() * (1 + 1e-12) + 1e-9
