import json
import math

import numpy as np
import pytest
from scipy import stats

from bdsfs.bdmath import RateParams
from bdsfs.errors import ConditionViolated
from bdsfs.harness.experiments import (
    clt_report,
    run_clt,
    run_contour_compare,
    run_lln,
    run_oracle_compare,
    run_replicates,
)
from bdsfs.harness.quadrature import (
    binomial_sum,
    integrate_real_line,
    integrate_real_wedge,
    moment_closed_forms,
    verify_calculus_identity,
    verify_moments,
)
from bdsfs.harness.report import (
    ExperimentConfig,
    TestReport,
    clt_condition,
    clt_horizon,
    lln_condition,
    reports_to_csv,
    reports_to_json,
)
from bdsfs.harness.stats import ks_distance, ks_one_sample, mc_mean, mc_variance, two_sample_chi2
from bdsfs.rng import replicate_rng

P = RateParams(2.0, 1.0)


def _draw(rng):
    return float(rng.random())


class TestStats:
    def test_ks_single_point(self):
        assert ks_distance([0.5], lambda x: x) == 0.5
        d, p = ks_one_sample([0.5], stats.uniform.cdf)
        assert d == 0.5 and 0 < p <= 1

    def test_ks_two_points(self):
        # ECDF of {0.25, 0.75} vs U(0,1): sup gap is 0.25
        assert ks_distance([0.25, 0.75], lambda x: x) == pytest.approx(0.25)

    def test_mc_mean(self):
        m, se = mc_mean([1.0, 2.0, 3.0, 4.0])
        assert m == 2.5 and se == pytest.approx(math.sqrt(5 / 3 / 4))
        with pytest.raises(ValueError):
            mc_mean([])

    def test_mc_mean_compensated(self):
        vals = [1e16, 1.0, -1e16, 1.0]
        assert mc_mean(vals)[0] == 0.5

    def test_mc_variance(self):
        x = np.random.default_rng(0).normal(size=20_000)
        v, se = mc_variance(x)
        assert abs(v - 1) < 3 * se
        assert se == pytest.approx(math.sqrt(2 / 20_000), rel=0.1)

    def test_chi2_identical(self):
        a = [0] * 50 + [1] * 50
        stat, p, dof = two_sample_chi2(a, a)
        assert stat == 0 and p == 1.0 and dof == 1

    def test_chi2_hand_case(self):
        # 2x2 table [[30, 10], [10, 30]]: statistic 20
        a = [0] * 30 + [1] * 10
        b = [0] * 10 + [1] * 30
        stat, p, dof = two_sample_chi2(a, b)
        assert stat == pytest.approx(20.0) and dof == 1
        assert p == pytest.approx(stats.chi2.sf(20.0, 1))

    def test_chi2_pools_sparse(self):
        a = [0] * 100 + [1] * 100 + [7]
        b = [0] * 100 + [1] * 100 + [8]
        assert two_sample_chi2(a, b)[2] == 2

    def test_chi2_null_calibration(self):
        ps = []
        for s in range(200):
            rng = np.random.default_rng(s)
            ps.append(two_sample_chi2(rng.poisson(2, 400).tolist(), rng.poisson(2, 400).tolist())[1])
        # p-values of a calibrated test are uniform
        assert stats.kstest(ps, "uniform").pvalue > 0.001


class TestReportTypes:
    def test_p_value_range(self):
        with pytest.raises(ValueError):
            TestReport("x", 0.0, 1.5, 0.0, 0.0, 0.0, 1, True)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            ExperimentConfig(P, n=10, reps=0, T=1.0)
        with pytest.raises(ValueError):
            ExperimentConfig(P, n=10, reps=1)
        with pytest.raises(ValueError):
            ExperimentConfig(P, n=10, reps=1, T=1.0, t_rule=2)
        with pytest.raises(ValueError):
            ExperimentConfig(P, n=10, reps=1, T=1.0, mode="bogus")

    def test_horizons(self):
        n = 2000
        cfg = ExperimentConfig(P, n=n, reps=1, t_rule="clt")
        assert cfg.horizon == pytest.approx(2 * math.log(n) + math.log(math.log(n)) + 5)
        assert clt_condition(P, n, cfg.horizon) == pytest.approx(math.exp(-5) / math.sqrt(n))
        cfg2 = ExperimentConfig(P, n=n, reps=1, t_rule=2)
        assert cfg2.horizon == pytest.approx(2 * math.log(n))
        assert lln_condition(P, n, cfg2.horizon) == pytest.approx(1 / n)
        assert clt_horizon(RateParams(3.0, 1.0), n) == pytest.approx(cfg.horizon / 2)

    def test_csv_json_mirror(self):
        reps = [
            TestReport("a", 1.5, 0.25, 2.0, 1.9, 0.1, 10, True, seed=3),
            TestReport("b", 0.0, 1.0, 1.0, 1.0, 0.0, 0, False),
        ]
        text = reports_to_csv(reps)
        lines = text.splitlines()
        assert lines[0] == "experiment,statistic,estimate,target,stderr,p_value,reps,seed"
        assert lines[1] == "a,1.5,1.9,2.0,0.1,0.25,10,3"
        assert lines[2] == "b,0.0,1.0,1.0,0.0,1.0,0,"
        rows = json.loads(reports_to_json(reps))
        assert [r["experiment"] for r in rows] == ["a", "b"]
        assert set(rows[0]) >= {"experiment", "statistic", "estimate", "target", "stderr", "p_value", "reps", "seed"}
        assert rows[0]["passed"] is True and rows[1]["seed"] is None


class TestReplicates:
    def test_order_and_determinism(self):
        a = run_replicates(_draw, 7, 25)
        assert a == run_replicates(_draw, 7, 25)
        assert a == [float(replicate_rng(7, i).random()) for i in range(25)]

    def test_workers_do_not_change_results(self):
        assert run_replicates(_draw, 3, 11, workers=3) == run_replicates(_draw, 3, 11)

    def test_streams_differ(self):
        assert run_replicates(_draw, 1, 5, stream=0) != run_replicates(_draw, 1, 5, stream=1)

    def test_zero_reps(self):
        with pytest.raises(ValueError):
            run_replicates(_draw, 0, 0)


class TestExperiments:
    def test_lln_guard(self):
        with pytest.raises(ConditionViolated):
            run_lln(ExperimentConfig(P, n=500, reps=2, T=1.0))

    def test_clt_guard(self):
        with pytest.raises(ConditionViolated):
            run_clt(ExperimentConfig(P, n=500, reps=2, t_rule=2))

    def test_lln_small(self):
        rep = run_lln(ExperimentConfig(P, n=400, reps=20, t_rule=3, k=2))
        assert rep.target == 1.0 and rep.reps_used == 20
        assert abs(rep.estimate - 1.0) < 5 * rep.mc_stderr + 0.05

    def test_lln_approx_mode(self):
        rep = run_lln(ExperimentConfig(P, n=400, reps=10, t_rule=3, k=3, mode="approx"))
        assert rep.target == pytest.approx(1 / 3)
        assert 0 <= rep.p_value <= 1

    def test_clt_power_check(self):
        cfg = ExperimentConfig(P, n=200, reps=100, t_rule="clt")
        rep = run_clt(cfg, center=0.0)
        assert rep.p_value < 1e-6 and not rep.passed

    def test_clt_report_fields(self):
        cfg = ExperimentConfig(RateParams(2.0, 1.0, 1.0), n=100, reps=3, t_rule="clt")
        rep = clt_report(cfg, np.array([200.0, 210.0, 190.0]), "M")
        assert rep.target == 6.0 and rep.details["center"] == 200.0
        assert rep.details["mean"] == 0.0
        with pytest.raises(ValueError):
            clt_report(cfg, np.array([1.0, 2.0]), "Q")

    def test_oracle_small(self):
        cfg = ExperimentConfig(RateParams(2.0, 1.0, 1.0), n=3, reps=3000, T=1.5)
        rep = run_oracle_compare(cfg)
        assert rep.p_value > 1e-4

    def test_oracle_nu_zero_m_identical(self):
        cfg = ExperimentConfig(P, n=2, reps=500, T=1.0)
        rep = run_oracle_compare(cfg)
        assert rep.details["mean_M_ge2"] == [0.0, 0.0]

    def test_oracle_aa_calibration(self):
        ps = []
        for seed in range(20):
            cfg = ExperimentConfig(RateParams(2.0, 1.0, 1.0), n=3, reps=300, T=1.5, seed=seed)
            ps.append(run_oracle_compare(cfg, arms=("coalescent", "coalescent")).p_value)
        assert stats.kstest(ps, "uniform").pvalue > 0.001

    def test_oracle_n_restricted(self):
        with pytest.raises(ValueError):
            run_oracle_compare(ExperimentConfig(P, n=4, reps=10, T=1.0))

    def test_contour_compare_small(self):
        reports = run_contour_compare(P, 1.0, reps=3000, seed=2)
        names = [r.experiment for r in reports]
        assert names[0] == "contour:chi2"
        assert "contour:ratio_k=1" in names and "forward:mean_population" in names
        assert reports[0].p_value > 1e-4


class TestQuadrature:
    def test_real_line(self):
        val, _ = integrate_real_line(lambda s: math.exp(-s * s))
        assert val == pytest.approx(math.sqrt(math.pi), abs=1e-9)

    def test_wedge(self):
        # int_{b<a} f(a) f(b) = 1/2 for a density f
        f = stats.logistic.pdf
        val, _ = integrate_real_wedge(lambda a, b: f(a) * f(b))
        assert val == pytest.approx(0.5, abs=1e-9)

    def test_closed_form_values(self):
        c = moment_closed_forms(P)
        assert c["blue_mean"] == 1.5
        assert c["combined_variance"] == 4.0
        assert c["variance"] == pytest.approx(2 * math.pi**2 / 3 + 2)
        assert c["variance"] == pytest.approx(8.5797, abs=1e-4)

    @pytest.mark.parametrize("lam,mu", [(2.0, 1.0), (3.0, 0.5), (1.0, 0.0), (5.0, 4.0)])
    def test_verify_moments(self, lam, mu):
        reports = verify_moments(RateParams(lam, mu))
        assert len(reports) == 8
        assert all(r.passed for r in reports), [r.summary() for r in reports if not r.passed]

    def test_binomial_sum_hand_values(self):
        assert binomial_sum(0, 2) == 1.0
        assert binomial_sum(1, 3) == 0.5
        assert binomial_sum(2, 5) == pytest.approx(1 / 12)

    def test_identity_range(self):
        with pytest.raises(ValueError):
            verify_calculus_identity(3, 4)
        assert verify_calculus_identity(0, 2).passed

    def test_identity_beta_function(self):
        # int_0^inf x^m/(1+x)^n dx = B(m+1, n-m-1)
        from scipy.special import beta

        for n in range(2, 13):
            for m in range(n - 1):
                assert binomial_sum(m, n) == pytest.approx(beta(m + 1, n - m - 1), rel=1e-12)
