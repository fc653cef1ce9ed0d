"""Monte Carlo experiments checking the limit theorems and generator equivalence."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from functools import partial

import numpy as np
from scipy import stats

from ..approx import approx_r_ge2, approx_r_k
from ..bdmath import RateParams, SamplingFrame, delta
from ..coalescent import sample_marked_tree
from ..contour import contour_population_at_T, simulate_contour
from ..forward import conditioned_forward, sfs_from_genealogy, simulate_forward
from ..rng import replicate_rng
from ..sfsstats import asymptotic_clt_params, asymptotic_r_mean, sfs_from_marked_tree
from .report import ExperimentConfig, TestReport
from .stats import mc_mean, mc_variance, two_sample_chi2

__all__ = [
    "run_replicates",
    "r_k_replicate",
    "r_ge2_replicate",
    "run_lln",
    "clt_samples",
    "run_clt",
    "run_oracle_compare",
    "run_contour_compare",
]


def _chunk(fn, seed, stream, indices):
    return [fn(replicate_rng(seed, i, stream)) for i in indices]


def run_replicates(fn, seed: int, reps: int, stream: int = 0, workers: int = 1) -> list:
    """Evaluate ``fn(rng)`` for every replicate, in replicate order.

    Replicate ``i`` always sees the generator ``replicate_rng(seed, i, stream)``,
    so the result does not depend on ``workers``.  With ``workers > 1``, ``fn``
    must be picklable.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    if workers <= 1:
        return _chunk(fn, seed, stream, range(reps))
    bounds = np.linspace(0, reps, workers + 1).astype(int)
    chunks = [range(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(partial(_chunk, fn, seed, stream), chunks)
        return [x for part in parts for x in part]


# --- replicate functions (module level so they pickle) ----------------------


def r_k_replicate(params: RateParams, frame: SamplingFrame, k: int, mode: str, rng) -> int:
    if mode == "coalescent":
        return int(sfs_from_marked_tree(sample_marked_tree(params, frame, rng)).R[k])
    if mode == "approx":
        return approx_r_k(params, frame, k, rng)
    raise ValueError(f"mode {mode!r} not supported for R^k experiments")


def r_ge2_replicate(params: RateParams, frame: SamplingFrame, mode: str, rng) -> tuple[int, int]:
    """``(R^{>=2}, M^{>=2})`` for one replicate."""
    if mode == "coalescent":
        rep = sfs_from_marked_tree(sample_marked_tree(params, frame, rng))
        return rep.R_ge2, rep.M_ge2
    if mode == "forward":
        g, sample = conditioned_forward(params, frame, rng)
        rep = sfs_from_genealogy(g, sample)
        return rep.R_ge2, rep.M_ge2
    if mode == "approx":
        r = approx_r_ge2(params, frame, rng)
        # given the event counts, mutation counts are Poisson(nu R)
        return r, int(rng.poisson(params.nu * r))
    raise ValueError(f"mode {mode!r} not supported for R^>=2 experiments")


def _population_replicate(params: RateParams, T: float, mode: str, rng) -> int:
    if mode == "forward":
        return simulate_forward(params, T, rng).population
    return contour_population_at_T(simulate_contour(params, T, rng))


# --- experiments -------------------------------------------------------------


def run_lln(config: ExperimentConfig) -> TestReport:
    """Mean of ``R^k / n`` over replicates against ``lam / (r k (k-1))``."""
    config.require_lln()
    params, k = config.params, config.k
    frame = SamplingFrame(config.n, config.horizon)
    target = asymptotic_r_mean(params, k)
    fn = partial(r_k_replicate, params, frame, k, config.mode)
    values = np.asarray(run_replicates(fn, config.seed, config.reps, workers=config.workers)) / config.n
    est, se = mc_mean(values)
    if config.reps > 1 and se > 0:
        z = (est - target) / se
        p = float(2 * stats.norm.sf(abs(z)))
    else:
        z, p = float("nan"), float("nan")
    rel = abs(est / target - 1)
    return TestReport(
        experiment=f"lln:k={k}",
        statistic=z,
        p_value=p,
        target=target,
        estimate=est,
        mc_stderr=se,
        reps_used=config.reps,
        passed=bool(rel <= config.rel_tol),
        seed=config.seed,
        details={"relative_error": rel, "n": config.n, "T": config.horizon, "mode": config.mode},
    )


def clt_samples(config: ExperimentConfig) -> tuple[np.ndarray, np.ndarray]:
    """Raw ``(R^{>=2}, M^{>=2})`` over replicates."""
    frame = SamplingFrame(config.n, config.horizon)
    fn = partial(r_ge2_replicate, config.params, frame, config.mode)
    pairs = run_replicates(fn, config.seed, config.reps, workers=config.workers)
    arr = np.asarray(pairs, dtype=float).reshape(-1, 2)
    return arr[:, 0], arr[:, 1]


def clt_report(
    config: ExperimentConfig,
    values: np.ndarray,
    quantity: str = "R",
    center: float | None = None,
) -> TestReport:
    """KS test of ``(X - center) / sqrt(n)`` against the limiting normal law."""
    consts = asymptotic_clt_params(config.params)
    n = config.n
    if quantity == "R":
        mean_c, var_c = consts["mean_r"], consts["var_r"]
    elif quantity == "M":
        mean_c, var_c = consts["mean_m"], consts["var_m"]
    else:
        raise ValueError("quantity must be 'R' or 'M'")
    if center is None:
        center = n * mean_c
    z = (np.asarray(values, dtype=float) - center) / math.sqrt(n)
    if var_c > 0:
        res = stats.kstest(z, stats.norm(0, math.sqrt(var_c)).cdf)
        d, p = float(res.statistic), float(res.pvalue)
    else:
        d, p = float(np.max(np.abs(z))), float(np.all(z == 0))
    var, var_se = mc_variance(z) if z.size > 1 else (float("nan"), float("nan"))
    mean, mean_se = mc_mean(z)
    var_ok = abs(var / var_c - 1) <= config.var_tol if var_c > 0 else var == 0
    return TestReport(
        experiment=f"clt:{quantity}",
        statistic=d,
        p_value=p,
        target=var_c,
        estimate=var,
        mc_stderr=var_se,
        reps_used=int(z.size),
        passed=bool(p > config.alpha and var_ok),
        seed=config.seed,
        details={"mean": mean, "mean_stderr": mean_se, "center": center, "n": n, "T": config.horizon},
    )


def run_clt(config: ExperimentConfig, quantity: str = "R", center: float | None = None) -> TestReport:
    """Asymptotic normality of ``R^{>=2}`` (``quantity="R"``) or ``M^{>=2}`` (``"M"``).

    ``center`` overrides the centring ``n lam / r`` (resp. ``n lam nu / r``);
    useful as a power check of the test itself.
    """
    config.require_clt()
    r_vals, m_vals = clt_samples(config)
    return clt_report(config, r_vals if quantity == "R" else m_vals, quantity, center)


def run_oracle_compare(
    config: ExperimentConfig, arms: tuple[str, str] = ("forward", "coalescent")
) -> TestReport:
    """Two-sample chi-square on the joint law of ``(R^{>=2}, M^{>=2})`` from two generators.

    Each arm uses its own random stream, so ``arms=("coalescent", "coalescent")``
    is a null calibration of the test.
    """
    if config.n not in (2, 3):
        raise ValueError("oracle comparison is only run for n in {2, 3}")
    frame = SamplingFrame(config.n, config.horizon)
    samples = []
    for stream, mode in enumerate(arms):
        fn = partial(r_ge2_replicate, config.params, frame, mode)
        samples.append(run_replicates(fn, config.seed, config.reps, stream=stream, workers=config.workers))
    stat, p, dof = two_sample_chi2(samples[0], samples[1])
    means = [np.mean(np.asarray(s, dtype=float), axis=0) for s in samples]
    return TestReport(
        experiment=f"oracle:{arms[0]}-vs-{arms[1]}",
        statistic=stat,
        p_value=p,
        target=float(means[0][0]),
        estimate=float(means[1][0]),
        mc_stderr=float(np.std([s[0] for s in samples[1]]) / math.sqrt(config.reps)),
        reps_used=config.reps,
        passed=bool(p > config.alpha),
        seed=config.seed,
        details={
            "dof": dof,
            "mean_R_ge2": [float(m[0]) for m in means],
            "mean_M_ge2": [float(m[1]) for m in means],
        },
    )


def run_contour_compare(
    params: RateParams, T: float, reps: int, seed: int = 0, workers: int = 1, alpha: float = 0.01,
    max_k: int = 5,
) -> list[TestReport]:
    """Population size at ``T``: contour encoding versus forward simulation.

    Returns the two-sample chi-square report, one report per conditional
    ratio ``P(N >= k+1 | N >= k)`` of the contour sample (``k = 1..max_k``)
    against ``1 - delta_T``, and the forward-sample mean against ``e^{rT}``.
    """
    pops = {}
    for stream, mode in enumerate(("forward", "contour")):
        fn = partial(_population_replicate, params, T, mode)
        pops[mode] = np.asarray(run_replicates(fn, seed, reps, stream=stream, workers=workers))
    stat, p, dof = two_sample_chi2(pops["forward"].tolist(), pops["contour"].tolist())
    reports = [
        TestReport(
            experiment="contour:chi2",
            statistic=stat,
            p_value=p,
            target=float(pops["forward"].mean()),
            estimate=float(pops["contour"].mean()),
            mc_stderr=float(pops["contour"].std() / math.sqrt(reps)),
            reps_used=reps,
            passed=bool(p > alpha),
            seed=seed,
            details={"dof": dof},
        )
    ]
    target = 1 - delta(params, T)
    for mode, pop in pops.items():
        for k in range(1, max_k + 1):
            at_least = int(np.count_nonzero(pop >= k))
            if at_least == 0:
                continue
            ratio = np.count_nonzero(pop >= k + 1) / at_least
            se = math.sqrt(target * (1 - target) / at_least)
            z = (ratio - target) / se
            reports.append(
                TestReport(
                    experiment=f"{mode}:ratio_k={k}",
                    statistic=z,
                    p_value=float(2 * stats.norm.sf(abs(z))),
                    target=target,
                    estimate=float(ratio),
                    mc_stderr=se,
                    reps_used=at_least,
                    passed=bool(abs(z) <= 3),
                    seed=seed,
                )
            )
    growth = math.exp(params.r * T)
    for mode, pop in pops.items():
        mean, se = mc_mean(pop)
        reports.append(
            TestReport(
                experiment=f"{mode}:mean_population",
                statistic=mean / growth - 1,
                p_value=float(2 * stats.norm.sf(abs(mean - growth) / se)),
                target=growth,
                estimate=mean,
                mc_stderr=se,
                reps_used=reps,
                passed=bool(abs(mean / growth - 1) <= 0.02),
                seed=seed,
            )
        )
    return reports
