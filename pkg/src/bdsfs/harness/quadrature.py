"""Quadrature checks of the limiting moment constants of ``R^{>=2}_i``.

Integrals over the real line are evaluated after the substitution
``v = e^s / (1 + e^s)``, which maps R onto (0, 1); scipy's adaptive
Gauss-Kronrod routine (QUADPACK) does the rest.  Integrands are written in
terms of the logistic CDF ``F`` and the limiting blue intensity
``g(s) = mu + r F(s)``.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
from scipy import integrate
from scipy.special import expit, logit

from ..bdmath import RateParams
from ..errors import QuadratureNotConverged
from .report import TestReport

__all__ = [
    "integrate_real_line",
    "integrate_real_wedge",
    "moment_integrals",
    "moment_closed_forms",
    "verify_moments",
    "binomial_sum",
    "verify_calculus_identity",
]

QUAD_ABS_TOL = 1e-10
CONVERGENCE_TOL = 1e-8


def _quad(f, a, b, tol=QUAD_ABS_TOL):
    val, err = integrate.quad(f, a, b, epsabs=tol, epsrel=tol, limit=400)
    if not err <= CONVERGENCE_TOL:
        raise QuadratureNotConverged(f"error estimate {err:.3g} above {CONVERGENCE_TOL}")
    return val, err


def integrate_real_line(h) -> tuple[float, float]:
    """``int_R h(s) ds`` as ``int_0^1 h(logit v) / (v (1 - v)) dv``."""
    return _quad(lambda v: h(logit(v)) / (v * (1.0 - v)), 0.0, 1.0)


def integrate_real_wedge(h) -> tuple[float, float]:
    """``int_R int_{-inf}^{a} h(a, b) db da`` over the wedge ``b < a``."""
    errs = []

    def inner(va):
        a = logit(va)
        val, err = _quad(lambda vb: h(a, logit(vb)) / (vb * (1.0 - vb)), 0.0, va)
        errs.append(err)
        return val / (va * (1.0 - va))

    val, err = _quad(inner, 0.0, 1.0)
    return val, err + max(errs, default=0.0)


def moment_integrals(params: RateParams) -> dict[str, tuple[float, float]]:
    """Quadrature values (and error estimates) of the elementary limits.

    Keys: ``red``, ``blue``, ``blue_sq``, ``red_red``, ``red_blue``,
    ``blue_red``, ``blue_blue``.  Consecutive-branch quantities refer to
    branch ``i`` then ``i + 1``.
    """
    mu, r = params.mu, params.r
    F = expit

    def g(s):
        return mu + r * F(s)

    def f(s):
        return F(s) * F(-s)

    out = {}
    # P(U_i <= U_{i+1})
    out["red"] = integrate_real_line(lambda s: f(s) * F(-s))
    # E[blue_i]: P(U_i <= s <= U_{i+1}) g(s) / r
    out["blue"] = _scale(integrate_real_line(lambda s: F(s) * F(-s) * g(s)), 1 / r)
    # E[blue_i^2] = E[Leb^2] + E[blue_i]
    sq = integrate_real_wedge(lambda a, b: 2 * F(b) * F(-a) * g(a) * g(b))
    out["blue_sq"] = (sq[0] / r**2 + out["blue"][0], sq[1] / r**2 + out["blue"][1])
    # P(U_i <= U_{i+1} <= U_{i+2})
    out["red_red"] = integrate_real_line(lambda s: F(s) * f(s) * F(-s))
    out["red_blue"] = _scale(integrate_real_line(lambda s: F(s) ** 2 / 2 * F(-s) * g(s)), 1 / r)
    out["blue_red"] = _scale(integrate_real_line(lambda s: F(s) * F(-s) ** 2 / 2 * g(s)), 1 / r)
    # P(U_i <= b <= U_{i+1} <= a <= U_{i+2}) g(a) g(b)
    out["blue_blue"] = _scale(
        integrate_real_wedge(lambda a, b: F(b) * (F(a) - F(b)) * F(-a) * g(a) * g(b)),
        1 / r**2,
    )
    return out


def _scale(pair, c):
    return pair[0] * c, pair[1] * abs(c)


def moment_closed_forms(params: RateParams) -> dict[str, float]:
    mu, r, lam = params.mu, params.r, params.lam
    pi2 = math.pi**2
    return {
        "blue_mean": mu / r + 0.5,
        "blue_second_moment": 2 / r**2 * (pi2 / 6 * mu**2 + pi2 / 6 * mu * r + r**2 / 2) + mu / r + 0.5,
        "variance": (pi2 / 3 - 1) * mu**2 / r**2 + (pi2 / 3 + 1) * mu / r + 2,
        "red_blue_next": mu / (4 * r) + 1 / 6,
        "blue_red_next": mu / (4 * r) + 1 / 12,
        "blue_blue_next": ((2 - pi2 / 6) * mu**2 + (2 - pi2 / 6) * mu * r + r**2 / 12) / r**2,
        "covariance": (1 - pi2 / 6) * mu**2 / r**2 + (0.5 - pi2 / 6) * mu / r - 0.5,
        "combined_variance": lam**2 / r**2,
    }


def verify_moments(params: RateParams, tol: float = CONVERGENCE_TOL) -> list[TestReport]:
    """Compare quadrature against the closed-form limiting constants.

    The variance and covariance limits are assembled from the elementary
    integrals (red indicators included), not from the closed forms.
    """
    q = moment_integrals(params)
    closed = moment_closed_forms(params)
    v = {key: val for key, (val, _) in q.items()}
    e = {key: err for key, (_, err) in q.items()}

    mean = v["red"] + v["blue"]
    second = v["red"] + 2 * v["blue"] + v["blue_sq"]
    cross = v["red_red"] + v["red_blue"] + v["blue_red"] + v["blue_blue"]
    var = second - mean**2
    cov = cross - mean**2
    quad = {
        "blue_mean": (v["blue"], e["blue"]),
        "blue_second_moment": (v["blue_sq"], e["blue_sq"]),
        "variance": (var, e["red"] + 2 * e["blue"] + e["blue_sq"] + 2 * mean * (e["red"] + e["blue"])),
        "red_blue_next": (v["red_blue"], e["red_blue"]),
        "blue_red_next": (v["blue_red"], e["blue_red"]),
        "blue_blue_next": (v["blue_blue"], e["blue_blue"]),
        "covariance": (cov, sum(e[x] for x in ("red_red", "red_blue", "blue_red", "blue_blue")) + 2 * mean * (e["red"] + e["blue"])),
    }
    quad["combined_variance"] = (var + 2 * cov, quad["variance"][1] + 2 * quad["covariance"][1])

    reports = []
    for name, target in closed.items():
        est, err = quad[name]
        diff = abs(est - target)
        ok = diff <= tol
        reports.append(
            TestReport(
                experiment=f"moments:{name}",
                statistic=diff,
                p_value=1.0 if ok else 0.0,
                target=target,
                estimate=est,
                mc_stderr=err,
                reps_used=0,
                passed=ok,
                details={"lam": params.lam, "mu": params.mu},
            )
        )
    return reports


def binomial_sum(m: int, n: int) -> float:
    """``sum_{k=0}^m (-1)^{m-k} C(m, k) / (n - k - 1)``, evaluated exactly."""
    total = sum(
        Fraction((-1) ** (m - k) * math.comb(m, k), n - k - 1) for k in range(m + 1)
    )
    return float(total)


def verify_calculus_identity(m: int, n: int, tol: float = 1e-10) -> TestReport:
    """Check the logistic-power integral against the binomial sum.

    Both ``int_R e^{(m+1)s} / (1 + e^s)^n ds`` and
    ``int_0^inf x^m / (1 + x)^n dx`` are integrated directly on their
    infinite domains.
    """
    if not (0 <= m <= n - 2):
        raise ValueError("need 0 <= m <= n - 2")
    exact = binomial_sum(m, n)
    s_form, s_err = _quad(
        lambda s: math.exp((m + 1) * s - n * np.logaddexp(0.0, s)), -np.inf, np.inf, tol=1e-13
    )
    x_form, x_err = _quad(lambda x: x**m / (1.0 + x) ** n, 0.0, np.inf, tol=1e-13)
    diff = max(abs(s_form - exact), abs(x_form - exact))
    ok = diff <= tol
    return TestReport(
        experiment=f"identity:m={m},n={n}",
        statistic=diff,
        p_value=1.0 if ok else 0.0,
        target=exact,
        estimate=s_form,
        mc_stderr=max(s_err, x_err),
        reps_used=0,
        passed=ok,
        details={"x_form": x_form},
    )
