"""Closed-form quantities of the supercritical birth-death process.

Everything here is a pure function of :class:`RateParams` (and, for the
sampling distributions, a :class:`SamplingFrame`).  Functions accept scalars
or numpy arrays for their time/probability arguments.

The two sampling distributions used by the backward construction have
explicit antiderivatives, so both samplers invert their CDF exactly:

* sampling probability ``Y``:  ``P(Y <= y) = (y / ((1 - a) y + a))**n`` with
  ``a = delta(T)``;
* branch length ``H`` given ``Y = y``, with ``b = y lam`` and
  ``c = r - y lam``::

      P(H <= t) = (b + c e^{-rT}) (1 - e^{-rt}) / ((1 - e^{-rT}) (b + c e^{-rt}))
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

__all__ = [
    "RateParams",
    "SamplingFrame",
    "log_delta",
    "delta",
    "survival_prob",
    "q_prob",
    "y_pdf",
    "y_cdf",
    "y_from_uniform",
    "sample_y",
    "h_pdf",
    "h_cdf",
    "h_from_uniform",
    "sample_h",
]

# relative threshold on |r - y lam| below which H is a truncated exponential
DEGENERATE_TOL = 1e-9
_CLAMP_TOL = 1e-12


@dataclass(frozen=True)
class RateParams:
    """Birth rate ``lam``, death rate ``mu`` and mean mutations per birth ``nu``."""

    lam: float
    mu: float
    nu: float = 0.0

    def __post_init__(self) -> None:
        for name in ("lam", "mu", "nu"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.mu < 0:
            raise ValueError("death rate must be nonnegative")
        if not self.lam > self.mu:
            raise ValueError("process must be supercritical (lam > mu)")
        if self.nu < 0:
            raise ValueError("nu must be nonnegative")

    @property
    def r(self) -> float:
        """Net growth rate ``lam - mu``."""
        return self.lam - self.mu


@dataclass(frozen=True)
class SamplingFrame:
    """Sample size ``n`` taken at time ``T``."""

    n: int
    T: float

    def __post_init__(self) -> None:
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("sample size must be an integer >= 1")
        if not (np.isfinite(self.T) and self.T > 0):
            raise ValueError("sampling time must be positive and finite")


def _clamp_prob(p):
    p = np.asarray(p, dtype=float)
    if np.any(p < -_CLAMP_TOL) or np.any(p > 1 + _CLAMP_TOL):
        raise AssertionError("probability left [0, 1] beyond rounding tolerance")
    out = np.clip(p, 0.0, 1.0)
    return out if out.ndim else float(out)


def _check_time(t):
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t)):
        raise ValueError("time must be finite")
    if np.any(t < 0):
        raise ValueError("time must be nonnegative")
    return t


def log_delta(params: RateParams, t):
    """``log(r / (lam e^{rt} - mu))``, computed without overflow for large ``rt``."""
    t = _check_time(t)
    r = params.r
    out = np.log(r) - r * t - np.log(params.lam - params.mu * np.exp(-r * t))
    return out if out.ndim else float(out)


def delta(params: RateParams, t):
    """Probability that a rate-``lam`` ancestral search finds no surviving birth by ``t``.

    Equals ``r / (lam e^{rt} - mu)``; lies in (0, 1] and decreases from 1 at
    ``t = 0``.  It is also one minus the ratio parameter of the geometric law
    of ``N_t`` given survival.
    """
    out = np.exp(log_delta(params, t))
    return out if np.ndim(out) else float(out)


def survival_prob(params: RateParams, t):
    """``P(N_t > 0) = delta_t e^{rt} = r / (lam - mu e^{-rt})``."""
    t = _check_time(t)
    out = params.r / (params.lam - params.mu * np.exp(-params.r * t))
    return _clamp_prob(out)


def q_prob(params: RateParams, y, t):
    """Probability that an individual born ``t`` before sampling has no sampled descendant.

    ``y`` is the Bernoulli sampling probability.  This is the generating
    function ``F_t(1 - y)`` of the population size.
    """
    y = np.asarray(y, dtype=float)
    if np.any(~np.isfinite(y)) or np.any(y < 0) or np.any(y > 1):
        raise ValueError("sampling probability must lie in [0, 1]")
    t = _check_time(t)
    surv = params.r / (params.lam - params.mu * np.exp(-params.r * t))
    ld = np.log(params.r) - params.r * t - np.log(params.lam - params.mu * np.exp(-params.r * t))
    with np.errstate(divide="ignore"):
        # delta (1 - y) / (delta (1 - y) + y), in log-odds form
        frac = expit(ld + np.log1p(-y) - np.log(y))
    return _clamp_prob(1.0 - surv + surv * frac)


# --- sampling probability Y ------------------------------------------------


def y_pdf(params: RateParams, frame: SamplingFrame, y):
    a = delta(params, frame.T)
    n = frame.n
    y = np.asarray(y, dtype=float)
    out = n * a * y ** (n - 1) / (y + a - y * a) ** (n + 1)
    return out if out.ndim else float(out)


def y_cdf(params: RateParams, frame: SamplingFrame, y):
    y = np.asarray(y, dtype=float)
    if np.any(y < 0) or np.any(y > 1):
        raise ValueError("y must lie in [0, 1]")
    a = delta(params, frame.T)
    out = (y / ((1 - a) * y + a)) ** frame.n
    return _clamp_prob(out)


def y_from_uniform(params: RateParams, frame: SamplingFrame, u):
    """Invert :func:`y_cdf` at ``u`` in (0, 1)."""
    u = np.asarray(u, dtype=float)
    a = delta(params, frame.T)
    log_v = np.log(u) / frame.n
    v = np.exp(log_v)
    # 1 - (1 - a) v, written to avoid cancellation when v ~ 1 and a ~ 0
    denom = -np.expm1(log_v) + a * v
    out = a * v / denom
    return _clamp_prob(out)


def sample_y(params: RateParams, frame: SamplingFrame, rng: np.random.Generator, size=None):
    """Draw the sampling probability ``Y_{n,T}`` by inverse transform."""
    return y_from_uniform(params, frame, rng.random(size))


# --- branch length H given Y = y ------------------------------------------


def _h_coeffs(params: RateParams, y):
    y = np.asarray(y, dtype=float)
    if np.any(~(y > 0)) or np.any(y > 1):
        raise ValueError("y must lie in (0, 1]")
    b = y * params.lam
    c = params.r - b
    return b, c


def _is_degenerate(params: RateParams, c):
    return np.abs(c) < DEGENERATE_TOL * params.r


def h_pdf(params: RateParams, T: float, y, t):
    """Density of a branch length ``H_i`` given ``Y = y``, supported on (0, T)."""
    b, c = _h_coeffs(params, y)
    r = params.r
    t = np.asarray(t, dtype=float)
    norm = (b + c * np.exp(-r * T)) / (b * -np.expm1(-r * T))
    dens = norm * b * r**2 * np.exp(-r * t) / (b + c * np.exp(-r * t)) ** 2
    out = np.where((t > 0) & (t < T), dens, 0.0)
    return out if out.ndim else float(out)


def h_cdf(params: RateParams, T: float, y, t):
    b, c = _h_coeffs(params, y)
    r = params.r
    t = np.clip(np.asarray(t, dtype=float), 0.0, T)
    em_t = -np.expm1(-r * t)
    em_T = -np.expm1(-r * T)
    general = (b + c * np.exp(-r * T)) * em_t / (em_T * (b + c * np.exp(-r * t)))
    out = np.where(_is_degenerate(params, c), em_t / em_T, general)
    return _clamp_prob(out)


def h_from_uniform(params: RateParams, T: float, y, u):
    """Invert :func:`h_cdf` at ``u`` in (0, 1)."""
    b, c = _h_coeffs(params, y)
    r = params.r
    u = np.asarray(u, dtype=float)
    em_T = -np.expm1(-r * T)
    k = (b + c * np.exp(-r * T)) / em_T
    general = -np.log1p(-u * r / (k + u * c)) / r
    trunc_exp = -np.log1p(-u * em_T) / r
    t = np.where(_is_degenerate(params, c), trunc_exp, general)
    t = np.minimum(t, T)
    return t if t.ndim else float(t)


def sample_h(params: RateParams, T: float, y, rng: np.random.Generator, size=None):
    """Draw branch lengths ``H_i`` given ``Y = y`` by inverse transform."""
    return h_from_uniform(params, T, y, rng.random(size))
