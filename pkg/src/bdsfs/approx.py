"""Large-``n``, large-``T`` approximation of the sampled genealogy.

The sampling probability is replaced by ``n delta_T / W`` with ``W`` a unit
exponential, and the branch heights by

    H_i = T - (log n + log(1/W) + U_i) / r

with ``U_i`` i.i.d. standard logistic.  Reproduction-event counts are then
formed from these heights exactly as in the exact model, but summed over
interior branches only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .bdmath import RateParams, SamplingFrame, delta, q_prob
from .errors import DuplicateValues

__all__ = [
    "ApproxDraw",
    "logistic_from_uniform",
    "sample_approx",
    "approx_r_ge2",
    "approx_r_ge2_terms",
    "approx_r_k",
    "approx_r_k_terms",
    "order_coupling",
]


@dataclass(frozen=True, eq=False)
class ApproxDraw:
    """One draw of ``(W, U, Y, H)``; ``U[j]`` and ``H[j]`` belong to branch ``j + 1``.

    ``clamped`` records whether ``Y`` exceeded 1 and was clamped before use as
    a sampling probability.
    """

    W: float
    U: np.ndarray
    Y: float
    H: np.ndarray
    T: float
    clamped: bool = field(default=False)

    @property
    def y_eff(self) -> float:
        return min(self.Y, 1.0)


def logistic_from_uniform(u):
    u = np.asarray(u, dtype=float)
    out = np.log(u) - np.log1p(-u)
    return out if out.ndim else float(out)


def sample_approx(params: RateParams, frame: SamplingFrame, rng: np.random.Generator) -> ApproxDraw:
    if frame.n < 2:
        raise ValueError("approximation needs n >= 2")
    n, T, r = frame.n, frame.T, params.r
    W = float(-np.log1p(-rng.random()))
    U = logistic_from_uniform(rng.random(n - 1))
    Y = n * delta(params, T) / W
    H = T - (np.log(n) - np.log(W) + U) / r
    return ApproxDraw(W=W, U=U, Y=Y, H=H, T=T, clamped=Y > 1.0)


def _blue_counts(params, y, T, lo, hi, branch_ok, rng):
    """Thinned Poisson counts on ``[lo_i, hi_i]`` clipped to ``[0, T]``."""
    lo = np.clip(lo, 0.0, T)
    hi = np.clip(hi, 0.0, T)
    length = np.where(branch_ok & (hi > lo), hi - lo, 0.0)
    cand = rng.poisson(params.lam * length)
    idx = np.repeat(np.arange(length.size), cand)
    t = lo[idx] + rng.random(idx.size) * length[idx]
    accept = rng.random(idx.size) < q_prob(params, y, t)
    return np.bincount(idx[accept], minlength=length.size)


def approx_r_ge2_terms(
    params: RateParams, frame: SamplingFrame, rng: np.random.Generator, draw: ApproxDraw | None = None
) -> np.ndarray:
    """Per-branch counts ``R^{>=2}_i`` for ``i = 1..n-2`` (array index ``i - 1``)."""
    if frame.n < 3:
        raise ValueError("approx_r_ge2 needs n >= 3")
    if draw is None:
        draw = sample_approx(params, frame, rng)
    H = draw.H
    upper, lower = H[:-1], H[1:]  # H_i, H_{i+1}
    red = lower <= upper
    blue = _blue_counts(params, draw.y_eff, frame.T, lower, upper, red, rng)
    return blue + red.astype(np.int64)


def approx_r_ge2(params: RateParams, frame: SamplingFrame, rng: np.random.Generator) -> int:
    """Approximate number of events with at least two sampled descendants.

    Branch 0 is excluded.
    """
    return int(approx_r_ge2_terms(params, frame, rng).sum())


def approx_r_k_terms(
    params: RateParams, frame: SamplingFrame, k: int, rng: np.random.Generator, draw: ApproxDraw | None = None
) -> np.ndarray:
    """Per-branch counts ``R^k_i`` for interior ``i = 1..n-k-1``."""
    n = frame.n
    if int(k) != k or k < 2 or k > n - 1:
        raise ValueError("need 2 <= k <= n - 1")
    if draw is None:
        draw = sample_approx(params, frame, rng)
    m = n - k - 1
    if m <= 0:
        return np.zeros(0, dtype=np.int64)
    H = np.concatenate([[np.nan], draw.H])  # H[i] is branch i
    hi_i = H[1 : m + 1]
    hi_ik = H[1 + k : m + 1 + k]
    # max over H_{i+1}..H_{i+k-1}
    window = sliding_window_view(H[2 : m + k], k - 1).max(axis=1)
    top = np.minimum(hi_i, hi_ik)
    red = (window <= hi_i) & (hi_i <= hi_ik)
    blue = _blue_counts(params, draw.y_eff, frame.T, window, top, window <= top, rng)
    return blue + red.astype(np.int64)


def approx_r_k(params: RateParams, frame: SamplingFrame, k: int, rng: np.random.Generator) -> int:
    """Approximate number of events carried by exactly ``k`` sampled leaves.

    Only interior branches ``1..n-k-1`` contribute.
    """
    return int(approx_r_k_terms(params, frame, k, rng).sum())


def order_coupling(xs, ys) -> np.ndarray:
    """Rearrange ``ys`` so that it has the same rank pattern as ``xs``.

    The ``j``-th smallest ``x`` is paired with the ``j``-th smallest ``y``.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValueError("xs and ys must be 1-d of equal length")
    if len(np.unique(xs)) != xs.size or len(np.unique(ys)) != ys.size:
        raise DuplicateValues("xs and ys must have distinct entries")
    out = np.empty_like(ys)
    out[np.argsort(xs, kind="stable")] = np.sort(ys)
    return out
