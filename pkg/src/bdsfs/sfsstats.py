"""Site frequency spectra of sampled genealogies and their limiting constants."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from .bdmath import RateParams

__all__ = [
    "SfsReport",
    "sfs_from_marked_tree",
    "remark_r_counts",
    "asymptotic_r_mean",
    "asymptotic_clt_params",
]


@dataclass(frozen=True, eq=False)
class SfsReport:
    """Counts of reproduction events (``R``) and mutations (``M``) by clade size.

    ``R[k]`` and ``M[k]`` for ``1 <= k <= n - 1``; index 0 is unused and
    always zero.  Events carried by the whole sample are not polymorphic and
    are tallied separately in ``full_R`` and ``full_M``.
    """

    n: int
    R: np.ndarray
    M: np.ndarray
    full_R: int = 0
    full_M: int = 0

    @classmethod
    def from_events(cls, n: int, ks, mults) -> "SfsReport":
        """Tally events with clade sizes ``ks`` and multiplicities ``mults``.

        Events with ``k = 0`` (no sampled descendant) are ignored.
        """
        ks = np.asarray(ks, dtype=np.int64)
        mults = np.asarray(mults, dtype=np.int64)
        if np.any(ks < 0) or np.any(ks > n):
            raise ValueError("clade size outside [0, n]")
        poly = (ks >= 1) & (ks < n)
        R = np.bincount(ks[poly], minlength=n)[:n].astype(np.int64)
        M = np.bincount(ks[poly], weights=mults[poly], minlength=n)[:n].astype(np.int64)
        full = ks == n
        return cls(n=n, R=R, M=M, full_R=int(full.sum()), full_M=int(mults[full].sum()))

    @property
    def R_ge2(self) -> int:
        return int(self.R[2:].sum())

    @property
    def M_ge2(self) -> int:
        return int(self.M[2:].sum())

    def __eq__(self, other) -> bool:
        if not isinstance(other, SfsReport):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.R, other.R)
            and np.array_equal(self.M, other.M)
            and self.full_R == other.full_R
            and self.full_M == other.full_M
        )

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "R": self.R[1:].tolist(),
            "M": self.M[1:].tolist(),
            "R_ge2": self.R_ge2,
            "M_ge2": self.M_ge2,
            "full_R": self.full_R,
            "full_M": self.full_M,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    def to_csv(self) -> str:
        """Rows ``(k, R_k, M_k)`` followed by a ``>=2`` aggregate row."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "R_k", "M_k"])
        for k in range(1, self.n):
            w.writerow([k, int(self.R[k]), int(self.M[k])])
        w.writerow([">=2", self.R_ge2, self.M_ge2])
        return buf.getvalue()


def sfs_from_marked_tree(marked) -> SfsReport:
    """Spectrum of a :class:`~bdsfs.coalescent.MarkedTree`.

    Each event's clade size comes from the leftward-attachment rule
    (:func:`~bdsfs.coalescent.descendant_counts`).
    """
    from .coalescent import descendant_counts

    ks = descendant_counts(marked.tree.heights, marked.branch, marked.t)
    return SfsReport.from_events(marked.tree.n, ks, marked.mult)


def remark_r_counts(marked) -> np.ndarray:
    """``R[k]`` for ``2 <= k <= n - 1`` from explicit per-branch interval rules.

    An independent route to the clade-size classification: for each ``k``
    the events of branch ``i`` are counted directly from windows of heights,
    with separate cases for branch 0, interior branches and branch ``n - k``.
    Index 0 and 1 of the result are left at zero.
    """
    h = marked.tree.heights
    n = marked.tree.n
    out = np.zeros(n, dtype=np.int64)
    for k in range(2, n):
        total = 0
        for i in range(0, n - k + 1):
            on_i = marked.branch == i
            blue = on_i & ~marked.red
            t = marked.t
            if i == 0:
                lo, hi = h[1:k].max(), h[k]
            elif i < n - k:
                lo, hi = h[i + 1 : i + k].max(), min(h[i], h[i + k])
            else:
                lo, hi = h[n - k + 1 :].max(), h[n - k]
            if lo <= hi:
                total += int(np.count_nonzero(blue & (t >= lo) & (t <= hi)))
            if i >= 1:
                top = h[i + k] if i < n - k else np.inf
                if lo <= h[i] <= top:
                    total += int(np.count_nonzero(on_i & marked.red))
        out[k] = total
    return out


def asymptotic_r_mean(params: RateParams, k: int) -> float:
    """Limit of ``R^k / n``: ``lam / (r k (k - 1))``."""
    if int(k) != k or k < 2:
        raise ValueError("k must be an integer >= 2")
    return params.lam / (params.r * k * (k - 1))


def asymptotic_clt_params(params: RateParams) -> dict[str, float]:
    """Per-leaf limiting means and variances of ``R^{>=2}`` and ``M^{>=2}``."""
    ratio = params.lam / params.r
    nu = params.nu
    return {
        "mean_r": ratio,
        "var_r": ratio**2,
        "mean_m": ratio * nu,
        "var_m": ratio**2 * nu**2 + ratio * nu,
    }
