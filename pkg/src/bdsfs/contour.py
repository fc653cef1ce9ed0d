"""Population size at ``T`` via the contour (depth-first) encoding of the tree.

The contour of the genealogy truncated at ``T`` is a Levy process with drift
-1 that jumps at rate ``lam`` per unit of searched length.  A jump starting
at level ``L`` (the birth time of a new individual) has size
``min(T - L, xi)`` with ``xi ~ Exp(mu)``, i.e. it ends at the individual's
death time or at ``T`` if the individual is still alive.  The path starts at
``min(xi_0, T)`` and is stopped when it reaches 0.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .bdmath import RateParams
from .errors import EventCapExceeded
from .forward import DEFAULT_EVENT_CAP

__all__ = ["ContourPath", "simulate_contour", "contour_population_at_T"]


@dataclass(frozen=True, eq=False)
class ContourPath:
    """A realised contour path.

    ``jump_times`` are cumulative search lengths at which jumps occur,
    ``jump_sizes`` the (truncated) jump sizes and ``peak_levels`` the level
    just after each jump, set to exactly ``T`` when the jump was truncated.
    ``total_length`` is the search length at absorption in 0.
    """

    start_level: float
    jump_times: np.ndarray
    jump_sizes: np.ndarray
    peak_levels: np.ndarray
    T: float
    total_length: float

    @property
    def n_individuals(self) -> int:
        return 1 + len(self.jump_times)

    def points(self) -> list[tuple[float, float]]:
        """Corner points ``(search_length, level)`` of the piecewise-linear path."""
        pts = [(0.0, self.start_level)]
        for s, size, peak in zip(self.jump_times, self.jump_sizes, self.peak_levels):
            pts.append((float(s), float(peak - size)))
            pts.append((float(s), float(peak)))
        pts.append((self.total_length, 0.0))
        return pts

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["search_length", "level"])
        for s, lvl in self.points():
            w.writerow([repr(s), repr(lvl)])
        return buf.getvalue()


def _lifespan(rng: np.random.Generator, mu: float) -> float:
    return np.inf if mu == 0 else rng.exponential(1.0 / mu)


def simulate_contour(
    params: RateParams, T: float, rng: np.random.Generator, event_cap: int = DEFAULT_EVENT_CAP
) -> ContourPath:
    if not T > 0:
        raise ValueError("T must be positive")
    lam, mu = params.lam, params.mu
    level = min(_lifespan(rng, mu), T)
    start = level
    s = 0.0
    times: list[float] = []
    sizes: list[float] = []
    peaks: list[float] = []
    while True:
        gap = rng.exponential(1.0 / lam) if lam > 0 else np.inf
        if gap >= level:
            s += level
            break
        s += gap
        level -= gap
        if len(times) >= event_cap:
            raise EventCapExceeded(f"more than {event_cap} jumps in contour path")
        xi = _lifespan(rng, mu)
        room = T - level
        if xi >= room:
            size, level = room, T
        else:
            size, level = xi, level + xi
        times.append(s)
        sizes.append(size)
        peaks.append(level)
    return ContourPath(
        start_level=start,
        jump_times=np.asarray(times),
        jump_sizes=np.asarray(sizes),
        peak_levels=np.asarray(peaks),
        T=float(T),
        total_length=s,
    )


def contour_population_at_T(path: ContourPath) -> int:
    """Number of individuals alive at ``T`` in the encoded tree.

    Counts the times the path sits exactly at ``T``: the start (if the root
    survives) and every truncated jump.
    """
    return int(path.start_level == path.T) + int(np.count_nonzero(path.peak_levels == path.T))
