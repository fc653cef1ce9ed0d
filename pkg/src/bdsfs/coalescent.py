"""Backward construction of a sampled genealogy with red and blue events.

A sample of size ``n`` taken at time ``T`` is encoded by branch heights
``H_0 = T, H_1, ..., H_{n-1}`` (time before sampling).  Leaf ``i`` hangs off
the nearest branch to its left that is taller than it.

Reproduction events on the sampled tree come in two colours:

* red: the birth at a branch point, one at each ``H_i`` for ``i >= 1``;
* blue: births along a branch whose other side leaves no sampled descendant.
  On every branch these form a Poisson process with intensity
  ``lam * q_prob(y, t)``; the mutations of a blue birth are carried by the
  branch itself (the parent keeps them).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .bdmath import RateParams, SamplingFrame, q_prob, sample_h, sample_y
from .errors import HeightTie

__all__ = [
    "CoalescentTree",
    "MutationEvent",
    "MarkedTree",
    "sample_tree",
    "topology_from_heights",
    "place_mutations",
    "sample_marked_tree",
    "descendants_of_event",
    "descendant_counts",
    "to_newick",
]


@dataclass(frozen=True, eq=False)
class CoalescentTree:
    T: float
    n: int
    y: float
    heights: np.ndarray

    def __post_init__(self) -> None:
        h = np.array(self.heights, dtype=float)
        if h.shape != (self.n,):
            raise ValueError(f"expected {self.n} heights, got shape {h.shape}")
        if h[0] != self.T:
            raise ValueError("branch 0 must have height T")
        if np.any(h[1:] <= 0) or np.any(h[1:] > self.T):
            raise ValueError("branch heights must lie in (0, T)")
        h.flags.writeable = False
        object.__setattr__(self, "heights", h)

    @classmethod
    def from_heights(cls, T: float, heights, y: float = float("nan")) -> "CoalescentTree":
        """Build a tree from ``H_1..H_{n-1}`` (``H_0 = T`` is prepended)."""
        h = np.concatenate([[T], np.asarray(heights, dtype=float)])
        return cls(T=float(T), n=len(h), y=y, heights=h)


@dataclass(frozen=True)
class MutationEvent:
    branch: int
    t: float
    color: Literal["red", "blue"]
    multiplicity: int


@dataclass(frozen=True, eq=False)
class MarkedTree:
    """A tree together with its reproduction events, stored column-wise."""

    tree: CoalescentTree
    branch: np.ndarray
    t: np.ndarray
    red: np.ndarray
    mult: np.ndarray

    def __post_init__(self) -> None:
        arrays = {
            "branch": np.asarray(self.branch, dtype=np.int64),
            "t": np.asarray(self.t, dtype=float),
            "red": np.asarray(self.red, dtype=bool),
            "mult": np.asarray(self.mult, dtype=np.int64),
        }
        sizes = {a.shape for a in arrays.values()}
        if len(sizes) != 1 or len(next(iter(sizes))) != 1:
            raise ValueError("event columns must be 1-d and of equal length")
        b, t, red = arrays["branch"], arrays["t"], arrays["red"]
        h = self.tree.heights
        if np.any(b < 0) or np.any(b >= self.tree.n):
            raise ValueError("event branch out of range")
        if np.any(arrays["mult"] < 0):
            raise ValueError("negative multiplicity")
        if np.any(red & ((b == 0) | (t != h[b]))):
            raise ValueError("red events sit exactly at H_i on branches i >= 1")
        blue = ~red
        if np.any(blue & ((t <= 0) | (t >= h[b]))):
            raise ValueError("blue events must satisfy 0 < t < H_branch")
        for name, a in arrays.items():
            a.flags.writeable = False
            object.__setattr__(self, name, a)

    @classmethod
    def from_events(cls, tree: CoalescentTree, events) -> "MarkedTree":
        events = list(events)
        return cls(
            tree=tree,
            branch=np.array([e.branch for e in events], dtype=np.int64),
            t=np.array([e.t for e in events], dtype=float),
            red=np.array([e.color == "red" for e in events], dtype=bool),
            mult=np.array([e.multiplicity for e in events], dtype=np.int64),
        )

    @property
    def events(self) -> list[MutationEvent]:
        return [
            MutationEvent(int(b), float(t), "red" if r else "blue", int(m))
            for b, t, r, m in zip(self.branch, self.t, self.red, self.mult)
        ]

    def __len__(self) -> int:
        return len(self.branch)

    def to_dict(self) -> dict:
        tr = self.tree
        return {
            "T": tr.T,
            "n": tr.n,
            "y": tr.y,
            "heights": tr.heights.tolist(),
            "events": [
                {"branch": e.branch, "t": e.t, "color": e.color, "mult": e.multiplicity}
                for e in self.events
            ],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> "MarkedTree":
        tree = CoalescentTree(
            T=float(data["T"]), n=int(data["n"]), y=float(data["y"]),
            heights=np.asarray(data["heights"], dtype=float),
        )
        events = [
            MutationEvent(int(e["branch"]), float(e["t"]), e["color"], int(e["mult"]))
            for e in data["events"]
        ]
        return cls.from_events(tree, events)


def sample_tree(params: RateParams, frame: SamplingFrame, rng: np.random.Generator) -> CoalescentTree:
    """Draw ``Y``, then ``n - 1`` i.i.d. branch heights given ``Y``."""
    y = float(sample_y(params, frame, rng))
    h = np.empty(frame.n)
    h[0] = frame.T
    if frame.n > 1:
        h[1:] = sample_h(params, frame.T, y, rng, size=frame.n - 1)
    return CoalescentTree(T=float(frame.T), n=frame.n, y=y, heights=h)


def topology_from_heights(tree: CoalescentTree | np.ndarray) -> np.ndarray:
    """Parent branch of every branch: ``parent[i] = max{j < i : H_j > H_i}``.

    ``parent[0]`` is -1.  Raises :class:`HeightTie` on equal heights.
    """
    h = tree.heights if isinstance(tree, CoalescentTree) else np.asarray(tree, dtype=float)
    if len(np.unique(h)) != len(h):
        raise HeightTie("branch heights must be distinct")
    parent = np.full(len(h), -1, dtype=np.int64)
    stack: list[int] = []
    for i, hi in enumerate(h.tolist()):
        while stack and h[stack[-1]] < hi:
            stack.pop()
        if stack:
            parent[i] = stack[-1]
        stack.append(i)
    return parent


def place_mutations(tree: CoalescentTree, params: RateParams, rng: np.random.Generator) -> MarkedTree:
    """Attach red and blue reproduction events, each with Poisson(nu) mutations.

    Blue events are obtained by thinning a rate-``lam`` homogeneous Poisson
    process on ``(0, H_i)`` with acceptance probability ``q_prob(y, t)``.
    """
    h = tree.heights
    n = tree.n
    counts = rng.poisson(params.lam * h)
    cand_branch = np.repeat(np.arange(n), counts)
    cand_t = rng.random(cand_branch.size) * h[cand_branch]
    keep = rng.random(cand_branch.size) < q_prob(params, tree.y, cand_t)
    keep &= cand_t > 0
    blue_branch, blue_t = cand_branch[keep], cand_t[keep]

    branch = np.concatenate([blue_branch, np.arange(1, n)])
    t = np.concatenate([blue_t, h[1:]])
    red = np.concatenate([np.zeros(blue_branch.size, bool), np.ones(n - 1, bool)])
    order = np.lexsort((t, branch))
    branch, t, red = branch[order], t[order], red[order]
    mult = rng.poisson(params.nu, size=branch.size).astype(np.int64)
    return MarkedTree(tree=tree, branch=branch, t=t, red=red, mult=mult)


def sample_marked_tree(params: RateParams, frame: SamplingFrame, rng: np.random.Generator) -> MarkedTree:
    return place_mutations(sample_tree(params, frame, rng), params, rng)


def descendants_of_event(tree: CoalescentTree, branch: int, t: float) -> int:
    """Number of sampled leaves supported by an event at height ``t`` on ``branch``.

    ``k = min{j >= 1 : branch + j = n or H_{branch+j} > t}``; the event is
    carried by leaves ``branch, ..., branch + k - 1``.
    """
    h = tree.heights
    j = branch + 1
    while j < tree.n and h[j] <= t:
        j += 1
    return j - branch


class _RangeMax:
    """Sparse table for range-maximum queries over a fixed array."""

    def __init__(self, values: np.ndarray):
        self.n = len(values)
        levels = [np.asarray(values, dtype=float)]
        width = 1
        while 2 * width <= self.n:
            prev = levels[-1]
            levels.append(np.maximum(prev[:-width], prev[width:]))
            width *= 2
        self.levels = levels

    def first_exceeding(self, start: np.ndarray, t: np.ndarray) -> np.ndarray:
        """Smallest ``j >= start`` with ``values[j] > t`` (``n`` if none)."""
        pos = np.array(start, dtype=np.int64, copy=True)
        for p in range(len(self.levels) - 1, -1, -1):
            width = 1 << p
            table = self.levels[p]
            ok = pos + width <= self.n
            idx = np.where(ok, pos, 0)
            step = ok & (table[idx] <= t)
            pos[step] += width
        return pos


def descendant_counts(heights: np.ndarray, branch: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Vectorised :func:`descendants_of_event` for many events on one tree."""
    branch = np.asarray(branch, dtype=np.int64)
    t = np.asarray(t, dtype=float)
    if branch.size == 0:
        return np.zeros(0, dtype=np.int64)
    rmq = _RangeMax(np.asarray(heights, dtype=float))
    return rmq.first_exceeding(branch + 1, t) - branch


def to_newick(marked: MarkedTree | CoalescentTree, precision: int = 6) -> str:
    """Newick string of the sampled tree with branch lengths in time units.

    Leaves are labelled by their branch index.  For a :class:`MarkedTree`
    each edge carries a ``[&mutations=m,events=e]`` comment.
    """
    tree = marked.tree if isinstance(marked, MarkedTree) else marked
    h = tree.heights
    n = tree.n
    parent = topology_from_heights(tree)
    children: list[list[int]] = [[] for _ in range(n)]
    for j in range(1, n):
        children[parent[j]].append(j)
    if isinstance(marked, MarkedTree):
        ev_branch, ev_t, ev_mult = marked.branch, marked.t, marked.mult
    else:
        ev_branch = ev_t = ev_mult = None

    def edge(i: int, top: float, bottom: float) -> str:
        length = f"{top - bottom:.{precision}g}"
        if ev_branch is None:
            return f":{length}"
        sel = (ev_branch == i) & (ev_t > bottom) & (ev_t <= top)
        return f"[&mutations={int(ev_mult[sel].sum())},events={int(sel.sum())}]:{length}"

    sub: list[str] = [""] * n
    # children have larger indices than their parent, so build right to left
    for i in range(n - 1, -1, -1):
        kids = sorted(children[i], key=lambda j: h[j], reverse=True)
        bounds = [h[i]] + [h[j] for j in kids] + [0.0]
        s = f"{i}{edge(i, bounds[-2], 0.0)}"
        for m in range(len(kids) - 1, -1, -1):
            s = f"({s},{sub[kids[m]]}){edge(i, bounds[m], bounds[m + 1])}"
        sub[i] = s
    return sub[0] + ";"
