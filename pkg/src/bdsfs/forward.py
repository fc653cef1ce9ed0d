"""Exact forward simulation of the birth-death genealogy.

This is the brute-force reference model: an individual-based Gillespie run in
which every child receives a Poisson(``nu``) number of brand-new mutations at
its birth.  Everything the backward (coalescent) construction produces can be
checked against it in distribution.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .bdmath import RateParams, SamplingFrame
from .errors import EventCapExceeded, RejectionBudgetExceeded
from .sfsstats import SfsReport

__all__ = [
    "Individual",
    "Genealogy",
    "SampleIds",
    "simulate_forward",
    "conditioned_forward",
    "sfs_from_genealogy",
    "DEFAULT_EVENT_CAP",
    "DEFAULT_MAX_ATTEMPTS",
]

DEFAULT_EVENT_CAP = 10**7
DEFAULT_MAX_ATTEMPTS = 10**5
_BLOCK = 512


@dataclass(slots=True)
class Individual:
    id: int
    parent: int | None
    birth_time: float
    death_time: float | None
    mutations: tuple[int, ...] = ()

    def alive_at(self, t: float) -> bool:
        return self.birth_time <= t and (self.death_time is None or self.death_time > t)


@dataclass
class Genealogy:
    """All individuals born before ``T``; ids are assigned in birth order."""

    individuals: list[Individual]
    T: float
    next_mutation_id: int = 0

    def alive_ids(self) -> list[int]:
        return [ind.id for ind in self.individuals if ind.death_time is None]

    @property
    def population(self) -> int:
        """``N_T``, the number of individuals alive at ``T``."""
        return sum(1 for ind in self.individuals if ind.death_time is None)

    def to_dict(self) -> dict:
        return {
            "T": self.T,
            "individuals": [
                {
                    "id": ind.id,
                    "parent": ind.parent,
                    "birth": ind.birth_time,
                    "death": ind.death_time,
                    "mutations": list(ind.mutations),
                }
                for ind in self.individuals
            ],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> "Genealogy":
        inds = [
            Individual(
                id=int(d["id"]),
                parent=None if d["parent"] is None else int(d["parent"]),
                birth_time=float(d["birth"]),
                death_time=None if d["death"] is None else float(d["death"]),
                mutations=tuple(int(m) for m in d["mutations"]),
            )
            for d in data["individuals"]
        ]
        next_id = 1 + max((m for ind in inds for m in ind.mutations), default=-1)
        return cls(individuals=inds, T=float(data["T"]), next_mutation_id=next_id)

    @classmethod
    def from_json(cls, text: str) -> "Genealogy":
        return cls.from_dict(json.loads(text))


@dataclass
class SampleIds:
    """Ids of the ``n`` sampled individuals, all alive at ``T``."""

    ids: list[int]
    attempts: int = field(default=1, compare=False)

    def __len__(self) -> int:
        return len(self.ids)


class _Stream:
    """Block-buffered uniform and Poisson variates from one generator."""

    __slots__ = ("rng", "nu", "_u", "_iu", "_p", "_ip")

    def __init__(self, rng: np.random.Generator, nu: float):
        self.rng = rng
        self.nu = nu
        self._u: list[float] = []
        self._iu = 0
        self._p: list[int] = []
        self._ip = 0

    def uniform(self) -> float:
        if self._iu == len(self._u):
            self._u = self.rng.random(_BLOCK).tolist()
            self._iu = 0
        x = self._u[self._iu]
        self._iu += 1
        return x

    def poisson(self) -> int:
        if self.nu == 0:
            return 0
        if self._ip == len(self._p):
            self._p = self.rng.poisson(self.nu, _BLOCK).tolist()
            self._ip = 0
        x = self._p[self._ip]
        self._ip += 1
        return x


def simulate_forward(
    params: RateParams,
    T: float,
    rng: np.random.Generator,
    event_cap: int = DEFAULT_EVENT_CAP,
) -> Genealogy:
    """Run the process from one individual up to time ``T`` (or extinction).

    Raises
    ------
    EventCapExceeded
        If more than ``event_cap`` birth/death events occur.
    """
    if not T > 0:
        raise ValueError("T must be positive")
    lam, mu = params.lam, params.mu
    p_birth = lam / (lam + mu)
    stream = _Stream(rng, params.nu)
    uniform, poisson = stream.uniform, stream.poisson
    log = np.log

    parent: list[int | None] = [None]
    birth: list[float] = [0.0]
    death: list[float | None] = [None]
    mut_first: list[int] = [0]
    mut_count: list[int] = [0]
    alive = [0]
    pos = [0]
    next_mut = 0
    events = 0
    t = 0.0
    while alive:
        n_alive = len(alive)
        t -= log(1.0 - uniform()) / ((lam + mu) * n_alive)
        if t >= T:
            break
        events += 1
        if events > event_cap:
            raise EventCapExceeded(f"more than {event_cap} events before T={T}")
        j = int(uniform() * n_alive)
        if uniform() < p_birth:
            new = len(parent)
            parent.append(alive[j])
            birth.append(t)
            death.append(None)
            k = poisson()
            mut_first.append(next_mut)
            mut_count.append(k)
            next_mut += k
            pos.append(n_alive)
            alive.append(new)
        else:
            dead = alive[j]
            death[dead] = t
            last = alive.pop()
            if last != dead:
                alive[j] = last
                pos[last] = j

    individuals = [
        Individual(
            id=i,
            parent=parent[i],
            birth_time=birth[i],
            death_time=death[i],
            mutations=tuple(range(mut_first[i], mut_first[i] + mut_count[i])),
        )
        for i in range(len(parent))
    ]
    return Genealogy(individuals=individuals, T=float(T), next_mutation_id=next_mut)


def conditioned_forward(
    params: RateParams,
    frame: SamplingFrame,
    rng: np.random.Generator,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
    event_cap: int = DEFAULT_EVENT_CAP,
) -> tuple[Genealogy, SampleIds]:
    """Simulate until ``N_T >= n``, then sample ``n`` alive individuals uniformly."""
    for attempt in range(1, max_attempts + 1):
        g = simulate_forward(params, frame.T, rng, event_cap=event_cap)
        alive = g.alive_ids()
        if len(alive) >= frame.n:
            chosen = rng.choice(len(alive), size=frame.n, replace=False)
            ids = sorted(alive[i] for i in chosen)
            return g, SampleIds(ids=ids, attempts=attempt)
    raise RejectionBudgetExceeded(
        f"N_T >= {frame.n} not reached in {max_attempts} attempts"
    )


def sfs_from_genealogy(genealogy: Genealogy, sample: SampleIds) -> SfsReport:
    """Site frequency spectrum of the sample, child-receives-mutations convention.

    Each birth event is classified by the number ``k`` of sampled individuals
    in the clade of the child (the child included).
    """
    n = len(sample.ids)
    inds = genealogy.individuals
    counts = [0] * len(inds)
    for i in sample.ids:
        counts[i] = 1
    # children always have larger ids than their parents
    for ind in reversed(inds):
        if ind.parent is not None:
            counts[ind.parent] += counts[ind.id]
    ks = np.fromiter((counts[ind.id] for ind in inds[1:]), dtype=np.int64, count=len(inds) - 1)
    mults = np.fromiter((len(ind.mutations) for ind in inds[1:]), dtype=np.int64, count=len(inds) - 1)
    return SfsReport.from_events(n, ks, mults)
