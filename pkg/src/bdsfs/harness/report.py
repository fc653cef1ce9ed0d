"""Experiment configuration and report records."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Literal

import numpy as np

from ..bdmath import RateParams
from ..errors import ConditionViolated

__all__ = [
    "ExperimentConfig",
    "TestReport",
    "clt_horizon",
    "lln_condition",
    "clt_condition",
    "reports_to_csv",
    "reports_to_json",
]

Mode = Literal["forward", "contour", "coalescent", "approx"]

CSV_FIELDS = ("experiment", "statistic", "estimate", "target", "stderr", "p_value", "reps", "seed")


def clt_horizon(params: RateParams, n: int) -> float:
    """Default CLT sampling time ``(2 log n + log log n + 5) / r``."""
    return (2 * math.log(n) + math.log(math.log(n)) + 5) / params.r


def lln_condition(params: RateParams, n: int, T: float) -> float:
    """``n e^{-rT}``; must be small for the law of large numbers regime."""
    return n * math.exp(-params.r * T)


def clt_condition(params: RateParams, n: int, T: float) -> float:
    """``n^{3/2} log(n) e^{-rT}``; must be small for the CLT regime."""
    return n**1.5 * math.log(n) * math.exp(-params.r * T)


@dataclass(frozen=True)
class ExperimentConfig:
    """Settings shared by all experiments.

    The sampling time is either given explicitly as ``T`` or by ``t_rule``:
    ``"clt"`` for :func:`clt_horizon`, or a number ``c`` meaning
    ``c log(n) / r``.
    """

    params: RateParams
    n: int
    reps: int
    seed: int = 0
    T: float | None = None
    t_rule: str | float | None = None
    mode: Mode = "coalescent"
    k: int = 2
    workers: int = 1
    alpha: float = 0.01
    rel_tol: float = 0.02
    var_tol: float = 0.10
    condition_bound: float = 0.1

    def __post_init__(self) -> None:
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if (self.T is None) == (self.t_rule is None):
            raise ValueError("give exactly one of T and t_rule")
        if self.mode not in ("forward", "contour", "coalescent", "approx"):
            raise ValueError(f"unknown mode {self.mode!r}")

    @property
    def horizon(self) -> float:
        if self.T is not None:
            return float(self.T)
        if self.t_rule == "clt":
            return clt_horizon(self.params, self.n)
        return float(self.t_rule) * math.log(self.n) / self.params.r

    def require_lln(self) -> None:
        v = lln_condition(self.params, self.n, self.horizon)
        if not v < self.condition_bound:
            raise ConditionViolated(f"n e^(-rT) = {v:.3g} is not below {self.condition_bound}")

    def require_clt(self) -> None:
        v = clt_condition(self.params, self.n, self.horizon)
        if not v < self.condition_bound:
            raise ConditionViolated(
                f"n^1.5 log(n) e^(-rT) = {v:.3g} is not below {self.condition_bound}"
            )


@dataclass
class TestReport:
    """Outcome of one verification.

    Deterministic checks (quadrature) report ``p_value`` 1.0 when they pass
    and 0.0 otherwise.
    """

    __test__ = False  # not a pytest class

    experiment: str
    statistic: float
    p_value: float
    target: float
    estimate: float
    mc_stderr: float
    reps_used: int
    passed: bool
    seed: int | None = None
    details: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not (0.0 <= self.p_value <= 1.0) and not np.isnan(self.p_value):
            raise ValueError("p_value must lie in [0, 1]")

    def row(self) -> dict:
        return {
            "experiment": self.experiment,
            "statistic": self.statistic,
            "estimate": self.estimate,
            "target": self.target,
            "stderr": self.mc_stderr,
            "p_value": self.p_value,
            "reps": self.reps_used,
            "seed": self.seed,
        }

    def summary(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return (
            f"{flag} {self.experiment}: estimate={self.estimate:.6g} target={self.target:.6g} "
            f"stderr={self.mc_stderr:.3g} stat={self.statistic:.4g} p={self.p_value:.4g}"
        )


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(float(v))
    return str(v)


def reports_to_csv(reports: list[TestReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for rep in reports:
        row = rep.row()
        w.writerow([_fmt(row[f]) for f in CSV_FIELDS])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def reports_to_json(reports: list[TestReport]) -> str:
    rows = []
    for rep in reports:
        row = {f: _jsonable(rep.row()[f]) for f in CSV_FIELDS}
        row["passed"] = bool(rep.passed)
        row["details"] = _jsonable(rep.details)
        rows.append(row)
    return json.dumps(rows, indent=2)


def config_dict(config: ExperimentConfig) -> dict:
    d = asdict(config)
    d["horizon"] = config.horizon
    return d
