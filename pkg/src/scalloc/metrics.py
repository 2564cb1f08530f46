"""Allocation indicators, the payoff transfer model, and baseline standardization."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, fields
from typing import Mapping

from .errors import InconsistentIds, ZeroBaseline

PAYOFF_FIELDS = (
    "total_requester_payoff",
    "total_worker_payoff",
    "requester_payoff_variance",
    "worker_payoff_variance",
)


@dataclass(frozen=True)
class PayoffModel:
    """How an assignment of task cluster T to worker cluster W pays out.

    worker_share: ``even`` splits T's total reward across W's members,
    ``full`` pays every member the whole total.
    quality: each task in T earns the ``mean`` (or ``sum``) ability of W.
    """

    worker_share: str = "even"
    quality: str = "mean"

    def __post_init__(self):
        if self.worker_share not in ("even", "full"):
            raise ValueError(f"worker_share must be 'even' or 'full', got {self.worker_share!r}")
        if self.quality not in ("mean", "sum"):
            raise ValueError(f"quality must be 'mean' or 'sum', got {self.quality!r}")


@dataclass(frozen=True)
class IndicatorReport:
    task_allocation_rate: float
    worker_utilization_rate: float
    total_requester_payoff: float
    total_worker_payoff: float
    requester_payoff_variance: float
    worker_payoff_variance: float

    def to_json(self, config: Mapping | None = None) -> str:
        doc = asdict(self)
        if config is not None:
            doc["config"] = dict(config)
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "IndicatorReport":
        doc = json.loads(text)
        return cls(**{f.name: doc[f.name] for f in fields(cls)})

    @classmethod
    def zeros(cls) -> "IndicatorReport":
        return cls(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)


def _pvar(xs) -> float:
    if not xs:
        return 0.0
    mu = math.fsum(xs) / len(xs)
    return math.fsum((x - mu) ** 2 for x in xs) / len(xs)


def individual_payoffs(result, task_clusters, worker_clusters, model: PayoffModel = PayoffModel()):
    """Per-task and per-worker payoffs, keyed by (cluster id, member index)."""
    tc = {c.id: c for c in task_clusters}
    wc = {c.id: c for c in worker_clusters}
    for wid, tid, _ in result.assignments:
        if wid not in wc or tid not in tc:
            raise InconsistentIds(f"assignment ({wid!r}, {tid!r}) references an unknown cluster")
    task_pay = {(c.id, i): 0.0 for c in task_clusters for i in range(len(c.members))}
    worker_pay = {(c.id, i): 0.0 for c in worker_clusters for i in range(len(c.members))}
    for wid, tid, _ in result.assignments:
        t, w = tc[tid], wc[wid]
        reward = math.fsum(m.reward for m in t.members)
        share = reward / len(w.members) if model.worker_share == "even" else reward
        for i in range(len(w.members)):
            worker_pay[(wid, i)] += share
        abil = math.fsum(m.ability for m in w.members)
        quality = abil / len(w.members) if model.quality == "mean" else abil
        for i in range(len(t.members)):
            task_pay[(tid, i)] += quality
    return task_pay, worker_pay


def compute_indicators(result, task_clusters, worker_clusters,
                       model: PayoffModel = PayoffModel()) -> IndicatorReport:
    task_pay, worker_pay = individual_payoffs(result, task_clusters, worker_clusters, model)
    n_tasks = sum(len(c.members) for c in task_clusters)
    n_workers = sum(len(c.members) for c in worker_clusters)
    assigned_t = {tid for _, tid, _ in result.assignments}
    matched_w = {wid for wid, _, _ in result.assignments}
    tasks_hit = sum(len(c.members) for c in task_clusters if c.id in assigned_t)
    workers_hit = sum(len(c.members) for c in worker_clusters if c.id in matched_w)
    tp = [task_pay[k] for k in sorted(task_pay)]
    wp = [worker_pay[k] for k in sorted(worker_pay)]
    return IndicatorReport(
        task_allocation_rate=tasks_hit / n_tasks if n_tasks else 0.0,
        worker_utilization_rate=workers_hit / n_workers if n_workers else 0.0,
        total_requester_payoff=math.fsum(tp),
        total_worker_payoff=math.fsum(wp),
        requester_payoff_variance=_pvar(tp),
        worker_payoff_variance=_pvar(wp),
    )


def standardize(reports: Mapping, baseline) -> dict:
    """Divide the four payoff indicators by the baseline scheme's; rates pass through."""
    if baseline not in reports:
        raise KeyError(f"baseline {baseline!r} missing from reports")
    base = reports[baseline]
    for name in PAYOFF_FIELDS:
        if getattr(base, name) == 0:
            raise ZeroBaseline(f"baseline {name} is zero")
    out = {}
    for scheme, rep in reports.items():
        row = {"task_allocation_rate": rep.task_allocation_rate,
               "worker_utilization_rate": rep.worker_utilization_rate}
        for name in PAYOFF_FIELDS:
            row[name] = getattr(rep, name) / getattr(base, name)
        out[scheme] = row
    return out


INDICATOR_FIELDS = tuple(f.name for f in fields(IndicatorReport))


def csv_rows(rows: list[dict], columns) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()
