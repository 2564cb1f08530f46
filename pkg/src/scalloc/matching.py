"""Bidirectional rank merging, the matching table, and capped greedy allocation."""
from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from typing import Hashable, Optional, Sequence

import numpy as np

from .errors import WOutOfRange

INF = math.inf
DEFAULT_CAP = 15


class Convention(str, enum.Enum):
    """Which rank ``w`` multiplies in the merged matching value.

    TASK: ``w * rank_t + (1 - w) * rank_w`` with rank_t the task's rank in the
    worker's list. WORKER: the weights are swapped.
    """

    TASK = "task"
    WORKER = "worker"


def merge_ranks(rank_t: int, rank_w: int, w: float) -> float:
    if not 0.0 <= w <= 1.0:
        raise WOutOfRange(f"w={w} outside [0, 1]")
    if rank_t < 1 or rank_w < 1:
        raise ValueError("ranks start at 1")
    return w * rank_t + (1 - w) * rank_w


@dataclass
class MatchingTable:
    """Sparse (worker cluster, task cluster) -> matching value; lower is better."""

    entries: dict = field(default_factory=dict)

    def for_worker(self, wid) -> list[tuple[Hashable, float]]:
        return [(t, v) for (w, t), v in self.entries.items() if w == wid]

    def by_worker(self) -> dict:
        out: dict = {}
        for (w, t), v in sorted(self.entries.items()):
            out.setdefault(w, []).append((t, v))
        return out

    def __len__(self):
        return len(self.entries)


def build_table(worker_side, task_side, w: float, convention: Convention = Convention.TASK) -> MatchingTable:
    """Merge the two ranked directions for every mutually listed pair."""
    if not 0.0 <= w <= 1.0:
        raise WOutOfRange(f"w={w} outside [0, 1]")
    weight = w if Convention(convention) is Convention.TASK else 1.0 - w
    rank_w = {(e.candidate, tid): e.rank for tid, lst in task_side.items() for e in lst}
    table = MatchingTable()
    for wid in sorted(worker_side):
        for e in worker_side[wid]:
            rw = rank_w.get((wid, e.candidate))
            if rw is not None:
                table.entries[(wid, e.candidate)] = merge_ranks(e.rank, rw, weight)
    return table


# ---------------------------------------------------------------------------
# traversal orders

class OrderKind(str, enum.Enum):
    NONLMT = "NonLMT"
    RANDOM = "Random"
    XCOORD = "Xcoord"
    AVG = "AVG"
    SUM = "SUM"


@dataclass(frozen=True)
class TraversalOrder:
    kind: OrderKind
    seed: int = 0

    @classmethod
    def parse(cls, text: str, seed: int = 0) -> "TraversalOrder":
        for k in OrderKind:
            if k.value.lower() == text.strip().lower():
                return cls(k, seed)
        raise ValueError(f"unknown traversal order {text!r}")

    @property
    def capped(self) -> bool:
        return self.kind is not OrderKind.NONLMT

    def __str__(self):
        return self.kind.value


ALL_ORDERS = tuple(OrderKind)


def traversal_sequence(workers: Sequence, order: TraversalOrder) -> list:
    ids = sorted(c.id for c in workers)
    by_id = {c.id: c for c in workers}
    kind = order.kind
    if kind is OrderKind.NONLMT:
        return ids
    if kind is OrderKind.RANDOM:
        rng = np.random.default_rng(order.seed)
        return [ids[i] for i in rng.permutation(len(ids))]
    if kind is OrderKind.XCOORD:
        return sorted(ids, key=lambda i: (-by_id[i].center.x, i))
    abilities = {i: math.fsum(m.ability for m in by_id[i].members) for i in ids}
    if kind is OrderKind.AVG:
        return sorted(ids, key=lambda i: (-abilities[i] / len(by_id[i].members), i))
    return sorted(ids, key=lambda i: (-abilities[i], i))


# ---------------------------------------------------------------------------
# allocation

@dataclass
class AllocationResult:
    assignments: list = field(default_factory=list)  # (worker cluster, task cluster, value)
    unmatched_workers: list = field(default_factory=list)
    allocation_counts: dict = field(default_factory=dict)

    def dump(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["worker_cluster_id", "task_cluster_id", "matching_value"])
        for wid, tid, v in self.assignments:
            wr.writerow([wid, tid, repr(v)])
        for wid in self.unmatched_workers:
            wr.writerow([wid, "", ""])
        return buf.getvalue()

    @classmethod
    def parse(cls, text: str, id_type=int) -> "AllocationResult":
        res = cls()
        for row in csv.DictReader(io.StringIO(text)):
            wid = id_type(row["worker_cluster_id"])
            if row["task_cluster_id"] == "":
                res.unmatched_workers.append(wid)
                continue
            tid = id_type(row["task_cluster_id"])
            res.assignments.append((wid, tid, float(row["matching_value"])))
            res.allocation_counts[tid] = res.allocation_counts.get(tid, 0) + 1
        return res


def allocate(table: MatchingTable, sequence: Sequence, cap: float = DEFAULT_CAP,
             passes: int = 1) -> AllocationResult:
    """Worker-order greedy: each worker cluster takes its lowest-valued task
    cluster that is still under ``cap``; ties go to the lower task id.

    With ``passes > 1`` worker clusters left unmatched get further turns in
    the same order with the per-pass counts reset; each worker cluster is
    still matched at most once.
    """
    options = table.by_worker()
    for wid in options:
        options[wid].sort(key=lambda tv: (tv[1], tv[0]))
    res = AllocationResult()
    pending = list(sequence)
    for _ in range(max(1, passes)):
        left = []
        this_pass: dict = {}
        for wid in pending:
            pick = next(((t, v) for t, v in options.get(wid, ()) if this_pass.get(t, 0) < cap), None)
            if pick is None:
                left.append(wid)
                continue
            t, v = pick
            this_pass[t] = this_pass.get(t, 0) + 1
            res.allocation_counts[t] = res.allocation_counts.get(t, 0) + 1
            res.assignments.append((wid, t, v))
        pending = left
        if not pending:
            break
    res.unmatched_workers = pending
    return res


def effective_cap(order: TraversalOrder, cap: Optional[float]) -> float:
    return INF if not order.capped or cap is None else cap
