"""Cluster scoring and ranked adjacency lists.

Task clusters are scored for a given worker cluster as
``alpha * value - beta * dispersion - gamma * distance`` where value is the
sum or mean of member rewards and dispersion the largest member-to-member
distance. Worker clusters are scored the same way with abilities as value
and the population variance of abilities as dispersion. Distances are in
meters between cluster centers.
"""
from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass
from typing import Hashable, Mapping

from .geometry import GRID_M, distance_m, hull_chain


class Basis(str, enum.Enum):
    AVG = "AVG"
    SUM = "SUM"


@dataclass(frozen=True)
class EvalWeights:
    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        if min(self.alpha, self.beta, self.gamma) < 0:
            raise ValueError("weights must be non-negative")
        if max(self.alpha, self.beta, self.gamma) <= 0:
            raise ValueError("at least one weight must be positive")

    def scaled(self, c: float) -> "EvalWeights":
        return EvalWeights(self.alpha * c, self.beta * c, self.gamma * c)


@dataclass(frozen=True)
class EvalBasis:
    task_side: Basis = Basis.AVG
    worker_side: Basis = Basis.AVG

    @classmethod
    def parse(cls, text: str) -> "EvalBasis":
        t, w = text.strip().upper().split("-")
        return cls(Basis(t), Basis(w))

    def __str__(self):
        return f"{self.task_side.value}-{self.worker_side.value}"


ALL_BASES = tuple(EvalBasis(Basis(t), Basis(w)) for t in ("AVG", "SUM") for w in ("AVG", "SUM"))


def _aggregate(values, basis: Basis) -> float:
    s = math.fsum(values)
    return s if Basis(basis) is Basis.SUM else s / len(values)


def task_value(cluster, basis: Basis) -> float:
    return _aggregate([t.reward for t in cluster.members], basis)


def worker_value(cluster, basis: Basis) -> float:
    return _aggregate([w.ability for w in cluster.members], basis)


def task_dispersion(cluster) -> float:
    """Largest distance between two member tasks, in meters.

    The farthest pair is always a pair of hull vertices, so only those are compared.
    """
    xy = sorted({t.location.xy for t in cluster.members})
    if len(xy) < 2:
        return 0.0
    hull = [xy[i] for i in hull_chain(xy)]
    best = 0
    for i in range(len(hull)):
        for j in range(i + 1, len(hull)):
            dx, dy = hull[i][0] - hull[j][0], hull[i][1] - hull[j][1]
            best = max(best, dx * dx + dy * dy)
    return math.sqrt(best) * GRID_M


def worker_dispersion(cluster) -> float:
    """Population variance of member abilities."""
    a = [w.ability for w in cluster.members]
    mu = math.fsum(a) / len(a)
    return math.fsum((x - mu) ** 2 for x in a) / len(a)


def center_distance(a, b) -> float:
    return distance_m(a.center.xy, b.center.xy)


def eval_task(cluster, anchor, weights: EvalWeights, basis) -> float:
    """Score of a task cluster from the point of view of worker cluster ``anchor``."""
    side = basis.task_side if isinstance(basis, EvalBasis) else basis
    return (weights.alpha * task_value(cluster, side) - weights.beta * task_dispersion(cluster)
            - weights.gamma * center_distance(cluster, anchor))


def eval_worker(cluster, anchor, weights: EvalWeights, basis) -> float:
    side = basis.worker_side if isinstance(basis, EvalBasis) else basis
    return (weights.alpha * worker_value(cluster, side) - weights.beta * worker_dispersion(cluster)
            - weights.gamma * center_distance(cluster, anchor))


# ---------------------------------------------------------------------------
# ranking

@dataclass(frozen=True)
class RankedEntry:
    candidate: Hashable
    score: float
    rank: int


RankedAdjacency = dict  # anchor id -> list[RankedEntry]


def rank_scores(scores: Mapping[Hashable, float]) -> list[RankedEntry]:
    """Descending score, ties by ascending candidate id, ranks from 1."""
    ordered = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    return [RankedEntry(c, s, r) for r, (c, s) in enumerate(ordered, start=1)]


class _Stats:
    """Per-cluster value and dispersion, computed once per ranking pass."""

    def __init__(self, clusters, value_fn, disp_fn):
        self.clusters = {c.id: c for c in clusters}
        self._value_fn = value_fn
        self._disp = {c.id: disp_fn(c) for c in clusters}
        self._value: dict = {}

    def value(self, cid, basis):
        key = (cid, Basis(basis))
        if key not in self._value:
            self._value[key] = self._value_fn(self.clusters[cid], basis)
        return self._value[key]

    def disp(self, cid):
        return self._disp[cid]


def rank_candidates(adjacency, task_clusters, worker_clusters,
                    weights: EvalWeights | tuple[EvalWeights, EvalWeights] = EvalWeights(),
                    basis: EvalBasis = EvalBasis()):
    """Rank every cluster's adjacency list.

    Returns ``(worker_side, task_side)``: for each worker cluster its adjacent
    task clusters ranked by task score, and for each task cluster its adjacent
    worker clusters ranked by worker score. ``weights`` may be one set for
    both scores or a ``(task_weights, worker_weights)`` pair.
    """
    tw, ww = weights if isinstance(weights, tuple) else (weights, weights)
    ts = _Stats(task_clusters, task_value, task_dispersion)
    ws = _Stats(worker_clusters, worker_value, worker_dispersion)

    worker_side: RankedAdjacency = {}
    for wid in sorted(adjacency.worker_to_tasks):
        anchor = ws.clusters[wid]
        scores = {
            tid: tw.alpha * ts.value(tid, basis.task_side) - tw.beta * ts.disp(tid)
            - tw.gamma * center_distance(ts.clusters[tid], anchor)
            for tid in adjacency.worker_to_tasks[wid]
        }
        worker_side[wid] = rank_scores(scores)

    task_side: RankedAdjacency = {}
    for tid in sorted(adjacency.task_to_workers):
        anchor = ts.clusters[tid]
        scores = {
            wid: ww.alpha * ws.value(wid, basis.worker_side) - ww.beta * ws.disp(wid)
            - ww.gamma * center_distance(ws.clusters[wid], anchor)
            for wid in adjacency.task_to_workers[tid]
        }
        task_side[tid] = rank_scores(scores)
    return worker_side, task_side


def dump_ranked(ranked: RankedAdjacency) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["anchor_id", "candidate_id", "score", "rank"])
    for anchor in sorted(ranked):
        for e in ranked[anchor]:
            w.writerow([anchor, e.candidate, repr(e.score), e.rank])
    return buf.getvalue()


def parse_ranked(text: str, id_type=int) -> RankedAdjacency:
    out: RankedAdjacency = {}
    for row in csv.DictReader(io.StringIO(text)):
        out.setdefault(id_type(row["anchor_id"]), []).append(
            RankedEntry(id_type(row["candidate_id"]), float(row["score"]), int(row["rank"])))
    return out
