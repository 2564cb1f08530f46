"""Downsizing: density clustering of tasks, k-means clustering of workers,
and reduction of worker trajectories to a single representative location."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import EmptyInput, KTooLarge
from .geometry import DEFAULT_SEED, GRID_M, PlanarPoint, min_enclosing_circle, quantize_xy

DEFAULT_TASK_EPS_M = 200.0
DEFAULT_TASK_MIN_PTS = 5
KMEANS_MAX_ITER = 200
KMEANS_TOL = 1e-6


@dataclass(frozen=True)
class Task:
    id: Hashable
    location: PlanarPoint
    reward: float

    def __post_init__(self):
        if not self.reward > 0:
            raise ValueError(f"task {self.id!r}: reward must be positive, got {self.reward}")


@dataclass(frozen=True)
class Worker:
    id: Hashable
    location: PlanarPoint
    ability: float

    def __post_init__(self):
        if not self.ability > 0:
            raise ValueError(f"worker {self.id!r}: ability must be positive, got {self.ability}")


@dataclass(frozen=True)
class TaskCluster:
    id: int
    members: tuple[Task, ...]
    center: PlanarPoint


@dataclass(frozen=True)
class WorkerCluster:
    id: int
    members: tuple[Worker, ...]
    center: PlanarPoint


def default_k(n_workers: int) -> int:
    return max(1, math.ceil(math.sqrt(n_workers)))


def cluster_center(members: Sequence[PlanarPoint]) -> PlanarPoint:
    """Minimum-enclosing-circle center snapped to the grid."""
    if not members:
        raise EmptyInput("cluster_center needs at least one point")
    c = min_enclosing_circle(members)
    return quantize_xy(*c.center)


# ---------------------------------------------------------------------------
# density clustering

def dbscan(xy: np.ndarray, eps: float, min_pts: int) -> np.ndarray:
    """Density-based labels; -1 marks noise.

    ``eps`` is in the same units as ``xy``. Neighborhoods are closed balls
    and include the point itself. Clusters are grown one at a time from the
    lowest-index unclaimed core point, so a border point reachable from two
    clusters joins the one seeded first.
    """
    n = len(xy)
    if n == 0:
        return np.empty(0, dtype=int)
    tree = cKDTree(xy)
    hoods = tree.query_ball_point(xy, r=eps)
    core = np.fromiter((len(h) >= min_pts for h in hoods), dtype=bool, count=n)
    labels = np.full(n, -1, dtype=int)
    label = 0
    for i in range(n):
        if labels[i] != -1 or not core[i]:
            continue
        labels[i] = label
        stack = [i]
        while stack:
            u = stack.pop()
            if not core[u]:
                continue
            for v in hoods[u]:
                if labels[v] == -1:
                    labels[v] = label
                    stack.append(v)
        label += 1
    return labels


def _groups_with_noise(labels: np.ndarray) -> list[list[int]]:
    """Member index lists; noise points become singletons; ordered by first member."""
    groups: dict[tuple[str, int], list[int]] = {}
    for i, lab in enumerate(labels):
        key = ("noise", i) if lab == -1 else ("c", int(lab))
        groups.setdefault(key, []).append(i)
    return sorted(groups.values(), key=lambda g: g[0])


def _xy_array(points: Sequence[PlanarPoint]) -> np.ndarray:
    return np.array([(p.x, p.y) for p in points], dtype=float).reshape(-1, 2)


def cluster_tasks(tasks: Sequence[Task], eps: float = DEFAULT_TASK_EPS_M,
                  min_pts: int = DEFAULT_TASK_MIN_PTS) -> list[TaskCluster]:
    """Density-cluster tasks by location; ``eps`` is in meters."""
    if not tasks:
        raise EmptyInput("no tasks to cluster")
    if eps <= 0 or min_pts < 1:
        raise ValueError("eps must be > 0 and min_pts >= 1")
    labels = dbscan(_xy_array([t.location for t in tasks]), eps / GRID_M, min_pts)
    out = []
    for cid, g in enumerate(_groups_with_noise(labels)):
        members = tuple(tasks[i] for i in g)
        out.append(TaskCluster(cid, members, cluster_center([m.location for m in members])))
    return out


def trajectory_to_location(trajectory: Sequence[PlanarPoint], eps: float, min_pts: int) -> PlanarPoint:
    """Representative location: MEC center of the largest density cluster."""
    if not trajectory:
        raise EmptyInput("empty trajectory")
    labels = dbscan(_xy_array(trajectory), eps / GRID_M, min_pts)
    groups = _groups_with_noise(labels)
    # max() keeps the first of equal-size groups, i.e. the lowest cluster id
    biggest = max(groups, key=len)
    return cluster_center([trajectory[i] for i in biggest])


# ---------------------------------------------------------------------------
# k-means over (location, ability)

def worker_features(workers: Sequence[Worker], ability_weight: float = 1.0) -> np.ndarray:
    raw = np.array([(w.location.x, w.location.y, w.ability) for w in workers], dtype=float)
    mu = raw.mean(axis=0)
    sd = raw.std(axis=0)
    sd[sd == 0] = 1.0
    z = (raw - mu) / sd
    z[:, 2] *= ability_weight
    return z


def _kmeans_pp(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(X)
    centers = [X[rng.integers(n)]]
    d2 = ((X - centers[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = rng.choice(n, p=d2 / total)
        else:
            idx = rng.integers(n)
        centers.append(X[idx])
        d2 = np.minimum(d2, ((X - X[idx]) ** 2).sum(axis=1))
    return np.array(centers)


def _assign(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    d2 = ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)
    return d2.argmin(axis=1)


def _repair_empty(X: np.ndarray, labels: np.ndarray, C: np.ndarray, k: int) -> np.ndarray:
    """Give each empty cluster the farthest member of the currently largest cluster."""
    labels = labels.copy()
    counts = np.bincount(labels, minlength=k)
    for e in np.nonzero(counts == 0)[0]:
        big = int(np.argmax(counts))
        members = np.nonzero(labels == big)[0]
        d2 = ((X[members] - C[big]) ** 2).sum(axis=1)
        # stable: among equally far members take the highest index
        far = members[len(d2) - 1 - int(np.argmax(d2[::-1]))]
        labels[far] = e
        counts[big] -= 1
        counts[e] += 1
    return labels


def objective(X: np.ndarray, labels: np.ndarray, C: np.ndarray) -> float:
    return float(((X - C[labels]) ** 2).sum())


def kmeans(X: np.ndarray, k: int, seed: int = DEFAULT_SEED,
           max_iter: int = KMEANS_MAX_ITER, tol: float = KMEANS_TOL):
    """Lloyd iterations from k-means++ seeds.

    Returns ``(labels, centroids, history)`` where ``history`` holds the
    within-cluster sum of squares after every centroid update.
    """
    rng = np.random.default_rng(seed)
    C = _kmeans_pp(X, k, rng)
    labels = _repair_empty(X, _assign(X, C), C, k)
    history = []
    for _ in range(max_iter):
        newC = np.array([X[labels == j].mean(axis=0) for j in range(k)])
        shift = float(np.sqrt(((newC - C) ** 2).sum(axis=1)).max())
        C = newC
        history.append(objective(X, labels, C))
        if shift < tol:
            break
        labels = _repair_empty(X, _assign(X, C), C, k)
    return labels, C, history


def cluster_workers(workers: Sequence[Worker], k: int | None = None, ability_weight: float = 1.0,
                    seed: int = DEFAULT_SEED) -> list[WorkerCluster]:
    if not workers:
        raise EmptyInput("no workers to cluster")
    if k is None:
        k = default_k(len(workers))
    if k > len(workers):
        raise KTooLarge(f"k={k} exceeds {len(workers)} workers")
    if k < 1:
        raise ValueError("k must be positive")
    labels, _, _ = kmeans(worker_features(workers, ability_weight), k, seed)
    groups: dict[int, list[int]] = {}
    for i, lab in enumerate(labels):
        groups.setdefault(int(lab), []).append(i)
    out = []
    for cid, g in enumerate(sorted(groups.values(), key=lambda g: g[0])):
        members = tuple(workers[i] for i in g)
        out.append(WorkerCluster(cid, members, cluster_center([m.location for m in members])))
    return out
