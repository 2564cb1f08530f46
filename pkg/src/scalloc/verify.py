"""Randomized cross-checks of the production code against the brute-force oracles.

Shared by the ``verify`` CLI command and the acceptance tests.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import oracles
from .clustering import Worker, WorkerCluster
from .errors import DuplicatePoint
from .geometry import PlanarPoint, hull_chain, min_enclosing_circle
from .matching import ALL_ORDERS, MatchingTable, TraversalOrder, allocate, merge_ranks, traversal_sequence
from .ncgraph import build, insert


@dataclass
class CheckResult:
    name: str
    ok: bool
    trials: int
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'}  {self.name}: {self.trials} trials{'; ' + self.detail if self.detail else ''}"


def random_points(rng: np.random.Generator, n: int, span: int | None = None) -> list[PlanarPoint]:
    """``n`` distinct, not-all-collinear grid points; the span varies from cramped to wide."""
    if span is None:
        span = int(rng.choice([8, 50, 1000, 10**6]))
    span = max(span, int(math.isqrt(4 * n)) + 2)
    while True:
        xy = set()
        while len(xy) < n:
            xy.add((int(rng.integers(-span, span + 1)), int(rng.integers(-span, span + 1))))
        xy = sorted(xy)
        if n >= 3 and len(hull_chain(xy)) >= 3:
            order = rng.permutation(n)
            return [PlanarPoint(*xy[i], id=k) for k, i in enumerate(order)]


def _graph_ok(g) -> str:
    xy = g.xy
    bad = oracles.crossing_violations(xy, g.edges)
    if bad:
        return f"{len(bad)} crossing pairs, e.g. {bad[0]}"
    missing = [e for e in oracles.hull_boundary_pairs(xy) if tuple(sorted(e)) not in g.edges]
    if missing:
        return f"missing hull edges {missing[:3]}"
    if not oracles.is_connected(len(xy), g.edges):
        return "disconnected"
    return ""


def check_build(n_sets: int = 100, max_n: int = 500, seed: int = 0, time_limit: float = 1.0) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for k in range(n_sets):
        pts = random_points(rng, int(rng.integers(3, max_n + 1)))
        t0 = time.perf_counter()
        g = build(pts)
        dt = time.perf_counter() - t0
        worst = max(worst, dt)
        why = _graph_ok(g)
        if why:
            return CheckResult("build planarity/hull/connectivity", False, k + 1, f"set {k}: {why}")
        if dt >= time_limit:
            return CheckResult("build planarity/hull/connectivity", False, k + 1, f"set {k} took {dt:.3f}s")
    return CheckResult("build planarity/hull/connectivity", True, n_sets, f"slowest build {worst:.3f}s")


def check_insert(n_calls: int = 1000, seed: int = 0, max_n: int = 80) -> CheckResult:
    rng = np.random.default_rng(seed)
    name = "insert planarity/connectivity/isolation"
    done = dups = 0
    while done < n_calls:
        pts = random_points(rng, int(rng.integers(3, max_n + 1)))
        g = build(pts)
        snapshot = (g.vertices, g.edges)
        taken = {p.xy for p in pts}
        span = max(max(abs(c) for c in p.xy) for p in pts) + 5
        for _ in range(min(10, n_calls - done)):
            q = (int(rng.integers(-span, span + 1)), int(rng.integers(-span, span + 1)))
            if q in taken:
                continue
            out = insert(g, PlanarPoint(*q, id="new"))
            done += 1
            if (g.vertices, g.edges) != snapshot:
                return CheckResult(name, False, done, "base graph modified")
            why = _graph_ok(out.new_graph)
            if why:
                return CheckResult(name, False, done, why)
            if out.new_graph.xy[out.inserted_vertex] != q:
                return CheckResult(name, False, done, "inserted vertex index wrong")
        try:
            insert(g, PlanarPoint(*pts[0].xy))
        except DuplicatePoint:
            dups += 1
        else:
            return CheckResult(name, False, done, "duplicate insertion accepted")
    return CheckResult(name, True, done, f"{dups} duplicate insertions rejected")


def check_mec(n_sets: int = 200, max_n: int = 12, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    name = "MEC vs pair/triple oracle"
    worst_c, worst_r = 0.0, 0.0
    for k in range(n_sets):
        n = int(rng.integers(1, max_n + 1))
        span = int(rng.choice([5, 100, 10**5]))
        pts = [PlanarPoint(int(rng.integers(-span, span + 1)), int(rng.integers(-span, span + 1))) for _ in range(n)]
        c = min_enclosing_circle(pts, seed=k)
        ox, oy, orad = oracles.mec_bruteforce([p.xy for p in pts])
        dc = math.hypot(c.center[0] - ox, c.center[1] - oy)
        dr = abs(c.radius - orad) / orad if orad > 0 else abs(c.radius)
        worst_c, worst_r = max(worst_c, dc), max(worst_r, dr)
        if dc > 1.0 or dr > 1e-9:
            return CheckResult(name, False, k + 1, f"set {k}: center off by {dc}, radius rel err {dr}")
    return CheckResult(name, True, n_sets, f"max center gap {worst_c:.2e}, max radius rel err {worst_r:.2e}")


def random_table(rng: np.random.Generator, n_w: int, n_t: int, density: float = 0.6) -> MatchingTable:
    """Matching values built from random rank pairs, so ties are common."""
    table = MatchingTable()
    w = float(rng.choice([0.0, 0.5, 1.0, rng.uniform()]))
    for i in range(n_w):
        for j in range(n_t):
            if rng.uniform() < density:
                table.entries[(i, j)] = merge_ranks(int(rng.integers(1, n_t + 1)), int(rng.integers(1, n_w + 1)), w)
    return table


def check_greedy(n_instances: int = 500, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    caps = (1, 2, 3, math.inf)
    name = "allocate vs step-by-step reference"
    for k in range(n_instances):
        n_w, n_t = int(rng.integers(1, 9)), int(rng.integers(1, 9))
        table = random_table(rng, n_w, n_t)
        seq = [int(i) for i in rng.permutation(n_w)]
        cap = caps[k % len(caps)]
        got = allocate(table, seq, cap)
        ref, unmatched = oracles.greedy_reference(table.entries, seq, None if cap == math.inf else cap)
        if got.assignments != ref or got.unmatched_workers != unmatched:
            return CheckResult(name, False, k + 1, f"instance {k} (cap {cap}) differs")
    return CheckResult(name, True, n_instances)


def random_worker_clusters(rng: np.random.Generator, n: int) -> list[WorkerCluster]:
    out = []
    for i in range(n):
        m = int(rng.integers(1, 5))
        members = tuple(Worker(f"w{i}_{j}", PlanarPoint(int(rng.integers(0, 100)), int(rng.integers(0, 100))),
                               float(rng.uniform(1, 9))) for j in range(m))
        out.append(WorkerCluster(i, members, PlanarPoint(int(rng.integers(0, 1000)), int(rng.integers(0, 1000)))))
    return out


def check_nonlmt(n_instances: int = 50, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    name = "cap-free order invariance"
    for k in range(n_instances):
        n_w, n_t = int(rng.integers(1, 9)), int(rng.integers(1, 9))
        table = random_table(rng, n_w, n_t)
        clusters = random_worker_clusters(rng, n_w)
        sets = set()
        for kind in ALL_ORDERS:
            seq = traversal_sequence(clusters, TraversalOrder(kind, seed=k))
            sets.add(frozenset(allocate(table, seq, math.inf).assignments))
        if len(sets) != 1:
            return CheckResult(name, False, k + 1, f"instance {k}: {len(sets)} distinct assignment sets")
    return CheckResult(name, True, n_instances)


def run_all(seed: int = 0, scale: float = 1.0) -> bool:
    def n(x):
        return max(1, int(round(x * scale)))

    results = [check_build(n(100), seed=seed), check_insert(n(1000), seed=seed), check_mec(n(200), seed=seed),
               check_greedy(n(500), seed=seed), check_nonlmt(n(50), seed=seed)]
    for r in results:
        print(r.line())
    return all(r.ok for r in results)
