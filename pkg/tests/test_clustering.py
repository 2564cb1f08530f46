import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from sklearn.cluster import DBSCAN

from scalloc import oracles
from scalloc.clustering import (Task, Worker, cluster_center, cluster_tasks, cluster_workers, dbscan, default_k,
                                kmeans, trajectory_to_location, worker_features)
from scalloc.errors import EmptyInput, KTooLarge
from scalloc.geometry import GRID_M, PlanarPoint as P, min_enclosing_circle


def m(x_m, y_m):
    """Point given in meters."""
    return P(round(x_m / GRID_M), round(y_m / GRID_M))


def tasks_at(points, reward=1.0):
    return [Task(f"t{i}", p, reward) for i, p in enumerate(points)]


def reference_labels(xy, eps, min_pts):
    return DBSCAN(eps=eps, min_samples=min_pts).fit(xy).labels_


def test_two_separated_groups():
    pts = [m(10 * i, 0) for i in range(5)] + [m(10_000 + 10 * i, 0) for i in range(5)]
    cl = cluster_tasks(tasks_at(pts), eps=100, min_pts=3)
    assert [len(c.members) for c in cl] == [5, 5]


def test_sparse_tasks_are_singletons():
    pts = [m(1000 * i, 500 * (i % 2)) for i in range(7)]
    cl = cluster_tasks(tasks_at(pts), eps=100, min_pts=2)
    assert len(cl) == 7 and all(len(c.members) == 1 for c in cl)


def test_mixture_matches_reference_dbscan():
    rng = np.random.default_rng(11)
    centers = np.array([[0, 0], [3000, 0], [0, 3000], [3000, 3000]])
    xy = np.concatenate([c + rng.normal(0, 120, size=(50, 2)) for c in centers])
    grid = np.round(xy / GRID_M).astype(int)
    ours = dbscan(grid.astype(float), 60 / GRID_M, 4)
    ref = reference_labels(grid.astype(float), 60 / GRID_M, 4)
    assert np.array_equal(ours, ref)
    assert len(set(ref) - {-1}) >= 4


@given(st.lists(st.tuples(st.integers(0, 40), st.integers(0, 40)), min_size=1, max_size=60),
       st.floats(1.0, 8.0), st.integers(1, 6))
def test_dbscan_matches_reference(xy, eps, min_pts):
    X = np.array(xy, dtype=float)
    assert np.array_equal(dbscan(X, eps, min_pts), reference_labels(X, eps, min_pts))


@given(st.lists(st.tuples(st.integers(0, 3000), st.integers(0, 3000)), min_size=1, max_size=80, unique=True),
       st.integers(1, 5))
def test_cluster_tasks_partition_and_centers(xy, min_pts):
    tasks = tasks_at([P(*p) for p in xy])
    cl = cluster_tasks(tasks, eps=4.0, min_pts=min_pts)
    ids = [t.id for c in cl for t in c.members]
    assert sorted(ids) == sorted(t.id for t in tasks)
    assert [c.id for c in cl] == list(range(len(cl)))
    firsts = [int(c.members[0].id[1:]) for c in cl]
    assert firsts == sorted(firsts)
    for c in cl:
        assert c.center == cluster_center([t.location for t in c.members])


def test_cluster_tasks_errors():
    with pytest.raises(EmptyInput):
        cluster_tasks([])
    with pytest.raises(ValueError):
        cluster_tasks(tasks_at([P(0, 0)]), eps=0)


def test_task_and_worker_reject_nonpositive_values():
    with pytest.raises(ValueError):
        Task("t", P(0, 0), 0.0)
    with pytest.raises(ValueError):
        Worker("w", P(0, 0), -1.0)


def make_workers(locs, abilities):
    return [Worker(f"w{i}", p, float(a)) for i, (p, a) in enumerate(zip(locs, abilities))]


def test_workers_two_tight_groups():
    rng = np.random.default_rng(2)
    locs = [m(rng.normal(0, 5), rng.normal(0, 5)) for _ in range(10)] + \
           [m(5000 + rng.normal(0, 5), rng.normal(0, 5)) for _ in range(10)]
    abil = list(rng.uniform(1, 2, 10)) + list(rng.uniform(8, 9, 10))
    cl = cluster_workers(make_workers(locs, abil), k=2, ability_weight=1.0, seed=0)
    assert sorted(sorted(int(w.id[1:]) for w in c.members) for c in cl) == [list(range(10)), list(range(10, 20))]


def test_ability_weight_zero_ignores_abilities():
    rng = np.random.default_rng(5)
    locs = [m(*rng.uniform(0, 4000, 2)) for _ in range(40)]
    abil = rng.uniform(1, 9, 40)
    a = cluster_workers(make_workers(locs, abil), k=6, ability_weight=0.0, seed=3)
    b = cluster_workers(make_workers(locs, rng.permutation(abil)), k=6, ability_weight=0.0, seed=3)
    assert [[w.id for w in c.members] for c in a] == [[w.id for w in c.members] for c in b]


def test_k_equals_n_gives_singletons():
    rng = np.random.default_rng(8)
    ws = make_workers([m(*rng.uniform(0, 1000, 2)) for _ in range(12)], rng.uniform(1, 9, 12))
    cl = cluster_workers(ws, k=12)
    assert all(len(c.members) == 1 for c in cl)
    for c in cl:
        assert np.var([w.ability for w in c.members]) == 0
    with pytest.raises(KTooLarge):
        cluster_workers(ws, k=13)
    with pytest.raises(EmptyInput):
        cluster_workers([])


def test_default_k():
    assert default_k(2000) == 45
    assert default_k(1) == 1


@given(st.integers(0, 10**6), st.integers(2, 60))
def test_kmeans_objective_non_increasing(seed, n):
    rng = np.random.default_rng(seed)
    ws = make_workers([m(*rng.uniform(0, 5000, 2)) for _ in range(n)], rng.uniform(1, 9, n))
    X = worker_features(ws, 1.0)
    k = int(rng.integers(1, n + 1))
    labels, C, hist = kmeans(X, k, seed=seed)
    assert all(b <= a + 1e-9 * max(1.0, a) for a, b in zip(hist, hist[1:]))
    assert len(set(labels.tolist())) == k


def test_cluster_workers_deterministic_and_partition():
    rng = np.random.default_rng(21)
    ws = make_workers([m(*rng.uniform(0, 5000, 2)) for _ in range(200)], rng.uniform(1, 9, 200))
    a, b = cluster_workers(ws, seed=4), cluster_workers(ws, seed=4)
    assert a == b
    assert len(a) == default_k(200)
    assert sorted(w.id for c in a for w in c.members) == sorted(w.id for w in ws)


def test_trajectory_examples():
    assert trajectory_to_location([P(7, 9)] * 6, eps=500, min_pts=5) == P(7, 9)
    rng = np.random.default_rng(0)
    home = [m(*rng.normal(0, 80, 2)) for _ in range(90)]
    far = [m(50_000 + rng.normal(0, 80), rng.normal(0, 80)) for _ in range(10)]
    traj = home + far
    labels = reference_labels(np.array([p.xy for p in traj], float), 500 / GRID_M, 5)
    assert (labels[:90] == labels[0]).all() and labels[0] not in labels[90:]
    assert trajectory_to_location(traj, 500, 5) == cluster_center(home)


def test_trajectory_matches_oracle_composition():
    rng = np.random.default_rng(17)
    traj = [m(*rng.normal(0, 300, 2)) for _ in range(60)] + [m(*(rng.normal(0, 200, 2) + 4000)) for _ in range(40)]
    xy = np.array([p.xy for p in traj], float)
    labels = reference_labels(xy, 150 / GRID_M, 5)
    sizes = {lab: int((labels == lab).sum()) for lab in set(labels) if lab != -1}
    best = min(sizes, key=lambda lab: (-sizes[lab], lab))
    cx, cy, _ = oracles.mec_bruteforce([traj[i].xy for i in np.nonzero(labels == best)[0]])
    got = trajectory_to_location(traj, 150, 5)
    assert math.hypot(got.x - cx, got.y - cy) <= 1.0


def test_cluster_center_examples():
    assert cluster_center([P(0, 0)]) == P(0, 0)
    assert cluster_center([P(0, 0), P(2, 0)]) == P(1, 0)
    rng = np.random.default_rng(12)
    pts = [P(int(x), int(y)) for x, y in rng.integers(-10**4, 10**4, (10, 2))]
    cx, cy, _ = oracles.mec_bruteforce([p.xy for p in pts])
    c = cluster_center(pts)
    assert math.hypot(c.x - cx, c.y - cy) <= 1.0
    with pytest.raises(EmptyInput):
        cluster_center([])


@given(st.lists(st.tuples(st.integers(-10**4, 10**4), st.integers(-10**4, 10**4)), min_size=1, max_size=15))
def test_cluster_center_within_radius(xy):
    pts = [P(*p) for p in xy]
    c = cluster_center(pts)
    r = min_enclosing_circle(pts).radius
    # quantization moves the center by at most half a grid diagonal
    assert all(math.hypot(p.x - c.x, p.y - c.y) <= r + math.sqrt(0.5) for p in pts)
