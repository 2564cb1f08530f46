import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from scalloc import oracles
from scalloc.clustering import Worker, WorkerCluster
from scalloc.errors import WOutOfRange
from scalloc.evaluation import RankedEntry, dump_ranked, parse_ranked, rank_candidates
from scalloc.geometry import PlanarPoint as P
from scalloc.matching import (ALL_ORDERS, AllocationResult, Convention, MatchingTable, OrderKind, TraversalOrder,
                              allocate, build_table, effective_cap, merge_ranks, traversal_sequence)
from scalloc.ncgraph import reconfigure
from scalloc.verify import random_table, random_worker_clusters

from test_evaluation import random_instance


def test_merge_ranks():
    assert merge_ranks(2, 4, 0.5) == 3.0
    assert merge_ranks(2, 4, 1.0) == 2
    assert merge_ranks(2, 4, 0.0) == 4
    with pytest.raises(WOutOfRange):
        merge_ranks(1, 1, 1.5)
    with pytest.raises(ValueError):
        merge_ranks(0, 1, 0.5)


@given(st.integers(1, 50), st.integers(1, 50), st.floats(0, 1))
def test_merge_ranks_between_inputs(rt, rw, w):
    v = merge_ranks(rt, rw, w)
    assert min(rt, rw) - 1e-12 <= v <= max(rt, rw) + 1e-12


def entries(*pairs):
    return [RankedEntry(c, 0.0, r) for r, c in enumerate(pairs, start=1)]


def test_build_table_mutual_listing():
    worker_side = {0: entries("A", "B")}
    task_side = {"A": entries(0)}
    t = build_table(worker_side, task_side, 0.5)
    assert t.entries == {(0, "A"): 1.0}


def test_build_table_all_rank_one():
    worker_side = {0: entries("A"), 1: entries("B")}
    task_side = {"A": entries(0), "B": entries(1)}
    assert set(build_table(worker_side, task_side, 0.3).entries.values()) == {1.0}


def test_build_table_conventions():
    worker_side = {0: entries("A", "B")}
    task_side = {"A": entries(1, 0), "B": entries(0)}
    task = build_table(worker_side, task_side, 0.8, Convention.TASK)
    worker = build_table(worker_side, task_side, 0.8, Convention.WORKER)
    # (0, A): rank_t = 1, rank_w = 2
    assert task.entries[(0, "A")] == pytest.approx(0.8 * 1 + 0.2 * 2)
    assert worker.entries[(0, "A")] == pytest.approx(0.2 * 1 + 0.8 * 2)
    with pytest.raises(WOutOfRange):
        build_table(worker_side, task_side, -0.1)


def test_table_matches_recomputation_from_dumps():
    tcs, wcs = random_instance(4)
    ws, ts = rank_candidates(reconfigure(tcs, wcs, 2), tcs, wcs)
    table = build_table(ws, ts, 0.5)
    ws2, ts2 = parse_ranked(dump_ranked(ws)), parse_ranked(dump_ranked(ts))
    want = {}
    for wid, lst in ws2.items():
        for e in lst:
            rw = [x.rank for x in ts2.get(e.candidate, []) if x.candidate == wid]
            if rw:
                want[(wid, e.candidate)] = 0.5 * e.rank + 0.5 * rw[0]
    assert table.entries == want
    assert len(table) > 0


def wcluster(cid, x, abilities):
    return WorkerCluster(cid, tuple(Worker(f"w{cid}_{i}", P(x, 0), a) for i, a in enumerate(abilities)), P(x, 0))


def test_traversal_examples():
    cl = [wcluster(0, 5, [1]), wcluster(1, 9, [1]), wcluster(2, 1, [1])]
    assert traversal_sequence(cl, TraversalOrder(OrderKind.XCOORD)) == [1, 0, 2]
    cl = [wcluster(1, 0, [2, 2]), wcluster(2, 1, [5])]
    assert traversal_sequence(cl, TraversalOrder(OrderKind.SUM)) == [2, 1]
    assert traversal_sequence(cl, TraversalOrder(OrderKind.AVG)) == [2, 1]
    assert traversal_sequence(cl, TraversalOrder(OrderKind.NONLMT)) == [1, 2]


def test_traversal_ties_by_id():
    cl = [wcluster(3, 7, [4]), wcluster(1, 7, [4]), wcluster(2, 7, [2, 2])]
    assert traversal_sequence(cl, TraversalOrder(OrderKind.XCOORD)) == [1, 2, 3]
    assert traversal_sequence(cl, TraversalOrder(OrderKind.SUM)) == [1, 2, 3]
    assert traversal_sequence(cl, TraversalOrder(OrderKind.AVG)) == [1, 3, 2]


@given(st.integers(0, 10**6), st.integers(1, 30))
def test_random_order_determined_by_seed(seed, n):
    cl = random_worker_clusters(np.random.default_rng(seed), n)
    a = traversal_sequence(cl, TraversalOrder(OrderKind.RANDOM, seed))
    assert a == traversal_sequence(cl, TraversalOrder(OrderKind.RANDOM, seed))
    assert sorted(a) == list(range(n))


def test_order_parse():
    assert TraversalOrder.parse("nonlmt").kind is OrderKind.NONLMT
    assert TraversalOrder.parse("Xcoord", seed=3) == TraversalOrder(OrderKind.XCOORD, 3)
    with pytest.raises(ValueError):
        TraversalOrder.parse("zigzag")
    assert effective_cap(TraversalOrder(OrderKind.NONLMT), 15) == math.inf
    assert effective_cap(TraversalOrder(OrderKind.AVG), 15) == 15


def two_workers_one_favorite():
    t = MatchingTable({(0, "A"): 1.0, (0, "B"): 2.0, (1, "A"): 1.0, (1, "B"): 1.5})
    return t


def test_allocate_cap_one():
    res = allocate(two_workers_one_favorite(), [1, 0], cap=1)
    assert res.assignments == [(1, "A", 1.0), (0, "B", 2.0)]
    assert res.allocation_counts == {"A": 1, "B": 1}


def test_allocate_no_cap():
    res = allocate(two_workers_one_favorite(), [1, 0], cap=math.inf)
    assert [a[1] for a in res.assignments] == ["A", "A"]


def test_allocate_value_tie_prefers_lower_task_id():
    t = MatchingTable({(0, "B"): 1.0, (0, "A"): 1.0})
    assert allocate(t, [0], cap=1).assignments == [(0, "A", 1.0)]


def test_allocate_unmatched_and_unknown_workers():
    t = MatchingTable({(0, "A"): 1.0, (1, "A"): 1.0})
    res = allocate(t, [0, 1, 2], cap=1)
    assert res.unmatched_workers == [1, 2]


def test_allocate_random_eight_by_eight_cap_three():
    rng = np.random.default_rng(88)
    table = random_table(rng, 8, 8)
    seq = [int(i) for i in rng.permutation(8)]
    res = allocate(table, seq, 3)
    ref, unmatched = oracles.greedy_reference(table.entries, seq, 3)
    assert res.assignments == ref and res.unmatched_workers == unmatched


@given(st.integers(0, 10**6), st.sampled_from([1, 2, 3, math.inf]))
def test_allocate_matches_reference(seed, cap):
    rng = np.random.default_rng(seed)
    n_w, n_t = int(rng.integers(1, 10)), int(rng.integers(1, 10))
    table = random_table(rng, n_w, n_t)
    seq = [int(i) for i in rng.permutation(n_w)]
    res = allocate(table, seq, cap)
    ref, unmatched = oracles.greedy_reference(table.entries, seq, None if cap == math.inf else cap)
    assert res.assignments == ref and res.unmatched_workers == unmatched
    assert all(c <= cap for c in res.allocation_counts.values())
    assert len({w for w, _, _ in res.assignments}) == len(res.assignments)
    assert sorted([w for w, _, _ in res.assignments] + res.unmatched_workers) == sorted(seq)


@given(st.integers(0, 10**6))
def test_uncapped_assignment_independent_of_order(seed):
    rng = np.random.default_rng(seed)
    n_w, n_t = int(rng.integers(1, 9)), int(rng.integers(1, 9))
    table = random_table(rng, n_w, n_t)
    cl = random_worker_clusters(rng, n_w)
    sets = {frozenset(allocate(table, traversal_sequence(cl, TraversalOrder(k, seed)), math.inf).assignments)
            for k in ALL_ORDERS}
    assert len(sets) == 1


def test_extra_passes_reset_counts():
    t = MatchingTable({(0, "A"): 1.0, (1, "A"): 1.0, (2, "A"): 1.0})
    one = allocate(t, [0, 1, 2], cap=1)
    three = allocate(t, [0, 1, 2], cap=1, passes=3)
    assert one.unmatched_workers == [1, 2]
    assert three.unmatched_workers == [] and three.allocation_counts == {"A": 3}


def test_allocation_dump_round_trip():
    rng = np.random.default_rng(2)
    table = random_table(rng, 8, 5, density=0.4)
    res = allocate(table, list(range(8)), 2)
    back = AllocationResult.parse(res.dump())
    assert back.assignments == res.assignments
    assert back.unmatched_workers == res.unmatched_workers
    assert back.allocation_counts == res.allocation_counts
