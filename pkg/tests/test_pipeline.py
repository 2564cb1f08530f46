import math
import os

import numpy as np
import pytest

from scalloc.clustering import Task, Worker
from scalloc.config import RunConfig
from scalloc.data import SyntheticSpec, generate
from scalloc.errors import StageError
from scalloc.evaluation import parse_ranked
from scalloc.geometry import GRID_M, PlanarPoint as P
from scalloc.matching import AllocationResult, allocate, build_table
from scalloc.metrics import INDICATOR_FIELDS, PAYOFF_FIELDS, IndicatorReport, compute_indicators
from scalloc.pipeline import (DEFAULT_W_GRID, parse_clusters, parse_w_grid, prepare, run_pipeline, run_stage1,
                              run_stage2, stage1_cells, stage2_default)

ARTIFACTS = {"config.txt", "task_clusters.csv", "worker_clusters.csv", "task_graph.txt", "worker_graph.txt",
             "adjacency.csv", "ranks_worker_side.csv", "ranks_task_side.csv", "table.csv", "sequence.txt",
             "allocation.csv", "indicators.json"}


@pytest.fixture(scope="module")
def small():
    return generate(SyntheticSpec(n_tasks=800, n_workers=200, seed=1))


def toy_instance():
    """8 tight task groups and 36 workers that k-means splits into 6 clusters."""
    rng = np.random.default_rng(6)
    centers = rng.uniform(0, 6000, size=(8, 2))
    tasks = []
    for g, (cx, cy) in enumerate(centers):
        for k in range(6):
            x, y = cx + rng.normal(0, 20), cy + rng.normal(0, 20)
            tasks.append(Task(f"t{g}_{k}", P(round(x / GRID_M), round(y / GRID_M)), float(rng.uniform(5, 15))))
    hubs = rng.uniform(0, 6000, size=(6, 2))
    workers = []
    for g, (cx, cy) in enumerate(hubs):
        for k in range(6):
            x, y = cx + rng.normal(0, 30), cy + rng.normal(0, 30)
            workers.append(Worker(f"w{g}_{k}", P(round(x / GRID_M), round(y / GRID_M)), float(rng.uniform(4, 6))))
    return tasks, workers


def test_toy_pipeline_emits_every_artifact(tmp_path):
    tasks, workers = toy_instance()
    cfg = RunConfig(task_eps=100, task_min_pts=3, worker_k=6)
    res = run_pipeline(cfg, tasks, workers, out_dir=tmp_path)
    assert set(res.artifacts) == ARTIFACTS
    assert set(os.listdir(tmp_path)) == ARTIFACTS
    prep = prepare(cfg, tasks, workers)
    assert len(prep.task_clusters) == 8 and len(prep.worker_clusters) == 6
    adj = prep.graphs.adjacency(1)
    assert all(adj.task_to_workers.values()) and all(adj.worker_to_tasks.values())
    assert IndicatorReport.from_json(res.artifacts["indicators.json"]) == res.report


def test_layers_only_change_downstream_artifacts(small):
    tasks, workers = small
    one = run_pipeline(RunConfig(layers=1), tasks, workers).artifacts
    two = run_pipeline(RunConfig(layers=2), tasks, workers).artifacts
    upstream = ("task_clusters.csv", "worker_clusters.csv", "task_graph.txt", "worker_graph.txt")
    assert all(one[k] == two[k] for k in upstream)
    assert one["adjacency.csv"] != two["adjacency.csv"]


def test_uncapped_orders_agree(small):
    tasks, workers = small
    prep = prepare(RunConfig(), tasks, workers)
    results = {o: run_pipeline(RunConfig(order=o, cap=math.inf), prepared=prep).allocation
               for o in ("NonLMT", "Random", "Xcoord", "AVG", "SUM")}
    sets = {frozenset(r.assignments) for r in results.values()}
    assert len(sets) == 1


def test_artifact_closure(small):
    """Every dumped stage reproduces the next stage and the final indicators."""
    tasks, workers = small
    cfg = RunConfig(order="Random", basis="SUM-AVG")
    art = run_pipeline(cfg, tasks, workers).artifacts
    tc = parse_clusters(art["task_clusters.csv"], "task")
    wc = parse_clusters(art["worker_clusters.csv"], "worker")
    ws, ts = parse_ranked(art["ranks_worker_side.csv"]), parse_ranked(art["ranks_task_side.csv"])
    table = build_table(ws, ts, cfg.w, cfg.convention)
    seq = [int(x) for x in art["sequence.txt"].split()]
    alloc = allocate(table, seq, cfg.effective_cap)
    assert alloc.dump() == art["allocation.csv"]
    report = compute_indicators(AllocationResult.parse(art["allocation.csv"]), tc, wc, cfg.payoff_model)
    assert report == IndicatorReport.from_json(art["indicators.json"])


def test_pipeline_deterministic(small, tmp_path):
    tasks, workers = small
    a = run_pipeline(RunConfig(order="Random", seed=3), tasks, workers).artifacts
    b = run_pipeline(RunConfig(order="Random", seed=3), tasks, workers).artifacts
    assert a == b


def test_stage_errors_name_the_stage():
    tasks = [Task(f"t{i}", P(1000 * i, 0), 1.0) for i in range(2)]
    workers = [Worker(f"w{i}", P(0, 1000 * i), 1.0) for i in range(9)]
    with pytest.raises(StageError) as exc:
        run_pipeline(RunConfig(), tasks, workers)
    assert exc.value.stage == "reconfigure"


def test_stage1_grid(small, tmp_path):
    tasks, workers = small
    grid = run_stage1(RunConfig(), tasks, workers, out_dir=tmp_path)
    assert len(stage1_cells(RunConfig())) == 40 and len(grid.rows) == 40 and not grid.errors
    assert {r["cap"] for r in grid.rows if r["order"] == "NonLMT"} == {"inf"}
    assert {r["cap"] for r in grid.rows if r["order"] != "NonLMT"} == {15}
    for r in grid.standardized:
        if r["order"] == "Random":
            assert all(r[f] == 1.0 for f in PAYOFF_FIELDS)
        base = grid.report_for(r["basis"], r["layers"], "Random")
        cell = grid.report_for(r["basis"], r["layers"], r["order"])
        assert all(r[f] == getattr(cell, f) / getattr(base, f) for f in PAYOFF_FIELDS)
    assert (tmp_path / "grid.csv").read_text() == grid.artifacts["grid.csv"]
    assert (tmp_path / "cells" / "AVG-SUM" / "L2" / "Xcoord" / "allocation.csv").exists()


def test_nonlmt_invariant_to_shuffled_sequences(small):
    tasks, workers = small
    prep = prepare(RunConfig(), tasks, workers)
    out = run_pipeline(RunConfig(order="NonLMT"), prepared=prep)
    art = out.artifacts
    table = build_table(parse_ranked(art["ranks_worker_side.csv"]), parse_ranked(art["ranks_task_side.csv"]), 0.5)
    for seed in range(5):
        seq = [int(i) for i in np.random.default_rng(seed).permutation(len(prep.worker_clusters))]
        assert set(allocate(table, seq, math.inf).assignments) == set(out.allocation.assignments)


def test_stage2_sweep(small, tmp_path):
    tasks, workers = small
    base = stage2_default()
    prep = prepare(base, tasks, workers)
    sweep = run_stage2(base, None, None, out_dir=tmp_path, prepared=prep)
    assert sweep.w_grid == list(DEFAULT_W_GRID) and len(sweep.reports) == 11
    grid = run_stage1(base.with_(basis="AVG-AVG"), None, None, prepared=prep)
    assert sweep.reports[5] == grid.report_for("AVG-SUM", 2, "AVG")
    for w, rep in zip(sweep.w_grid, sweep.reports):
        text = (tmp_path / "allocations" / f"w={w!r}.csv").read_text()
        again = compute_indicators(AllocationResult.parse(text), prep.task_clusters, prep.worker_clusters)
        assert again == rep
    assert len(sweep.series("total_worker_payoff")) == 11


def test_stage2_rejects_bad_w(small):
    with pytest.raises(ValueError):
        run_stage2(RunConfig(), *small, w_grid=[0.2, 1.2])


def test_parse_w_grid():
    assert parse_w_grid("0:1:0.1") == list(DEFAULT_W_GRID)
    assert parse_w_grid("0.2,0.4") == [0.2, 0.4]
    with pytest.raises(ValueError):
        parse_w_grid("0:2:0.5")
    with pytest.raises(ValueError):
        parse_w_grid("0:1:0")


def test_indicator_fields_in_grid_columns(small):
    grid = run_stage1(RunConfig(), *small)
    header = grid.artifacts["grid.csv"].splitlines()[0].split(",")
    assert all(f in header for f in INDICATOR_FIELDS)
