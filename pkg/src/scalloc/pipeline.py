"""End-to-end runs, the stage-1 grid, and the stage-2 ``w`` sweep.

Every run emits its intermediate dumps as text so a run directory can be
diffed, re-fed, or checked byte for byte against a repeat.
"""
from __future__ import annotations

import csv
import io
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .clustering import Task, TaskCluster, Worker, WorkerCluster, cluster_tasks, cluster_workers
from .config import RunConfig, derive_seed
from .errors import AllocError, StageError, ZeroBaseline
from .evaluation import ALL_BASES, dump_ranked, rank_candidates
from .geometry import PlanarPoint
from .matching import ALL_ORDERS, AllocationResult, allocate, build_table, traversal_sequence
from .metrics import INDICATOR_FIELDS, IndicatorReport, compute_indicators, csv_rows, standardize
from .ncgraph import ClusterGraphs, cluster_graphs

log = logging.getLogger(__name__)

STAGE1_LAYERS = (1, 2)
DEFAULT_W_GRID = tuple(round(0.1 * i, 1) for i in range(11))


def stage2_default(base: RunConfig = RunConfig()) -> RunConfig:
    """Fixed configuration for the ``w`` sweep: 2 layers, AVG traversal, AVG-SUM basis."""
    return base.with_(layers=2, order="AVG", basis="AVG-SUM")


def parse_w_grid(text: str) -> list[float]:
    """``start:stop:step`` (inclusive) or a comma list."""
    if ":" in text:
        a, b, s = (float(v) for v in text.split(":"))
        if s <= 0:
            raise ValueError("w grid step must be positive")
        n = int(math.floor((b - a) / s + 1e-9)) + 1
        grid = [round(a + i * s, 10) for i in range(n)]
    else:
        grid = [float(v) for v in text.split(",") if v.strip()]
    if not grid or any(not 0.0 <= w <= 1.0 for w in grid):
        raise ValueError(f"w grid must be non-empty and inside [0, 1], got {text!r}")
    return grid


class _stage:
    """Context manager that relabels module errors with the failing stage."""

    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, et, ev, tb):
        if ev is not None and not isinstance(ev, StageError) and isinstance(ev, (AllocError, ValueError, KeyError)):
            raise StageError(self.name, ev) from ev
        return False


# ---------------------------------------------------------------------------
# dumps

def clusters_csv(clusters) -> str:
    """One row per member: cluster id, cluster center, member id, location and attribute."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["cluster_id", "center_x", "center_y", "member_id", "x", "y", "attribute"])
    for c in clusters:
        for m in c.members:
            attr = m.reward if isinstance(m, Task) else m.ability
            w.writerow([c.id, c.center.x, c.center.y, m.id, m.location.x, m.location.y, repr(attr)])
    return buf.getvalue()


def parse_clusters(text: str, kind: str):
    """Inverse of :func:`clusters_csv`; ``kind`` is ``task`` or ``worker``."""
    member_cls, cluster_cls = (Task, TaskCluster) if kind == "task" else (Worker, WorkerCluster)
    groups: dict = {}
    centers: dict = {}
    for row in csv.DictReader(io.StringIO(text)):
        cid = int(row["cluster_id"])
        centers[cid] = PlanarPoint(int(row["center_x"]), int(row["center_y"]))
        loc = PlanarPoint(int(row["x"]), int(row["y"]), row["member_id"])
        groups.setdefault(cid, []).append(member_cls(row["member_id"], loc, float(row["attribute"])))
    return [cluster_cls(cid, tuple(groups[cid]), centers[cid]) for cid in groups]


def adjacency_csv(adj) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["direction", "anchor_id", "neighbor_id", "position"])
    for tid in sorted(adj.task_to_workers):
        for k, wid in enumerate(adj.task_to_workers[tid], start=1):
            w.writerow(["task_to_worker", tid, wid, k])
    for wid in sorted(adj.worker_to_tasks):
        for k, tid in enumerate(adj.worker_to_tasks[wid], start=1):
            w.writerow(["worker_to_task", wid, tid, k])
    return buf.getvalue()


def table_csv(table) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["worker_cluster_id", "task_cluster_id", "matching_value"])
    for (wid, tid), v in sorted(table.entries.items()):
        w.writerow([wid, tid, repr(v)])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# single run

@dataclass
class Prepared:
    """Clusters and insertion graphs, shared by every cell that uses the same clustering."""

    task_clusters: list
    worker_clusters: list
    graphs: ClusterGraphs
    key: tuple = ()


def _cluster_key(config: RunConfig) -> tuple:
    return (config.task_eps, config.task_min_pts, config.worker_k, config.ability_weight, config.seed)


def prepare(config: RunConfig, tasks: Sequence[Task], workers: Sequence[Worker]) -> Prepared:
    with _stage("cluster"):
        tc = cluster_tasks(tasks, config.task_eps, config.task_min_pts)
        wc = cluster_workers(workers, config.worker_k, config.ability_weight,
                             seed=derive_seed(config.seed, "kmeans"))
    with _stage("reconfigure"):
        graphs = cluster_graphs(tc, wc)
    log.info("prepared %d task clusters, %d worker clusters", len(tc), len(wc))
    return Prepared(tc, wc, graphs, _cluster_key(config))


@dataclass
class PipelineResult:
    allocation: AllocationResult
    report: IndicatorReport
    artifacts: dict = field(default_factory=dict)  # relative path -> text


def write_artifacts(artifacts: dict, out_dir) -> None:
    for rel, text in sorted(artifacts.items()):
        path = os.path.join(out_dir, rel)
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def run_pipeline(config: RunConfig, tasks=None, workers=None, out_dir=None,
                 prepared: Optional[Prepared] = None) -> PipelineResult:
    """cluster -> reconfigure -> rank -> table -> traverse -> allocate -> indicators."""
    if prepared is None or prepared.key != _cluster_key(config):
        prepared = prepare(config, tasks, workers)
    tc, wc = prepared.task_clusters, prepared.worker_clusters
    art = {"config.txt": config.to_text(),
           "task_clusters.csv": clusters_csv(tc),
           "worker_clusters.csv": clusters_csv(wc),
           "task_graph.txt": prepared.graphs.task_graph.dump(),
           "worker_graph.txt": prepared.graphs.worker_graph.dump()}
    with _stage("reconfigure"):
        adj = prepared.graphs.adjacency(config.layers)
    art["adjacency.csv"] = adjacency_csv(adj)
    with _stage("rank"):
        worker_side, task_side = rank_candidates(adj, tc, wc, (config.task_weights, config.worker_weights),
                                                 config.eval_basis)
    art["ranks_worker_side.csv"] = dump_ranked(worker_side)
    art["ranks_task_side.csv"] = dump_ranked(task_side)
    with _stage("table"):
        table = build_table(worker_side, task_side, config.w, config.convention)
    art["table.csv"] = table_csv(table)
    with _stage("traverse"):
        seq = traversal_sequence(wc, config.traversal)
    art["sequence.txt"] = "".join(f"{wid}\n" for wid in seq)
    with _stage("allocate"):
        result = allocate(table, seq, config.effective_cap, config.passes)
    art["allocation.csv"] = result.dump()
    with _stage("indicators"):
        report = compute_indicators(result, tc, wc, config.payoff_model)
    art["indicators.json"] = report.to_json(config.as_dict())
    if out_dir is not None:
        write_artifacts(art, out_dir)
    return PipelineResult(result, report, art)


# ---------------------------------------------------------------------------
# stage 1

def stage1_cells(base: RunConfig) -> list[RunConfig]:
    return [base.with_(basis=str(b), layers=L, order=o.value)
            for b in ALL_BASES for L in STAGE1_LAYERS for o in ALL_ORDERS]


def cell_dir(cfg: RunConfig) -> str:
    return os.path.join(cfg.basis, f"L{cfg.layers}", cfg.order)


@dataclass
class GridReport:
    rows: list  # one dict per cell
    standardized: list
    errors: dict = field(default_factory=dict)
    artifacts: dict = field(default_factory=dict)

    def report_for(self, basis: str, layers: int, order: str) -> Optional[IndicatorReport]:
        for r in self.rows:
            if (r["basis"], r["layers"], r["order"]) == (basis, layers, order) and not r["error"]:
                return IndicatorReport(**{k: r[k] for k in INDICATOR_FIELDS})
        return None


GRID_COLUMNS = ("basis", "layers", "order", "cap", "error") + INDICATOR_FIELDS


def run_stage1(base: RunConfig, tasks, workers, out_dir=None, prepared: Optional[Prepared] = None) -> GridReport:
    """5 traversal orders x 4 bases x 2 layer settings at the base ``w`` and cap."""
    if prepared is None or prepared.key != _cluster_key(base):
        prepared = prepare(base, tasks, workers)
    rows, art, errors = [], {}, {}
    reports: dict = {}
    for cfg in stage1_cells(base):
        key = (cfg.basis, cfg.layers, cfg.order)
        row = {"basis": cfg.basis, "layers": cfg.layers, "order": cfg.order,
               "cap": "inf" if cfg.effective_cap == math.inf else int(cfg.effective_cap), "error": ""}
        try:
            res = run_pipeline(cfg, prepared=prepared)
        except StageError as exc:
            log.warning("cell %s failed: %s", key, exc)
            errors[key] = str(exc)
            row["error"] = str(exc)
            row.update({k: "" for k in INDICATOR_FIELDS})
        else:
            reports[key] = res.report
            row.update({k: getattr(res.report, k) for k in INDICATOR_FIELDS})
            for rel, text in res.artifacts.items():
                art[os.path.join("cells", cell_dir(cfg), rel)] = text
        rows.append(row)

    std_rows = []
    for b in ALL_BASES:
        for L in STAGE1_LAYERS:
            group = {o: reports[(str(b), L, o)] for (bb, LL, o) in reports if bb == str(b) and LL == L}
            try:
                table = standardize(group, "Random")
            except (KeyError, ZeroBaseline) as exc:
                errors[(str(b), L, "standardize")] = str(exc)
                continue
            for o in ALL_ORDERS:
                if o.value in table:
                    std_rows.append({"basis": str(b), "layers": L, "order": o.value, **table[o.value]})
    art["grid.csv"] = csv_rows(rows, GRID_COLUMNS)
    art["standardized.csv"] = csv_rows(std_rows, ("basis", "layers", "order") + INDICATOR_FIELDS)
    art["config.txt"] = base.to_text()
    if out_dir is not None:
        write_artifacts(art, out_dir)
    return GridReport(rows, std_rows, errors, art)


# ---------------------------------------------------------------------------
# stage 2

SWEEP_COLUMNS = ("w",) + INDICATOR_FIELDS


@dataclass
class SweepReport:
    w_grid: list
    reports: list  # IndicatorReport per w
    allocations: list
    artifacts: dict = field(default_factory=dict)

    def series(self, name: str) -> list[float]:
        return [getattr(r, name) for r in self.reports]


def run_stage2(base: RunConfig, tasks, workers, w_grid: Sequence[float] = DEFAULT_W_GRID,
               out_dir=None, prepared: Optional[Prepared] = None) -> SweepReport:
    """Sweep ``w`` with everything else in ``base`` fixed (see :func:`stage2_default`)."""
    grid = [float(w) for w in w_grid]
    if any(not 0.0 <= w <= 1.0 for w in grid):
        raise ValueError("w values must lie in [0, 1]")
    if prepared is None or prepared.key != _cluster_key(base):
        prepared = prepare(base, tasks, workers)
    reports, allocs, art, rows = [], [], {}, []
    for w in grid:
        res = run_pipeline(base.with_(w=w), prepared=prepared)
        reports.append(res.report)
        allocs.append(res.allocation)
        art[os.path.join("allocations", f"w={w!r}.csv")] = res.artifacts["allocation.csv"]
        rows.append({"w": w, **{k: getattr(res.report, k) for k in INDICATOR_FIELDS}})
    art["sweep.csv"] = csv_rows(rows, SWEEP_COLUMNS)
    art["config.txt"] = base.to_text()
    art["task_clusters.csv"] = clusters_csv(prepared.task_clusters)
    art["worker_clusters.csv"] = clusters_csv(prepared.worker_clusters)
    if out_dir is not None:
        write_artifacts(art, out_dir)
    return SweepReport(grid, reports, allocs, art)
