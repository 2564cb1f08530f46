"""Cluster-level spatial task allocation over non-crossing graphs."""
from .clustering import Task, TaskCluster, Worker, WorkerCluster, cluster_tasks, cluster_workers
from .config import RunConfig
from .data import SyntheticSpec, generate, ingest_tasks, ingest_workers
from .errors import AllocError
from .evaluation import EvalBasis, EvalWeights, eval_task, eval_worker, rank_candidates
from .geometry import PlanarPoint, convex_hull, min_enclosing_circle
from .matching import Convention, TraversalOrder, allocate, build_table, merge_ranks
from .metrics import IndicatorReport, PayoffModel, compute_indicators, standardize
from .ncgraph import NonCrossingGraph, build, insert, k_layer_neighbors, reconfigure
from .pipeline import run_pipeline, run_stage1, run_stage2

__all__ = [
    "AllocError", "Convention", "EvalBasis", "EvalWeights", "IndicatorReport", "NonCrossingGraph",
    "PayoffModel", "PlanarPoint", "RunConfig", "SyntheticSpec", "Task", "TaskCluster",
    "TraversalOrder", "Worker", "WorkerCluster", "allocate", "build", "build_table",
    "cluster_tasks", "cluster_workers", "compute_indicators", "convex_hull", "eval_task",
    "eval_worker", "generate", "ingest_tasks", "ingest_workers", "insert", "k_layer_neighbors",
    "merge_ranks", "min_enclosing_circle", "rank_candidates", "reconfigure", "run_pipeline",
    "run_stage1", "run_stage2", "standardize",
]
