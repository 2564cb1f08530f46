"""Command-line entry point: ``python3 -m scalloc <command> ...``."""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys

from .config import DEFAULT_BOX, RunConfig
from .data import (SyntheticSpec, generate, ingest_tasks, ingest_workers, tasks_csv, trajectories,
                   trajectories_csv, workers_csv)
from .errors import AllocError
from .pipeline import DEFAULT_W_GRID, parse_w_grid, run_pipeline, run_stage1, run_stage2, stage2_default

log = logging.getLogger("scalloc")


def _box(text: str):
    return tuple(float(v) for v in text.split(","))


def _write(path, text):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _load_config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if getattr(args, "config", None) else RunConfig()
    if getattr(args, "box", None):
        cfg = cfg.with_(box=_box(args.box))
    if getattr(args, "seed", None) is not None:
        cfg = cfg.with_(seed=args.seed)
    return cfg


def _datasets(args, cfg: RunConfig):
    """Ingest ``--tasks/--workers`` or fall back to the default synthetic workload."""
    if args.tasks and args.workers:
        kw = dict(seed=cfg.seed)
        tasks = ingest_tasks(args.tasks, cfg.box, reward_mean=cfg.reward_mean, reward_std=cfg.reward_std, **kw).items
        workers = ingest_workers(args.workers, cfg.box, traj_eps=cfg.traj_eps, traj_min_pts=cfg.traj_min_pts,
                                 ability_mean=cfg.ability_mean, ability_std=cfg.ability_std, **kw).items
        return tasks, workers
    if args.tasks or args.workers:
        raise SystemExit("--tasks and --workers must be given together")
    spec = SyntheticSpec.from_text(open(args.spec).read()) if getattr(args, "spec", None) else SyntheticSpec()
    return generate(spec)


def cmd_gen_data(args):
    spec = SyntheticSpec.from_text(open(args.spec).read()) if args.spec else SyntheticSpec()
    tasks, workers = generate(spec)
    _write(os.path.join(args.out, "tasks.csv"), tasks_csv(tasks, spec.box))
    if spec.trajectory_points > 1:
        rows = trajectories(spec, workers)
        text = trajectories_csv(rows, {w.id: w.ability for w in workers}, spec.box)
    else:
        text = workers_csv(workers, spec.box)
    _write(os.path.join(args.out, "workers.csv"), text)
    _write(os.path.join(args.out, "spec.txt"), spec.to_text())
    print(f"wrote {len(tasks)} tasks and {len(workers)} workers to {args.out}")


def _ingest(args, kind):
    box = _box(args.box)
    if kind == "tasks":
        res = ingest_tasks(args.input, box, seed=args.seed)
        text = tasks_csv(res.items, box)
    else:
        res = ingest_workers(args.input, box, traj_eps=args.traj_eps, traj_min_pts=args.traj_min_pts, seed=args.seed)
        text = workers_csv(res.items, box)
    if args.out:
        _write(args.out, text)
    print(json.dumps(res.summary(), sort_keys=True))


def cmd_allocate(args):
    cfg = _load_config(args)
    tasks, workers = _datasets(args, cfg)
    res = run_pipeline(cfg, tasks, workers, out_dir=args.out)
    print(res.report.to_json(), end="")


def cmd_stage1(args):
    cfg = _load_config(args)
    tasks, workers = _datasets(args, cfg)
    grid = run_stage1(cfg, tasks, workers, out_dir=args.out)
    print(grid.artifacts["grid.csv"], end="")
    for key, msg in grid.errors.items():
        print(f"cell {key}: {msg}", file=sys.stderr)


def cmd_stage2(args):
    cfg = _load_config(args) if args.config else stage2_default(_load_config(args))
    tasks, workers = _datasets(args, cfg)
    grid = parse_w_grid(args.w_grid) if args.w_grid else list(DEFAULT_W_GRID)
    sweep = run_stage2(cfg, tasks, workers, grid, out_dir=args.out)
    print(sweep.artifacts["sweep.csv"], end="")


def cmd_verify(args):
    from .verify import run_all
    ok = run_all(seed=args.seed if args.seed is not None else 0, scale=args.scale)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="scalloc", description="Cluster-level spatial task allocation.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-data", help="write a synthetic task/worker dataset")
    g.add_argument("--spec", help="key = value synthetic spec file")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen_data)

    box_default = ",".join(repr(v) for v in DEFAULT_BOX)
    for name, kind in (("ingest-tasks", "tasks"), ("ingest-workers", "workers")):
        s = sub.add_parser(name, help=f"clean a raw {kind} CSV into canonical form")
        s.add_argument("--in", dest="input", required=True)
        s.add_argument("--box", default=box_default, help="min_lat,min_lon,max_lat,max_lon")
        s.add_argument("--out")
        s.add_argument("--seed", type=int, default=0)
        if kind == "workers":
            s.add_argument("--traj-eps", type=float, default=500.0)
            s.add_argument("--traj-min-pts", type=int, default=5)
        s.set_defaults(func=lambda a, k=kind: _ingest(a, k))

    for name, fn, hlp in (("allocate", cmd_allocate, "run one configuration end to end"),
                          ("stage1", cmd_stage1, "40-cell grid over orders, bases and layers"),
                          ("stage2", cmd_stage2, "sweep the matching weight w")):
        s = sub.add_parser(name, help=hlp)
        s.add_argument("--config", help="key = value run config file")
        s.add_argument("--tasks")
        s.add_argument("--workers")
        s.add_argument("--spec", help="synthetic spec used when no CSVs are given")
        s.add_argument("--box")
        s.add_argument("--seed", type=int)
        s.add_argument("--out", required=(name == "allocate"))
        if name == "stage2":
            s.add_argument("--w-grid", help="start:stop:step or comma list (default 0:1:0.1)")
        s.set_defaults(func=fn)

    v = sub.add_parser("verify", help="run the oracle cross-checks")
    v.add_argument("--seed", type=int)
    v.add_argument("--scale", type=float, default=1.0, help="fraction of the full trial counts")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        rc = args.func(args)
    except (AllocError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return rc or 0


if __name__ == "__main__":
    sys.exit(main())
