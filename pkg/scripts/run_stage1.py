#!/usr/bin/env python3
"""Run the stage-1 grid (4 bases x 2 layer settings x 5 orders) on the default workload.

    python3 scripts/run_stage1.py --out runs/stage1 [--seed 0] [--config cfg.txt]
"""
import argparse
import sys
import time

from scalloc.config import RunConfig
from scalloc.data import SyntheticSpec, generate
from scalloc.pipeline import run_stage1


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default="runs/stage1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", help="key = value run config file")
    args = p.parse_args(argv)
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    cfg = cfg.with_(seed=args.seed)
    t0 = time.perf_counter()
    grid = run_stage1(cfg, *generate(SyntheticSpec(seed=args.seed)), out_dir=args.out)
    print(grid.artifacts["standardized.csv"], end="")
    print(f"# {len(grid.rows)} cells, {len(grid.errors)} errors, {time.perf_counter() - t0:.1f} s -> {args.out}",
          file=sys.stderr)
    return 1 if grid.errors else 0


if __name__ == "__main__":
    sys.exit(main())
