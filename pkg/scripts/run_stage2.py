#!/usr/bin/env python3
"""Sweep w over 0, 0.1, ..., 1 with the stage-2 configuration and report the payoff trends.

    python3 scripts/run_stage2.py --out runs/stage2 [--seed 0] [--convention task|worker]
"""
import argparse
import sys

from scipy.stats import spearmanr

from scalloc.config import RunConfig
from scalloc.data import SyntheticSpec, generate
from scalloc.pipeline import DEFAULT_W_GRID, run_stage2, stage2_default


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default="runs/stage2")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--convention", choices=("task", "worker"), default=RunConfig().convention)
    args = p.parse_args(argv)
    cfg = stage2_default(RunConfig(seed=args.seed, convention=args.convention))
    sweep = run_stage2(cfg, *generate(SyntheticSpec(seed=args.seed)), DEFAULT_W_GRID, out_dir=args.out)
    print(sweep.artifacts["sweep.csv"], end="")
    for name in ("total_requester_payoff", "total_worker_payoff"):
        rho = spearmanr(sweep.w_grid, sweep.series(name)).statistic
        print(f"# spearman({name}, w) = {rho:.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
