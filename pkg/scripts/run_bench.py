"""Generate the benchmark corpus, run all solvers and plot leaves against n.

usage: python scripts/run_bench.py OUTDIR [--count 100] [--seed 2024] [--budget 10]
"""
import argparse
import sys
from pathlib import Path

from circle3col.cli import main as cli


def main(argv=None) -> int:
    p = argparse.ArgumentParser()
    p.add_argument("out")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--nmin", type=int, default=50)
    p.add_argument("--nmax", type=int, default=250)
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--budget", type=float, default=10.0)
    p.add_argument("--methods", default="unger,chrono,dpll")
    p.add_argument("--jobs", type=int, default=1)
    a = p.parse_args(argv)
    out = Path(a.out)
    corpus = out / "corpus"
    steps = [
        ["gen", "--count", a.count, "--nmin", a.nmin, "--nmax", a.nmax, "--seed", a.seed, "--out", corpus],
        ["bench", "--corpus", corpus, "--methods", a.methods, "--budget", a.budget,
         "--csv", out / "bench.csv", "--jobs", a.jobs],
        ["plot", "--csv", out / "bench.csv", "--svg", out / "leaves.svg", "--solved-only", "--log-y"],
    ]
    for step in steps:
        code = cli([str(s) for s in step])
        if code:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
