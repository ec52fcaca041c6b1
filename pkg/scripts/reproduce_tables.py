"""Desk-scale reproduction of the Monte Carlo bias/rmse tables.

    python3 scripts/reproduce_tables.py --reps 300 --workers 4 --format text
"""

import argparse
import itertools
import sys
import time

from pthy.harness import emit_table, run_mc
from pthy.simulate import SimScenario


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--models", default="1,2,3")
    ap.add_argument("--jumps", default="no,scp1,vg")
    ap.add_argument("--lambdas", default="3,6;10,20;30,60", help="semicolon-separated pairs")
    ap.add_argument("--reps", type=int, default=300)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--format", choices=("text", "csv", "json"), default="text")
    args = ap.parse_args(argv)

    models = [int(m) for m in args.models.split(",")]
    jumps = args.jumps.split(",")
    lams = [tuple(float(v) for v in p.split(",")) for p in args.lambdas.split(";")]
    rows = []
    for model, jump, lam in itertools.product(models, jumps, lams):
        t0 = time.perf_counter()
        rows += run_mc(SimScenario(model=model, jumps=jump, lam=lam, seed=args.seed), args.reps, workers=args.workers)
        print(f"model {model} {jump} {lam}: {time.perf_counter() - t0:.1f}s", file=sys.stderr)
    sys.stdout.write(emit_table(rows, args.format))


if __name__ == "__main__":
    main()
