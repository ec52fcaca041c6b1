"""Empirical coverage of the feasible confidence interval across scenarios and levels.

    python3 scripts/coverage_study.py --reps 300 --levels 0.9,0.95,0.99
"""

import argparse

from pthy.harness import run_coverage
from pthy.simulate import SimScenario


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--model", type=int, default=1)
    ap.add_argument("--jumps", default="no")
    ap.add_argument("--lambdas", default="3,6;10,20")
    ap.add_argument("--levels", default="0.95")
    ap.add_argument("--reps", type=int, default=300)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args(argv)

    print("lambda      level  coverage")
    for pair in args.lambdas.split(";"):
        lam = tuple(float(v) for v in pair.split(","))
        scn = SimScenario(model=args.model, jumps=args.jumps, lam=lam, seed=args.seed)
        for level in (float(x) for x in args.levels.split(",")):
            cov = run_coverage(scn, args.reps, level, args.workers)
            print(f"{str(lam):<11} {level:<6} {cov:.3f}")


if __name__ == "__main__":
    main()
