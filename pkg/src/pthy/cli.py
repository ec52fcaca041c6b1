"""Command line interface: ``pthy {constants,estimate,simulate,mc}``.

Every subcommand accepts ``--config FILE``, a flat ``key=value`` file whose
keys are option names (``lambda = 3,6``); flags on the command line win.
Failures print a JSON error body on stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .avar import integrated_avar
from .estimators import DEFAULT_THETA, hy_estimate, pair_design
from .harness import ESTIMATORS, emit_table, run_mc
from .sampling import SESSION_SECONDS, read_ticks_csv, write_ticks_csv
from .simulate import JUMP_KINDS, SimScenario, simulate
from .threshold import DEFAULT_EPSILON, plut_rule
from .weights import WeightProfile, constants_dict, make_min_weight


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # usage errors become JSON error bodies like every other failure
    def error(self, message):
        raise CliError(message)


def _pair(text: str) -> tuple[float, float]:
    parts = [p for p in text.replace(" ", "").split(",") if p]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 'a,b', got {text!r}")
    return float(parts[0]), float(parts[1])


def read_config(path: str | Path) -> dict[str, str]:
    """Parse a flat ``key=value`` file; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def load_weight(source: str | None) -> WeightProfile:
    """``min`` (default) or a CSV of ``x,g`` knots for a piecewise-linear weight."""
    if source in (None, "", "min"):
        return make_min_weight()
    with open(source, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    try:
        pts = np.array([[float(v) for v in r[:2]] for r in rows])
    except ValueError:  # header line
        pts = np.array([[float(v) for v in r[:2]] for r in rows[1:]])
    return WeightProfile.from_table(pts[:, 0], pts[:, 1], name=Path(source).stem)


def parse_thresholds(text: str):
    """Returns ``(kind, rho1, rho2)`` for ``plut[:eps]``, ``none`` or ``file:<csv>``."""
    if text == "none":
        return "none", None, None
    if text == "plut" or text.startswith("plut:"):
        eps = float(text.split(":", 1)[1]) if ":" in text else DEFAULT_EPSILON
        rule = plut_rule(eps)
        return "plut", rule, rule
    if text.startswith("file:"):
        path = text[5:]
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            cols = reader.fieldnames or []
            rows = list(reader)
        if "rho1" in cols and "rho2" in cols:
            return "file", np.array([float(r["rho1"]) for r in rows]), np.array([float(r["rho2"]) for r in rows])
        if len(cols) == 1:
            rho = np.array([float(r[cols[0]]) for r in rows])
            return "file", rho, rho
        raise CliError(f"{path}: expected columns rho1,rho2 or a single threshold column")
    raise CliError(f"unknown thresholds text {text!r}")


def _estimate_entry(design, rho1, rho2) -> dict:
    full = hy_estimate(design)
    trunc = hy_estimate(design, rho1, rho2)
    return {
        "phy": full.value,
        "pthy": trunc.value,
        "jump_covariation": full.value - trunc.value,
        "n_pairs": trunc.n_pairs,
        "n_truncated": trunc.n_truncated,
        "k_n": design.k_n,
        "refresh_times": len(design.grid),
    }


def cmd_constants(args) -> dict:
    return constants_dict(load_weight(args.weight))


def cmd_estimate(args) -> dict:
    if not args.a or not args.b:
        raise CliError("--a and --b are required")
    profile = load_weight(args.weight)
    a = read_ticks_csv(args.a, args.session_seconds)
    b = read_ticks_csv(args.b, args.session_seconds)
    kind, rho1, rho2 = parse_thresholds(args.thresholds)
    design = pair_design(a, b, args.theta, profile)
    report = {"theta": args.theta, "thresholds": args.thresholds, "weight": profile.name}
    report["[X1,X2]"] = _estimate_entry(design, rho1, rho2)
    if kind != "file":
        # file thresholds are indexed by the covariance design only
        report["[X1]"] = _estimate_entry(pair_design(a, a, args.theta, profile), rho1, rho1)
        report["[X2]"] = _estimate_entry(pair_design(b, b, args.theta, profile), rho2, rho2)
    if args.ci is not None:
        avar = integrated_avar(a, b, args.theta, profile, (rho1, rho2), level=args.ci, design=design)
        report["avar"] = avar.to_dict()
    return report


def cmd_simulate(args) -> dict:
    scn = SimScenario(model=args.model, jumps=args.jumps, lam=args.lam, n=args.n, seed=args.seed)
    out = simulate(scn)
    d = Path(args.out_dir)
    d.mkdir(parents=True, exist_ok=True)
    write_ticks_csv(d / "asset1.csv", out.ticks1, args.session_seconds)
    write_ticks_csv(d / "asset2.csv", out.ticks2, args.session_seconds)
    truth = {
        "model": scn.model, "jumps": scn.jumps, "lambda": list(scn.lam), "n": scn.n, "seed": scn.seed,
        "integrated_covariance": out.true_ic.tolist(),
        "jump_covariation": out.true_jv.tolist(),
    }
    (d / "truth.json").write_text(json.dumps(truth, indent=2) + "\n")
    return {"out_dir": str(d), "files": ["asset1.csv", "asset2.csv", "truth.json"]}


def cmd_mc(args) -> str:
    scn = SimScenario(model=args.model, jumps=args.jumps, lam=args.lam, n=args.n, seed=args.seed)
    estimators = tuple(e for e in args.estimators.split(",") if e)
    rows = run_mc(scn, args.reps, estimators, args.workers, args.theta, args.epsilon)
    return emit_table(rows, args.format)


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    p = _Parser(prog="pthy", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    subs = {}

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", help="flat key=value file of defaults")
        sp.set_defaults(func=fn)
        subs[name] = sp
        return sp

    sp = add("constants", cmd_constants, "print the weight constants as JSON")
    sp.add_argument("--weight", default="min", help="'min' or a CSV of x,g knots")

    sp = add("estimate", cmd_estimate, "estimate covariance and jump covariation from two tick CSVs")
    sp.add_argument("--a", help="tick CSV (time,price) of asset 1")
    sp.add_argument("--b", help="tick CSV (time,price) of asset 2")
    sp.add_argument("--theta", type=float, default=DEFAULT_THETA)
    sp.add_argument("--thresholds", default="plut", help="plut[:eps] | none | file:<csv>")
    sp.add_argument("--ci", type=float, default=None, help="confidence level; adds the avar report")
    sp.add_argument("--weight", default="min")
    sp.add_argument("--session-seconds", type=float, default=SESSION_SECONDS)
    sp.add_argument("--out", help="write the JSON report here instead of stdout")

    for name, fn, help_ in (("simulate", cmd_simulate, "simulate one replication to CSV"),
                            ("mc", cmd_mc, "Monte Carlo bias/rmse table")):
        sp = add(name, fn, help_)
        sp.add_argument("--model", type=int, choices=(1, 2, 3), default=1)
        sp.add_argument("--jumps", choices=JUMP_KINDS, default="no")
        sp.add_argument("--lambda", dest="lam", type=_pair, default=(3.0, 6.0))
        sp.add_argument("--n", type=int, default=23400)
        sp.add_argument("--seed", type=int, default=0)
    subs["simulate"].add_argument("--out-dir", default=".")
    subs["simulate"].add_argument("--session-seconds", type=float, default=SESSION_SECONDS)
    sp = subs["mc"]
    sp.add_argument("--reps", type=int, default=300)
    sp.add_argument("--format", choices=("csv", "text", "json"), default="text")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--theta", type=float, default=DEFAULT_THETA)
    sp.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    sp.add_argument("--estimators", default=",".join(ESTIMATORS))
    sp.add_argument("--out", help="write the table here instead of stdout")
    return p, subs


def parse_args(argv=None) -> argparse.Namespace:
    parser, subs = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        config = read_config(args.config)
        sp = subs[args.command]
        if "lambda" in config:
            config["lam"] = config.pop("lambda")
        unknown = set(config) - {a.dest for a in sp._actions}
        if unknown:
            raise CliError(f"unknown config keys for {args.command}: {sorted(unknown)}")
        # string defaults go through each option's type converter
        sp.set_defaults(**config)
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        result = args.func(args)
        text = result if isinstance(result, str) else json.dumps(result, indent=2) + "\n"
        out = getattr(args, "out", None)
        if out:
            Path(out).write_text(text)
        else:
            sys.stdout.write(text)
        return 0
    except SystemExit:
        raise
    except Exception as exc:
        body = {"error": type(exc).__name__, "message": str(exc)}
        for attr in ("master_seed", "rep"):
            if hasattr(exc, attr):
                body[attr] = getattr(exc, attr)
        sys.stderr.write(json.dumps(body) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
