"""Monte Carlo driver: simulate, estimate, compare with ground truth, tabulate."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .avar import integrated_avar
from .estimators import (
    DEFAULT_THETA,
    bipower_covariation,
    hy_estimate,
    pair_design,
    rv_minus_bpv,
    subsampled_bpv,
)
from .simulate import (
    SimOutput,
    SimScenario,
    inject_common_jump,
    replication_rng,
    simulate,
    simulate_brownian_pair,
)
from .threshold import DEFAULT_EPSILON, plut_rule

ESTIMATORS = ("PTHY", "BPV", "PHY-PTHY", "RV-BPV")
IC_TARGETS = ("[X1]", "[X1,X2]", "[X2]")
JV_TARGETS = ("JV11", "JV12", "JV22")
TARGETS = {"PTHY": IC_TARGETS, "BPV": IC_TARGETS, "PHY-PTHY": JV_TARGETS, "RV-BPV": JV_TARGETS}


class ReplicationError(RuntimeError):
    def __init__(self, master_seed: int, rep: int, cause: BaseException):
        super().__init__(f"replication {rep} (master seed {master_seed}) failed: {cause!r}")
        self.master_seed = master_seed
        self.rep = rep


@dataclass(frozen=True)
class McTableRow:
    model: int
    jumps: str
    lam: tuple[float, float]
    target: str
    estimator: str
    bias: float
    rmse: float
    reps: int
    se: float  # Monte Carlo standard error of the bias


def _pairs(out: SimOutput):
    a, b = out.ticks1, out.ticks2
    return ((a, a), (a, b), (b, b))


def _truth(m: np.ndarray) -> np.ndarray:
    return np.array([m[0, 0], m[0, 1], m[1, 1]])


def replication_errors(
    scn: SimScenario,
    rep: int,
    estimators=ESTIMATORS,
    theta: float = DEFAULT_THETA,
    epsilon: float = DEFAULT_EPSILON,
) -> dict[str, np.ndarray]:
    """Errors (estimate minus truth, normalized) of each estimator for one replication."""
    out = simulate(scn, replication_rng(scn.seed, rep))
    rule = plut_rule(epsilon)
    ic, jv = _truth(out.true_ic), _truth(out.true_jv)
    res = {}
    if {"PTHY", "PHY-PTHY"} & set(estimators):
        designs = [pair_design(x, y, theta) for x, y in _pairs(out)]
        trunc = np.array([hy_estimate(d, rule, rule).value for d in designs])
        if "PTHY" in estimators:
            res["PTHY"] = trunc - ic
        if "PHY-PTHY" in estimators:
            full = np.array([hy_estimate(d).value for d in designs])
            res["PHY-PTHY"] = full - trunc - jv
    a, b = out.ticks1, out.ticks2
    if "BPV" in estimators:
        res["BPV"] = np.array([subsampled_bpv(a), bipower_covariation(a, b), subsampled_bpv(b)]) - ic
    if "RV-BPV" in estimators:
        res["RV-BPV"] = np.array([rv_minus_bpv(a), rv_minus_bpv(a, b), rv_minus_bpv(b)]) - jv
    return {k: v / scn.normalization for k, v in res.items()}


def _run_one(args):
    scn, rep, estimators, theta, epsilon = args
    try:
        return replication_errors(scn, rep, estimators, theta, epsilon)
    except Exception as exc:  # re-raised with the seed attached
        raise ReplicationError(scn.seed, rep, exc) from exc


def _map_reps(fn, jobs, workers: int):
    if workers <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def mc_errors(
    scn: SimScenario,
    reps: int,
    estimators=ESTIMATORS,
    workers: int = 1,
    theta: float = DEFAULT_THETA,
    epsilon: float = DEFAULT_EPSILON,
) -> dict[str, np.ndarray]:
    """Error matrices (reps x 3) per estimator, in replication order."""
    if reps < 1:
        raise ValueError("reps must be at least 1")
    estimators = tuple(estimators)
    if not estimators:
        raise ValueError("empty estimator set")
    unknown = set(estimators) - set(ESTIMATORS)
    if unknown:
        raise ValueError(f"unknown estimators {sorted(unknown)}")
    jobs = [(scn, r, estimators, theta, epsilon) for r in range(reps)]
    per_rep = _map_reps(_run_one, jobs, workers)
    return {e: np.vstack([p[e] for p in per_rep]) for e in estimators}


def summarize(scn: SimScenario, errors: dict[str, np.ndarray]) -> list[McTableRow]:
    rows = []
    for est, err in errors.items():
        reps = err.shape[0]
        for k, target in enumerate(TARGETS[est]):
            e = err[:, k]
            bias = float(np.mean(e))
            rmse = float(np.sqrt(np.mean(e * e)))
            se = float(np.std(e, ddof=1) / math.sqrt(reps)) if reps > 1 else float("nan")
            rows.append(McTableRow(scn.model, scn.jumps, scn.lam, target, est, bias, rmse, reps, se))
    return rows


def run_mc(
    scn: SimScenario,
    reps: int = 300,
    estimators=ESTIMATORS,
    workers: int = 1,
    theta: float = DEFAULT_THETA,
    epsilon: float = DEFAULT_EPSILON,
) -> list[McTableRow]:
    """Bias and rmse of each estimator/target over ``reps`` replications.

    Replication ``r`` draws from a stream keyed by ``(scn.seed, r)``, so the
    output does not depend on ``workers``.
    """
    return summarize(scn, mc_errors(scn, reps, estimators, workers, theta, epsilon))


def _coverage_one(args):
    scn, rep, level, theta = args
    try:
        out = simulate(scn, replication_rng(scn.seed, rep))
        report = integrated_avar(out.ticks1, out.ticks2, theta=theta, level=level)
    except Exception as exc:
        raise ReplicationError(scn.seed, rep, exc) from exc
    lo, hi = report.ci
    return lo <= out.true_ic[0, 1] <= hi


def run_coverage(scn: SimScenario, reps: int = 300, level: float = 0.95, workers: int = 1, theta: float = DEFAULT_THETA) -> float:
    """Empirical coverage of the feasible CI for the integrated covariance."""
    hits = _map_reps(_coverage_one, [(scn, r, level, theta) for r in range(reps)], workers)
    return float(np.mean(hits))


# --- tables ------------------------------------------------------------------


def format_number(x: float, minus: str = "−") -> str:
    """Three decimals without the leading zero: ``-0.003 -> '-.003'``."""
    s = f"{abs(x):.3f}"
    if s.startswith("0"):
        s = s[1:]
    return (minus if x < 0 else "") + s


def format_cell(bias: float, rmse: float, minus: str = "−") -> str:
    return f"{format_number(bias, minus)} ({format_number(rmse, minus)})"


def _lam_str(lam) -> str:
    return "(" + ",".join(f"{v:g}" for v in lam) + ")"


def emit_table(rows: list[McTableRow], fmt: str = "text") -> str:
    if not rows:
        raise ValueError("no rows to emit")
    if fmt == "json":
        return json.dumps([asdict(r) for r in rows], indent=2)
    header = ["model", "jumps", "lambda", "estimator", "target", "bias", "rmse", "reps", "cell"]
    lines = [
        [str(r.model), r.jumps.upper(), _lam_str(r.lam), r.estimator, r.target,
         repr(r.bias), repr(r.rmse), str(r.reps), format_cell(r.bias, r.rmse, "-" if fmt == "csv" else "−")]
        for r in rows
    ]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(lines)
        return buf.getvalue()
    if fmt == "text":
        header = [h for h in header if h not in ("bias", "rmse")]
        lines = [l[:5] + l[7:] for l in lines]
        widths = [max(len(h), *(len(l[k]) for l in lines)) for k, h in enumerate(header)]
        fmt_line = lambda cells: "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
        return "\n".join([fmt_line(header)] + [fmt_line(l) for l in lines]) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


# --- property experiments ----------------------------------------------------


def _consistency_one(args):
    seed, rep, n, corr, theta = args
    out = simulate_brownian_pair(n, corr, replication_rng(seed, rep))
    design = pair_design(out.ticks1, out.ticks2, theta)
    rule = plut_rule()
    return hy_estimate(design).value, hy_estimate(design, rule, rule).value


def run_consistency(
    reps: int = 200, n: int = 23400, corr: float = 0.5, seed: int = 0, workers: int = 1, theta: float = DEFAULT_THETA
) -> dict[str, np.ndarray]:
    """PHY and PTHY on a synchronous, noiseless Brownian pair (true IC = ``corr``)."""
    vals = np.array(_map_reps(_consistency_one, [(seed, r, n, corr, theta) for r in range(reps)], workers))
    return {"PHY": vals[:, 0], "PTHY": vals[:, 1], "truth": corr}


def _injection_one(args):
    scn, rep, size, at, theta = args
    rng = replication_rng(scn.seed, rep)
    out = inject_common_jump(simulate(scn, rng), size, rng, at)
    design = pair_design(out.ticks1, out.ticks2, theta)
    rule = plut_rule()
    jump = hy_estimate(design).value - hy_estimate(design, rule, rule).value
    return jump, out.true_jv[0, 1]


def run_jump_injection(
    scn: SimScenario,
    size,
    reps: int = 100,
    at: float | None = 0.5,
    workers: int = 1,
    theta: float = DEFAULT_THETA,
) -> dict[str, np.ndarray]:
    """PHY minus PTHY against the product of one injected co-jump of sizes ``size``.

    ``at=None`` draws the jump time uniformly in each replication.
    """
    if scn.jumps != "no":
        raise ValueError("inject into a jump-free scenario")
    jobs = [(scn, r, size, at, theta) for r in range(reps)]
    vals = np.array(_map_reps(_injection_one, jobs, workers))
    return {"estimate": vals[:, 0], "truth": vals[:, 1]}
