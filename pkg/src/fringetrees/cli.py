"""Command-line interface.

Exit codes: 0 success, 2 invalid input or configuration, 3 an oracle or DP
budget was exceeded, 4 I/O failure.
"""
import argparse
import csv
import io
import json
import math
import os
import sys

from . import approx, exactstats, oracle, samplers
from .errors import BudgetExceeded, FringeError, LimitExceeded
from .harness import config as hconfig
from .harness.diagnostics import condition_diagnostics
from .harness.report import emit_report
from .harness.runner import run_scenario
from .treecore import (
    DegreeDistribution,
    DegreeStatistic,
    PlaneTree,
    fringe_count_size,
    fringe_count_statistic,
    fringe_count_tree,
)

EXIT_OK, EXIT_CONFIG, EXIT_BUDGET, EXIT_IO = 0, 2, 3, 4


def _global_flags(parser, suppress):
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", type=int, default=default(None), help="master seed")
    parser.add_argument("--replicates", type=int, default=default(None), help="number of replicates or samples")
    parser.add_argument("--workers", type=int, default=default(1), help="worker processes for scenario runs")
    parser.add_argument("--format", choices=("json", "csv"), default=default("json"), help="output format")
    parser.add_argument("--budget", type=int, default=default(None), help="enumeration / DP budget")
    parser.add_argument("--timing", action="store_true", default=default(False), help="record wall-clock times")


def _target_flags(parser, allow_size=True):
    grp = parser.add_mutually_exclusive_group(required=True)
    grp.add_argument("--tree", help="target tree as a DFS degree sequence, e.g. 2,0,0")
    grp.add_argument("--target-statistic", help="target degree statistic, e.g. 0:2,2:1")
    if allow_size:
        grp.add_argument("--size", type=int, help="target fringe size")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    parser = argparse.ArgumentParser(prog="fringetrees", description=__doc__.splitlines()[0])
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", parents=[common], help="draw random trees")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--statistic", help="degree statistic, e.g. 0:3,1:1,3:1")
    src.add_argument("--offspring", help="offspring pmf for a conditioned GW tree, e.g. 0:0.5,2:0.5")
    p.add_argument("--size", type=int, help="tree size for --offspring")

    p = sub.add_parser("count", parents=[common], help="fringe counts in a given tree")
    p.add_argument("--host", required=True, help="host tree as a DFS degree sequence")
    _target_flags(p)

    p = sub.add_parser("moments", parents=[common], help="exact factorial moments")
    p.add_argument("--statistic", required=True)
    _target_flags(p)
    p.add_argument("--order", type=int, default=1)

    p = sub.add_parser("bounds", parents=[common], help="Poisson approximation bound quantities")
    p.add_argument("--statistic", required=True)
    _target_flags(p, allow_size=False)

    p = sub.add_parser("enumerate", parents=[common], help="list every tree with a statistic")
    p.add_argument("--statistic", required=True)

    p = sub.add_parser("llt", parents=[common], help="exact sum-without-replacement law vs Gaussian")
    p.add_argument("--statistic", required=True)
    p.add_argument("--draws", type=int, required=True)
    p.add_argument("--width", type=float, default=6.0, help="half-width in standard deviations")

    p = sub.add_parser("scenario", parents=[common], help="run or list scenarios")
    ssub = p.add_subparsers(dest="action", required=True)
    r = ssub.add_parser("run", parents=[common], help="run a scenario file or built-in name")
    r.add_argument("config")
    r.add_argument("--out", help="write the report here instead of stdout")
    ssub.add_parser("list", parents=[common], help="list built-in scenarios")

    p = sub.add_parser("diagnose", parents=[common], help="regularity diagnostics")
    grp = p.add_mutually_exclusive_group(required=True)
    grp.add_argument("--statistic", nargs="+")
    grp.add_argument("--scenario")
    return parser


# ---------------------------------------------------------------------------


def _write(text, out=None):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _rows_out(rows, columns, fmt):
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow(["" if row.get(c) is None else row.get(c) for c in columns])
    return buf.getvalue()


def _parse_target(args):
    if args.tree is not None:
        return PlaneTree.parse(args.tree)
    if args.target_statistic is not None:
        return DegreeStatistic.parse(args.target_statistic)
    return int(args.size)


def cmd_sample(args):
    reps = args.replicates or 1
    seed = args.seed or 0
    rows = []
    if args.statistic:
        bn = DegreeStatistic.parse(args.statistic)
        draw = lambda s: samplers.sample_uniform_tree(bn, s)
    else:
        if args.size is None:
            raise FringeError("--offspring needs --size")
        p = DegreeDistribution(hconfig._parse_pmf(args.offspring))
        draw = lambda s: samplers.sample_conditioned_gw(p, args.size, s)
    for r in range(reps):
        rows.append({"replicate": r, "tree": str(draw(samplers.RandomStream(seed, r)))})
    return _rows_out(rows, ["replicate", "tree"], args.format)


def cmd_count(args):
    host = PlaneTree.parse(args.host)
    tgt = _parse_target(args)
    if isinstance(tgt, PlaneTree):
        c = fringe_count_tree(host, tgt)
    elif isinstance(tgt, DegreeStatistic):
        c = fringe_count_statistic(host, tgt)
    else:
        c = fringe_count_size(host, tgt)
    row = {"host": str(host), "target": str(tgt), "count": c}
    return _rows_out([row], ["host", "target", "count"], args.format)


def cmd_moments(args):
    bn = DegreeStatistic.parse(args.statistic)
    tgt = _parse_target(args)
    if isinstance(tgt, PlaneTree):
        rep = exactstats.factorial_moment_tree(bn, tgt, args.order)
    elif isinstance(tgt, DegreeStatistic):
        rep = exactstats.factorial_moment_statistic(bn, tgt, args.order)
    else:
        rep = exactstats.factorial_moment_size(bn, tgt, args.order, budget=args.budget)
    row = rep.to_dict()
    return _rows_out([row], list(row), args.format)


def cmd_bounds(args):
    bn = DegreeStatistic.parse(args.statistic)
    tgt = _parse_target(args)
    rep = approx.stein_delta(bn, tgt) if isinstance(tgt, PlaneTree) else approx.statistic_tv_bound(bn, tgt)
    row = rep.to_dict()
    row["notes"] = "|".join(row["notes"]) if args.format == "csv" else row["notes"]
    return _rows_out([row], list(row), args.format)


def cmd_enumerate(args):
    bn = DegreeStatistic.parse(args.statistic)
    limit = args.budget or oracle.DEFAULT_LIMIT
    res = oracle.enumerate_trees(bn, limit)
    if args.format == "json":
        return json.dumps({"statistic": str(bn), "cardinality": res.cardinality, "trees": [str(t) for t in res.trees]}, indent=2) + "\n"
    return res.to_lines()


def cmd_llt(args):
    bn = DegreeStatistic.parse(args.statistic)
    d = bn.multiset()
    m = args.draws
    offset, probs = oracle.swor_sum_pmf_array(d, m)
    _, mu, s2 = approx.llt_prediction(d, m, 0)
    s = math.sqrt(s2)
    lo = max(offset, math.ceil(mu - args.width * s))
    hi = min(offset + probs.size - 1, math.floor(mu + args.width * s))
    rows = []
    for k in range(lo, hi + 1):
        exact = float(probs[k - offset])
        pred = approx.llt_prediction(d, m, k)[0]
        rows.append({"k": k, "exact": exact, "predicted": pred, "scaledError": math.sqrt(2 * math.pi * s2) * abs(exact - pred)})
    if args.format == "json":
        sup = max((r["scaledError"] for r in rows), default=0.0)
        return json.dumps({"muHat": mu, "sigmaHat2": s2, "supScaledError": sup, "rows": rows}, indent=2) + "\n"
    return _rows_out(rows, ["k", "exact", "predicted", "scaledError"], "csv")


def _load_scenario(ref):
    if os.path.exists(ref):
        return hconfig.load_config(ref)
    return hconfig.load_builtin(ref)


def cmd_scenario(args):
    if args.action == "list":
        names = hconfig.builtin_names()
        return "".join(f"{n}\n" for n in names)
    cfg = _load_scenario(args.config).with_overrides(replicates=args.replicates, seed=args.seed)
    report = run_scenario(cfg, workers=max(1, args.workers), record_timing=args.timing, budget=args.budget)
    text = emit_report(report, args.format)
    _write(text, args.out)
    return ""


def cmd_diagnose(args):
    if args.statistic:
        stats = [DegreeStatistic.parse(s) for s in args.statistic]
    else:
        cfg = _load_scenario(args.scenario)
        if cfg.family == "GWConditioned":
            raise FringeError("diagnostics need a degree-statistic scenario")
        stats = [hconfig.build_statistic(cfg.law, n) for n in cfg.grid]
    rows = condition_diagnostics(stats)
    return _rows_out(rows, list(rows[0]), args.format)


COMMANDS = {
    "sample": cmd_sample,
    "count": cmd_count,
    "moments": cmd_moments,
    "bounds": cmd_bounds,
    "enumerate": cmd_enumerate,
    "llt": cmd_llt,
    "scenario": cmd_scenario,
    "diagnose": cmd_diagnose,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        text = COMMANDS[args.command](args)
        if text:
            _write(text)
    except (BudgetExceeded, LimitExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except FringeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
