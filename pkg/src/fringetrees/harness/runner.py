"""Monte Carlo runner.

Replicate ``r`` of grid point ``i`` draws everything from
``RandomStream(seed, r, path=(i,))``, and results are merged in replicate
order, so a report depends only on the configuration, never on how the
replicates were spread over workers.
"""
import math
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import numpy as np

from .. import approx, exactstats, kernels, oracle
from .._accel import BACKEND
from ..errors import BudgetExceeded, FringeError, LimitExceeded, PrecisionLoss
from ..samplers import RandomStream, sample_gw_sequence
from ..treecore import count_trees, cycle_rotate, empirical_distribution
from .config import build_point, config_from_dict
from .diagnostics import condition_diagnostics, statistic_diagnostics

REPORT_VERSION = 1
# float DP cells allowed when attaching exact size expectations
SIZE_DP_CELLS = 20_000_000
# largest host for which the exact size variance is attempted
SIZE_VARIANCE_MAX_N = 200


def _draw_sequence(point, gen):
    if point.statistic is not None:
        return cycle_rotate(gen.permutation(point.statistic.multiset()))
    return sample_gw_sequence(point.offspring, point.n, gen)


def replicate_counts(point, seed, r):
    """Counts for every target of ``point`` on replicate ``r``, plus a uniform
    jitter in (-1/2, 1/2) drawn after them from the same stream."""
    gen = RandomStream(seed, r, path=(point.index,)).generator
    out = np.empty(len(point.targets), dtype=np.int64)
    if point.targets[0].kind == "draws":
        multiset = point.statistic.multiset()
        for j, tgt in enumerate(point.targets):
            out[j] = int(gen.choice(multiset, size=tgt.size, replace=False).sum())
        return out, float(gen.random() - 0.5)
    d = _draw_sequence(point, gen)
    sizes = kernels.fringe_sizes(d)
    for j, tgt in enumerate(point.targets):
        if tgt.kind == "size":
            out[j] = int(np.count_nonzero(sizes == tgt.size))
        elif tgt.kind == "tree":
            out[j] = kernels.count_tree_windows(d, sizes, tgt.tree.degrees.copy())
        else:
            s = tgt.statistic
            degs = np.array(s.support, dtype=np.int64)
            cnts = np.array([m for _, m in s.items], dtype=np.int64)
            out[j] = kernels.count_statistic_windows(d, sizes, degs, cnts, s.size)
    return out, float(gen.random() - 0.5)


def _chunk(args):
    cfg_dict, index, start, stop = args
    cfg = config_from_dict(cfg_dict)
    point = build_point(cfg, cfg.grid[index], index)
    counts = np.empty((stop - start, len(point.targets)), dtype=np.int64)
    jitter = np.empty(stop - start)
    for r in range(start, stop):
        counts[r - start], jitter[r - start] = replicate_counts(point, cfg.seed, r)
    return counts, jitter


def _simulate(cfg, point, pool, workers):
    reps = cfg.replicates
    if pool is None:
        counts = np.empty((reps, len(point.targets)), dtype=np.int64)
        jitter = np.empty(reps)
        for r in range(reps):
            counts[r], jitter[r] = replicate_counts(point, cfg.seed, r)
        return counts, jitter
    nchunks = min(reps, workers * 4)
    bounds = np.linspace(0, reps, nchunks + 1).astype(int)
    cfg_dict = cfg.to_dict()
    jobs = [(cfg_dict, point.index, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    parts = list(pool.map(_chunk, jobs))  # map preserves job order
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def run_scenario(cfg, workers=1, record_timing=False, budget=None):
    """Run every grid point of ``cfg`` and return the report as a plain dict."""
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        points = []
        for i, n in enumerate(cfg.grid):
            t0 = time.perf_counter()
            point = build_point(cfg, n, i)
            counts, jitter = _simulate(cfg, point, pool, workers)
            entry = _summarize_point(cfg, point, counts, jitter, budget)
            if record_timing:
                entry["wallTimeSeconds"] = round(time.perf_counter() - t0, 6)
            points.append(entry)
    finally:
        if pool is not None:
            pool.shutdown()
    report = {
        "reportVersion": REPORT_VERSION,
        "scenario": cfg.name,
        "family": cfg.family,
        "config": cfg.to_dict(),
        "seed": {
            "masterSeed": cfg.seed,
            "streams": "replicate r of grid point i uses RandomStream(masterSeed, r, path=(i,))",
        },
        "points": points,
        "conditions": _conditions(cfg),
        "regime": _regime(cfg),
    }
    if cfg.expect is not None:
        report["expect"] = cfg.expect
    if record_timing:
        report["backend"] = BACKEND
    return _clean(report)


# ---------------------------------------------------------------------------
# per-point summaries


def _summarize_point(cfg, point, counts, jitter, budget):
    entry = {"index": point.index, "n": point.n}
    if point.statistic is not None:
        entry["statistic"] = _short_statistic(point.statistic)
        entry["diagnostics"] = statistic_diagnostics(point.statistic, [t.size for t in point.targets])
    else:
        p = point.offspring
        entry["offspring"] = {
            "mean": float(p.mean),
            "variance": float(p.variance),
            "span": _span_json(p.span),
            "supportSize": int(p.support.size),
            "maxDegree": int(p.support[-1]),
        }
        if cfg.law["kind"] == "power_tail":
            entry["offspring"]["alpha"] = float(cfg.law.get("alpha", 1.5))
            entry["offspring"]["truncation"] = int(cfg.law.get("truncation", 10**6))
    entry["targets"] = [
        _summarize_target(cfg, point, tgt, counts[:, j], jitter, budget)
        for j, tgt in enumerate(point.targets)
    ]
    return entry


def _short_statistic(bn):
    text = str(bn)
    return text if len(text) <= 200 else f"<{len(bn.items)} degrees, size {bn.size}>"


def _span_json(span):
    return "infinite" if math.isinf(span) else int(span)


def _summarize_target(cfg, point, tgt, values, jitter, budget):
    reps = values.size
    keys, freq = np.unique(values, return_counts=True)
    hist = {int(k): int(c) for k, c in zip(keys, freq)}
    emp_mean = float(values.mean())
    emp_var = float(values.var(ddof=1)) if reps > 1 else 0.0
    out = {
        "target": tgt.label,
        "targetSize": tgt.size,
        "replicates": reps,
        "histogram": {str(k): v for k, v in hist.items()},
        "empiricalMean": emp_mean,
        "empiricalVariance": emp_var,
    }
    flags = []
    exact_mean, exact_var = _exact_moments(point, tgt, flags, budget)
    out["exactMean"] = exact_mean
    out["exactVariance"] = exact_var
    pred = _prediction(cfg, point, tgt, exact_mean, flags)
    out["prediction"] = pred
    lam = pred.get("lambda")
    if lam is not None and tgt.kind != "draws":
        out["tvPoisson"] = approx.tv_distance(hist, lambda k: approx.poisson_pmf(lam, k))
        if pred.get("latticeLambda") is not None:
            lat = pred["latticeLambda"]
            out["tvPoissonLattice"] = approx.tv_distance(hist, lambda k: approx.poisson_pmf(lat, k))
    mu = exact_mean if exact_mean is not None else emp_mean
    var = exact_var if exact_var is not None else emp_var
    if var and var > 0 and reps > 1:
        z = (values + jitter - mu) / math.sqrt(var + 1.0 / 12.0)
        out["ksStatistic"], out["ksPvalue"] = approx.ks_normal(z)
    if exact_mean is not None and exact_var is not None and reps > 1:
        out["meanWithin5SE"] = bool(abs(emp_mean - exact_mean) <= 5 * math.sqrt(max(exact_var, 0)) / math.sqrt(reps) + 1e-12)
    if point.statistic is not None and tgt.kind in ("tree", "statistic"):
        out["bounds"] = _bounds(point, tgt, flags)
    if tgt.kind == "draws":
        out["llt"] = _llt_check(point, tgt, flags)
    out["flags"] = flags
    return out


def _exact_moments(point, tgt, flags, budget):
    bn = point.statistic
    if bn is None:
        flags.append("no-exact-moments-for-gw")
        return None, None
    try:
        if tgt.kind == "draws":
            mo = approx.swor_moments(bn.multiset(), tgt.size)
            return mo.mean, mo.variance
        if tgt.kind == "size":
            return _exact_size_moments(bn, tgt.size, flags, budget)
        if tgt.kind == "tree":
            m1 = exactstats.factorial_moment_tree(bn, tgt.tree, 1).value
            m2 = exactstats.factorial_moment_tree(bn, tgt.tree, 2).value
        else:
            m1 = exactstats.factorial_moment_statistic(bn, tgt.statistic, 1).value
            m2 = exactstats.factorial_moment_statistic(bn, tgt.statistic, 2).value
    except (BudgetExceeded, LimitExceeded):
        flags.append("exact-budget-exceeded")
        return None, None
    try:
        var = float(exactstats.variance_from_factorial(m1, m2))
    except PrecisionLoss:
        flags.append("exact-variance-unstable")
        var = None
    return float(m1), var


def _exact_size_moments(bn, m, flags, budget):
    vals = bn.support
    cells = (m + 1) * (m * (max(vals) - min(vals)) + 1)
    limit = SIZE_DP_CELLS if budget is None else budget
    if cells > limit:
        flags.append("exact-budget-exceeded")
        return None, None
    mean = float(exactstats.expected_count_size(bn, m))
    var = None
    if bn.size <= SIZE_VARIANCE_MAX_N and 2 * m <= bn.size:
        try:
            m2 = exactstats.factorial_moment_size(bn, m, 2).value
            var = float(m2) + mean - mean * mean
        except BudgetExceeded:
            flags.append("exact-variance-budget-exceeded")
    elif 2 * m > bn.size:
        var = mean - mean * mean  # at most one fringe of size m > n/2
    return mean, var


def _size_rule_a(tgt, n):
    rule = tgt.rule or {}
    exponent = Fraction(rule.get("exponent", "2/3"))
    return tgt.size / n ** float(exponent), exponent


def _sigma2(cfg, point):
    law = cfg.law
    if law["kind"] == "proportions":
        from .config import _parse_pmf

        pmf = _parse_pmf(law["p"])
        mean = sum(float(k) * float(v) for k, v in pmf.items())
        return sum((k - mean) ** 2 * float(v) for k, v in pmf.items())
    if law["kind"] == "periodic":
        return 1.0
    if point.statistic is not None:
        return float(empirical_distribution(point.statistic).variance)
    return float(point.offspring.variance)


def _prediction(cfg, point, tgt, exact_mean, flags):
    n = point.n
    if tgt.kind == "draws":
        return {"regime": "LocalLimit"}
    if tgt.kind == "size":
        a, exponent = _size_rule_a(tgt, n)
        sigma2 = _sigma2(cfg, point)
        out = {"regime": "SizePoisson" if point.statistic is not None else "GWPoisson", "a": a, "sigma2": sigma2}
        if tgt.size < n:
            out["sizeAsymptotic"] = approx.size_expectation_asymptotic(n, tgt.size, sigma2)
        if exponent == Fraction(2, 3):
            lam = approx.ts_lambda(a, sigma2)
        else:
            lam = out.get("sizeAsymptotic")
            flags.append("size-rule-not-two-thirds")
        if cfg.law["kind"] == "periodic":
            bn = point.statistic
            b = bn[1] / n ** (1 / 3)
            lam = approx.periodic_lambda(a, b, tgt.size)
            out["b"] = b
            out["parity"] = "odd" if tgt.size % 2 == 1 else "even"
            out["lambdaParity"] = approx.periodic_lambda_parity(a, b, tgt.size)
        span = point.offspring.span if point.offspring is not None else None
        if span is not None and not math.isinf(span) and span > 1:
            flags.append(f"lattice-span-{span}")
            if (tgt.size - 1) % span == 0:
                out["latticeLambda"] = span * lam
            else:
                out["latticeLambda"] = 0.0
            out["latticeSpan"] = int(span)
        out["lambda"] = lam
        return out
    stat = tgt.statistic if tgt.kind == "statistic" else tgt.tree.statistic
    cls = count_trees(stat) if tgt.kind == "statistic" else 1
    if point.statistic is not None:
        bn = point.statistic
        log_pi = _log_pi(stat, lambda d: bn[d] / bn.size)
        proxy = bn.size * cls * math.exp(log_pi) if log_pi > -math.inf else 0.0
        lam = exact_mean if exact_mean is not None else proxy
        regime = "PoissonFixed"
    else:
        log_pi = _log_pi(stat, point.offspring.prob)
        proxy = n * cls * math.exp(log_pi) if log_pi > -math.inf else 0.0
        lam = proxy
        regime = "GWPoisson"
    if lam == 0:
        flags.append("open-problem")
    return {"regime": regime, "lambda": lam, "nPi": proxy}


def _log_pi(stat, prob):
    total = 0.0
    for d, m in stat.items:
        p = float(prob(d))
        if p <= 0:
            return -math.inf
        total += m * math.log(p)
    return total


def _bounds(point, tgt, flags):
    bn = point.statistic
    try:
        if tgt.kind == "tree":
            rep = approx.stein_delta(bn, tgt.tree)
        else:
            rep = approx.statistic_tv_bound(bn, tgt.statistic)
    except (FringeError, PrecisionLoss) as exc:
        flags.append(f"bounds-unavailable:{type(exc).__name__}")
        return None
    return {
        "delta": float(rep.delta),
        "caiDevroye": rep.cai_devroye,
        "classSize": str(rep.class_size),
        "notes": list(rep.notes),
    }


def _llt_check(point, tgt, flags):
    d = point.statistic.multiset()
    m = tgt.size
    if not 0 < m < d.size:
        flags.append("llt-degenerate")
        return None
    offset, probs = oracle.swor_sum_pmf_array(d, m)
    mo = approx.swor_moments(d, m)
    s = math.sqrt(mo.sigma_hat2)
    mu = m * mo.mean_value
    lo = max(offset, math.ceil(mu - 6 * s))
    hi = min(offset + probs.size - 1, math.floor(mu + 6 * s))
    k = np.arange(lo, hi + 1)
    scaled = math.sqrt(2 * math.pi * mo.sigma_hat2) * probs[k - offset]
    gauss = np.exp(-((k - mu) ** 2) / (2 * mo.sigma_hat2))
    return {
        "muHat": mu,
        "sigmaHat2": mo.sigma_hat2,
        "supScaledError": float(np.max(np.abs(scaled - gauss))),
        "lindeberg": approx.lindeberg_diagnostic(d, m, 0.1),
        "window": [int(lo), int(hi)],
    }


# ---------------------------------------------------------------------------
# scenario-level fields


def _conditions(cfg):
    if cfg.family == "GWConditioned":
        return None
    stats = [build_point(cfg, n).statistic for n in cfg.grid]
    return condition_diagnostics(stats)


def _regime(cfg):
    first = cfg.targets[0]
    if first["kind"] == "draws":
        return {"regime": "LocalLimit", "flags": []}
    try:
        desc = {"family": "GWConditioned" if cfg.family == "GWConditioned" else "FixedStatistic"}
        points = [build_point(cfg, n, i) for i, n in enumerate(cfg.grid)]
        last = points[-1]
        tgt = last.targets[0]
        if tgt.kind == "size":
            a, _ = _size_rule_a(tgt, last.n)
            desc["target"] = {"a": a}
        else:
            per_point = [p.targets[0] for p in points]
            desc["targets"] = [t.tree if t.kind == "tree" else t.statistic for t in per_point]
            desc["target"] = desc["targets"][-1]
        if cfg.family == "GWConditioned":
            desc["offspring"] = last.offspring
            desc["sizes"] = list(cfg.grid)
        else:
            desc["statistics"] = [p.statistic for p in points]
        return approx.classify_regime(desc).to_dict()
    except FringeError as exc:
        return {"regime": None, "flags": [f"unclassified:{exc}"]}


def _clean(obj):
    """Replace non-finite floats by None and numpy scalars by Python ones."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj
