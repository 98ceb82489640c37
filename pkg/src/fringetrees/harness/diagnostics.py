"""Finite-size proxies for the regularity conditions on a sequence of degree
statistics: convergence of the empirical degree law, bounded second moment,
span, and that no single degree takes almost all vertices."""
import math
from functools import reduce

from .. import approx


def _law(bn):
    n = bn.size
    return {d: m / n for d, m in bn.items}


def _span(degrees):
    if len(degrees) == 1:
        return "infinite"
    base = degrees[0]
    return reduce(math.gcd, (d - base for d in degrees[1:]))


def limit_support(statistics, vanish=0.01):
    """Degrees presumed to carry mass in the limit law: all degrees seen,
    minus those whose proportion is nonincreasing along the sequence and
    ends below ``vanish``."""
    laws = [_law(bn) for bn in statistics]
    keep = []
    for d in sorted(set().union(*laws)):
        seq = [p.get(d, 0.0) for p in laws]
        fading = all(b <= a for a, b in zip(seq, seq[1:])) and seq[-1] < vanish
        if not fading:
            keep.append(d)
    return keep


def condition_diagnostics(statistics, vanish=0.01):
    """One row per statistic.

    ``supDiffToLast`` is ``sup_i |p_i(n) - p_i(n_last)|``, the last entry
    standing in for the limit law. ``secondMoment`` is ``sum i^2 p_i(n)``,
    ``variance`` the variance of the empirical degree law, ``maxProbability``
    the largest ``p_i(n)``. ``limitSpan`` is the span of ``limit_support``,
    the same on every row.
    """
    if not statistics:
        raise ValueError("need at least one statistic")
    last = _law(statistics[-1])
    lim_span = _span(limit_support(statistics, vanish))
    rows = []
    for bn in statistics:
        p = _law(bn)
        keys = set(p) | set(last)
        sup = max(abs(p.get(k, 0.0) - last.get(k, 0.0)) for k in keys)
        mean = math.fsum(d * w for d, w in p.items())
        second = math.fsum(d * d * w for d, w in p.items())
        rows.append(
            {
                "n": bn.size,
                "supDiffToLast": sup,
                "secondMoment": second,
                "variance": second - mean * mean,
                "span": _span(sorted(p)),
                "maxProbability": max(p.values()),
                "limitSpan": lim_span,
            }
        )
    return rows


def statistic_diagnostics(bn, draw_sizes, eps=0.1):
    """Span and spread of one statistic, and the Lindeberg ratio for each
    number of draws ``m`` with ``0 < m < |n|``."""
    row = condition_diagnostics([bn])[0]
    del row["supDiffToLast"]
    lind = {}
    if len(bn.items) > 1:
        d = bn.multiset()
        for m in sorted(set(draw_sizes)):
            if 0 < m < bn.size:
                lind[str(m)] = approx.lindeberg_diagnostic(d, m, eps)
    row["lindeberg"] = lind
    row["lindebergEps"] = eps
    return row
