"""Brute-force ground truth.

Everything here is deliberately naive and independent of :mod:`kernels`:
trees are enumerated by backtracking, fringe windows are found by walking
forward from each vertex, and sums drawn without replacement are counted
with an integer dynamic program over subsets. The rest of the package is
tested against these routines.
"""
import itertools
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .errors import BudgetExceeded, CountOutOfRange, LimitExceeded, SizeOutOfRange
from .exactstats import ExactScalar
from .treecore import DegreeStatistic, PlaneTree, count_trees

DEFAULT_LIMIT = 1_000_000
DEFAULT_DP_BUDGET = 2_000_000
MAX_BLOCKS = 3
MAX_DISTINCT_VALUES = 12
DEFAULT_PROFILE_BUDGET = 200_000


@dataclass(frozen=True)
class EnumerationResult:
    trees: tuple
    statistic: DegreeStatistic
    cardinality: int

    def to_lines(self):
        """Newline-delimited canonical degree sequences."""
        return "".join(f"{t}\n" for t in self.trees)


def _backtrack(avail, n, prefix, open_slots, out):
    # open_slots = 1 + sum(d_i - 1) over placed entries; must stay >= 1
    # until the last vertex closes the tree.
    k = len(prefix)
    if k == n:
        if open_slots == 0:
            out.append(tuple(prefix))
        return
    for deg in sorted(avail):
        if avail[deg] == 0:
            continue
        slots = open_slots + deg - 1
        if slots < 0 or (slots == 0 and k + 1 < n):
            continue
        avail[deg] -= 1
        prefix.append(deg)
        _backtrack(avail, n, prefix, slots, out)
        prefix.pop()
        avail[deg] += 1


def enumerate_trees(bn, limit=DEFAULT_LIMIT):
    """All plane trees with statistic ``bn``, lexicographic in the DFS sequence."""
    total = count_trees(bn)
    if total > limit:
        raise LimitExceeded(f"{total} trees exceed the enumeration limit {limit}")
    seqs = []
    _backtrack(dict(bn.items), bn.size, [], 1, seqs)
    return EnumerationResult(tuple(PlaneTree(s) for s in seqs), bn, len(seqs))


def statistics_of_size(size):
    """Every degree statistic with ``size`` vertices (partitions of ``size - 1``)."""
    out = []
    for parts in _partitions(size - 1, size - 1):
        counts = Counter(parts)
        counts[0] = size - len(parts)
        out.append(DegreeStatistic(counts))
    return sorted(out, key=lambda s: s.items)


def _partitions(total, largest):
    if total == 0:
        yield ()
        return
    for first in range(min(total, largest), 0, -1):
        for rest in _partitions(total - first, first):
            yield (first,) + rest


def trees_of_size(size):
    """All plane trees with ``size`` vertices."""
    out = []
    for stat in statistics_of_size(size):
        out.extend(enumerate_trees(stat).trees)
    return sorted(out, key=lambda t: tuple(t.degrees.tolist()))


# ---------------------------------------------------------------------------
# naive fringe windows


def fringe_windows(d):
    """Tuple of every fringe window, found by walking forward from each vertex."""
    d = [int(x) for x in d]
    out = []
    for j in range(len(d)):
        need, k = 1, j
        while need:
            need += d[k] - 1
            k += 1
        out.append(tuple(d[j:k]))
    return out


def _naive_count(tree, counter):
    windows = fringe_windows(tree.degrees)
    if isinstance(counter, PlaneTree):
        key = tuple(counter.degrees.tolist())
        return sum(w == key for w in windows)
    if isinstance(counter, DegreeStatistic):
        want = counter.as_dict()
        return sum(len(w) == counter.size and Counter(w) == want for w in windows)
    m = int(counter)
    return sum(len(w) == m for w in windows)


def exact_count_distribution(bn, counter, limit=DEFAULT_LIMIT):
    """Exact law of ``N`` over uniform trees with statistic ``bn``.

    ``counter`` is a target tree, a target statistic, or an integer size.
    """
    trees = enumerate_trees(bn, limit).trees
    tally = Counter(_naive_count(t, counter) for t in trees)
    total = len(trees)
    return {k: Fraction(v, total) for k, v in sorted(tally.items())}


def exact_factorial_moment(pmf, q):
    """``E (N)_q`` of an exact pmf."""
    out = Fraction(0)
    for k, w in pmf.items():
        f = 1
        for j in range(q):
            f *= k - j
        out += f * w
    return out


# ---------------------------------------------------------------------------
# sums drawn without replacement


def _grouped(d):
    vals, counts = np.unique(np.asarray(d, dtype=np.int64), return_counts=True)
    return vals.tolist(), counts.tolist()


def _exact_work(vals, counts, m):
    width = m * (max(vals) - min(vals)) + 1
    return sum((m + 1) * width * (min(c, m) + 1) for c in counts)


def swor_sum_pmf(d, m, budget=None, exact=None):
    """Law of the sum of ``m`` entries of ``d`` drawn without replacement.

    Exact rationals come from counting subsets with an integer DP over the
    distinct values; if the estimated work exceeds ``budget`` (or
    ``exact=False``) the float hypergeometric DP is used instead. With
    ``exact=True`` an over-budget input raises :class:`BudgetExceeded`.
    """
    d = np.asarray(d, dtype=np.int64)
    if not 0 <= m <= d.size:
        raise CountOutOfRange(f"cannot draw {m} from {d.size} items")
    if m == 0:
        return {0: Fraction(1)}
    vals, counts = _grouped(d)
    budget = DEFAULT_DP_BUDGET if budget is None else budget
    work = _exact_work(vals, counts, m)
    if exact is None:
        exact = work <= budget
    elif exact and work > budget:
        raise BudgetExceeded(f"exact DP needs ~{work} steps, budget {budget}")
    if exact:
        return _swor_exact(vals, counts, m)
    offset, probs = swor_sum_pmf_array(d, m)
    nz = np.flatnonzero(probs)
    return {int(offset + k): float(probs[k]) for k in nz}


def _swor_exact(vals, counts, m):
    states = {(0, 0): 1}
    for v, c in zip(vals, counts):
        binoms = [math.comb(c, t) for t in range(min(c, m) + 1)]
        nxt = defaultdict(int)
        for (j, s), w in states.items():
            for t in range(min(c, m - j) + 1):
                nxt[(j + t, s + v * t)] += w * binoms[t]
        states = nxt
    total = math.comb(sum(counts), m)
    return {s: Fraction(w, total) for (j, s), w in sorted(states.items()) if j == m and w}


def swor_sum_pmf_array(d, m):
    """Float law of the without-replacement sum as ``(offset, probs)``.

    ``probs[k]`` is the probability that the sum equals ``offset + k``.
    """
    d = np.asarray(d, dtype=np.int64)
    if not 0 <= m <= d.size:
        raise CountOutOfRange(f"cannot draw {m} from {d.size} items")
    vals, counts = np.unique(d, return_counts=True)
    lo = int(vals[0])
    if m == 0:
        return 0, np.ones(1)
    if vals.size == 1:
        return lo * m, np.ones(1)
    # the most frequent value goes last, where it is forced rather than looped
    order = np.argsort(counts, kind="stable")
    shifted = (vals[order] - lo).astype(np.int64)
    probs = kernels.swor_dp(shifted, counts[order].astype(np.int64), m, kernels.log_factorials(d.size))
    return lo * m, probs


def swor_sum_pmf_bruteforce(d, m):
    """Exact law by listing every ``m``-subset of positions."""
    d = list(d)
    tally = Counter(sum(c) for c in itertools.combinations(d, m))
    total = math.comb(len(d), m)
    return {k: Fraction(v, total) for k, v in sorted(tally.items())}


# ---------------------------------------------------------------------------
# joint block events


def _profiles(vals, avail, m, target, budget):
    # value profiles (t_v) with sum t_v = m and sum v t_v = target
    out = []
    nv = len(vals)
    lo, hi = min(vals), max(vals)

    def rec(i, left, need, prof):
        if len(out) > budget:
            raise BudgetExceeded("too many block profiles")
        if i == nv:
            if left == 0 and need == 0:
                out.append(tuple(prof))
            return
        # remaining draws must be able to reach the needed sum
        if need < left * lo or need > left * hi:
            return
        v = vals[i]
        for t in range(min(avail[i], left) + 1):
            if v * t > need:
                break
            prof.append(t)
            rec(i + 1, left - t, need - v * t, prof)
            prof.pop()

    rec(0, m, target, [])
    return out


def joint_block_probability(bn, m, r, budget=None):
    """Probability that ``r`` fixed disjoint length-``m`` blocks of a uniform
    arrangement of the degrees of ``bn`` each sum to ``m - 1``.

    Conditions block by block: the first block is a uniform ``m``-subset, and
    given its value profile the rest is a uniform arrangement of what is left.
    """
    if r < 1 or r > MAX_BLOCKS:
        raise BudgetExceeded(f"block count {r} outside 1..{MAX_BLOCKS}")
    if m < 1 or r * m > bn.size:
        raise SizeOutOfRange(f"{r} blocks of size {m} exceed {bn.size}")
    vals = list(bn.support)
    if len(vals) > MAX_DISTINCT_VALUES:
        raise BudgetExceeded(f"more than {MAX_DISTINCT_VALUES} distinct degrees")
    budget = DEFAULT_PROFILE_BUDGET if budget is None else budget

    def prob(avail, blocks):
        if blocks == 0:
            return Fraction(1)
        total = math.comb(sum(avail), m)
        acc = Fraction(0)
        for prof in _profiles(vals, avail, m, m - 1, budget):
            w = 1
            for c, t in zip(avail, prof):
                w *= math.comb(c, t)
            rest = tuple(c - t for c, t in zip(avail, prof))
            acc += Fraction(w, total) * prob(rest, blocks - 1)
        return acc

    return ExactScalar.from_fraction(prob(tuple(bn[v] for v in vals), r))
