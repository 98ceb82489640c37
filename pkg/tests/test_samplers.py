import itertools
import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from conftest import CHERRY, statistics, trees
from fringetrees import kernels
from fringetrees.approx import swor_moments
from fringetrees.errors import CountOutOfRange, IncompatibleSize, InfeasibleTarget
from fringetrees.exactstats import pi_p_tree
from fringetrees.oracle import enumerate_trees, trees_of_size
from fringetrees.samplers import (
    RandomStream,
    exchangeable_pair_step,
    sample_conditioned_gw,
    sample_gw_sequence,
    sample_swor_sum,
    sample_uniform_batch,
    sample_uniform_tree,
    stein_coupled_batch,
    stein_coupled_pair,
)
from fringetrees.treecore import LEAF, DegreeDistribution, DegreeStatistic, PlaneTree, is_valid_degree_sequence


def test_streams_are_reproducible_and_distinct():
    a = RandomStream(7, 3).generator.integers(1 << 30, size=4)
    b = RandomStream(7, 3).generator.integers(1 << 30, size=4)
    c = RandomStream(7, 4).generator.integers(1 << 30, size=4)
    d = RandomStream(7, 3).child(0).generator.integers(1 << 30, size=4)
    assert a.tolist() == b.tolist()
    assert a.tolist() != c.tolist() and a.tolist() != d.tolist()
    with pytest.raises(TypeError):
        sample_uniform_tree(DegreeStatistic({0: 1}), 5)


def test_uniform_tree_examples(rng):
    assert all(sample_uniform_tree(DegreeStatistic({0: 2, 2: 1}), rng) == CHERRY for _ in range(20))
    bn = DegreeStatistic({0: 3, 1: 1, 3: 1})
    reps = 100_000
    rows = sample_uniform_batch(bn, reps, rng)
    tally = Counter(map(tuple, rows.tolist()))
    assert set(tally) == {tuple(t.degrees.tolist()) for t in enumerate_trees(bn).trees}
    sd = math.sqrt(0.25 * 0.75 / reps)
    assert all(abs(v / reps - 0.25) < 3 * sd for v in tally.values())


def test_uniformity_chi_square(rng):
    bn = DegreeStatistic({0: 4, 1: 1, 2: 1, 3: 1})
    support = [tuple(t.degrees.tolist()) for t in enumerate_trees(bn).trees]
    rows = sample_uniform_batch(bn, 60_000, rng)
    tally = Counter(map(tuple, rows.tolist()))
    obs = np.array([tally[s] for s in support])
    assert obs.sum() == 60_000
    assert stats.chisquare(obs).statistic < stats.chi2.ppf(0.999, len(support) - 1)


@given(statistics(), st.integers(0, 2**31))
def test_samples_have_statistic(bn, seed):
    t = sample_uniform_tree(bn, RandomStream(seed))
    assert t.statistic == bn and is_valid_degree_sequence(t.degrees)
    rows = sample_uniform_batch(bn, 5, RandomStream(seed))
    assert all(is_valid_degree_sequence(r) for r in rows)


def test_swor_sum(rng):
    assert sample_swor_sum([0, 0, 2], 0, rng) == 0
    draws = np.array([sample_swor_sum([0, 0, 2], 2, rng) for _ in range(6000)])
    assert set(draws.tolist()) == {0, 2}
    assert abs((draws == 2).mean() - 2 / 3) < 4 * math.sqrt(2 / 9 / 6000)
    with pytest.raises(CountOutOfRange):
        sample_swor_sum([1], 2, rng)


def test_swor_sum_moments(rng):
    d = np.array([0] * 30 + [1] * 10 + [2] * 8 + [5] * 4)
    m = 17
    mom = swor_moments(d, m)
    draws = np.array([sample_swor_sum(d, m, rng) for _ in range(20_000)])
    se = math.sqrt(mom.variance / draws.size)
    assert abs(draws.mean() - mom.mean) < 4 * se
    assert abs(draws.var(ddof=1) / mom.variance - 1) < 4 * math.sqrt(2 / draws.size) * 1.5


def test_gw_size_checks():
    half = DegreeDistribution({0: Fraction(1, 2), 2: Fraction(1, 2)})
    with pytest.raises(IncompatibleSize):
        sample_conditioned_gw(half, 4, RandomStream(0))
    with pytest.raises(IncompatibleSize):
        sample_conditioned_gw(DegreeDistribution({1: 1}), 3, RandomStream(0))
    with pytest.raises(IncompatibleSize):
        sample_conditioned_gw(DegreeDistribution({0: 1}), 3, RandomStream(0))
    assert sample_conditioned_gw(half, 3, RandomStream(0)) == CHERRY
    assert sample_conditioned_gw(half, 1, RandomStream(0)) == LEAF


@pytest.mark.parametrize("method", ["counts", "iid"])
def test_gw_law_matches_tree_probabilities(method):
    p = DegreeDistribution({0: Fraction(1, 2), 1: Fraction(1, 4), 3: Fraction(1, 4)})
    n = 6
    weights = {}
    for t in trees_of_size(n):
        w = pi_p_tree(p, t).rational
        if w:
            weights[tuple(t.degrees.tolist())] = w
    total = sum(weights.values())
    reps = 30_000
    gen = np.random.default_rng(11)
    tally = Counter(tuple(sample_gw_sequence(p, n, gen, method=method).tolist()) for _ in range(reps))
    assert set(tally) <= set(weights)
    tv = 0.5 * sum(abs(tally[k] / reps - float(w / total)) for k, w in weights.items())
    assert tv < 0.02


def test_exchangeable_pair_examples(rng):
    host = PlaneTree([3, 0, 2, 0, 0, 1, 0])
    for _ in range(50):
        assert exchangeable_pair_step(host, DegreeStatistic({0: 1}), rng) == host
        assert exchangeable_pair_step(host, DegreeStatistic({0: 4, 4: 1}), rng) == host
    bn = DegreeStatistic({0: 3, 1: 1, 3: 1})
    seen = set()
    for _ in range(400):
        out = exchangeable_pair_step(PlaneTree([3, 1, 0, 0, 0]), bn, rng)
        seen.add(out)
        assert out.statistic == bn
    assert len(seen) == 4


@given(trees(), st.integers(0, 2**31))
def test_exchangeable_pair_preserves_statistic(t, seed):
    target = PlaneTree([1, 0]).statistic
    out = exchangeable_pair_step(t, target, RandomStream(seed))
    assert out.statistic == t.statistic


def test_coupling_examples(rng):
    bn = DegreeStatistic({0: 2, 2: 1})
    for _ in range(30):
        pair = stein_coupled_pair(bn, CHERRY, 0, rng)
        assert pair.coupled.tolist() == [2, 0, 0]
    bn = DegreeStatistic({0: 5, 1: 2, 2: 2, 3: 1})
    for k in range(bn.size):
        pair = stein_coupled_pair(bn, LEAF, k, rng)
        assert pair.coupled[k] == 0
        diff = np.flatnonzero(pair.coupled != pair.base)
        assert len(diff) in (0, 2)
        assert sorted(pair.coupled.tolist()) == sorted(pair.base.tolist())
    with pytest.raises(InfeasibleTarget):
        stein_coupled_pair(DegreeStatistic({0: 2, 2: 1}), PlaneTree([1, 0]), 0, rng)


def _exact_coupled_law(bn, t, k):
    """Law of the coupled arrangement over every base permutation, marking and reorder."""
    d = bn.multiset()
    n = d.size
    need = t.statistic.as_dict()
    out = Counter()
    for perm in itertools.permutations(range(n)):
        base = d[list(perm)]
        per_deg = [itertools.combinations(np.flatnonzero(base == deg).tolist(), c) for deg, c in need.items()]
        for choice in itertools.product(*per_deg):
            marked = np.zeros(n, dtype=bool)
            for group in choice:
                marked[list(group)] = True
            window = (k + np.arange(t.size)) % n
            free = int(np.count_nonzero(~marked[window]))
            for order in itertools.permutations(range(free)):
                res = np.empty_like(base)
                kernels.couple_core(base, t.degrees, k, marked, np.array(order, dtype=np.int64), res)
                out[tuple(res.tolist())] += 1
    total = sum(out.values())
    return {s: Fraction(c, total) for s, c in out.items()}


@pytest.mark.parametrize(
    "bn,t,k",
    [
        ({0: 2, 2: 1}, [2, 0, 0], 0),
        ({0: 2, 2: 1}, [0], 1),
        ({0: 3, 1: 1, 3: 1}, [1, 0], 2),
        ({0: 3, 2: 2}, [2, 0, 0], 3),
        ({0: 2, 1: 2, 2: 1}, [1, 0], 4),
    ],
)
def test_coupling_law_exact(bn, t, k):
    bn, t = DegreeStatistic(bn), PlaneTree(t)
    law = _exact_coupled_law(bn, t, k)
    cond = {
        s for s in set(itertools.permutations(bn.multiset().tolist()))
        if all(s[(k + j) % bn.size] == t.degrees[j] for j in range(t.size))
    }
    assert set(law) == cond
    assert all(w == Fraction(1, len(cond)) for w in law.values())


def test_coupled_batch_matches_single(rng):
    bn = DegreeStatistic({0: 4, 1: 1, 2: 1, 3: 1})
    t = PlaneTree([1, 0])
    rows = stein_coupled_batch(bn, t, 5, 20_000, rng)
    assert (rows[:, 5] == 1).all() and (rows[:, 6] == 0).all()
    tally = Counter(map(tuple, rows.tolist()))
    assert len(tally) == 20  # 5!/3! arrangements of the remaining degrees
    assert stats.chisquare(list(tally.values())).pvalue > 1e-4
