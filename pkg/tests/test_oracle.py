import math
from fractions import Fraction
from itertools import permutations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import CHERRY, statistics
from fringetrees.errors import BudgetExceeded, CountOutOfRange, LimitExceeded
from fringetrees.oracle import (
    enumerate_trees,
    exact_count_distribution,
    exact_factorial_moment,
    joint_block_probability,
    statistics_of_size,
    swor_sum_pmf,
    swor_sum_pmf_array,
    swor_sum_pmf_bruteforce,
    trees_of_size,
)
from fringetrees.treecore import DegreeStatistic, is_valid_degree_sequence


def test_enumeration_examples():
    res = enumerate_trees(DegreeStatistic({0: 2, 2: 1}))
    assert [t.degrees.tolist() for t in res.trees] == [[2, 0, 0]]
    res = enumerate_trees(DegreeStatistic({0: 3, 1: 1, 3: 1}))
    assert res.cardinality == 4
    seqs = [tuple(t.degrees.tolist()) for t in res.trees]
    assert seqs == sorted(seqs) and len(set(seqs)) == 4
    assert res.to_lines().splitlines()[0] == "1,3,0,0,0"
    with pytest.raises(LimitExceeded):
        enumerate_trees(DegreeStatistic({0: 6, 2: 5}), limit=10)


def test_trees_of_size_are_catalan():
    for s in range(1, 9):
        assert len(trees_of_size(s)) == math.comb(2 * s - 2, s - 1) // s
    assert len(statistics_of_size(9)) == 22


def test_count_distribution_examples():
    assert exact_count_distribution(DegreeStatistic({0: 2, 2: 1}), CHERRY) == {1: 1}
    law = exact_count_distribution(DegreeStatistic({0: 4, 2: 3}), CHERRY)
    assert set(law) <= {0, 1, 2, 3} and sum(law.values()) == 1
    assert exact_factorial_moment(law, 1) == Fraction(6, 5)


def test_swor_examples():
    assert swor_sum_pmf([0, 0, 2], 2) == {0: Fraction(1, 3), 2: Fraction(2, 3)}
    assert swor_sum_pmf([0, 0, 2], 0) == {0: 1}
    assert swor_sum_pmf([3, 3, 3], 2) == {6: 1}
    with pytest.raises(CountOutOfRange):
        swor_sum_pmf([0, 1], 3)
    with pytest.raises(BudgetExceeded):
        swor_sum_pmf(list(range(50)), 20, budget=10, exact=True)


@given(st.lists(st.integers(0, 5), min_size=1, max_size=9), st.data())
def test_swor_dp_matches_bruteforce(d, data):
    m = data.draw(st.integers(0, len(d)))
    brute = swor_sum_pmf_bruteforce(d, m)
    assert swor_sum_pmf(d, m) == brute
    offset, probs = swor_sum_pmf_array(d, m)
    for k, w in brute.items():
        assert probs[k - offset] == pytest.approx(float(w), abs=1e-12)
    assert probs.sum() == pytest.approx(1.0)


def test_swor_float_path_large():
    rng = np.random.default_rng(3)
    d = rng.integers(0, 6, size=400)
    offset, probs = swor_sum_pmf_array(d, 150)
    k = offset + np.arange(probs.size)
    assert probs.sum() == pytest.approx(1.0, abs=1e-9)
    assert (k * probs).sum() == pytest.approx(150 * d.mean(), rel=1e-9)


def _blocks_bruteforce(bn, m, r):
    # probability over all distinct arrangements that each of r leading blocks sums to m-1
    good = total = 0
    for perm in set(permutations(bn.multiset().tolist())):
        total += 1
        good += all(sum(perm[j * m : (j + 1) * m]) == m - 1 for j in range(r))
    return Fraction(good, total)


@given(statistics(max_internal=3, max_degree=3), st.integers(1, 4), st.integers(1, 2))
def test_joint_block_probability_bruteforce(bn, m, r):
    if r * m > bn.size or bn.size > 7:
        return
    assert joint_block_probability(bn, m, r).rational == _blocks_bruteforce(bn, m, r)


def test_enumeration_agrees_with_filter():
    bn = DegreeStatistic({0: 3, 1: 2, 3: 1})
    brute = sorted({p for p in permutations(bn.multiset().tolist()) if is_valid_degree_sequence(p)})
    assert [tuple(t.degrees.tolist()) for t in enumerate_trees(bn).trees] == brute
