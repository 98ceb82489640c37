"""Companion checks for the two lattice effects on fringe-size counts."""
import math
from collections import Counter
from fractions import Fraction

import pytest

from fringetrees.approx import periodic_lambda, periodic_lambda_parity, poisson_pmf, ts_lambda, tv_distance
from fringetrees.exactstats import expected_count_size
from fringetrees.harness.config import periodic_statistic
from fringetrees.samplers import RandomStream, sample_conditioned_gw
from fringetrees.treecore import DegreeDistribution, fringe_count_size


@pytest.mark.slow
def test_binary_gw_odd_sizes_double_the_rate():
    # offspring law with span 2: only odd fringe sizes occur, at twice the aperiodic rate
    p = DegreeDistribution({0: Fraction(1, 2), 2: Fraction(1, 2)})
    n = 9999
    m = round(n ** (2 / 3)) | 1
    lam = 2 * ts_lambda(m / n ** (2 / 3), 1.0)
    even, odd = Counter(), Counter()
    for r in range(1000):
        t = sample_conditioned_gw(p, n, RandomStream(77, r))
        odd[fringe_count_size(t, m)] += 1
        even[fringe_count_size(t, m + 1)] += 1
    assert even == {0: 1000}
    assert tv_distance(odd, lambda k: poisson_pmf(lam, k)) <= 0.08


@pytest.mark.slow
def test_periodic_means_follow_double_exponent():
    n = 100_000
    bn = periodic_statistic(n, 1.0)
    b = bn[1] / n ** (1 / 3)
    for m in (2154, 2155):
        a = m / n ** (2 / 3)
        exact = float(expected_count_size(bn, m))
        # finite-n factor sqrt(1 - m/n) is applied to both forms
        fix = 1 / math.sqrt(1 - m / n)
        assert exact == pytest.approx(periodic_lambda_parity(a, b, m) * fix, rel=0.05)
        assert exact != pytest.approx(periodic_lambda(a, b, m) * fix, rel=0.1)
