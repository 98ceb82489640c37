"""Exact expectations and factorial moments of fringe-subtree counts in a
uniformly random tree with a fixed degree statistic.

Values come back as :class:`ExactScalar`: an exact ``Fraction`` when the
inputs are small enough for rational arithmetic to be cheap, and always a
natural-log float. Falling factorials are evaluated exactly in rational mode
and as compensated sums of logs otherwise; a vanishing falling factorial
yields an exact zero (the ``0/0 = 0`` convention for oversized orders).
"""
import json
import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import InvalidOrder, PrecisionLoss, SizeOutOfRange, TargetTooLarge
from .treecore import DegreeStatistic, canonical_tree, count_trees

RATIONAL_MAX_SIZE = 10_000
RATIONAL_MAX_ORDER_SIZE = 1_000


@dataclass(frozen=True)
class ExactScalar:
    """Nonnegative number held as an optional exact rational plus its log.

    ``log == -inf`` encodes zero. When ``rational`` is set it is authoritative.
    """

    log: float
    rational: Fraction = None

    @classmethod
    def from_fraction(cls, value):
        value = Fraction(value)
        if value < 0:
            raise ValueError("ExactScalar is nonnegative")
        return cls(_log_fraction(value), value)

    @classmethod
    def from_log(cls, log_value):
        return cls(float(log_value), None)

    @classmethod
    def zero(cls, exact=True):
        return cls(-math.inf, Fraction(0) if exact else None)

    @property
    def is_exact(self):
        return self.rational is not None

    @property
    def is_zero(self):
        return self.log == -math.inf

    def __float__(self):
        if self.rational is not None:
            return float(self.rational)
        return math.exp(self.log)

    def scaled(self, factor):
        """Multiply by a positive integer or Fraction."""
        factor = Fraction(factor)
        if self.rational is not None:
            return ExactScalar.from_fraction(self.rational * factor)
        if factor == 0:
            return ExactScalar.zero(exact=False)
        return ExactScalar.from_log(self.log + _log_fraction(factor))

    def to_dict(self):
        out = {"logValue": self.log if math.isfinite(self.log) else None}
        if self.rational is not None:
            out["rational"] = f"{self.rational.numerator}/{self.rational.denominator}"
            out["decimal"] = _decimal_string(self.rational)
        else:
            out["rational"] = None
            out["decimal"] = repr(float(self))
        return out


def _log_fraction(value):
    if value == 0:
        return -math.inf
    return math.log(value.numerator) - math.log(value.denominator)


def _decimal_string(value, digits=30):
    """Round-to-nearest decimal rendering with ``digits`` significant digits."""
    if value == 0:
        return "0"
    sign = "-" if value < 0 else ""
    value = abs(value)
    exp = math.floor(_log_fraction(value) / math.log(10))
    # correct the estimate at decade boundaries
    while value >= Fraction(10) ** (exp + 1):
        exp += 1
    while value < Fraction(10) ** exp:
        exp -= 1
    scaled = round(value * Fraction(10) ** (digits - 1 - exp))
    mant = str(scaled)
    if len(mant) > digits:  # rounding carried into a new digit
        exp += 1
        mant = mant[:digits]
    body = mant[0] + "." + mant[1:].rstrip("0") if mant[1:].rstrip("0") else mant[0]
    return f"{sign}{body}e{exp}"


@dataclass(frozen=True)
class MomentReport:
    order: int
    value: ExactScalar
    statistic: str
    target: str
    formula: str

    def to_dict(self):
        return {
            "order": self.order,
            "statistic": self.statistic,
            "target": self.target,
            "formula": self.formula,
            **self.value.to_dict(),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


# ---------------------------------------------------------------------------
# falling factorials


def falling(x, k):
    """Exact ``(x)_k = x (x-1) ... (x-k+1)``; zero once a factor is nonpositive."""
    if k > x:
        return 0
    out = 1
    for j in range(k):
        out *= x - j
    return out


def log_falling(x, k):
    """``ln (x)_k`` (``-inf`` when it vanishes)."""
    if k > x:
        return -math.inf
    if k <= 64:
        return math.fsum(math.log(x - j) for j in range(k))
    return math.lgamma(x + 1) - math.lgamma(x - k + 1)


def _use_rational(bn, order_size, mode):
    if mode == "rational":
        return True
    if mode == "log":
        return False
    if mode is not None:
        raise ValueError(f"unknown arithmetic mode {mode!r}")
    return bn.size <= RATIONAL_MAX_SIZE and order_size <= RATIONAL_MAX_ORDER_SIZE


# ---------------------------------------------------------------------------
# probabilities under a Galton-Watson law


def pi_p_tree(p, t):
    """``prod_i p_i^{n_T(i)}``: probability that the unconditioned GW tree is ``t``."""
    return _pi_counts(p, t.statistic.items)


def pi_p_statistic(p, bm):
    """Per-tree probability ``prod p_i^{m(i)}`` and the class total ``|T_bm|`` times it."""
    per_tree = _pi_counts(p, bm.items)
    return per_tree, per_tree.scaled(count_trees(bm))


def _pi_counts(p, items):
    if p.is_rational:
        value = Fraction(1)
        for deg, mult in items:
            value *= p.prob(deg) ** mult
        return ExactScalar.from_fraction(value)
    terms = []
    for deg, mult in items:
        pi = p.prob(deg)
        if pi == 0:
            return ExactScalar.zero(exact=False)
        terms.append(mult * math.log(pi))
    return ExactScalar.from_log(math.fsum(terms))


# ---------------------------------------------------------------------------
# tree and statistic moments


def factorial_moment_tree(bn, t, q, mode=None):
    """``E (N_t)_q`` for a uniform tree with statistic ``bn``.

    Equals ``|n| / (|n|)_{q|t|-q+1} * prod_i (n(i))_{q n_t(i)}``, and zero
    when ``|n| < q|t| - q + 1`` or some ``q n_t(i) > n(i)``.
    """
    if q < 1:
        raise InvalidOrder(f"order must be a positive integer, got {q}")
    length = q * t.size - q + 1
    value = _moment_core(bn, t.statistic, q, length, mode)
    return MomentReport(q, value, str(bn), str(t), "tree-factorial-moment")


def _moment_core(bn, stat, q, length, mode):
    big = bn.size
    rational = _use_rational(bn, q * stat.size, mode)
    if length > big or any(q * mult > bn[deg] for deg, mult in stat.items):
        return ExactScalar.zero(exact=rational)
    if rational:
        num = big
        for deg, mult in stat.items:
            num *= falling(bn[deg], q * mult)
        return ExactScalar.from_fraction(Fraction(num, falling(big, length)))
    terms = [math.log(big), -log_falling(big, length)]
    for deg, mult in stat.items:
        terms.append(log_falling(bn[deg], q * mult))
    return ExactScalar.from_log(math.fsum(terms))


def expected_count_tree(bn, t, mode=None):
    """``E N_t`` over uniform trees with statistic ``bn``."""
    if t.size > bn.size:
        raise TargetTooLarge(f"target has {t.size} vertices, host statistic {bn.size}")
    return factorial_moment_tree(bn, t, 1, mode).value


def expected_count_tree_upper(bn, t, mode=None):
    """Upper bound ``|n|^{|t|+1} / (|n|)_{|t|} * pi_{p(n)}(t)`` on ``E N_t``."""
    if t.size > bn.size:
        raise TargetTooLarge(f"target has {t.size} vertices, host statistic {bn.size}")
    big = bn.size
    stat = t.statistic
    if any(bn[deg] == 0 for deg in stat.support):
        return ExactScalar.zero(exact=_use_rational(bn, t.size, mode))
    if _use_rational(bn, t.size, mode):
        value = Fraction(big ** (t.size + 1), falling(big, t.size))
        for deg, mult in stat.items:
            value *= Fraction(bn[deg], big) ** mult
        return ExactScalar.from_fraction(value)
    terms = [(t.size + 1) * math.log(big), -log_falling(big, t.size)]
    for deg, mult in stat.items:
        terms.append(mult * (math.log(bn[deg]) - math.log(big)))
    return ExactScalar.from_log(math.fsum(terms))


def factorial_moment_statistic(bn, bm, q, mode=None):
    """``E (N_bm)_q = |T_bm|^q * E (N_t)_q`` for any tree ``t`` with statistic ``bm``."""
    if q < 1:
        raise InvalidOrder(f"order must be a positive integer, got {q}")
    tree_value = _moment_core(bn, bm, q, q * bm.size - q + 1, mode)
    value = tree_value.scaled(count_trees(bm) ** q) if not tree_value.is_zero else tree_value
    return MomentReport(q, value, str(bn), str(bm), "statistic-factorial-moment")


def expected_count_statistic(bn, bm, mode=None):
    if bm.size > bn.size:
        raise TargetTooLarge(f"target has {bm.size} vertices, host statistic {bn.size}")
    return factorial_moment_statistic(bn, bm, 1, mode).value


# ---------------------------------------------------------------------------
# size moments


def expected_count_size(bn, m, budget=None):
    """``E N_m = (|n|/m) P(S_m = m-1)``, ``S_m`` a sum of ``m`` degrees drawn
    without replacement. Exact when the rational DP fits the budget."""
    from . import oracle

    if not 1 <= m <= bn.size:
        raise SizeOutOfRange(f"size {m} outside 1..{bn.size}")
    pmf = oracle.swor_sum_pmf(bn.multiset(), m, budget=budget)
    prob = pmf.get(m - 1, 0)
    if isinstance(prob, Fraction) or prob == 0 and _all_fractions(pmf):
        return ExactScalar.from_fraction(Fraction(bn.size, m) * Fraction(prob))
    if prob <= 0:
        return ExactScalar.zero(exact=False)
    return ExactScalar.from_log(math.log(bn.size / m) + math.log(prob))


def _all_fractions(pmf):
    return all(isinstance(v, Fraction) for v in pmf.values())


def factorial_moment_size(bn, m, r, budget=None):
    """``E (N_m)_r = |n| (|n|-rm+r-1)_{r-1} / m^r * P(B)``, where ``B`` is the event
    that ``r`` disjoint length-``m`` blocks of a uniform arrangement each sum
    to ``m - 1``."""
    from . import oracle

    if r < 1:
        raise InvalidOrder(f"order must be a positive integer, got {r}")
    if m < 1 or r * m > bn.size:
        raise SizeOutOfRange(f"{r} blocks of size {m} exceed {bn.size}")
    if r == 1:
        value = expected_count_size(bn, m, budget=budget)
        return MomentReport(1, value, str(bn), f"size={m}", "size-factorial-moment")
    prob = oracle.joint_block_probability(bn, m, r, budget=budget)
    big = bn.size
    factor = Fraction(big * falling(big - r * m + r - 1, r - 1), m**r)
    value = prob.scaled(factor) if factor else ExactScalar.zero(exact=prob.is_exact)
    return MomentReport(r, value, str(bn), f"size={m}", "size-factorial-moment")


# ---------------------------------------------------------------------------
# variances


def variance_from_factorial(m1, m2):
    """``Var N = E(N)_2 + E N - (E N)^2`` from the first two factorial moments.

    Exact (a signed ``Fraction``) when both inputs are exact; otherwise a float,
    refusing when the cancellation would wipe out all significant digits.
    """
    if m1.is_exact and m2.is_exact:
        return m2.rational + m1.rational - m1.rational**2
    a, b = float(m1), float(m2)
    if a * a > 1e15:
        raise PrecisionLoss("variance from log-only moments is numerically unstable here")
    return b + a - a * a


@dataclass(frozen=True)
class VarianceRelation:
    """Both sides of the class-level mean and variance identities.

    ``lhs_*`` are moments of ``N_{n_t}`` taken directly; ``rhs_*`` are rebuilt
    from ``|T_{n_t}|`` and the moments of the single-tree count ``N_t``.
    """

    lhs_mean: object
    rhs_mean: object
    lhs_variance: object
    rhs_variance: object
    class_size: int

    @property
    def holds(self):
        return self.lhs_mean == self.rhs_mean and self.lhs_variance == self.rhs_variance


def variance_relation_statistic(bn, t, mode=None):
    stat = t.statistic
    cls = count_trees(stat)
    s1 = factorial_moment_statistic(bn, stat, 1, mode).value
    s2 = factorial_moment_statistic(bn, stat, 2, mode).value
    t1 = factorial_moment_tree(bn, t, 1, mode).value
    t2 = factorial_moment_tree(bn, t, 2, mode).value
    lhs_var = variance_from_factorial(s1, s2)
    tree_var = variance_from_factorial(t1, t2)
    if t1.is_exact:
        rhs_mean = cls * t1.rational
        lhs_mean = s1.rational
    else:
        rhs_mean = cls * float(t1)
        lhs_mean = float(s1)
    rhs_var = cls**2 * (tree_var - (t1.rational if t1.is_exact else float(t1))) + (
        rhs_mean
    )
    return VarianceRelation(lhs_mean, rhs_mean, lhs_var, rhs_var, cls)


def degree_moments(dist):
    """``(mean, variance, second moment)`` of a degree distribution."""
    return dist.mean, dist.variance, dist.second_moment


def statistic_of(target):
    """Degree statistic of a tree or statistic target."""
    return target if isinstance(target, DegreeStatistic) else target.statistic


__all__ = [
    "ExactScalar",
    "MomentReport",
    "VarianceRelation",
    "canonical_tree",
    "degree_moments",
    "expected_count_size",
    "expected_count_statistic",
    "expected_count_tree",
    "expected_count_tree_upper",
    "factorial_moment_size",
    "factorial_moment_statistic",
    "factorial_moment_tree",
    "falling",
    "log_falling",
    "pi_p_statistic",
    "pi_p_tree",
    "variance_from_factorial",
    "variance_relation_statistic",
]
