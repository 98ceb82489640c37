"""Limit laws, distances, and the closed-form predictions and bounds for
fringe counts: Poisson and normal references, total variation, the
Stein-type quantity ``Delta``, the variance-based bound, local limit
predictions for sums drawn without replacement, and regime classification.
"""
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import stats

from .errors import (
    DegenerateRange,
    DegenerateSpread,
    EmptyHistogram,
    NonpositiveInput,
    NonpositiveSigma,
    PrecisionLoss,
    TargetTooLarge,
    UnderspecifiedScenario,
)
from .exactstats import (
    ExactScalar,
    expected_count_statistic,
    expected_count_tree,
    factorial_moment_statistic,
    factorial_moment_tree,
    variance_from_factorial,
)
from .treecore import DegreeStatistic, PlaneTree, count_trees, empirical_distribution

TAIL_CUTOFF = 1e-12

# ---------------------------------------------------------------------------
# reference laws


def poisson_pmf(lam, k):
    """``exp(-lam) lam^k / k!`` evaluated in log space."""
    if lam < 0:
        raise NonpositiveInput("Poisson mean must be nonnegative")
    if k < 0:
        return 0.0
    if lam == 0:
        return 1.0 if k == 0 else 0.0
    return math.exp(-lam + k * math.log(lam) - math.lgamma(k + 1))


def poisson_pmf_array(lam, kmax):
    """``poisson_pmf(lam, k)`` for ``k = 0..kmax``."""
    k = np.arange(kmax + 1)
    if lam == 0:
        return (k == 0).astype(float)
    from scipy.special import gammaln

    return np.exp(-lam + k * math.log(lam) - gammaln(k + 1))


def normal_density_cdf(mu, sigma, x):
    """Density and distribution function of ``N(mu, sigma^2)`` at ``x``."""
    if not sigma > 0:
        raise NonpositiveSigma(f"sigma must be positive, got {sigma}")
    z = (x - mu) / sigma
    pdf = math.exp(-0.5 * z * z) / (sigma * math.sqrt(2 * math.pi))
    cdf = 0.5 * math.erfc(-z / math.sqrt(2))
    return pdf, cdf


# ---------------------------------------------------------------------------
# distances


def _as_target(target):
    if callable(target):
        return target
    table = dict(target)
    return lambda k: float(table.get(k, 0.0))


def tv_distance(histogram, target, max_support=10**7):
    """Total variation between an integer histogram and a pmf on ``0, 1, ...``.

    ``histogram`` maps value to count. ``target`` is a pmf callable or a
    mapping. The target is summed until its cumulative mass reaches
    ``1 - 1e-12`` (and at least past the histogram's largest value); the
    remaining tail counts fully towards the distance.
    """
    hist = {int(k): int(v) for k, v in dict(histogram).items() if v}
    total = sum(hist.values())
    if total <= 0:
        raise EmptyHistogram("histogram is empty")
    pmf = _as_target(target)
    top = max(hist)
    acc = []
    mass = []
    k = 0
    while True:
        pk = pmf(k)
        mass.append(pk)
        acc.append(abs(hist.get(k, 0) / total - pk))
        k += 1
        if k > top and math.fsum(mass) >= 1 - TAIL_CUTOFF:
            break
        if k > max_support:
            break
    tail = max(0.0, 1.0 - math.fsum(mass))
    outside = sum(v for key, v in hist.items() if key >= k or key < 0) / total
    return min(1.0, 0.5 * (math.fsum(acc) + tail + outside))


def tv_pmfs(p, q):
    """Total variation between two finitely supported pmfs given as mappings."""
    keys = set(p) | set(q)
    diff = [abs(p.get(k, 0) - q.get(k, 0)) for k in keys]
    if all(isinstance(x, (int, Fraction)) for x in diff):
        return sum(diff, Fraction(0)) / 2
    return 0.5 * math.fsum(float(x) for x in diff)


def ks_normal(samples):
    """Kolmogorov-Smirnov statistic and p-value against the standard normal."""
    res = stats.kstest(np.asarray(samples, dtype=float), "norm")
    return float(res.statistic), float(res.pvalue)


# ---------------------------------------------------------------------------
# Stein-type bounds


@dataclass(frozen=True)
class TVBoundReport:
    """Structural quantities bounding TV(N, Po(lambda)) up to a universal constant."""

    lam: ExactScalar
    delta: ExactScalar
    delta_alternative: ExactScalar
    weight_sum: object  # sum_i p_i(n_t)^2 / p_i(n)
    cai_devroye: float
    class_size: int
    notes: tuple = ()

    def to_dict(self):
        return {
            "lambda": float(self.lam),
            "lambdaExact": _frac_str(self.lam.rational),
            "delta": float(self.delta),
            "deltaExact": _frac_str(self.delta.rational),
            "weightSum": float(self.weight_sum),
            "caiDevroyeBound": self.cai_devroye,
            "classSize": str(self.class_size),
            "notes": list(self.notes),
        }


def _frac_str(x):
    return None if x is None else f"{x.numerator}/{x.denominator}"


def _delta_pair(bn, stat, lam):
    """Return ``(lam * sum m(i)^2/n(i), m^2 lam/|n| * sum p_i(m)^2/p_i(n), weight sum)``."""
    m, big = stat.size, bn.size
    if lam.is_zero:
        zero = ExactScalar.zero(exact=lam.is_exact)
        return zero, zero, Fraction(0)
    direct = sum(Fraction(mult * mult, bn[deg]) for deg, mult in stat.items)
    weights = sum(
        Fraction(mult, m) ** 2 / Fraction(bn[deg], big) for deg, mult in stat.items
    )
    alt_factor = Fraction(m * m, big) * weights
    return lam.scaled(direct), lam.scaled(alt_factor), weights


@dataclass(frozen=True)
class CaiDevroye:
    value: float
    clamped: bool
    zero_mean: bool
    radicand: object


def cai_devroye_details(bn, stat, mean, second):
    """Evaluate ``sqrt((Var N - E N)/E N) + 2/sqrt(|T_stat|)`` for the class count."""
    cls = count_trees(stat)
    if mean.is_zero:
        return CaiDevroye(1.0, False, True, None)
    var = variance_from_factorial(mean, second)
    e = mean.rational if mean.is_exact else float(mean)
    radicand = (var - e) / e
    clamped = radicand < 0
    root = 0.0 if clamped else math.sqrt(radicand)
    return CaiDevroye(root + 2.0 / math.sqrt(cls), bool(clamped), False, radicand)


def cai_devroye_bound(bn, t):
    """Variance-based TV bound for the class count ``N_{n_t}`` (1 when ``E N = 0``)."""
    if t.size > bn.size:
        raise TargetTooLarge(f"target has {t.size} vertices, host statistic {bn.size}")
    stat = t.statistic
    mean = factorial_moment_statistic(bn, stat, 1).value
    second = factorial_moment_statistic(bn, stat, 2).value
    return cai_devroye_details(bn, stat, mean, second).value


def _bound_report(bn, stat, lam, mean, second):
    notes = []
    delta, alt, weights = _delta_pair(bn, stat, lam)
    if delta.is_exact and alt.is_exact:
        assert delta.rational == alt.rational
    if not lam.is_zero:
        assert weights > Fraction(1, 8)
    try:
        cd = cai_devroye_details(bn, stat, mean, second)
        if cd.zero_mean:
            notes.append("zero-mean")
        if cd.clamped:
            notes.append("radicand-clamped")
        cd_value = cd.value
    except PrecisionLoss:
        cd_value = math.nan
        notes.append("variance-unstable")
    if float(delta) >= 1:
        notes.append("bound-vacuous")
    if lam.is_zero:
        notes.append("lambda-zero")
    return TVBoundReport(lam, delta, alt, weights, cd_value, count_trees(stat), tuple(notes))


def stein_delta(bn, t):
    """``lambda = E N_t`` and ``Delta = lambda * sum_i n_t(i)^2 / n(i)``."""
    if t.size > bn.size:
        raise TargetTooLarge(f"target has {t.size} vertices, host statistic {bn.size}")
    stat = t.statistic
    lam = expected_count_tree(bn, t)
    mean = factorial_moment_statistic(bn, stat, 1).value
    second = factorial_moment_statistic(bn, stat, 2).value
    return _bound_report(bn, stat, lam, mean, second)


def statistic_tv_bound(bn, bm):
    """``lambda = E N_bm`` and ``Delta = lambda * sum_i m(i)^2 / n(i)``."""
    if bm.size > bn.size:
        raise TargetTooLarge(f"target has {bm.size} vertices, host statistic {bn.size}")
    lam = expected_count_statistic(bn, bm)
    second = factorial_moment_statistic(bn, bm, 2).value
    return _bound_report(bn, bm, lam, lam, second)


# ---------------------------------------------------------------------------
# size counts and local limits


def size_expectation_asymptotic(n, m, sigma2):
    """``n / (sqrt(2 pi) sigma sqrt(1 - m/n) m^{3/2})``, the large-``n`` value of ``E N_m``."""
    if not 1 <= m < n:
        raise DegenerateRange(f"need 1 <= m < n, got m={m}, n={n}")
    if sigma2 <= 0:
        raise NonpositiveInput("sigma2 must be positive")
    return n / (math.sqrt(2 * math.pi * sigma2) * math.sqrt(1 - m / n) * m**1.5)


def size_regime_flag(n, m):
    """True when ``n - m`` is too small for the asymptotic size formula to apply."""
    return n - m < math.sqrt(n)


def ts_lambda(a, sigma2):
    """Poisson mean ``(2 pi sigma^2 a^3)^{-1/2}`` for fringe sizes ``m ~ a n^{2/3}``."""
    if a <= 0 or sigma2 <= 0:
        raise NonpositiveInput("a and sigma2 must be positive")
    return (2 * math.pi * sigma2 * a**3) ** -0.5


def periodic_lambda(a, b, m):
    """Limit of ``E N_m`` for statistics on ``{0, 1, 2}`` with ``n(1) ~ b n^{1/3}``
    and ``m ~ a n^{2/3}``, as stated: ``(1 +- e^{-ab}) / sqrt(2 pi a^3)``,
    plus for odd ``m`` and minus for even ``m``."""
    if a <= 0 or b < 0:
        raise NonpositiveInput("need a > 0 and b >= 0")
    sign = 1 if m % 2 == 1 else -1
    return (1 + sign * math.exp(-a * b)) / math.sqrt(2 * math.pi * a**3)


def periodic_lambda_parity(a, b, m):
    """Same limit with the parity probability written out: the number of
    unary vertices among ``m`` uniform positions is asymptotically
    ``Po(ab)``, which is even with probability ``(1 + e^{-2ab}) / 2``, so
    ``E N_m -> (1 +- e^{-2ab}) / sqrt(2 pi a^3)``."""
    if a <= 0 or b < 0:
        raise NonpositiveInput("need a > 0 and b >= 0")
    sign = 1 if m % 2 == 1 else -1
    return (1 + sign * math.exp(-2 * a * b)) / math.sqrt(2 * math.pi * a**3)


@dataclass(frozen=True)
class SworMoments:
    n: int
    m: int
    mean_value: float  # d-bar
    q: float  # sum (d_i - d-bar)^2
    sigma_hat2: float  # (m/n)(1 - m/n) Q

    @property
    def mean(self):
        """Exact mean ``m * d-bar`` of the without-replacement sum."""
        return self.m * self.mean_value

    @property
    def variance(self):
        """Exact variance of the without-replacement sum."""
        return self.sigma_hat2 * self.n / (self.n - 1) if self.n > 1 else 0.0


def swor_moments(d, m):
    d = np.asarray(d, dtype=np.float64)
    n = d.size
    mean = math.fsum(d) / n
    q = math.fsum((d - mean) ** 2)
    return SworMoments(n, m, mean, q, (m / n) * (1 - m / n) * q)


def llt_prediction(d, m, k):
    """Gaussian local approximation to ``P(S_m = k)``.

    Returns ``(prob, mu_hat, sigma_hat2)`` with ``mu_hat = m * mean(d)`` and
    ``sigma_hat2 = (m/n)(1 - m/n) sum (d_i - mean)^2``.
    """
    n = len(d)
    if not 0 < m < n:
        raise DegenerateRange(f"need 0 < m < |d|, got m={m}, |d|={n}")
    mo = swor_moments(d, m)
    if mo.q == 0:
        raise DegenerateSpread("all values are equal")
    mu = m * mo.mean_value
    s2 = mo.sigma_hat2
    prob = math.exp(-((k - mu) ** 2) / (2 * s2)) / math.sqrt(2 * math.pi * s2)
    return prob, mu, s2


def lindeberg_diagnostic(d, m, eps):
    """``(1/Q) sum over |d_i - mean| > eps * sigma_hat of (d_i - mean)^2``."""
    mo = swor_moments(d, m)
    if mo.q == 0:
        raise DegenerateSpread("all values are equal")
    dev = np.asarray(d, dtype=np.float64) - mo.mean_value
    big = np.abs(dev) > eps * math.sqrt(mo.sigma_hat2)
    return math.fsum(dev[big] ** 2) / mo.q


# ---------------------------------------------------------------------------
# regimes

REGIMES = ("PoissonFixed", "NormalDiverging", "SizePoisson", "GWPoisson", "GWNormal")


@dataclass(frozen=True)
class RegimePrediction:
    regime: str
    predicted_lambda: float = None
    mu: float = None
    sigma: float = None
    diagnostics: tuple = ()
    flags: tuple = field(default=())

    def to_dict(self):
        return {
            "regime": self.regime,
            "predictedLambda": self.predicted_lambda,
            "mu": self.mu,
            "sigma": self.sigma,
            "diagnostics": [list(x) for x in self.diagnostics],
            "flags": list(self.flags),
        }


def _pi_empirical(bn, stat):
    """``|n| * prod p_i(n)^{m(i)}`` and ``m^2 pi sum p_i(m)^2/p_i(n)`` as floats."""
    big, m = bn.size, stat.size
    logpi = 0.0
    for deg, mult in stat.items:
        if bn[deg] == 0:
            return 0.0, 0.0
        logpi += mult * math.log(bn[deg] / big)
    pi = math.exp(logpi)
    weights = sum((mult / m) ** 2 / (bn[deg] / big) for deg, mult in stat.items)
    return big * pi, m * m * pi * weights


def classify_regime(descriptor):
    """Label the limit regime a finite sequence of instances points to.

    ``descriptor`` is a mapping with ``family`` (``"FixedStatistic"`` or
    ``"GWConditioned"``) and ``target`` (a :class:`PlaneTree`, or
    ``{"size_exponent": "2/3", "a": ...}`` for growing fringe sizes). Fixed
    families give ``statistics`` (a list of :class:`DegreeStatistic`); GW
    families give ``offspring`` (a ``DegreeDistribution``) and ``sizes``.
    Only the supplied grid is evaluated; nothing is extrapolated.
    """
    family = descriptor.get("family")
    target = descriptor.get("target")
    if family not in ("FixedStatistic", "GWConditioned") or target is None:
        raise UnderspecifiedScenario("need a family and a target")
    diags = []
    flags = []
    if isinstance(target, dict):
        a = float(target.get("a", 1.0))
        if family == "FixedStatistic":
            stats_ = descriptor.get("statistics")
            if not stats_:
                raise UnderspecifiedScenario("fixed-statistic family needs statistics")
            sigma2 = float(empirical_distribution(stats_[-1]).variance)
            regime = "SizePoisson"
        else:
            p = descriptor.get("offspring")
            if p is None:
                raise UnderspecifiedScenario("GW family needs an offspring law")
            sigma2 = float(p.variance)
            regime = "GWPoisson"
            if p.span != 1:
                flags.append(f"lattice-span-{p.span}")
        lam = ts_lambda(a, sigma2)
        diags.append(("sigma2", sigma2))
        return RegimePrediction(regime, predicted_lambda=lam, diagnostics=tuple(diags), flags=tuple(flags))

    targets = descriptor.get("targets")
    if targets is None:
        targets = [target]
    if not all(isinstance(t, (PlaneTree, DegreeStatistic)) for t in targets):
        raise UnderspecifiedScenario("target must be a tree, statistic or size rule")
    stats_of = [t.statistic if isinstance(t, PlaneTree) else t for t in targets]
    if family == "FixedStatistic":
        stats_ = descriptor.get("statistics")
        if not stats_:
            raise UnderspecifiedScenario("fixed-statistic family needs statistics")
        if len(stats_of) == 1:
            stats_of = stats_of * len(stats_)
        if len(stats_of) != len(stats_):
            raise UnderspecifiedScenario("one target per statistic is required")
        lams, prods = [], []
        for bn, stat in zip(stats_, stats_of):
            lam_pi, prod = _pi_empirical(bn, stat)
            lam_pi *= count_trees(stat) if isinstance(target, DegreeStatistic) else 1
            lams.append(lam_pi)
            prods.append(prod)
            diags.append((f"n={bn.size}:n*pi", lam_pi))
            diags.append((f"n={bn.size}:m2*pi*weights", prod))
        if len(prods) > 1 and prods[-1] >= prods[0] and prods[-1] > 0.1:
            flags.append("second-order-condition-violated")
        poisson, normal = "PoissonFixed", "NormalDiverging"
        last_bn = stats_[-1]
    else:
        p = descriptor.get("offspring")
        sizes = descriptor.get("sizes")
        if p is None or not sizes:
            raise UnderspecifiedScenario("GW family needs an offspring law and sizes")
        if len(stats_of) == 1:
            stats_of = stats_of * len(sizes)
        lams = []
        for n, stat in zip(sizes, stats_of):
            logpi = 0.0
            for deg, mult in stat.items:
                pi = p.prob(deg)
                logpi = -math.inf if pi == 0 else logpi + mult * math.log(pi)
            cls = count_trees(stat) if isinstance(target, DegreeStatistic) else 1
            lams.append(n * cls * math.exp(logpi))
        diags.extend((f"n={n}:n*pi", v) for n, v in zip(sizes, lams))
        poisson, normal = "GWPoisson", "GWNormal"
        last_bn = None
    stat = stats_of[-1]
    if lams[-1] == 0 or (len(lams) > 1 and lams[-1] < lams[0] * 0.5 and lams[-1] < 1e-2):
        flags.append("open-problem")
    growing = len(lams) > 1 and lams[-1] > 2 * lams[0] and lams[-1] > 10
    if growing:
        mu = lams[-1]
        sigma = math.sqrt(lams[-1])
        if last_bn is not None and isinstance(target, PlaneTree):
            m1 = factorial_moment_tree(last_bn, target, 1).value
            m2 = factorial_moment_tree(last_bn, target, 2).value
            mu = float(m1)
            try:
                sigma = math.sqrt(max(float(variance_from_factorial(m1, m2)), 0.0))
            except PrecisionLoss:
                flags.append("variance-unstable")
        return RegimePrediction(normal, mu=mu, sigma=sigma, diagnostics=tuple(diags), flags=tuple(flags))
    return RegimePrediction(poisson, predicted_lambda=lams[-1], diagnostics=tuple(diags), flags=tuple(flags))
