"""Scenario configuration: JSON schema, validation, and the builders that
turn a grid point into a concrete degree statistic or offspring law and a
list of count targets."""
import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from importlib import resources

import numpy as np

from ..errors import ConfigError, FringeError
from ..treecore import DegreeDistribution, DegreeStatistic, PlaneTree, count_trees

SCHEMA_VERSION = 1
FAMILIES = ("FixedStatistic", "GWConditioned", "SworSum")
LAW_KINDS = ("proportions", "statistic", "star", "periodic", "offspring", "power_tail")
TARGET_KINDS = ("tree", "statistic", "size", "star", "calibrated", "draws")


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    family: str
    law: dict
    grid: tuple
    targets: tuple
    replicates: int
    seed: int
    expect: str = None
    notes: str = ""
    schema_version: int = SCHEMA_VERSION
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        out = {
            "schema_version": self.schema_version,
            "name": self.name,
            "family": self.family,
            "law": self.law,
            "grid": list(self.grid),
            "targets": [dict(t) for t in self.targets],
            "replicates": self.replicates,
            "seed": self.seed,
        }
        if self.expect is not None:
            out["expect"] = self.expect
        if self.notes:
            out["notes"] = self.notes
        return out

    def with_overrides(self, replicates=None, seed=None):
        out = self
        if replicates is not None:
            out = replace(out, replicates=int(replicates))
        if seed is not None:
            out = replace(out, seed=int(seed))
        validate_config(out)
        return out


def _require(cond, msg):
    if not cond:
        raise ConfigError(msg)


def config_from_dict(data):
    _require(isinstance(data, dict), "scenario must be a JSON object")
    version = data.get("schema_version", SCHEMA_VERSION)
    _require(version == SCHEMA_VERSION, f"unsupported schema_version {version}")
    known = {"schema_version", "name", "family", "law", "grid", "targets", "replicates", "seed", "expect", "notes"}
    unknown = set(data) - known
    _require(not unknown, f"unknown fields: {sorted(unknown)}")
    try:
        cfg = ScenarioConfig(
            name=str(data["name"]),
            family=data["family"],
            law=dict(data["law"]),
            grid=tuple(int(x) for x in data["grid"]),
            targets=tuple(dict(t) for t in data["targets"]),
            replicates=int(data.get("replicates", 1000)),
            seed=int(data.get("seed", 0)),
            expect=data.get("expect"),
            notes=str(data.get("notes", "")),
        )
    except KeyError as exc:
        raise ConfigError(f"missing field {exc.args[0]!r}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    validate_config(cfg)
    return cfg


def load_config(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return config_from_dict(data)


def builtin_names():
    files = resources.files(__package__).joinpath("scenarios")
    return sorted(p.name[:-5] for p in files.iterdir() if p.name.endswith(".json"))


def load_builtin(name):
    files = resources.files(__package__).joinpath("scenarios")
    path = files.joinpath(f"{name}.json")
    if not path.is_file():
        raise ConfigError(f"no built-in scenario {name!r}; available: {', '.join(builtin_names())}")
    return config_from_dict(json.loads(path.read_text()))


def validate_config(cfg):
    _require(cfg.family in FAMILIES, f"family must be one of {FAMILIES}")
    _require(cfg.law.get("kind") in LAW_KINDS, f"law kind must be one of {LAW_KINDS}")
    _require(len(cfg.grid) >= 1, "grid must be nonempty")
    _require(all(b > a for a, b in zip(cfg.grid, cfg.grid[1:])), "grid must be strictly increasing")
    _require(all(n >= 1 for n in cfg.grid), "grid sizes must be positive")
    _require(cfg.replicates >= 1, "replicates must be at least 1")
    _require(len(cfg.targets) >= 1, "at least one target is required")
    gw_laws = ("offspring", "power_tail")
    if cfg.family == "GWConditioned":
        _require(cfg.law["kind"] in gw_laws, "GW scenarios need an offspring or power_tail law")
    else:
        _require(cfg.law["kind"] not in gw_laws, "offspring laws need the GWConditioned family")
    for t in cfg.targets:
        _require(t.get("kind") in TARGET_KINDS, f"target kind must be one of {TARGET_KINDS}")
        if (t["kind"] == "draws") != (cfg.family == "SworSum"):
            raise ConfigError("draws targets go with the SworSum family, and only there")
        _require(t.get("rounding", "nearest-even") == "nearest-even", "only nearest-even rounding is supported")
    # building every grid point validates sizes and target rules
    for n in cfg.grid:
        point = build_point(cfg, n)
        for tgt in point.targets:
            _require(1 <= tgt.size <= point.n, f"target {tgt.label} has size outside 1..{point.n}")


# ---------------------------------------------------------------------------
# laws


def _parse_pmf(raw):
    if isinstance(raw, str):
        raw = dict(part.split(":") for part in raw.replace(" ", "").split(",") if part)
    pmf = {}
    for k, v in raw.items():
        pmf[int(k)] = Fraction(v) if isinstance(v, str) else float(v)
    return pmf


def statistic_from_proportions(p, n):
    """Degree statistic of size ``n`` close to ``n * p``.

    Degrees ``>= 2`` get ``round(n p_i)`` vertices (ties to even); the counts
    of degrees 0 and 1 are then the unique values satisfying the tree identity
    at size ``n``.
    """
    high = {i: int(round(float(w) * n)) for i, w in p.items() if i >= 2}
    n0 = 1 + sum((i - 1) * c for i, c in high.items())
    n1 = n - n0 - sum(high.values())
    if n1 < 0 or (float(p.get(1, 0)) == 0 and n1 != 0):
        raise ConfigError(f"size {n} cannot be matched to the proportions {p}")
    counts = dict(high)
    counts[0] = n0
    counts[1] = n1
    return DegreeStatistic(counts)


def periodic_statistic(n, b):
    """Statistic on degrees {0, 1, 2} with ``n(1)`` about ``b n^{1/3}``.

    ``n - n(1)`` must be odd; if the rounded value has the wrong parity it is
    raised by one.
    """
    n1 = int(round(b * n ** (1 / 3)))
    if (n - n1) % 2 == 0:
        n1 += 1
    n2 = (n - n1 - 1) // 2
    return DegreeStatistic({0: n2 + 1, 1: n1, 2: n2})


def star_statistic(k):
    """Root with ``k - 1`` leaf children (``k`` vertices)."""
    if k < 2:
        return DegreeStatistic({0: 1})
    return DegreeStatistic({0: k - 1, k - 1: 1})


def power_tail_distribution(alpha, truncation):
    """``p_i`` proportional to ``i^(-alpha-1)`` on ``1..truncation``, with ``p_0``
    chosen so that the mean is exactly 1."""
    i = np.arange(1, truncation + 1, dtype=np.float64)
    w = i ** (-alpha - 1.0)
    c = 1.0 / math.fsum(i * w)
    p0 = 1.0 - c * math.fsum(w)
    if p0 <= 0:
        raise ConfigError(f"alpha={alpha} leaves no room for leaves at mean 1")
    support = np.arange(truncation + 1)
    probs = np.concatenate([[p0], c * w])
    return DegreeDistribution.from_arrays(support, probs)


def build_offspring(law):
    kind = law["kind"]
    if kind == "offspring":
        try:
            return DegreeDistribution(_parse_pmf(law["p"]))
        except FringeError as exc:
            raise ConfigError(str(exc)) from exc
    if kind == "power_tail":
        return power_tail_distribution(float(law.get("alpha", 1.5)), int(law.get("truncation", 10**6)))
    raise ConfigError(f"law {kind!r} is not an offspring law")


def build_statistic(law, n):
    kind = law["kind"]
    if kind == "proportions":
        return statistic_from_proportions(_parse_pmf(law["p"]), n)
    if kind == "statistic":
        bn = DegreeStatistic.parse(law["statistic"])
        if bn.size != n:
            raise ConfigError(f"explicit statistic has size {bn.size}, grid says {n}")
        return bn
    if kind == "star":
        return star_statistic(n)
    if kind == "periodic":
        return periodic_statistic(n, float(law.get("b", 1.0)))
    raise ConfigError(f"law {kind!r} does not define a degree statistic")


# ---------------------------------------------------------------------------
# targets


@dataclass(frozen=True)
class Target:
    kind: str  # "tree", "statistic", "size", "draws"
    label: str
    size: int
    tree: PlaneTree = None
    statistic: DegreeStatistic = None
    rule: dict = None


def size_rule(n, a, exponent="2/3", offset=0):
    """``round(a * n**exponent) + offset`` with ties to even."""
    e = Fraction(exponent)
    return int(round(a * n ** float(e))) + int(offset)


def path_tree(length):
    return PlaneTree([1] * (length - 1) + [0])


def forked_path_tree(length):
    """Path ending in a cherry: ``length - 3`` unary vertices then a binary one."""
    return PlaneTree([1] * (length - 3) + [2, 0, 0])


def _calibrate(shape, lam, log_pi_of, max_len):
    # shortest tree of the family whose predicted mean drops to lam or below;
    # the predicted mean is nonincreasing in the length for both shapes.
    build = path_tree if shape == "path" else forked_path_tree
    lo = 1 if shape == "path" else 3
    best = None
    for length in range(lo, max_len + 1):
        t = build(length)
        val = log_pi_of(t)
        best = t
        if val <= math.log(lam):
            break
    return best


def build_targets(cfg, n, bn=None, p=None):
    out = []
    for spec in cfg.targets:
        kind = spec["kind"]
        if kind == "tree":
            t = PlaneTree.parse(spec["tree"])
            out.append(Target("tree", f"tree={t}", t.size, tree=t))
        elif kind == "statistic":
            s = DegreeStatistic.parse(spec["statistic"])
            out.append(Target("statistic", f"statistic={s}", s.size, statistic=s))
        elif kind == "size":
            if "m" in spec:
                m = int(spec["m"]) + int(spec.get("offset", 0))
            else:
                m = size_rule(n, float(spec.get("a", 1.0)), spec.get("exponent", "2/3"), spec.get("offset", 0))
            out.append(Target("size", f"size={m}", m, rule=dict(spec)))
        elif kind == "star":
            t = PlaneTree([n - 1] + [0] * (n - 1)) if n > 1 else PlaneTree([0])
            out.append(Target("tree", f"star={n}", t.size, tree=t, rule=dict(spec)))
        elif kind == "calibrated":
            lam = float(spec.get("lambda", 1.0))
            shape = spec.get("shape", "path")
            if shape not in ("path", "forked_path"):
                raise ConfigError(f"unknown calibrated shape {shape!r}")
            if bn is not None:
                def log_pred(t):
                    s = t.statistic
                    if any(bn[d] < m for d, m in s.items):
                        return -math.inf
                    return math.log(bn.size * count_trees(s)) + sum(
                        m * math.log(bn[d] / bn.size) for d, m in s.items
                    )
            else:
                def log_pred(t):
                    s = t.statistic
                    terms = [math.log(n * count_trees(s))]
                    for d, m in s.items:
                        pd = p.prob(d)
                        if pd == 0:
                            return -math.inf
                        terms.append(m * math.log(pd))
                    return math.fsum(terms)

            t = _calibrate(shape, lam, log_pred, n)
            stat_target = shape == "forked_path"
            if stat_target:
                out.append(Target("statistic", f"statistic={t.statistic}", t.size, statistic=t.statistic, rule=dict(spec)))
            else:
                out.append(Target("tree", f"tree={t}", t.size, tree=t, rule=dict(spec)))
        elif kind == "draws":
            m = int(spec["m"]) if "m" in spec else size_rule(n, float(spec.get("a", 1.0)), spec.get("exponent", "2/3"))
            out.append(Target("draws", f"draws={m}", m, rule=dict(spec)))
        else:  # pragma: no cover - validated earlier
            raise ConfigError(f"unknown target kind {kind!r}")
    return tuple(out)


@dataclass(frozen=True)
class GridPoint:
    index: int
    n: int
    statistic: DegreeStatistic
    offspring: DegreeDistribution
    targets: tuple


_OFFSPRING_CACHE = {}


def build_point(cfg, n, index=0):
    if cfg.family == "GWConditioned":
        key = json.dumps(cfg.law, sort_keys=True)
        p = _OFFSPRING_CACHE.get(key)
        if p is None:
            p = _OFFSPRING_CACHE[key] = build_offspring(cfg.law)
        return GridPoint(index, n, None, p, build_targets(cfg, n, p=p))
    bn = build_statistic(cfg.law, n)
    return GridPoint(index, n, bn, None, build_targets(cfg, n, bn=bn))
