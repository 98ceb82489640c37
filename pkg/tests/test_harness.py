import json
import math

import pytest

from fringetrees.errors import ConfigError
from fringetrees.harness import (
    CSV_HEADER,
    builtin_names,
    condition_diagnostics,
    config_from_dict,
    load_builtin,
    load_config,
    report_from_json,
    report_to_csv,
    report_to_json,
    run_scenario,
)
from fringetrees.harness.config import (
    periodic_statistic,
    power_tail_distribution,
    size_rule,
    statistic_from_proportions,
)
from fringetrees.harness.diagnostics import limit_support
from fringetrees.treecore import DegreeStatistic


def _cfg(**over):
    base = {
        "name": "tiny",
        "family": "FixedStatistic",
        "law": {"kind": "statistic", "statistic": "0:2,2:1"},
        "grid": [3],
        "targets": [{"kind": "tree", "tree": "2,0,0"}],
        "replicates": 100,
        "seed": 1,
    }
    base.update(over)
    return config_from_dict(base)


def test_single_tree_class_histogram():
    rep = run_scenario(_cfg())
    tgt = rep["points"][0]["targets"][0]
    assert tgt["histogram"] == {"1": 100}
    assert tgt["exactMean"] == 1.0 and tgt["exactVariance"] == 0.0


def test_leaf_target_is_point_mass():
    law = {"kind": "proportions", "p": {"0": 0.3, "1": 0.4, "2": 0.3}}
    rep = run_scenario(_cfg(law=law, grid=[200], targets=[{"kind": "tree", "tree": "0"}], replicates=30))
    point = rep["points"][0]
    n0 = DegreeStatistic.parse(point["statistic"])[0]
    assert point["targets"][0]["histogram"] == {str(n0): 30}


def test_determinism_across_workers():
    cfg = load_builtin("fixed-growing-target-poisson").with_overrides(replicates=40)
    a = run_scenario(cfg, workers=1)
    b = run_scenario(cfg, workers=2)
    assert report_to_json(a) == report_to_json(b)


def test_seed_changes_results():
    cfg = load_builtin("fixed-small-target-normal").with_overrides(replicates=30)
    a = run_scenario(cfg)
    b = run_scenario(cfg.with_overrides(seed=cfg.seed + 1))
    assert a["points"][0]["targets"][0]["histogram"] != b["points"][0]["targets"][0]["histogram"]


def test_json_roundtrip_and_csv_header():
    rep = run_scenario(_cfg(grid=[3], replicates=10))
    assert report_from_json(report_to_json(rep)) == json.loads(json.dumps(rep))
    text = report_to_csv(rep)
    lines = text.splitlines()
    assert lines[0] == (
        "scenario,grid_index,n,target,target_size,replicates,empirical_mean,empirical_variance,"
        "exact_mean,exact_variance,regime,predicted_lambda,tv_poisson,ks_statistic,ks_pvalue,"
        "delta,cai_devroye,flags,histogram"
    )
    assert lines[0] == CSV_HEADER
    assert lines[1].endswith(",1:10")


def test_timing_is_opt_in():
    cfg = _cfg(replicates=5)
    assert "timing" not in json.dumps(run_scenario(cfg))
    assert "backend" in run_scenario(cfg, record_timing=True)


def test_star_scenario_flags_violation():
    rep = run_scenario(load_builtin("star-degenerate").with_overrides(replicates=5))
    for point in rep["points"]:
        tgt = point["targets"][0]
        assert tgt["histogram"] == {"1": 5}
        k = point["n"]
        assert tgt["prediction"]["nPi"] == pytest.approx((1 - 1 / k) ** (k - 1), rel=1e-9)
    assert "second-order-condition-violated" in rep["regime"]["flags"]


def test_budget_degrades_exact_fields():
    cfg = _cfg(
        law={"kind": "proportions", "p": {"0": 0.3, "1": 0.4, "2": 0.3}},
        grid=[400],
        targets=[{"kind": "size", "m": 20}],
        replicates=5,
    )
    rep = run_scenario(cfg, budget=10)
    tgt = rep["points"][0]["targets"][0]
    assert tgt["exactMean"] is None
    assert "exact-budget-exceeded" in tgt["flags"]


@pytest.mark.parametrize(
    "bad",
    [
        {"family": "Nope"},
        {"grid": [5, 3]},
        {"replicates": 0},
        {"targets": []},
        {"targets": [{"kind": "size", "m": 2, "rounding": "floor"}]},
        {"law": {"kind": "offspring", "p": "0:0.5,2:0.5"}},
        {"targets": [{"kind": "draws", "m": 2}]},
        {"extra_field": 1},
        {"schema_version": 9},
    ],
)
def test_config_validation(bad):
    with pytest.raises(ConfigError):
        _cfg(**bad)


def test_config_file_loading(tmp_path):
    path = tmp_path / "c.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(path)
    path.write_text(json.dumps(_cfg().to_dict()))
    assert load_config(path) == _cfg()
    with pytest.raises(ConfigError):
        load_builtin("no-such-scenario")


def test_builtins_validate():
    names = builtin_names()
    assert len(names) >= 10
    for name in names:
        assert load_builtin(name).name == name


def test_law_builders():
    bn = statistic_from_proportions({0: 0.55, 1: 0.2, 2: 0.15, 5: 0.1}, 250_000)
    assert bn.as_dict() == {0: 137_501, 1: 49_999, 2: 37_500, 5: 25_000}
    for n in (1000, 1001, 99_999):
        b = periodic_statistic(n, 1.0)
        assert b.size == n and set(b.support) <= {0, 1, 2}
    p = power_tail_distribution(1.5, 10_000)
    assert p.mean == pytest.approx(1.0, abs=1e-9) and p.prob(0) > 0
    assert size_rule(1000, 1.0) == 100 and size_rule(1000, 1.0, offset=1) == 101
    assert size_rule(99_999, 1.0) == round(99_999 ** (2 / 3))


def test_condition_diagnostics():
    bn = DegreeStatistic({0: 31, 1: 30, 2: 20, 3: 5})
    rows = condition_diagnostics([bn, bn])
    assert all(r["supDiffToLast"] == 0 for r in rows)
    periodic = [periodic_statistic(n, 1.0) for n in (10**3, 10**4, 10**5)]
    assert limit_support(periodic) == [0, 2]
    assert condition_diagnostics(periodic)[-1]["limitSpan"] == 2
    assert condition_diagnostics(periodic)[-1]["span"] == 1
    # a sequence whose degree variance diverges: one vertex of growing degree
    growing = [DegreeStatistic({0: k, 1: n - k - 1, k: 1}) for n, k in ((100, 10), (10_000, 1000))]
    var = [r["variance"] for r in condition_diagnostics(growing)]
    assert var[1] > 10 * var[0]
    assert not math.isnan(var[1])


@pytest.mark.parametrize("name", ["fixed-small-target-normal", "fixed-growing-target-poisson", "fixed-class-count-poisson"])
def test_empirical_means_agree_with_exact(name):
    rep = run_scenario(load_builtin(name).with_overrides(replicates=200))
    checked = 0
    for point in rep["points"]:
        for tgt in point["targets"]:
            if tgt["exactMean"] is None:
                continue
            checked += 1
            sd = math.sqrt(tgt["exactVariance"])
            assert abs(tgt["empiricalMean"] - tgt["exactMean"]) <= 5 * sd / math.sqrt(200) + 1e-12
            assert tgt["meanWithin5SE"]
    assert checked
