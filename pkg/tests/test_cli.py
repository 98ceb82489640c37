import json
import subprocess
import sys

import pytest

from fringetrees.cli import main
from fringetrees.harness import CSV_HEADER


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_sample_is_reproducible(capsys):
    _, a, _ = run(capsys, "sample", "--statistic", "0:3,1:1,3:1", "--replicates", "5", "--seed", "4")
    _, b, _ = run(capsys, "sample", "--statistic", "0:3,1:1,3:1", "--replicates", "5", "--seed", "4")
    assert a == b and len(json.loads(a)) == 5
    code, out, _ = run(capsys, "sample", "--offspring", "0:0.5,2:0.5", "--size", "7", "--format", "csv")
    assert code == 0 and out.splitlines()[0] == "replicate,tree"


def test_count_and_moments(capsys):
    code, out, _ = run(capsys, "count", "--host", "3,0,2,0,0,1,0", "--tree", "2,0,0")
    assert code == 0 and json.loads(out)[0]["count"] == 1
    code, out, _ = run(capsys, "moments", "--statistic", "0:4,2:3", "--tree", "2,0,0", "--order", "2")
    assert json.loads(out)[0]["rational"] == "2/5"
    code, out, _ = run(capsys, "moments", "--statistic", "0:2,2:1", "--size", "2")
    assert json.loads(out)[0]["rational"] == "0/1"


def test_bounds_and_llt(capsys):
    code, out, _ = run(capsys, "bounds", "--statistic", "0:4,2:3", "--tree", "2,0,0")
    rep = json.loads(out)[0]
    assert rep["lambdaExact"] == "6/5" and rep["deltaExact"] == "8/5"
    code, out, _ = run(capsys, "llt", "--statistic", "0:21,1:20,2:10,3:5", "--draws", "20")
    assert code == 0 and json.loads(out)["supScaledError"] < 0.2


def test_enumerate(capsys):
    code, out, _ = run(capsys, "enumerate", "--statistic", "0:3,1:1,3:1", "--format", "csv")
    assert code == 0 and len(out.splitlines()) == 4
    code, out, _ = run(capsys, "enumerate", "--statistic", "0:2,2:1")
    assert json.loads(out)["trees"] == ["2,0,0"]


def test_scenario_list_and_run(capsys, tmp_path):
    code, out, _ = run(capsys, "scenario", "list")
    assert "star-degenerate" in out.split()
    dest = tmp_path / "r.csv"
    code, _, _ = run(capsys, "scenario", "run", "star-degenerate", "--replicates", "3", "--format", "csv", "--out", str(dest))
    assert code == 0 and dest.read_text().splitlines()[0] == CSV_HEADER
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({
        "name": "file", "family": "FixedStatistic", "law": {"kind": "statistic", "statistic": "0:2,2:1"},
        "grid": [3], "targets": [{"kind": "tree", "tree": "2,0,0"}], "replicates": 4, "seed": 0,
    }))
    code, out, _ = run(capsys, "--seed", "9", "scenario", "run", str(cfg))
    rep = json.loads(out)
    assert rep["seed"]["masterSeed"] == 9 and rep["points"][0]["targets"][0]["histogram"] == {"1": 4}


def test_diagnose(capsys):
    code, out, _ = run(capsys, "diagnose", "--scenario", "periodic-parity")
    assert code == 0 and json.loads(out)[0]["limitSpan"] == 2


def test_exit_codes(capsys, tmp_path):
    assert run(capsys, "count", "--host", "2,0", "--size", "1")[0] == 2
    assert run(capsys, "scenario", "run", "no-such-scenario")[0] == 2
    assert run(capsys, "enumerate", "--statistic", "0:10,2:9", "--budget", "10")[0] == 3
    bad = tmp_path / "missing" / "out.json"
    assert run(capsys, "scenario", "run", "star-degenerate", "--replicates", "2", "--out", str(bad))[0] == 4
    with pytest.raises(SystemExit):
        main(["sample"])


def test_module_entry_point():
    out = subprocess.run(
        [sys.executable, "-m", "fringetrees", "enumerate", "--statistic", "0:2,2:1", "--format", "csv"],
        capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "2,0,0"
