import json
import subprocess
import sys
from pathlib import Path

import pytest

from hypocalc import cli

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

PAIRS = [
    ("filtration", "heisenberg"), ("osculating", "heisenberg"), ("symbol", "heisenberg"),
    ("filtration", "cusp"), ("cone", "cusp"), ("symbol", "cusp"),
    ("cone", "grushin"), ("cone", "sextic"), ("cone", "flat"),
    ("filtration", "flat_line"), ("osculating", "flat_line"),
    ("rockland", "ladder_crit"), ("symbol", "sublaplacian"), ("rockland", "sublaplacian"),
]


def write(tmp_path, text, name="problem.toml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def report_of(command, config, capsys, *extra):
    code = cli.main([command, "--config", str(config), "--quiet", *extra])
    return code, json.loads(capsys.readouterr().out)


@pytest.mark.parametrize("command,name", PAIRS)
def test_bundled_configs_deterministic(command, name):
    cfg = cli.load_config(CONFIGS / f"{name}.toml", command)
    first, files_a, code = cli.run(command, cfg)
    second, files_b, _ = cli.run(command, cli.load_config(CONFIGS / f"{name}.toml", command))
    assert code == cli.EXIT_OK
    assert cli.dumps(first) == cli.dumps(second)
    assert files_a == files_b


def test_bch_small_run_deterministic(tmp_path):
    path = write(tmp_path, """
dim = 2
[bch]
suite = false
orders = [1]
pairs = [{ x = ["dx"], y = ["x*dy"], point = [0.1, 0.2] }]
""")
    a, _, code = cli.run("bch", cli.load_config(path, "bch"))
    b, _, _ = cli.run("bch", cli.load_config(path, "bch"))
    assert code == cli.EXIT_OK and cli.dumps(a) == cli.dumps(b)
    assert a["results"]["all_passed"]


def test_cone_residual_on_cusp(capsys):
    code, rep = report_of("cone", CONFIGS / "cusp.toml", capsys)
    assert code == 0
    res = rep["results"]
    assert res["samples"] >= 1000
    assert res["relations"]["xi1*xi3 - xi2^2"] < 1e-8
    verdicts = {tuple(m["candidate"]): m["verdict"] for m in res["membership"]}
    assert verdicts[(1.0, 1.0, 1.0)] == "in" and verdicts[(1.0, 0.0, 1.0)] == "out"
    assert res["invariance"]["ok"]


def test_rockland_sweep(capsys):
    code, rep = report_of("rockland", CONFIGS / "ladder_crit.toml", capsys)
    assert code == 0
    sweep = {str(s["lambda_spec"]): s["hypoelliptic"] for s in rep["results"]["criterion"]["sweep"]}
    assert (sweep["0"], sweep["lambda1"], sweep["gap1"]) == (True, False, True)


def test_report_envelope(capsys):
    code, rep = report_of("osculating", CONFIGS / "heisenberg.toml", capsys)
    assert code == 0
    assert set(rep) == {"command", "config_digest", "version", "results"}
    assert len(rep["config_digest"]) == 64


def test_seed_override_changes_samples(capsys):
    _, a = report_of("cone", CONFIGS / "grushin.toml", capsys, "--seed", "1")
    _, b = report_of("cone", CONFIGS / "grushin.toml", capsys, "--seed", "1")
    _, c = report_of("cone", CONFIGS / "grushin.toml", capsys, "--seed", "2")
    assert a == b and a["config_digest"] != c["config_digest"]


def test_out_directory_and_csv(tmp_path, capsys):
    out = tmp_path / "run"
    assert cli.main(["cone", "--config", str(CONFIGS / "cusp.toml"), "--quiet", "--out", str(out)]) == 0
    assert capsys.readouterr().out == ""
    report = (out / "report.json").read_bytes()
    assert b"\r\n" not in report and json.loads(report)["command"] == "cone"
    assert (out / "cone_points.csv").read_text().startswith("xi1,xi2,xi3\n")
    assert cli.main(["filtration", "--config", str(CONFIGS / "heisenberg.toml"), "--quiet", "--format", "csv"]) == 0
    assert capsys.readouterr().out.startswith("point,dims\n")


def test_empty_generators_exit_2(tmp_path, capsys):
    path = write(tmp_path, "dim = 2\ndepth = 2\ngenerators = []\npoints = [[0, 0]]\n")
    assert cli.main(["filtration", "--config", path, "--quiet"]) == cli.EXIT_INVALID
    assert "generators" in capsys.readouterr().err


def test_every_problem_is_listed(tmp_path, capsys):
    path = write(tmp_path, """
dim = 2
depth = "two"
bogus = 1
generators = [{ field = "dx", weight = 1 }]
points = [[0, 0]]
[cone]
colour = "red"
""")
    assert cli.main(["cone", "--config", path, "--quiet"]) == cli.EXIT_INVALID
    err = capsys.readouterr().err
    for key in ("depth", "bogus", "cone.colour"):
        assert key in err


def test_json_config_accepted(tmp_path, capsys):
    path = write(tmp_path, json.dumps({"dim": 2, "depth": 3, "points": [[0, 1]],
                                       "generators": [{"field": "dx", "weight": 1}, {"field": "x*dy", "weight": 2}]}),
                 "problem.json")
    code, rep = report_of("osculating", path, capsys)
    assert code == 0 and rep["command"] == "osculating"


def test_bad_seed_rejected(capsys):
    assert cli.main(["cone", "--config", str(CONFIGS / "cusp.toml"), "--seed", "-1", "--quiet"]) == cli.EXIT_INVALID


def test_inconclusive_exit_code(tmp_path, capsys):
    path = write(tmp_path, '[rockland]\noperators = ["D^4 + y^4"]\nM = 4\nladder = [4, 8]\n')
    assert cli.main(["rockland", "--config", path, "--quiet"]) == cli.EXIT_INCONCLUSIVE


def test_console_script_help():
    out = subprocess.run([sys.executable, "-m", "hypocalc.cli", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    for name in cli.COMMANDS:
        assert name in out.stdout
