import json
from importlib import resources

import jsonschema
import pytest

from genpoly.cli import main
from genpoly.config import RunConfig, load_config, parse_config_text
from genpoly.errors import PreconditionError


def schema(name):
    text = resources.files("genpoly").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, name, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    report = json.loads(out)
    jsonschema.validate(report, schema(name))
    return report


def test_eval_reports_value_and_frac(capsys):
    rep = run_json(capsys, "eval", "eval", "[| sqrt2*n |]", "--n", "5")
    row = rep["results"][0]
    assert row["value"] == 7
    assert abs(row["frac"]["approx"] - 0.0710678) < 1e-7
    assert rep["config"]["precision_cap"] == 4096


def test_eval_exact_tie(capsys):
    rep = run_json(capsys, "eval", "eval", "[| 1/2*n |]", "--n", "1")
    assert rep["results"][0]["value"] == 0 and rep["results"][0]["frac"] == "1/2"


def test_eval_negative_n_and_range(capsys):
    assert run_json(capsys, "eval", "eval", "n^2", "--n", "-3")["results"][0]["value"] == 9
    rep = run_json(capsys, "eval", "eval", "n^2", "--range", "-2:2")
    assert [r["value"] for r in rep["results"]] == [4, 1, 0, 1, 4]


def test_exit_codes(capsys, tmp_path):
    assert run(capsys, "eval", "[| n", "--n", "1")[0] == 2
    code, _, err = run(capsys, "eval", "[| (1/2 + 1/1" + "0" * 50 + "*sqrt2)*n |]", "--n", "1",
                       "--precision-cap", "128")
    assert code == 3
    jsonschema.validate(json.loads(err), schema("error"))
    assert run(capsys, "analyze", "--expr", "[| sqrt2*n + sqrt3*n^2 |]")[0] == 4
    assert run(capsys, "recur", "density", "--polys", "n", "--depth", "9",
               "--window", "0:10")[0] == 5
    assert run(capsys, "recur", "density", "--polys", "n^2,n^2", "--depth", "2",
               "--window", "0:10")[0] == 6


def test_analyze_golden_system(capsys, tmp_path):
    f = tmp_path / "sys.txt"
    f.write_text("# five elements\n[|a*n|] + 2*n\n[|b*n^3*[|c*n|]|] + [|g*n^3|]\n4*n^4\n"
                 "4*n^4 + n^3\n[|f*n|]*[|h*n|]\n")
    rep = run_json(capsys, "analyze", "analyze", str(f), "--symbols", "a,b,c,f,g,h")
    assert rep["weight_vector"] == [1, 1, 0, 2]
    assert rep["degree"] == 4


def test_analyze_nondegeneracy_witness(capsys):
    rep = run_json(capsys, "analyze", "analyze", "--expr", "n*[|2*pi*n|] + n",
                   "--expr", "[|2*pi*n^2|] + 2*n")
    assert rep["nondegenerate"] is False and rep["witness"] == [0, 1]


def test_normalize_with_window(capsys):
    rep = run_json(capsys, "normalize", "normalize", "[|n*[|2*pi*n^2 - [|2*pi*n^2|] + sqrt2*n|]|]",
                   "--window", "-300:300")
    assert rep["checks"]["violations"] == []
    assert rep["constraint"]["delta"] == "1/5"


def test_derive_window_check(capsys):
    rep = run_json(capsys, "derive", "derive", "[| sqrt2*n^2 |]", "--m", "3")
    assert rep["D"] == "[| (6*sqrt2*n) |]"
    assert rep["checks"]["window"] == [-1000, 1000] and rep["checks"]["violations"] == []


def test_derive_symbolic_shift(capsys):
    rep = run_json(capsys, "derive", "derive", "[|a*n*[|b*n^2|]|]", "--m", "m",
                   "--symbols", "a,b")
    assert rep["leading"]["exact"] is True
    assert "checks" not in rep


def test_qij_step_and_reduce(capsys):
    rep = run_json(capsys, "qij", "qij", "--polys", "[|sqrt2*n^2|]")
    assert rep["descended"] and rep["phi_after"] == [1]
    rep = run_json(capsys, "qij", "qij", "--polys", "n^2,n^2+n", "--reduce")
    assert rep["reached_degree_one"]


def test_sets_scan_and_classify(capsys, tmp_path):
    out = tmp_path / "members.txt"
    rep = run_json(capsys, "sets", "sets", "scan", "--eps", "0.1", "--exprs", "sqrt2*n",
                   "--window", "0:20", "--members-out", str(out))
    assert rep["members"] == [0, 5, 12, 17] and rep["max_gap"] == 7
    rep = run_json(capsys, "sets", "sets", "classify", "--members", str(out), "--window", "0:20")
    assert rep["syndetic"]["bound"] == 7


def test_recur_density_json_and_csv(capsys):
    rep = run_json(capsys, "recur-density", "recur", "density", "--system", "chacon",
                   "--polys", "n", "--depth", "2", "--window", "-1000:1000",
                   "--checkpoints", "10,1000")
    assert rep["coverage"] == 1.0 and rep["monotone"]
    code, out, _ = run(capsys, "recur", "density", "--polys", "n", "--depth", "2",
                       "--window", "-100:100", "--format", "csv")
    assert code == 0 and out.startswith("window_hi,coverage\n")


def test_recur_hits_and_syndetic(capsys):
    rep = run_json(capsys, "recur-hits", "recur", "hits", "--system", "rotation", "--U", "0:1/10",
                   "--V", "0:1/10", "--poly", "n", "--window", "0:20")
    assert {0, 5, 12, 17} <= set(rep["hits"])
    rep = run_json(capsys, "recur-syndetic", "recur", "syndetic", "--system", "full-shift:2",
                   "--U", "0", "--V", "1", "--polys", "n", "--window", "-200:200")
    assert rep["syndetic"]["status"] == "holds-on-window"


def test_output_file_and_text_format(capsys, tmp_path):
    path = tmp_path / "r.txt"
    assert main(["eval", "n", "--n", "2", "--format", "text", "--output", str(path)]) == 0
    assert path.read_text().startswith("command: eval")


def test_runs_are_deterministic(capsys):
    a = run(capsys, "recur", "density", "--system", "full-shift:2", "--polys", "n^2",
            "--depth", "3", "--window", "-500:500")[1]
    b = run(capsys, "recur", "density", "--system", "full-shift:2", "--polys", "n^2",
            "--depth", "3", "--window", "-500:500")[1]
    assert a == b


# --- configuration -----------------------------------------------------------------------

def test_config_file_and_overrides(tmp_path, capsys):
    f = tmp_path / "run.cfg"
    f.write_text("# comment\nprecision_cap = 1024\nN = 50\nhorizon=1e4\n")
    cfg = load_config(str(f), {"seed": "3"}, environ={})
    assert (cfg.precision_cap, cfg.N, cfg.horizon, cfg.seed) == (1024, 50, 10000, 3)
    rep = run_json(capsys, "eval", "eval", "n", "--n", "1", "--config", str(f), "--set", "N=7")
    assert rep["config"]["N"] == 7 and rep["config"]["precision_cap"] == 1024


def test_env_precision_cap(monkeypatch):
    monkeypatch.setenv("GENPOLY_PRECISION_CAP", "512")
    assert load_config().precision_cap == 512
    assert load_config(overrides={"precision_cap": 256}).precision_cap == 256


@pytest.mark.parametrize("bad", [{"N": 0}, {"format": "xml"}, {"eps": "1/2"},
                                 {"precision_start": 8192}, {"nonsense": 1}])
def test_config_validation(bad):
    with pytest.raises(PreconditionError):
        load_config(overrides=bad, environ={})


def test_config_text_errors():
    with pytest.raises(PreconditionError):
        parse_config_text("just words\n")


def test_config_json_round_trip():
    cfg = RunConfig()
    assert load_config(overrides=cfg.to_json(), environ={}) == cfg
