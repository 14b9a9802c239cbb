import csv
import json
import math
from importlib import resources

import jsonschema
import numpy as np
import pytest

from hawkes_scaling.cli import main, parse_grid
from hawkes_scaling.price_models import macro_correlation
from hawkes_scaling.config import load_model

from .test_config import CONFIGS


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_parse_grid():
    assert parse_grid("1,2.5").tolist() == [1.0, 2.5]
    assert np.allclose(parse_grid("logspace:-1:1:3"), [0.1, 1.0, 10.0])
    assert np.allclose(parse_grid("linspace:-1:1:5"), [-1, -0.5, 0, 0.5, 1])


@pytest.mark.parametrize("bad", ["", "logspace:1:2", "a,b"])
def test_bad_grids_exit_2(tmp_path, bad):
    with pytest.raises(SystemExit) as info:
        main(["theory", "--model", str(CONFIGS / "micro.yaml"), "--out", str(tmp_path / "o.csv"), "--delta", bad])
    assert info.value.code == 2


def test_simulate_zero_baseline_writes_header_only(tmp_path):
    cfg = write(tmp_path, "z.yaml", "model: hawkes\nmu: [0.0]\nkernels: [[{type: exp, alpha: 0.5, beta: 1.0}]]\n")
    out = tmp_path / "ev.csv"
    assert main(["simulate", "--model", cfg, "--out", str(out), "--seed", "1", "--horizon", "100"]) == 0
    assert out.read_text() == "time,component\n"


def test_simulate_is_byte_reproducible(tmp_path):
    args = ["simulate", "--model", str(CONFIGS / "micro.yaml"), "--seed", "42", "--horizon", "200"]
    main(args + ["--out", str(tmp_path / "a.csv")])
    main(args + ["--out", str(tmp_path / "b.csv")])
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_simulate_reference_rate(tmp_path):
    out = tmp_path / "ev.csv"
    main(["simulate", "--model", str(CONFIGS / "micro.yaml"), "--out", str(out), "--seed", "9", "--horizon", "1000"])
    n = len(rows(out))
    # total count: mean 4000, variance 16 * 1000 from the macroscopic covariance
    assert abs(n - 4000) <= 4 * math.sqrt(16_000)


def test_simulate_replicas(tmp_path):
    main(["simulate", "--model", str(CONFIGS / "micro.yaml"), "--out", str(tmp_path / "r.csv"),
          "--seed", "1", "--horizon", "10", "--replicas", "3", "--jobs", "2"])
    assert sorted(p.name for p in tmp_path.glob("r_*.csv")) == ["r_0000.csv", "r_0001.csv", "r_0002.csv"]


def test_seed_is_mandatory(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["simulate", "--model", str(CONFIGS / "micro.yaml"), "--out", str(tmp_path / "x"), "--horizon", "1"])
    assert info.value.code == 2


def test_theory_sigma2_without_excitation(tmp_path):
    cfg = write(tmp_path, "m.yaml", "model: microstructure\nnu: 1.5\nphi: {type: zero}\n")
    out = tmp_path / "t.csv"
    assert main(["theory", "--model", cfg, "--out", str(out), "--delta", "1"]) == 0
    first = rows(out)[0]
    assert first["quantity"] == "sigma2" and float(first["value"]) == pytest.approx(3.0)


def test_theory_leadlag_sweep(tmp_path):
    out = tmp_path / "t.csv"
    assert main(["theory", "--model", str(CONFIGS / "epps.yaml"), "--out", str(out),
                 "--delta", "logspace:-2:4:7", "--tau", "linspace:-2:2:9"]) == 0
    recs = rows(out)
    last = recs[-1]
    var = macro_correlation(load_model(CONFIGS / "epps.yaml")).cov[0, 0]
    assert last["quantity"] == "c11" and float(last["delta"]) == 1e4
    assert float(last["value"]) == pytest.approx(var, rel=5e-3)
    c11 = {(float(r["delta"]), float(r["tau"])): float(r["value"]) for r in recs if r["quantity"] == "c11"}
    for (d, t), v in c11.items():
        assert abs(v - c11[(d, -t)]) <= 1e-10


def test_theory_generic_model_and_summary(tmp_path):
    out, summ = tmp_path / "v.csv", tmp_path / "s.json"
    assert main(["theory", "--model", str(CONFIGS / "micro_hawkes.yaml"), "--out", str(out),
                 "--delta", "1,10", "--tau", "0,1", "--summary", str(summ)]) == 0
    recs = rows(out)
    assert list(recs[0]) == ["delta", "tau", "i", "j", "value", "provenance"]
    assert len(recs) == 2 * 2 * 4
    assert json.loads(summ.read_text())["rate"] == pytest.approx([2.0, 2.0])


def test_theory_reports_spectral_radius(tmp_path, capsys):
    cfg = write(tmp_path, "sup.yaml", "model: hawkes\nmu: [1.0]\nkernels: [[{type: exp, alpha: 1.2, beta: 1.0}]]\n")
    assert main(["theory", "--model", cfg, "--out", str(tmp_path / "o.csv"), "--delta", "1"]) == 2
    assert "spectral radius = 1.2" in capsys.readouterr().err


def test_missing_model_exit_2(tmp_path, capsys):
    assert main(["theory", "--model", str(tmp_path / "none.yaml"), "--out", str(tmp_path / "o"), "--delta", "1"]) == 2
    assert "not found" in capsys.readouterr().err


def test_estimate_and_sweep(tmp_path):
    ev = tmp_path / "ev.csv"
    main(["simulate", "--model", str(CONFIGS / "micro.yaml"), "--out", str(ev), "--seed", "3", "--horizon", "2000"])
    out, summ = tmp_path / "e.csv", tmp_path / "e.json"
    assert main(["estimate", "--model", str(CONFIGS / "micro.yaml"), "--events", str(ev), "--horizon", "2000",
                 "--delta", "1", "--tau", "0,0.5", "--out", str(out), "--seed", "3", "--summary", str(summ)]) == 0
    recs = rows(out)
    assert {r["provenance"] for r in recs} == {"empirical"}
    docs = json.loads(summ.read_text())
    assert [d["tau"] for d in docs] == [0.0, 0.5] and docs[0]["seed"] == 3
    sw = tmp_path / "sw.csv"
    assert main(["sweep", "--model", str(CONFIGS / "micro_hawkes.yaml"), "--seed", "4", "--horizon", "500",
                 "--delta", "0.5,5", "--tau", "0,1", "--out", str(sw)]) == 0
    recs = rows(sw)
    assert [r["provenance"] for r in recs].count("theory") == 16
    assert [r["provenance"] for r in recs].count("empirical") == 16


def test_estimate_coverage_error(tmp_path):
    ev = tmp_path / "ev.csv"
    main(["simulate", "--model", str(CONFIGS / "micro.yaml"), "--out", str(ev), "--seed", "3", "--horizon", "50"])
    assert main(["estimate", "--model", str(CONFIGS / "micro.yaml"), "--events", str(ev), "--horizon", "50",
                 "--T", "50", "--delta", "1", "--tau", "2", "--out", str(tmp_path / "o.csv")]) == 2


def _schema():
    ref = resources.files("hawkes_scaling") / "schemas" / "verdict.schema.json"
    return json.loads(ref.read_text())


def test_validate_verdict_matches_schema(tmp_path):
    out = tmp_path / "v.json"
    assert main(["validate", "--seed", "2012", "--only", "c3,c5,c6", "--out", str(out)]) == 0
    verdict = json.loads(out.read_text())
    jsonschema.validate(verdict, _schema())
    assert [c["id"] for c in verdict["criteria"]] == ["c3", "c5", "c6"]


def test_validate_zero_tolerance_fails(tmp_path):
    out = tmp_path / "v.json"
    assert main(["validate", "--seed", "2012", "--only", "c3", "--tol", "c3=0", "--out", str(out)]) == 1
    verdict = json.loads(out.read_text())
    jsonschema.validate(verdict, _schema())
    assert verdict["passed"] is False and verdict["overrides"] == {"c3": 0.0}


def test_validate_bad_override_exit_2(tmp_path):
    assert main(["validate", "--seed", "1", "--only", "c3", "--tol", "nope=1", "--out", str(tmp_path / "v")]) == 2


def test_validate_quick_budget_is_reproducible(tmp_path):
    args = ["validate", "--seed", "5", "--budget", "quick", "--only", "c1,c10"]
    main(args + ["--out", str(tmp_path / "a.json")])
    main(args + ["--out", str(tmp_path / "b.json")])
    a, b = (json.loads((tmp_path / n).read_text()) for n in ("a.json", "b.json"))
    assert [c["measured"] for c in a["criteria"]] == [c["measured"] for c in b["criteria"]]
    assert [c["summary"] for c in a["criteria"]] == [c["summary"] for c in b["criteria"]]
