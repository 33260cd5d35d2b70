import csv
import io
import json
from fractions import Fraction

import pytest

from cbe_moments.cli import main, parse_beta


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    return code, json.loads(out)


def exact_value(rec):
    v = rec["value"]
    return Fraction(int(v["num"]), int(v["den"]))


def test_parse_beta():
    assert parse_beta("7/3") == Fraction(7, 3)
    assert parse_beta("4") == 4 and isinstance(parse_beta("4"), Fraction)
    assert parse_beta("2.5") == 2.5 and isinstance(parse_beta("2.5"), float)
    with pytest.raises(Exception):
        parse_beta("-1")


def test_mom_examples(capsys):
    code, rec = run_json(capsys, "mom", "--N", "2", "--k", "2", "--q", "1", "--beta", "2", "--method", "exact")
    assert code == 0 and rec["exact"] == "10" and exact_value(rec) == 10
    _, rec = run_json(capsys, "mom", "--N", "1", "--k", "3", "--q", "1", "--beta", "7/3", "--method", "exact")
    assert exact_value(rec) == 8
    _, rec = run_json(capsys, "mom", "--N", "3", "--k", "1", "--q", "1", "--beta", "2", "--method", "quadrature")
    assert rec["value"] == pytest.approx(4, abs=1e-9)
    _, rec = run_json(capsys, "mom", "--N", "3", "--k", "2", "--beta", "1/2", "--method", "j-enum")
    assert rec["method"] == "J-enum"


def test_decimal_beta_routes_to_float_path(capsys):
    _, rec = run_json(capsys, "mom", "--N", "2", "--beta", "2.0", "--method", "exact")
    assert rec["method"] == "quadrature" and "routing" in rec["diagnostics"]
    assert rec["value"] == pytest.approx(3)


def test_mom_mc_record(capsys):
    _, rec = run_json(capsys, "mom", "--N", "2", "--beta", "2", "--method", "mc", "--mc-budget", "5000", "--seed", "4")
    assert rec["seed"] == 4 and rec["mc_budget"] == 5000 and rec["stderr"] > 0


def test_resource_error(capsys):
    code, rec = run_json(capsys, "mom", "--N", "40", "--k", "3", "--q", "2", "--max-layer-size", "100")
    assert code == 3 and rec["error"] == "resource" and "reduce N" in rec["suggestion"]


def test_coeff_examples(capsys):
    _, rec = run_json(capsys, "coeff", "--k", "1", "--q", "2", "--beta", "2")
    assert rec["value"] == pytest.approx(1 / 12) and rec["exact"] == "1/12"
    code, rec = run_json(capsys, "coeff", "--k", "2", "--q", "1", "--beta", "4")
    assert code == 2 and rec["error"] == "domain" and rec["reason"] == "A(2;1)=(0,4)"
    _, rec = run_json(capsys, "coeff", "--k", "2", "--q", "1", "--beta", "2", "--mc-budget", "2e5", "--seed", "7")
    assert abs(rec["value"] - 1 / 6) <= 3 * rec["stderr"]
    assert rec["diagnostics"]["finiteness"]["status"] == "finite"


def test_coeff_conjectured_region(capsys):
    code, rec = run_json(capsys, "coeff", "--k", "3", "--q", "1", "--beta", "3", "--mc-budget", "2000")
    assert code == 0 and "caveat" in rec["diagnostics"]


def test_scan_csv(capsys):
    code, out, _ = run(capsys, "scan", "--k", "1", "--q", "1", "--beta", "2", "--N-list", "1..20")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and list(rows[0]) == ["N", "MoM", "ratio", "slope"]
    for r in rows:
        N = int(r["N"])
        assert float(r["ratio"]) == pytest.approx((N + 1) / N, rel=1e-15)
    assert rows[0]["slope"] == "" and rows[2]["slope"] != ""


def test_scan_two_points_warns(capsys):
    _, out, err = run(capsys, "scan", "--k", "1", "--beta", "2", "--N-list", "3,4")
    assert "slope fit refused" in err
    assert all(r["slope"] == "" for r in csv.DictReader(io.StringIO(out)))


def test_scan_json(capsys):
    _, rec = run_json(capsys, "scan", "--k", "1", "--beta", "2", "--N-list", "1..5", "--format", "json")
    assert rec["exponent"] == {"num": "1", "den": "1"} and len(rec["rows"]) == 5


def test_stochastic_commands_are_repeatable(capsys):
    for argv in (
        ["mom", "--N", "3", "--k", "2", "--beta", "4", "--method", "mc", "--mc-budget", "3000", "--seed", "9"],
        ["scan", "--k", "1", "--beta", "1", "--N-list", "2,3,4", "--method", "mc", "--mc-budget", "2000", "--seed", "9"],
        ["sample", "--N", "4", "--beta", "2", "--mc-budget", "50", "--seed", "9", "--workers", "2"],
    ):
        first = run(capsys, *argv)
        assert first == run(capsys, *argv)


def test_config_file_and_flag_precedence(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"N": 3, "k": 2, "q": 1, "beta": "4", "method": "exact"}))
    _, rec = run_json(capsys, "mom", "--config", str(cfg))
    assert rec["inputs"]["N"] == 3
    _, rec2 = run_json(capsys, "mom", "--config", str(cfg), "--N", "2")
    assert rec2["inputs"]["N"] == 2 and exact_value(rec2) != exact_value(rec)


def test_output_record_round_trip(capsys, tmp_path):
    for argv in (
        ["mom", "--N", "3", "--k", "2", "--beta", "7/3"],
        ["mom", "--N", "2", "--beta", "4", "--method", "mc", "--mc-budget", "3000", "--seed", "2"],
        ["coeff", "--k", "2", "--q", "1", "--beta", "3", "--mc-budget", "5000", "--seed", "2"],
    ):
        _, first, _ = run(capsys, *argv)
        path = tmp_path / "rec.json"
        path.write_text(first)
        _, again, _ = run(capsys, argv[0], "--config", str(path))
        assert again == first


def test_workers_env(capsys, monkeypatch):
    monkeypatch.setenv("CBE_MOMENTS_WORKERS", "2")
    _, rec = run_json(capsys, "mom", "--N", "2", "--beta", "2")
    assert rec["inputs"]["workers"] == 2
    _, rec = run_json(capsys, "mom", "--N", "2", "--beta", "2", "--workers", "1")
    assert rec["inputs"]["workers"] == 1


def test_timing_is_opt_in(capsys):
    _, rec = run_json(capsys, "mom", "--N", "2", "--beta", "2")
    assert "wall_time" not in rec
    _, rec = run_json(capsys, "mom", "--N", "2", "--beta", "2", "--timing")
    assert rec["wall_time"] >= 0


def test_singularity_and_finiteness(capsys):
    _, rec = run_json(capsys, "singularity", "--k", "4", "--q", "1", "--beta", "3")
    assert rec["order"]["constant"] == "12" and rec["threshold_beta"] == "8" and rec["exact"] == "4"
    _, rec = run_json(capsys, "singularity", "--k", "2", "--q", "2", "--point", "star")
    assert rec["threshold_beta"] == "16" and rec["dimension"] == 3
    _, rec = run_json(capsys, "finiteness", "--k", "3", "--q", "1", "--beta", "3")
    assert rec["status"] == "unknown-conjectured-finite"


def test_jack_and_sample(capsys):
    _, rec = run_json(capsys, "jack", "--lam", "2,0", "--points", "1,1", "--beta", "2")
    assert rec["value"]["re"] == pytest.approx(3)
    code, out, _ = run(capsys, "sample", "--N", "3", "--beta", "2", "--mc-budget", "6", "--format", "csv")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "theta_1,theta_2,theta_3" and len(lines) == 7


def test_usage_errors(capsys):
    code, rec = run_json(capsys, "mom", "--beta", "2")
    assert code == 2 and "--N" in rec["message"]
    code, rec = run_json(capsys, "mom", "--N", "2", "--method", "magic")
    assert code == 2
