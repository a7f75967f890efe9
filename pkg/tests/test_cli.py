"""End-to-end command runs, in process through ``cli.main``."""

import csv
import json
import math
from fractions import Fraction

import numpy as np
import pytest

from critsense import __version__
from critsense.cli import dumps, main, parse_domain
from critsense.errors import UsageError
from critsense.domains import Ball, Box, Interval
from critsense.gallery import catalogue

SADDLE_VALUE = 2.0 * math.exp(-3.2)


def run(capsys, *argv):
    rc = main(list(argv))
    cap = capsys.readouterr()
    return rc, cap.out, cap.err


def body(text):
    """CSV rows with the commented preamble stripped."""
    lines = [ln for ln in text.splitlines() if not ln.startswith("# ")]
    return list(csv.reader(lines))


def preamble(text):
    out = {}
    for ln in text.splitlines():
        if not ln.startswith("# "):
            break
        k, _, v = ln[2:].partition(": ")
        out[k] = v
    return out


# ---------------------------------------------------------------- #
# plumbing
# ---------------------------------------------------------------- #

def test_parse_domain_kinds():
    d = parse_domain("interval:-2,3")
    assert isinstance(d, Interval) and (d.a, d.b) == (-2.0, 3.0)
    d = parse_domain("box:-1,-2:3,4")
    assert isinstance(d, Box)
    assert d.lo.tolist() == [-1.0, -2.0] and d.hi.tolist() == [3.0, 4.0]
    d = parse_domain("ball:0.5,0:2")
    assert isinstance(d, Ball)
    assert d.center.tolist() == [0.5, 0.0] and d.radius == 2.0


@pytest.mark.parametrize("text", [
    "pyramid:1",
    "interval:0",
    "interval:a,b",
    "ball:0,0",
    "box:1,1",
])
def test_parse_domain_rejects(text):
    with pytest.raises(UsageError):
        parse_domain(text)


def test_dumps_round_trips_doubles_exactly():
    vals = [0.1 + 0.2, 1.0 / 3.0, 1e-300, 6.02214076e23, -math.pi]
    back = json.loads(dumps({"v": vals}))["v"]
    assert back == vals  # 17 significant digits reproduce the bit pattern
    special = json.loads(dumps({"a": float("nan"), "b": float("inf")}))
    assert math.isnan(special["a"]) and special["b"] == float("inf")


def test_dumps_handles_fractions_and_numpy():
    obj = {"w": Fraction(-1, 2), "i": np.int64(3), "b": np.bool_(True),
           "arr": np.arange(2.0)}
    back = json.loads(dumps(obj))
    assert back == {"w": "-1/2", "i": 3, "b": True, "arr": [0.0, 1.0]}


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert capsys.readouterr().out.strip() == __version__


def test_missing_required_flag_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["classify"])
    assert exc.value.code == 2
    capsys.readouterr()


# ---------------------------------------------------------------- #
# classify
# ---------------------------------------------------------------- #

def test_classify_monkey_json(capsys):
    rc, out, err = run(capsys, "classify", "--gallery", "monkey")
    assert rc == 0 and err == ""
    art = json.loads(out)
    assert art["command"] == "classify"
    assert art["version"] == __version__
    cfg = art["config"]
    assert cfg["gallery"] == "monkey"
    assert cfg["grid"] == 64 and cfg["tol"] == 1e-9
    res = art["result"]
    assert res["unresolved"] == []
    assert res["counts"]["N_C"] == 1
    assert res["counts"]["hom"] == {"-2": 1}
    pt = res["points"][0]
    assert pt["hom_index"] == -2
    assert pt["classification"] == "Saddle(3)"
    assert pt["morse_index"] is None
    assert not pt["near_boundary"]


def test_classify_single_point_mode(capsys):
    args = ("classify", "--gallery", "saddle", "--point", "0,0",
            "--eps", "0.1")
    rc, out, _ = run(capsys, *args)
    assert rc == 0
    pt = json.loads(out)["result"]["point"]
    assert pt["location"] == [0.0, 0.0]
    assert pt["hom_index"] == -1
    assert pt["classification"] == "Saddle(2)"

    rc, out, _ = run(capsys, *args, "--format", "csv")
    assert rc == 0
    rows = body(out)
    assert rows[0] == ["x1", "x2", "value", "morse_index", "hom_index",
                       "classification", "near_boundary"]
    # single-point rows leave the undetected columns blank
    assert rows[1] == ["0", "0", "", "", "-1", "Saddle(2)", "false"]


def test_classify_csv_table(capsys):
    rc, out, _ = run(capsys, "classify", "--gallery", "twogauss",
                     "--format", "csv")
    assert rc == 0
    pre = preamble(out)
    assert pre["command"] == "classify"
    cfg = json.loads(pre["config"])
    assert cfg["grid"] == 64
    rows = body(out)
    assert len(rows) == 4  # header, two maxima, one saddle
    classes = sorted(r[5] for r in rows[1:])
    assert classes == ["Max", "Max", "Saddle(2)"]
    for r in rows[1:]:
        float(r[2])  # value column parses
        assert r[6] == "false"


def test_out_file_matches_stdout_and_reruns_identically(tmp_path, capsys):
    rc, out, _ = run(capsys, "classify", "--gallery", "monkey")
    assert rc == 0
    p1 = tmp_path / "a.json"
    p2 = tmp_path / "b.json"
    rc, silent, _ = run(capsys, "classify", "--gallery", "monkey",
                        "--out", str(p1))
    assert rc == 0 and silent == ""
    rc, _, _ = run(capsys, "classify", "--gallery", "monkey",
                   "--out", str(p2))
    assert rc == 0
    text = p1.read_text()
    assert text == out
    assert p2.read_bytes() == p1.read_bytes()


# ---------------------------------------------------------------- #
# audit
# ---------------------------------------------------------------- #

def test_audit_monkey_passes(capsys):
    rc, out, _ = run(capsys, "audit", "--gallery", "monkey")
    assert rc == 0
    res = json.loads(out)["result"]
    assert res["pass"] is True
    assert res["interior"] == -2
    assert res["boundary"] == "3"
    assert res["total"] == "1" and res["target"] == "1"


def test_audit_failure_sets_exit_code(capsys):
    # no critical point inside the shifted box, so the totals cannot match
    rc, out, _ = run(capsys, "audit", "--gallery", "bowl",
                     "--domain", "box:0.5,0.5:2,2")
    assert rc == 1
    res = json.loads(out)["result"]
    assert res["pass"] is False
    assert res["total"] == "0" and res["target"] == "1"
    assert res["per_point"] == []


def test_audit_csv_preamble(capsys):
    rc, out, _ = run(capsys, "audit", "--gallery", "bowl", "--format", "csv")
    assert rc == 0
    pre = preamble(out)
    assert pre["pass"] == "true"
    assert pre["total"] == "1" and pre["target"] == "1"
    rows = body(out)
    assert rows[0] == ["x1", "x2", "index", "weight"]
    assert ["0", "0", "1", "1"] in rows[1:]


# ---------------------------------------------------------------- #
# flow
# ---------------------------------------------------------------- #

def test_flow_chart_json(capsys):
    rc, out, _ = run(capsys, "flow", "--gallery", "bowl")
    assert rc == 0
    res = json.loads(out)["result"]
    chart = res["chart"]
    assert chart["center"] == pytest.approx([0.0, 0.0], abs=1e-12)
    assert 0.124 < chart["radius"] <= 0.125
    assert res["verification"]["residual_sup"] <= 1e-10


def test_flow_trajectory_csv(capsys):
    rc, out, _ = run(capsys, "flow", "--gallery", "bowl", "--format", "csv")
    assert rc == 0
    rows = body(out)
    assert rows[0] == ["t", "x1", "x2"]
    assert len(rows) == 1002
    assert rows[1][0] == "0"
    assert float(rows[1][1]) == pytest.approx(0.0625, rel=1e-6)
    assert float(rows[-1][0]) == 1.0
    # the conjugating flow is the identity on an exact quadratic
    assert float(rows[-1][1]) == pytest.approx(float(rows[1][1]), abs=1e-9)
    assert float(rows[-1][2]) == pytest.approx(0.0, abs=1e-9)


def test_flow_degenerate_center_exits_1(capsys):
    rc, out, err = run(capsys, "flow", "--gallery", "monkey")
    assert rc == 1 and out == ""
    info = json.loads(err)["error"]
    assert info["type"] == "NotMorseError"


# ---------------------------------------------------------------- #
# mountain
# ---------------------------------------------------------------- #

def test_mountain_auto_peaks(capsys):
    rc, out, _ = run(capsys, "mountain", "--gallery", "twogauss")
    assert rc == 0
    art = json.loads(out)
    p1 = art["config"]["p1"]
    assert abs(abs(p1[0]) - 0.4) < 1e-3
    res = art["result"]
    assert res["kind"] == "InteriorCritical"
    assert res["c"] == pytest.approx(SADDLE_VALUE, abs=1e-6)
    assert res["certificate"]["grad_norm"] <= 1e-6


def test_mountain_needs_two_peaks(capsys):
    rc, out, err = run(capsys, "mountain", "--gallery", "dome")
    assert rc == 1 and out == ""
    info = json.loads(err)["error"]
    assert info["type"] == "PreconditionError"
    assert info["context"]["found"] == 1


def test_mountain_p1_without_p2(capsys):
    rc, _, err = run(capsys, "mountain", "--gallery", "twogauss",
                     "--p1", "0.4,0")
    assert rc == 2
    assert json.loads(err)["error"]["type"] == "UsageError"


# ---------------------------------------------------------------- #
# sequence
# ---------------------------------------------------------------- #

def test_sequence_csv_report(capsys):
    rc, out, _ = run(capsys, "sequence", "--gallery", "fig10",
                     "--n", "4,16", "--format", "csv")
    assert rc == 0
    assert preamble(out)["verdict"] == "consistent"
    rows = body(out)
    assert rows[0][:5] == ["n", "N_C", "N_M", "N_m", "N_S"]
    assert len(rows) == 3
    n_m = [r[2] for r in rows[1:]]
    assert n_m == ["2", "2"]
    res = [float(r[12]) for r in rows[1:]]
    assert res[1] < res[0]


def test_sequence_rejects_static_entry(capsys):
    rc, _, err = run(capsys, "sequence", "--gallery", "bowl")
    assert rc == 2
    assert json.loads(err)["error"]["type"] == "UsageError"


# ---------------------------------------------------------------- #
# montecarlo
# ---------------------------------------------------------------- #

def mc_config(tmp_path, **overrides):
    cfg = {"D": 1, "degree": 2, "noise": {"amplitude": 0.4},
           "n_list": [3], "trials": 2, "seed": 11}
    cfg.update(overrides)
    path = tmp_path / "mc.json"
    path.write_text(json.dumps(cfg))
    return str(path)


def test_montecarlo_runs_and_echoes_config(tmp_path, capsys):
    path = mc_config(tmp_path)
    rc, out, _ = run(capsys, "montecarlo", "--config", path,
                     "--threads", "1")
    assert rc == 0
    art = json.loads(out)
    assert art["config"]["threads"] == 1
    assert art["config"]["seed"] == 11
    row = art["result"]["per_n"][0]
    assert row["n"] == 3 and row["denominator"] <= 2
    assert 0.0 <= row["frequency"] <= 1.0

    rc, out2, _ = run(capsys, "montecarlo", "--config", path,
                      "--threads", "2")
    assert rc == 0
    assert json.loads(out2)["result"] == art["result"]


def test_montecarlo_missing_key(tmp_path, capsys):
    path = mc_config(tmp_path)
    cfg = json.loads(open(path).read())
    del cfg["trials"]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(cfg))
    rc, _, err = run(capsys, "montecarlo", "--config", str(bad))
    assert rc == 2
    info = json.loads(err)["error"]
    assert info["type"] == "UsageError"
    assert "trials" in info["message"]


# ---------------------------------------------------------------- #
# gallery and error surfaces
# ---------------------------------------------------------------- #

def test_gallery_json_listing(capsys):
    rc, out, _ = run(capsys, "gallery")
    assert rc == 0
    rows = json.loads(out)["result"]
    assert rows == catalogue()
    names = [r["name"] for r in rows]
    assert len(names) == len(set(names))
    assert "twogauss" in names


def test_gallery_csv_quotes_descriptors(capsys):
    rc, out, _ = run(capsys, "gallery", "--format", "csv")
    assert rc == 0
    assert '"ball:0,0:1"' in out  # commas force quoting
    rows = body(out)
    assert rows[0] == ["name", "dim", "family", "origin", "domain", "note"]
    by_name = {r[0]: r for r in rows[1:]}
    assert by_name["twogauss"][4] == "ball:0,0:1"
    assert by_name["fig10"][2] == "true"
    assert len(rows) - 1 == len(catalogue())


def test_unknown_gallery_name(capsys):
    rc, out, err = run(capsys, "classify", "--gallery", "nothere")
    assert rc == 2 and out == ""
    info = json.loads(err)["error"]
    assert info["type"] == "CatalogueError"
    assert "known:" in info["message"]


def test_bad_domain_spec(capsys):
    rc, _, err = run(capsys, "classify", "--gallery", "bowl",
                     "--domain", "pyramid:1")
    assert rc == 2
    assert "unknown domain kind" in json.loads(err)["error"]["message"]
