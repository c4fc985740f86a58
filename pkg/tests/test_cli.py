import csv
import json
import subprocess
import sys

import jsonschema
import pytest

from hitchinflow.cli import FIXTURES, SCHEMAS, main


def schema(name):
    return json.loads((SCHEMAS / f"{name}.schema.json").read_text())


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_schemas_are_valid_documents():
    for path in SCHEMAS.glob("*.schema.json"):
        jsonschema.Draft202012Validator.check_schema(json.loads(path.read_text()))


def test_classify_n65(capsys):
    code, out, _ = run(capsys, "classify", "fixtures/n65.lie")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, schema("obstruction_report"))
    assert doc["invariants"]["central_series_dims"] == [0, 2, 6]


def test_classify_sl2c(capsys):
    code, out, _ = run(capsys, "classify", "fixtures/sl2c.lie")
    assert code == 0
    doc = json.loads(out)
    assert doc["summary"] == "no statement applies: g not solvable"
    code, out, _ = run(capsys, "classify", "fixtures/sl2c.lie", "--format", "text")
    assert "not solvable" in out


def test_classify_with_witness(capsys):
    code, out, _ = run(capsys, "classify", "fixtures/n65r.lie", "--witness", "fixtures/n65r_direct.witness")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, schema("obstruction_report"))
    assert doc["summary"] == "no statement matches" and doc["matched"] == []


def test_classify_errors(capsys, tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["classify", "--bad-path"])
    assert exc.value.code == 2
    assert run(capsys, "classify", str(tmp_path / "missing.lie"))[0] == 2
    bad = tmp_path / "bad.lie"
    bad.write_text("dim 3; d e1 = e11;")
    code, _, err = run(capsys, "classify", str(bad))
    assert code == 2 and err.startswith("error:")
    # a parseable witness that is not an ideal
    w = tmp_path / "w.witness"
    w.write_text("ideal = e1, e2, e4, e5, e6, e7; complement = e3;")
    assert run(capsys, "classify", "fixtures/h3r4.lie", "--witness", str(w))[0] == 3
    # non-Jacobi algebra
    nj = tmp_path / "nj.lie"
    nj.write_text("dim 3; d e3 = e12; d e2 = e13; d e1 = e12;")
    assert run(capsys, "classify", str(nj))[0] == 3


def test_flow_emit(capsys, tmp_path):
    out_csv = tmp_path / "out.csv"
    code, out, _ = run(capsys, "flow", "hitchin6", "fixtures/sl2c_hf.struct", "--emit", str(out_csv))
    assert code == 0
    summary = json.loads(out)
    jsonschema.validate(summary, schema("flow_summary"))
    with out_csv.open() as fh:
        rows = list(csv.DictReader(fh))
    t = [float(r["t"]) for r in rows]
    assert all(b > a for a, b in zip(t, t[1:]))
    assert max(float(r["flow_residual"]) for r in rows) <= 1e-8
    assert max(float(r["closure_residual"]) for r in rows) <= 1e-8
    header = json.loads((tmp_path / "out.header.json").read_text())
    jsonschema.validate(header, schema("trajectory_header"))


def test_flow_constant(capsys):
    code, out, _ = run(capsys, "flow", "hypo5", "fixtures/r5_model.struct", "--window", "-1", "1")
    assert code == 0
    assert json.loads(out)["constant"] is True


def test_flow_bad_initial_data(capsys):
    code, _, err = run(capsys, "flow", "hitchin6", "fixtures/bad_not_halfflat.struct")
    assert code == 3 and "d rho != 0" in err


def test_flow_kind_mismatch(capsys):
    # the struct file declares its own kind; disagreeing with it is a usage error
    code, _, err = run(capsys, "flow", "hypo5", "fixtures/sl2c_hf.struct")
    assert code == 2 and "hitchin6" in err


def test_flow_rejects_nonpositive_tolerance(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["flow", "hitchin6", "fixtures/sl2c_hf.struct", "--rtol", "0"])
    assert exc.value.code == 2


def test_flow_sweep(capsys):
    files = ["fixtures/r5_model.struct", "fixtures/heis5_hypo.struct"]
    code, out, _ = run(capsys, "flow", "hypo5", *files, "--sweep", "--jobs", "2", "--window", "-1", "1")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, schema("flow_summary"))
    assert [d["file"] for d in doc] == sorted(files)
    code, out, _ = run(capsys, "flow", "hitchin6", "fixtures/sl2c_hf.struct", "fixtures/bad_not_halfflat.struct", "--sweep", "--jobs", "1")
    assert code == 3
    doc = json.loads(out)
    assert [d["ok"] for d in doc] == [False, True]


def test_sl2c_hf(capsys):
    code, out, _ = run(capsys, "sl2c", "--eps", "1", "--b1", "0", "--b2", "-1", "--b3", "1")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, schema("extension_report"))
    assert sorted(doc["extension_possible"].values()) == [False, True]
    assert abs(doc["v_limit"] - 1) <= 1e-3


def test_sl2c_b1(capsys):
    code, out, _ = run(capsys, "sl2c", "--b1", "1", "--b2", "0", "--b3", "0")
    assert code == 0
    assert json.loads(out)["extension_possible"] == {"a": False, "b": False}


def test_sl2c_inadmissible(capsys):
    code, _, err = run(capsys, "sl2c", "--b1", "0", "--b2", "3", "--b3", "1")
    assert code == 3 and "3 b3 - b2" in err


def test_sl2c_text_report(capsys):
    code, out, _ = run(capsys, "sl2c", "--b1", "0", "--b2", "-1", "--b3", "1", "--report", "text")
    assert code == 0 and out.startswith("window (") and "V-part limit: 1.000" in out


def test_subprocess_entry_point_and_determinism():
    argv = [sys.executable, "-m", "hitchinflow", "classify", str(FIXTURES / "h3r4.lie"), "--witness", str(FIXTURES / "h3r4_direct.witness")]
    a = subprocess.run(argv, capture_output=True, text=True, check=True)
    b = subprocess.run(argv, capture_output=True, text=True, check=True)
    assert a.stdout == b.stdout
    assert [m["id"] for m in json.loads(a.stdout)["matched"]] == ["spin7-b", "spin7-c"]
    bad = subprocess.run([sys.executable, "-m", "hitchinflow", "classify", "nope.lie"], capture_output=True, text=True)
    assert bad.returncode == 2 and bad.stdout == ""


def test_sl2c_deterministic(capsys):
    argv = ["sl2c", "--b1", "1", "--b2", "0", "--b3", "0"]
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


def test_selftest_registered(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["selftest", "--help"])
    assert exc.value.code == 0
    assert "--seed" in capsys.readouterr().out
