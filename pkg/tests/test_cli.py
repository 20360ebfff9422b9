import json
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from modinv import serialize as ser
from modinv.cli import main
from modinv.spectral_classes import DeltaSpectrum, FactorType, SpectralData, INFINITE

from conftest import random_matrix

F = Fraction


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def data_doc(pairs, n=None, ftype="I_N"):
    doc = {"ftype": ftype, "pairs": [{"mu": mu, "m": m} for mu, m in pairs]}
    if n is not None:
        doc["n"] = n
    return doc


U3 = np.diag(np.sqrt([0.75, 0.75, 1.5]))


@settings(max_examples=40)
@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_matrix_round_trip_is_exact(n, seed):
    a = random_matrix(n, np.random.default_rng(seed)) * 10.0 ** np.random.default_rng(seed).integers(-8, 8)
    text = json.dumps(ser.hvector_to_json(a))
    back = ser.hvector_from_json(json.loads(text))
    assert np.array_equal(back, a)
    s = random_matrix(n * n, np.random.default_rng(seed))
    assert np.array_equal(ser.superop_from_json(json.loads(json.dumps(ser.superop_to_json(s)))), s)


def test_data_and_spectrum_round_trip():
    d = SpectralData(((1.5, F(1, 2)), (0.5, F(1, 2))), FactorType.type_i(2))
    doc = ser.data_to_json(d)
    assert doc["pairs"][0]["m"] == "1/2"
    assert ser.data_from_json(json.loads(json.dumps(doc))) == d
    d4 = SpectralData(((1.0, F(1, 2)), (2.0, F(1, 2))), FactorType.type_i(4))
    assert ser.data_to_json(d4)["pairs"][0]["m"] == "2/4"
    s = DeltaSpectrum(((1.0, F(1, 2)), (3.0, F(1, 4)), (1 / 3, F(1, 4))))
    assert ser.spectrum_from_json(json.loads(json.dumps(ser.spectrum_to_json(s)))) == s
    s = DeltaSpectrum(((1.0, INFINITE), (2.0, INFINITE)))
    assert ser.spectrum_from_json(ser.spectrum_to_json(s)).pairs == s.pairs


def test_model_info(capsys):
    code, out, _ = run(["model", "info", "--n", "2"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["dim"] == 4
    assert np.array_equal(ser.hvector_from_json(doc["trace_vector"]), np.eye(2))


def test_vector_classify(tmp_path, capsys):
    p = write(tmp_path, "u.json", ser.hvector_to_json(np.diag([1.0, 0.0])))
    code, out, _ = run(["vector", "classify", "--in", p], capsys)
    assert code == 0 and json.loads(out)["cyclic"] is False


def test_modular_compute_with_oracle(tmp_path, capsys):
    p = write(tmp_path, "u.json", ser.hvector_to_json(U3))
    code, out, _ = run(["modular", "compute", "--in", p, "--oracle"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["verdict"] == "PASS"
    assert doc["oracle"]["delta_deviation"] <= 1e-9


def test_delta_factorize(tmp_path, capsys):
    from modinv.standard_form import sandwich_superop
    h = np.diag([1.5, 0.5])
    p = write(tmp_path, "d.json", ser.superop_to_json(sandwich_superop(h, 7 * np.linalg.inv(h))))
    code, out, _ = run(["delta", "factorize", "--in", p], capsys)
    doc = json.loads(out)
    assert code == 0
    np.testing.assert_allclose(ser.hvector_from_json(doc["h"]), np.diag([1.5, 0.5]), atol=1e-13)


def test_classes_commands(tmp_path, capsys):
    good = write(tmp_path, "d.json", data_doc([(1.5, "1/2"), (0.5, "1/2")], 2))
    bad = write(tmp_path, "b.json", data_doc([(1.5, "1/3"), (0.5, "1/2")], 2))
    assert run(["classes", "validate", "--in", good], capsys)[0] == 0
    code, out, _ = run(["classes", "validate", "--in", bad], capsys)
    assert code == 1 and json.loads(out)["violations"]
    code, out, _ = run(["classes", "normalize", "--in", good], capsys)
    assert json.loads(out)["c"] == 1
    code, out, _ = run(["classes", "dual", "--in", good], capsys)
    assert json.loads(out)["self_dual"] is True
    code, out, _ = run(["classes", "spectrum", "--in", good], capsys)
    pairs = json.loads(out)["spectrum"]["pairs"]
    assert [p["n"] for p in pairs] == ["1/4", "1/2", "1/4"]
    ii = write(tmp_path, "ii.json", data_doc([(0.75, "2/3"), (1.5, "1/3")], ftype="II_1"))
    code, out, _ = run(["classes", "variants", "--in", ii, "--permutation", "1,0"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["compatible"] and not doc["equivalent"]
    code, out, _ = run(["classes", "variants", "--in", ii, "--epsilon", "1,0,0.1"], capsys)
    assert code == 0 and json.loads(out)["compatible"]


def test_classes_enumerate_two_classes(tmp_path, capsys):
    t = write(tmp_path, "t.json", {"pairs": [{"lambda": 1, "n": "5/9"}, {"lambda": 2, "n": "2/9"},
                                             {"lambda": 0.5, "n": "2/9"}]})
    code, out, _ = run(["classes", "enumerate", "--target", t, "--ftype", "I_N", "--n", "3"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["complete"] and len(doc["classes"]) == 2
    mus = [[p["mu"] for p in c["pairs"]] for c in doc["classes"]]
    assert all(m == sorted(m, reverse=True) for m in mus)
    assert run(["classes", "enumerate", "--target", t, "--ftype", "I_3"], capsys)[1] == out


def test_classes_equivalent_decade_grid(tmp_path, capsys):
    c3 = write(tmp_path, "c3.json", data_doc([(1, "1/3"), (0.1, "1/3"), (0.001, "1/3")], ftype="II_1"))
    c4 = write(tmp_path, "c4.json", data_doc([(1000, "1/3"), (10, "1/3"), (1, "1/3")], ftype="II_1"))
    code, out, _ = run(["classes", "equivalent", "--a", c3, "--b", c4], capsys)
    assert code == 0 and json.loads(out)["equivalent"] is False


def test_solve_verify_identity(tmp_path, capsys):
    u0 = write(tmp_path, "u0.json", ser.hvector_to_json(U3))
    ident = write(tmp_path, "id.json", ser.superop_to_json(np.eye(9)))
    code, out, _ = run(["solve", "verify", "--u0", u0, "--unitary", ident], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["verdict"] == "PASS" and doc["nf1"]["member"]
    assert doc["tolerances"] == {"eq_tol": 1e-9, "spec_tol": 1e-8}


def test_solve_verify_failure_exit_code(tmp_path, capsys):
    from modinv.standard_form import left_superop
    u0 = write(tmp_path, "u0.json", ser.hvector_to_json(U3))
    w = np.linalg.qr(random_matrix(3, np.random.default_rng(1)))[0]
    bad = write(tmp_path, "bad.json", ser.superop_to_json(left_superop(w)))
    code, out, err = run(["solve", "verify", "--u0", u0, "--unitary", bad], capsys)
    assert code == 1 and json.loads(out)["verdict"] == "FAIL"
    assert json.loads(err.splitlines()[-1])["level"] == "warning"


def test_solve_pipeline(tmp_path, capsys):
    u0 = write(tmp_path, "u0.json", ser.hvector_to_json(U3))
    dual = write(tmp_path, "d.json", data_doc([(1.2, "2/3"), (0.6, "1/3")], 3))
    code, out_a, _ = run(["solve", "build", "--u0", u0, "--data", dual, "--seed", "5"], capsys)
    assert code == 0
    doc = json.loads(out_a)
    assert doc["verdict"] == "PASS" and doc["nf1"]["member"] is False
    a = write(tmp_path, "a.json", doc)
    _, out_b, _ = run(["solve", "build", "--u0", u0, "--data", dual, "--seed", "6"], capsys)
    b = write(tmp_path, "b.json", json.loads(out_b))
    code, out, _ = run(["solve", "equivalent", "--u0", u0, "--ua", a, "--ub", b], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["equivalent"] and doc["witness"] is not None
    code, out, _ = run(["solve", "second-class", "--u0", u0], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["verdict"] == "PASS" and doc["nf1"]["member"] is False
    sc = write(tmp_path, "sc.json", doc)
    code, out, _ = run(["solve", "equivalent", "--u0", u0, "--ua", a, "--ub", sc], capsys)
    assert json.loads(out)["equivalent"] is True


def test_build_is_byte_identical(tmp_path, capsys):
    u0 = write(tmp_path, "u0.json", ser.hvector_to_json(U3))
    own = write(tmp_path, "d.json", data_doc([(0.75, "2/3"), (1.5, "1/3")], 3))
    first = run(["solve", "build", "--u0", u0, "--data", own, "--seed", "9"], capsys)[1]
    second = run(["solve", "build", "--u0", u0, "--data", own, "--seed", "9"], capsys)[1]
    assert first == second


def test_invalid_inputs_exit_2(tmp_path, capsys):
    missing = str(tmp_path / "nope.json")
    code, _, err = run(["vector", "classify", "--in", missing], capsys)
    assert code == 2 and json.loads(err)["kind"] == "InvalidInput"
    garbage = tmp_path / "g.json"
    garbage.write_text("{not json")
    assert run(["vector", "classify", "--in", str(garbage)], capsys)[0] == 2
    shape = write(tmp_path, "s.json", {"n": 2, "mat": [[[1, 0]]]})
    assert run(["vector", "classify", "--in", shape], capsys)[0] == 2
    sing = write(tmp_path, "sing.json", ser.hvector_to_json(np.diag([1.0, 0.0])))
    code, _, err = run(["modular", "compute", "--in", sing], capsys)
    assert code == 2 and json.loads(err)["kind"] == "NotInvertible"
    assert run(["classes"], capsys)[0] == 2
    assert run(["model", "info", "--n", "0"], capsys)[0] == 2
    u0 = write(tmp_path, "u0.json", ser.hvector_to_json(U3))
    incompatible = write(tmp_path, "x.json", data_doc([(2.0, "2/3"), (0.5, "1/3")], 3))
    assert run(["solve", "build", "--u0", u0, "--data", incompatible], capsys)[0] == 2
    assert run(["model", "info", "--n", "2", "--tol", "5"], capsys)[0] == 2


def test_tolerance_flags_recorded(tmp_path, capsys):
    u0 = write(tmp_path, "u0.json", ser.hvector_to_json(U3))
    ident = write(tmp_path, "id.json", ser.superop_to_json(np.eye(9)))
    _, out, _ = run(["solve", "verify", "--u0", u0, "--unitary", ident, "--tol", "1e-7",
                     "--spec-tol", "1e-6"], capsys)
    assert json.loads(out)["tolerances"] == {"eq_tol": 1e-7, "spec_tol": 1e-6}


def test_console_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "modinv.cli", "model", "info", "--n", "1"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and json.loads(res.stdout)["n"] == 1
