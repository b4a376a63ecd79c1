import json
import os
import shutil
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from gamma_dilation.cli import main
from gamma_dilation.io import (BundleError, MatrixBundle, bundle_to_dict, loads_bundle,
                               parse_report, read_bundle, write_bundle)
from gamma_dilation.linalg import op_norm

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)
cmat = st.tuples(st.integers(0, 4), st.integers(0, 4)).flatmap(
    lambda s: arrays(np.complex128, s, elements=st.builds(complex, finite, finite)))


@settings(max_examples=60, deadline=None)
@given(st.dictionaries(st.sampled_from(["M", "A", "Theta0", "x_1"]), cmat, min_size=1))
def test_bundle_round_trip_bit_exact(mats):
    b = MatrixBundle("collection", mats, {"seed": 3})
    back = loads_bundle(json.dumps(bundle_to_dict(b)))
    for k, M in mats.items():
        R = back.matrices[k]
        assert R.shape == M.shape
        assert R.tobytes() == M.astype(complex).tobytes()


def test_write_read_file(tmp_path):
    M = np.array([[1 / 3 + 1e-300j, np.pi], [-0.0, 2.5e-17]])
    p = tmp_path / "m.json"
    write_bundle(p, MatrixBundle("single", {"M": M}))
    assert read_bundle(p).matrices["M"].tobytes() == M.astype(complex).tobytes()
    assert not [f for f in os.listdir(tmp_path) if f.startswith(".tmp-")]


@pytest.mark.parametrize("text, where", [
    ('{"format_version": "gamma-bundle/1", "family": "single", "matrices": {', "line 1"),
    ('[1, 2]', "$"),
    ('{"format_version": "gamma-bundle/1", "family": "single", "matrices": {}}', "$.matrices"),
    ('{"format_version": "gamma-bundle/1", "family": "single", "matrices": '
     '{"M": {"rows": 1, "cols": 2, "data": [[0, 0]]}}}', "$.matrices.M.data"),
    ('{"format_version": "gamma-bundle/1", "family": "single", "matrices": '
     '{"M": {"rows": 1, "cols": 1, "data": [[0, "x"]]}}}', "$.matrices.M.data[0]"),
    ('{"format_version": "gamma-bundle/9", "family": "single", "matrices": {}}',
     "$.format_version"),
])
def test_parse_errors_have_positions(text, where):
    with pytest.raises(BundleError) as exc:
        loads_bundle(text)
    assert exc.value.where.startswith(where)


def test_fixture_suite_size(fixtures_dir):
    assert len([f for f in os.listdir(fixtures_dir) if f.endswith(".json")]) >= 10


def run(args, capsys):
    code = main([str(a) for a in args])
    out = capsys.readouterr()
    return code, out.out, out.err


CASES = [
    (["check", "diag_interior.json"], 0),
    (["check", "diag_interior_312.json", "--z-samples", "32"], 0),
    (["check", "norm_violation.json"], 1),
    (["check", "noncommuting.json"], 1),
    (["check", "truncated.json"], 2),
    (["check", "bad_family.json"], 2),
    (["check", "missing.json"], 2),
    (["check", "diag_interior.json", "--family", "gamma312"], 2),
    (["check", "unitary_312.json", "--battery", "all"], 0),
    (["check", "diag_interior.json", "--battery", "unitary"], 1),
    (["fundamental", "scalar_point.json"], 0),
    (["fundamental", "diag_interior_312.json", "--method", "lstsq"], 0),
    (["dilate", "scalar_point_312.json", "--depth", "6"], 0),
    (["dilate", "diag_interior.json", "--construction", "coisometric"], 0),
    (["dilate", "scalar_point.json", "--depth", "0"], 2),
    (["model", "fset333.json"], 0),
    (["model", "fset312.json", "--keep-blocks", "2"], 0),
    (["model", "scalar_point.json"], 2),
    (["blh", "fset333.json"], 0),
    (["blh", "fset312.json"], 0),
    (["decompose", "mixture.json"], 0),
    (["decompose", "mixture_312.json"], 0),
    (["decompose", "norm_violation.json"], 1),
    (["mu", "diag_A.json"], 0),
    (["mu", "matrix_3x3.json", "--space", "3,1,2"], 0),
    (["mu", "diag_A.json", "--space", "3,1,1"], 2),
    (["coords", "matrix_3x3.json", "--family", "gamma312"], 0),
    (["coords", "diag_interior.json"], 2),
    (["gen", "--dim", "0"], 2),
    (["gen", "--kind", "compressed", "--family", "gamma312", "--dim", "1"], 0),
    (["nonsense"], 2),
]


@pytest.mark.parametrize("args, expected", CASES, ids=[" ".join(c[0]) for c in CASES])
def test_exit_codes(args, expected, fixtures_dir, capsys, monkeypatch):
    monkeypatch.chdir(fixtures_dir)
    code, out, err = run(args, capsys)
    assert code == expected, err
    if expected == 2:
        assert err
    elif args[0] != "gen":
        rep = json.loads(out)
        assert rep["verdict"] == ("pass" if expected == 0 else "fail")
        _, _, reports, verdict = parse_report(rep)
        assert verdict == rep["verdict"]


def test_mu_diag_fixture_value(fixtures_dir, capsys):
    code, out, _ = run(["mu", os.path.join(fixtures_dir, "diag_A.json")], capsys)
    assert abs(json.loads(out)["residuals"]["mu"] - 0.8) <= 0.016


def test_decompose_reports_expected_dim(fixtures_dir, capsys):
    code, out, _ = run(["decompose", os.path.join(fixtures_dir, "mixture.json")], capsys)
    rep = json.loads(out)
    assert rep["residuals"]["dim_unitary"] == 2 and rep["residuals"]["dim_cnu"] == 3


def test_dilate_then_check_pipeline(fixtures_dir, tmp_path, capsys):
    out = tmp_path / "dil.json"
    assert run(["dilate", "--depth", "8", os.path.join(fixtures_dir, "scalar_point.json"),
                "--bundle-out", out], capsys)[0] == 0
    assert read_bundle(out).to_tuple().dim == 9
    assert run(["check", out], capsys)[0] == 0


def test_fundamental_then_model_pipeline(fixtures_dir, tmp_path, capsys):
    f = tmp_path / "f.json"
    assert run(["fundamental", os.path.join(fixtures_dir, "diag_interior.json"),
                "--bundle-out", f], capsys)[0] == 0
    assert read_bundle(f).family == "fset333"
    assert run(["model", f, "--depth", "5"], capsys)[0] == 0


def test_gen_examples(tmp_path, capsys):
    a = tmp_path / "a.json"
    assert run(["gen", "--kind", "diagonal", "--family", "gamma333", "--dim", "4", "--seed", "7",
                "--bundle-out", a], capsys)[0] == 0
    assert run(["check", a], capsys)[0] == 0
    b = tmp_path / "b.json"
    assert run(["gen", "--kind", "unitary", "--family", "gamma312", "--dim", "3", "--seed", "1",
                "--bundle-out", b], capsys)[0] == 0
    assert run(["check", b, "--battery", "unitary"], capsys)[0] == 0
    meta = read_bundle(a).meta
    assert meta["seed"] == 7 and meta["construction"] == "diagonal" and meta["certificates"]
    # stdout mode emits the same bundle
    code, out, _ = run(["gen", "--kind", "diagonal", "--dim", "4", "--seed", "7"], capsys)
    assert loads_bundle(out).matrices["T1"].tobytes() == read_bundle(a).matrices["T1"].tobytes()


def test_gen_compressed_passes_check(tmp_path, capsys):
    c = tmp_path / "c.json"
    assert run(["gen", "--kind", "compressed", "--dim", "2", "--depth", "4", "--bundle-out", c],
               capsys)[0] == 0
    assert run(["check", c], capsys)[0] == 0


def test_reports_are_deterministic(fixtures_dir, capsys):
    for args in (["check", "diag_interior.json"], ["decompose", "mixture.json"],
                 ["dilate", "scalar_point.json"], ["mu", "matrix_3x3.json"]):
        args = [args[0], os.path.join(fixtures_dir, args[1])] + args[2:]
        first = run(args, capsys)[1]
        assert run(args, capsys)[1] == first


def test_out_and_text(fixtures_dir, tmp_path, capsys):
    out = tmp_path / "r.json"
    code, stdout, err = run(["check", os.path.join(fixtures_dir, "diag_interior.json"),
                             "--out", out], capsys)
    assert code == 0 and stdout == "" and "pass" in err
    assert json.loads(out.read_text())["options"]["z_samples"] == 64
    code, stdout, _ = run(["check", os.path.join(fixtures_dir, "norm_violation.json"), "--text"],
                          capsys)
    assert code == 1 and stdout.startswith("check: fail") and "[   fail]" in stdout


def test_batch_threads(fixtures_dir, tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("GAMMA_DILATE_THREADS", "3")
    files = [os.path.join(fixtures_dir, f) for f in
             ("diag_interior.json", "norm_violation.json", "scalar_point.json")]
    code, out, _ = run(["batch", *files, "--out-dir", tmp_path / "reps"], capsys)
    assert code == 1
    rows = json.loads(out)["residuals"]["files"]
    assert [r["exit_code"] for r in rows] == [0, 1, 0]
    assert len(os.listdir(tmp_path / "reps")) == 3
    monkeypatch.setenv("GAMMA_DILATE_THREADS", "0")
    assert run(["batch", *files], capsys)[0] == 2


def test_console_script(fixtures_dir):
    exe = shutil.which("gamma-dilate")
    cmd = [exe] if exe else [sys.executable, "-m", "gamma_dilation.cli"]
    r = subprocess.run(cmd + ["check", os.path.join(fixtures_dir, "norm_violation.json")],
                       capture_output=True, text=True)
    assert r.returncode == 1
