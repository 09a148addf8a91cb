"""Command line behavior: verbs, formats, exit codes, error reporting."""

import json

import numpy as np
import pytest

from entbound.cli import main


def write_json(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def bell_file(tmp_path):
    return write_json(
        tmp_path,
        "bell.json",
        {"dims": [2, 2], "vector": [[1, 0], [0, 0], [0, 0], [1, 0]], "name": "bell"},
    )


def first_err_line(capsys):
    return capsys.readouterr().err.splitlines()[0]


def test_compute_text_output(tmp_path, capsys):
    code = main(["compute", "--state", bell_file(tmp_path), "--measures", "en,ew"])
    out = capsys.readouterr().out.splitlines()
    assert code == 0
    assert out[0] == "state: bell [2x2]"
    values = {}
    for line in out[1:]:
        tok = line.split()[0]
        fields = dict(part.split("=", 1) for part in line.split()[1:])
        values[tok] = fields
    assert abs(float(values["en"]["value_log2"]) - 1.0) <= 1e-9
    assert abs(float(values["ew"]["value_log2"]) - 1.0) <= 1e-6
    assert int(values["en"]["iterations"]) == 0
    assert int(values["ew"]["iterations"]) > 0


def test_compute_json_output(tmp_path, capsys):
    code = main(
        ["compute", "--state", bell_file(tmp_path), "--measures", "en,fgamma:k=2",
         "--format", "json"]
    )
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["name"] == "bell"
    assert doc["dims"] == [2, 2]
    by_tok = {m["measure"]: m for m in doc["measures"]}
    assert abs(by_tok["en"]["value_log2"] - 1.0) <= 1e-9
    assert abs(by_tok["fgamma:k=2"]["value_log2"]) <= 1e-6
    assert set(by_tok["en"]) == {"measure", "value_log2", "primal", "dual", "gap", "iterations"}


def test_compute_matrix_form(tmp_path, capsys):
    eye = [[[0.25 if i == j else 0, 0] for j in range(4)] for i in range(4)]
    path = write_json(tmp_path, "mixed.json", {"dims": [2, 2], "matrix": eye})
    code = main(["compute", "--state", path, "--measures", "en"])
    out = capsys.readouterr().out.splitlines()
    assert code == 0
    # file name is the fallback when no name field is present
    assert out[0] == "state: mixed.json [2x2]"
    assert abs(float(out[1].split("value_log2=")[1].split()[0])) <= 1e-12


def test_compute_accepts_w0_but_sweep_rejects_it(tmp_path, capsys):
    path = bell_file(tmp_path)
    assert main(["compute", "--state", path, "--measures", "w0"]) == 0
    capsys.readouterr()
    code = main(
        ["sweep", "--family", "sigma_r", "--from", "0.2", "--to", "0.8",
         "--steps", "2", "--measures", "w0", "--out", str(tmp_path / "x.csv")]
    )
    assert code == 2
    assert first_err_line(capsys) == "ERROR 2: usage"


def test_usage_errors_exit_two(tmp_path, capsys):
    path = bell_file(tmp_path)
    cases = [
        [],
        ["compute", "--state", path, "--measures", "bogus"],
        ["compute", "--state", path, "--measures", "en,en"],
        ["compute", "--state", path, "--measures", "en,,ew"],
        ["compute", "--state", path, "--measures", "fgamma"],
        ["compute", "--state", path, "--measures", "fgamma:k=abc"],
        ["compute", "--state", path, "--measures", "fgamma:k=0.5"],
        ["verify", "--suite", "bogus"],
    ]
    for argv in cases:
        assert main(argv) == 2
        assert first_err_line(capsys).startswith("ERROR 2: ")


def test_solver_tol_env(tmp_path, capsys, monkeypatch):
    path = bell_file(tmp_path)
    monkeypatch.setenv("ENTBOUND_SOLVER_TOL", "banana")
    assert main(["compute", "--state", path, "--measures", "en"]) == 2
    assert first_err_line(capsys) == "ERROR 2: usage"
    monkeypatch.setenv("ENTBOUND_SOLVER_TOL", "-1e-9")
    assert main(["compute", "--state", path, "--measures", "en"]) == 2
    capsys.readouterr()
    monkeypatch.setenv("ENTBOUND_SOLVER_TOL", "1e-7")
    assert main(["compute", "--state", path, "--measures", "ew"]) == 0


def test_state_file_parse_errors(tmp_path, capsys):
    bad = tmp_path / "broken.json"
    bad.write_text('{"dims": [2, 2], "vector": [[1, 0]')
    assert main(["compute", "--state", str(bad), "--measures", "en"]) == 2
    err = capsys.readouterr().err
    assert err.splitlines()[0] == "ERROR 2: parse"
    assert "line 1, column" in err

    cases = [
        {"dims": [2, 2], "vector": [[1, 0]] * 4, "extra": 1},
        {"dims": [2], "vector": [[1, 0]] * 4},
        {"dims": [2, 2]},
        {"dims": [2, 2], "vector": [[1, 0]] * 3},
        {"dims": [2, 2], "vector": [[1, 0]] * 4, "matrix": []},
        {"dims": [2, 2], "vector": [[1, 0], [0, 0], [0, 0], "x"]},
    ]
    for i, doc in enumerate(cases):
        path = write_json(tmp_path, f"bad{i}.json", doc)
        assert main(["compute", "--state", path, "--measures", "en"]) == 2
        assert first_err_line(capsys) == "ERROR 2: parse"

    assert main(["compute", "--state", str(tmp_path / "missing.json"), "--measures", "en"]) == 2


def test_invalid_states_exit_three(tmp_path, capsys):
    herm = [[[0, 0], [1, 0]], [[0, 0], [0, 0]]]  # not Hermitian
    off = [[[0.7, 0], [0, 0]], [[0, 0], [0.7, 0]]]  # trace 1.4
    neg = [[[1.5, 0], [0, 0]], [[0, 0], [-0.5, 0]]]
    zero_vec = {"dims": [1, 2], "vector": [[0, 0], [0, 0]]}
    docs = [
        {"dims": [1, 2], "matrix": herm},
        {"dims": [1, 2], "matrix": off},
        {"dims": [1, 2], "matrix": neg},
        zero_vec,
    ]
    for i, doc in enumerate(docs):
        path = write_json(tmp_path, f"inv{i}.json", doc)
        assert main(["compute", "--state", path, "--measures", "en"]) == 3
        assert first_err_line(capsys) == "ERROR 3: invalid-state"


def test_sweep_csv_shape_and_stability(tmp_path, capsys):
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    argv = ["sweep", "--family", "sigma_r", "--from", "0", "--to", "1",
            "--steps", "5", "--measures", "en,ew"]
    assert main(argv + ["--out", str(out1)]) == 0
    assert main(argv + ["--out", str(out2)]) == 0
    data = out1.read_bytes()
    assert data == out2.read_bytes()
    assert b"\r" not in data
    assert data.endswith(b"\n")

    lines = data.decode().splitlines()
    assert lines[0] == "param,en,ew"
    assert len(lines) == 6
    params = [float(row.split(",")[0]) for row in lines[1:]]
    # both endpoints sit strictly inside the open domain
    assert abs(params[0] - 1e-6) <= 1e-12
    assert abs(params[-1] - 0.999999) <= 1e-12
    for row in lines[1:]:
        _, en, ew = (float(c) for c in row.split(","))
        assert ew <= en + 1e-7


def test_sweep_rho_alpha_closed_form(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["sweep", "--family", "rho_alpha", "--from", "0.1", "--to", "0.5",
                 "--steps", "3", "--measures", "en", "--out", str(out)]) == 0
    rows = out.read_text().splitlines()[1:]
    assert len(rows) == 3
    for row in rows:
        alpha, en = (float(c) for c in row.split(","))
        want = np.log2(1 + (4 / 3) * np.sqrt(alpha * (1 - alpha)))
        assert abs(en - want) <= 1e-9
    assert [float(r.split(",")[0]) for r in rows] == [0.1, 0.3, 0.5]


def test_sweep_significant_digits(tmp_path):
    out = tmp_path / "d.csv"
    assert main(["sweep", "--family", "rho_alpha", "--from", "1/3", "--to", "0.5",
                 "--steps", "2", "--measures", "en", "--out", str(out)]) == 2
    assert main(["sweep", "--family", "rho_alpha", "--from", "0.333333333333",
                 "--to", "0.5", "--steps", "2", "--measures", "en",
                 "--out", str(out)]) == 0
    first = out.read_text().splitlines()[1].split(",")[0]
    assert first == "0.333333333333"
    assert len(first.replace("0.", "")) == 12


def test_sweep_fgamma_header_token(tmp_path):
    out = tmp_path / "e.csv"
    assert main(["sweep", "--family", "sigma_r", "--from", "0.4", "--to", "0.6",
                 "--steps", "2", "--measures", "fgamma:k=1.5", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "param,fgamma:k=1.5"
    for row in lines[1:]:
        assert float(row.split(",")[1]) <= 1e-9


def test_sweep_usage_errors(tmp_path, capsys):
    out = str(tmp_path / "f.csv")
    base = ["sweep", "--family", "sigma_r", "--measures", "en", "--out", out]
    assert main(base + ["--from", "0.2", "--to", "0.8", "--steps", "1"]) == 2
    assert main(base + ["--from", "0.8", "--to", "0.2", "--steps", "4"]) == 2
    assert main(base + ["--from", "2", "--to", "3", "--steps", "4"]) == 2
    capsys.readouterr()
    assert main(["sweep", "--family", "nope", "--from", "0", "--to", "1",
                 "--steps", "2", "--measures", "en", "--out", out]) == 2


def test_verify_duality_suite(capsys):
    code = main(["verify", "--suite", "duality"])
    out = capsys.readouterr().out.splitlines()
    assert code == 0
    assert out[-1] == "50/50 checks passed"
    assert all(line.startswith("PASS [duality/") for line in out[:-1])


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert main(["sweep", "--help"]) == 0
    assert "compute" in capsys.readouterr().out
