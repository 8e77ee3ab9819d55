import csv
import io
import json

import numpy as np
import pytest

from framelab import cli
from framelab.frames import FrameSystem
from framelab.sequence_core import ModelSpace


def _write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture
def pair(tmp_path):
    sp = ModelSpace.finite(2, 2.0)
    F = FrameSystem.from_matrices(sp, np.eye(2), np.eye(2))
    G = FrameSystem.from_matrices(sp, np.eye(2), 0.5 * np.eye(2))
    return _write(tmp_path / "F.json", F.to_json()), _write(tmp_path / "G.json", G.to_json())


def _run(argv, capsys):
    code = cli.main(argv)
    return code, capsys.readouterr()


def test_gallery_export_and_certify(tmp_path, capsys):
    for name in ("example24", "example25"):
        code, _ = _run(["gallery", name, "--out-dir", str(tmp_path)], capsys)
        assert code == 0
    f24, g24 = str(tmp_path / "example24_F.json"), str(tmp_path / "example24_G.json")
    code, out = _run(["approx-cert", "--f", f24, "--g", g24], capsys)
    assert code == 1 and json.loads(out.out)["verdict"] == "NotApproxDual"
    f25, g25 = str(tmp_path / "example25_F.json"), str(tmp_path / "example25_G.json")
    code, out = _run(["approx-cert", "--f", f25, "--g", g25, "--p", "3"], capsys)
    assert code == 0 and json.loads(out.out)["verdict"] == "ApproxDual"
    code, out = _run(["validate", "--f", f25], capsys)
    rep = json.loads(out.out)
    assert code == 1 and rep["p_asf"]["witness"]["kind"] == "kernel_vec"


def test_json_is_deterministic_and_versioned(pair, capsys):
    f, g = pair
    _, a = _run(["neumann", "--f", f, "--g", g, "--depth", "3"], capsys)
    _, b = _run(["neumann", "--f", f, "--g", g, "--depth", "3"], capsys)
    assert a.out == b.out
    rep = json.loads(a.out)
    assert rep["schema"] == 1 and rep["cert_fg"]["upper"] == pytest.approx(0.0625)


@pytest.mark.parametrize("cmd", ["validate", "bounds", "canonical-dual", "excess", "factorize"])
def test_single_system_commands(pair, capsys, cmd):
    code, out = _run([cmd, "--f", pair[0]], capsys)
    assert code == 0 and json.loads(out.out)["schema"] == 1


@pytest.mark.parametrize("cmd", ["dual-check", "approx-cert", "factorize", "neumann"])
def test_pair_commands(pair, capsys, cmd):
    code, out = _run([cmd, "--f", pair[0], "--g", pair[1]], capsys)
    assert code in (0, 1)
    assert "verdict" in out.out or "cert_fg" in out.out or "U" in out.out


def test_perturb_command(pair, capsys):
    f, _ = pair
    code, out = _run(["perturb", "--h", f, "--g", f, "--f", f], capsys)
    assert code == 0 and json.loads(out.out)["bounds"]["dR"] == 0.0


def test_parametrize_dual_command(tmp_path, pair, capsys):
    u = _write(tmp_path / "U.json", {"kind": "dense", "matrix": [[0.1, 0.0], [0.0, 0.1]]})
    code, out = _run(["parametrize-dual", "--f", pair[0], "--u", u], capsys)
    assert code == 0 and json.loads(out.out)["check"]["verdict"] == "ExactDual"


def test_output_formats(pair, capsys, tmp_path):
    code, out = _run(["approx-cert", "--f", pair[0], "--g", pair[1], "--format", "human"], capsys)
    assert code == 0 and "CertifiedYes" in out.out
    code, out = _run(["approx-cert", "--f", pair[0], "--g", pair[1], "--format", "csv"], capsys)
    rows = list(csv.DictReader(io.StringIO(out.out)))
    assert len(rows) == 1 and rows[0]["verdict"] == "ApproxDual"
    target = tmp_path / "report.json"
    code, out = _run(["bounds", "--f", pair[0], "--output", str(target)], capsys)
    assert out.out == "" and json.loads(target.read_text())["command"] == "bounds"


def test_usage_errors_exit_3(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"p": 2,\n "space": ')
    code, out = _run(["validate", "--f", str(bad)], capsys)
    assert code == 3 and "bad.json:2:" in out.err
    missing = _write(tmp_path / "m.json", {"p": 2})
    code, out = _run(["validate", "--f", missing], capsys)
    assert code == 3 and "'space'" in out.err
    assert _run(["validate", "--bogus"], capsys)[0] == 3
    assert _run(["nonsense"], capsys)[0] == 3
    assert _run(["validate"], capsys)[0] == 3
    assert _run(["validate", "--f", str(tmp_path / "nope.json")], capsys)[0] == 3
    assert _run(["gallery", "example99"], capsys)[0] == 3
    assert _run(["experiment", "other"], capsys)[0] == 3
    assert _run(["validate", "--f", missing, "--horizons", "8,4"], capsys)[0] == 3


def test_seed_from_environment(monkeypatch):
    monkeypatch.setenv("FRAMELAB_SEED", "17")
    assert cli.parse_config(["validate", "--f", "x"]).seed == 17
    assert cli.parse_config(["validate", "--f", "x", "--seed", "2"]).seed == 2


def test_experiment_outputs(tmp_path, capsys):
    code, out = _run(["experiment", "excess-invariance", "--trials", "5", "--out-dir",
                      str(tmp_path), "--format", "csv"], capsys)
    assert code == 0
    assert len(list(csv.DictReader(io.StringIO(out.out)))) == 5
    data = json.loads((tmp_path / "excess_invariance.json").read_text())
    assert len(data["rows"]) == 5 and "equality_rate" in data


def test_emit_report_rejects_unknown_format():
    with pytest.raises(cli.UsageError):
        cli.emit_report({}, "xml")
