"""CLI subcommands: emission formats, determinism, examples, exit codes."""
import json
import math
import subprocess
import sys
from fractions import Fraction as F

import pytest

from mfzeta.cli import main, parse_alpha_key
from mfzeta.ifs_core import ConfigError
from mfzeta.regularity import FractionKey, OnePlusLogKey, VectorKey, primitive_vectors

CONFIGS = {
    "cantor": {"type": "string", "family": "cantor"},
    "fibonacci": {"type": "string", "family": "fibonacci"},
    "sigma1": {"type": "atomic", "family": "sigma1"},
    "sigma2": {"type": "atomic", "family": "sigma2"},
    "m2": {"type": "atomic", "family": "generalized", "m": 2},
    "beta": {"type": "ifs", "ratios": ["1/3", "1/3"], "probs": ["1/3", "2/3"]},
    "rho": {"type": "ifs", "ratios": ["1/3", "1/3"], "probs": ["1/2", "1/2"]},
}


@pytest.fixture
def config(tmp_path):
    def write(name):
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(CONFIGS[name]))
        return str(path)

    return write


def run_json(capsys, argv):
    rc = main(argv)
    out = capsys.readouterr().out
    return rc, json.loads(out)


def test_alpha_key_parsing():
    assert parse_alpha_key("2,1") == VectorKey((2, 1))
    assert parse_alpha_key("(2,1)") == VectorKey((2, 1))
    assert parse_alpha_key("1/2") == FractionKey(F(1, 2))
    assert parse_alpha_key("1") == FractionKey(F(1))
    assert parse_alpha_key("1+log:3") == OnePlusLogKey(3)
    with pytest.raises(ConfigError):
        parse_alpha_key("one half")


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "mfzeta" in capsys.readouterr().out


def test_zeta_closed_form_examples(capsys, config):
    rc, payload = run_json(
        capsys, ["zeta", "--config", config("sigma1"), "--alpha", "1/2", "--s", "1"]
    )
    assert rc == 0
    assert payload["mode"] == "rational"
    assert payload["exact"] == "1/8"
    assert payload["value_re"] == 0.125

    rc, payload = run_json(capsys, ["zeta", "--config", config("cantor"), "--s", "1"])
    assert rc == 0
    assert payload["exact"] == "1" and payload["value_re"] == 1.0

    rc, payload = run_json(capsys, ["zeta", "--config", config("fibonacci"), "--s", "2"])
    assert rc == 0
    assert payload["exact"] == "16/11"
    assert abs(payload["value_re"] - 16 / 11) < 1e-15


def test_zeta_series_mode(capsys, config):
    rc, payload = run_json(
        capsys, ["zeta", "--config", config("beta"), "--alpha", "2,1", "--s", "2"]
    )
    assert rc == 0
    assert payload["mode"] == "series"
    assert payload["tail_bound"] <= 1e-12
    assert payload["value_re"] > 0

    rc = main(["zeta", "--config", config("beta"), "--alpha", "2,1", "--s", "0.1"])
    assert rc == 2
    assert "convergence" in capsys.readouterr().err


def test_zeta_error_paths(capsys, config):
    # s at a pole of the closed form
    rc = main(["zeta", "--config", config("sigma1"), "--alpha", "1/2", "--s", "0"])
    assert rc == 2
    assert "pole" in capsys.readouterr().err
    # string zetas take no key
    rc = main(["zeta", "--config", config("cantor"), "--alpha", "1/2", "--s", "2"])
    assert rc == 2
    # ifs systems need a vector key
    rc = main(["zeta", "--config", config("beta"), "--alpha", "1/2", "--s", "2"])
    assert rc == 2


def test_spectrum_files_and_manifest(tmp_path, capsys, config):
    out = tmp_path / "beta.csv"
    rc = main(["spectrum", "--config", config("beta"), "--kmax", "8", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "alpha,f,key,alpha_desc,f_desc"
    assert lines[-1] == "# manifest: beta.manifest.json"
    assert len(lines) == 2 + len(primitive_vectors(2, 8))

    envelope = tmp_path / "beta.envelope.csv"
    assert envelope.exists()
    env_lines = envelope.read_text().splitlines()
    assert env_lines[0] == "alpha,f"

    manifest = json.loads((tmp_path / "beta.manifest.json").read_text())
    assert manifest["command"] == "spectrum"
    assert manifest["tool_version"]
    assert manifest["parameters"]["kmax"] == 8
    assert set(manifest["output_paths"]) == {str(out), str(envelope)}


def test_spectrum_bodies_byte_deterministic(tmp_path, capsys, config):
    cfg = config("beta")
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir(), b.mkdir()
    for d in (a, b):
        rc = main(["spectrum", "--config", cfg, "--kmax", "6", "--out", str(d / "s.csv")])
        assert rc == 0
    assert (a / "s.csv").read_bytes() == (b / "s.csv").read_bytes()
    assert (a / "s.envelope.csv").read_bytes() == (b / "s.envelope.csv").read_bytes()


def test_spectrum_monofractal_warning(tmp_path, capsys, config):
    out = tmp_path / "rho.csv"
    rc = main(["spectrum", "--config", config("rho"), "--out", str(out)])
    assert rc == 0
    err = capsys.readouterr().err
    assert "monofractal" in err and "(D, D)" in err
    lines = out.read_text().splitlines()
    assert len(lines) == 3  # header, one point, manifest comment
    assert not (tmp_path / "rho.envelope.csv").exists()


def test_spectrum_rejects_string_configs(tmp_path, capsys, config):
    rc = main(
        ["spectrum", "--config", config("cantor"), "--out", str(tmp_path / "x.csv")]
    )
    assert rc == 2


def test_tapestry_sigma2(capsys, config):
    rc, rows = run_json(
        capsys, ["tapestry", "--config", config("sigma2"), "--kmax", "2", "--band", "10"]
    )
    assert rc == 0
    assert [r["alpha"] for r in rows] == [0.5, 1.0]
    d = math.log(2) / math.log(3)
    assert abs(rows[0]["real_part"] - d / 2) < 1e-12
    assert abs(rows[1]["real_part"] - d) < 1e-12
    assert set(rows[0]) == {"alpha", "real_part", "period", "shift", "residue_re", "residue_im"}


def test_tapestry_m2_matches_sigma2(capsys, config):
    rc1 = main(["tapestry", "--config", config("sigma2"), "--kmax", "3"])
    out1 = capsys.readouterr().out
    rc2 = main(["tapestry", "--config", config("m2"), "--kmax", "3"])
    out2 = capsys.readouterr().out
    assert rc1 == rc2 == 0
    assert out1 == out2


def test_tapestry_rejects_non_atomic(capsys, config):
    assert main(["tapestry", "--config", config("beta")]) == 2
    assert main(["tapestry", "--config", config("cantor")]) == 2


def test_count_cantor_fixed_points(tmp_path, capsys, config):
    out = tmp_path / "count.csv"
    rc = main(
        ["count", "--config", config("cantor"), "--x", "10", "--x", "100",
         "--out", str(out)]
    )
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "x,direct,explicit,error"
    assert lines[-1] == "# manifest: count.manifest.json"
    rows = [line.split(",") for line in lines[1:3]]
    assert [int(r[1]) for r in rows] == [3, 15]
    for r in rows:
        assert round(float(r[2])) == int(r[1])
        assert abs(float(r[3])) < 0.05


def test_count_sampled_rows_round_to_direct(tmp_path, capsys, config):
    out = tmp_path / "s1.csv"
    rc = main(
        ["count", "--config", config("sigma1"), "--alpha", "1/2", "--samples", "6",
         "--out", str(out)]
    )
    assert rc == 0
    for line in out.read_text().splitlines()[1:-1]:
        x, direct, explicit, error = line.split(",")
        assert round(float(explicit)) == int(direct)


def test_count_error_paths(tmp_path, capsys, config):
    out = str(tmp_path / "x.csv")
    assert main(["count", "--config", config("beta"), "--out", out]) == 2
    assert main(["count", "--config", config("sigma2"), "--out", out]) == 2
    # x exactly on a counting jump is rejected by the guard
    rc = main(["count", "--config", config("cantor"), "--x", "9", "--out", out])
    assert rc == 2
    assert "jump" in capsys.readouterr().err


def test_verify_cli_budget_and_exit_codes(capsys, config):
    rc, payload = run_json(capsys, ["verify", "--suite", "oracle", "--budget", "K=6"])
    assert rc == 0
    assert payload["failed"] == 0 and payload["passed"] == 4

    rc = main(["verify", "--suite", "spectra"])
    out = capsys.readouterr().out
    assert rc == 1  # the trident endpoint-slope check fails honestly
    failed = [c["name"] for c in json.loads(out)["checks"] if not c["ok"]]
    assert failed == ["trident-endpoint-slopes"]

    assert main(["verify", "--suite", "oracle", "--budget", "K=banana"]) == 2
    with pytest.raises(SystemExit):
        main(["verify", "--suite", "everything"])


def test_verify_report_file(tmp_path, capsys, config):
    report = tmp_path / "report.json"
    rc = main(["verify", "--suite", "zeta", "--threads", "2", "--out", str(report)])
    assert rc == 0
    assert json.loads(report.read_text())["failed"] == 0


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "mfzeta", "--version"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "mfzeta" in proc.stdout
