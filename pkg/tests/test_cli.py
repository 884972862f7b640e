"""Tests for the command-line interface"""
import json

import pytest

from ergodiff import __version__
from ergodiff.core.errors import QuadratureError
from ergodiff.services.export import file_sha256, read_manifest


def _rows(path):
    return path.read_text().splitlines()


def test_version(invoke):
    """Test the version flag"""
    result = invoke("--version")
    assert result.exit_code == 0
    assert __version__ in result.output


def test_help_lists_subcommands(invoke):
    """Test every subcommand is registered"""
    result = invoke("--help")
    assert result.exit_code == 0
    for name in ("simulate", "classify", "ergodic", "order-check"):
        assert name in result.output


def test_simulate_writes_checkpoints(invoke, tmp_out):
    """Test 10^4 steps with stride 100 give 101 rows"""
    result = invoke("simulate", "--field", "z4", "--seed", "1", "--out", str(tmp_out))
    assert result.exit_code == 0
    rows = _rows(tmp_out / "trajectory.csv")
    assert rows[0] == "t,x1,x2"
    assert len(rows) == 102
    assert rows[1] == "0,0,0"
    assert float(rows[-1].split(",")[0]) == pytest.approx(1.0)


def test_simulate_manifest(invoke, tmp_out):
    """Test the manifest records the configuration and output hashes"""
    invoke("simulate", "--field", "z4", "--seed", "5", "--T", "0.1", "--out", str(tmp_out))
    manifest = read_manifest(tmp_out / "simulate_manifest.json")
    assert manifest.subcommand == "simulate"
    assert manifest.master_seed == 5
    assert manifest.configuration["horizon"] == 0.1
    assert "out" not in manifest.configuration
    [output] = manifest.outputs
    assert output.sha256 == file_sha256(tmp_out / "trajectory.csv")


def test_simulate_requires_field(invoke, tmp_out):
    """Test a missing field is a usage error"""
    result = invoke("simulate", "--out", str(tmp_out))
    assert result.exit_code == 2


def test_simulate_unknown_field(invoke, tmp_out):
    """Test an unknown field name is a usage error"""
    result = invoke("simulate", "--field", "nowhere", "--out", str(tmp_out))
    assert result.exit_code == 2


def test_simulate_bad_stride(invoke, tmp_out):
    """Test a stride that does not divide the steps is refused"""
    result = invoke("simulate", "--field", "z4", "--stride", "7", "--out", str(tmp_out))
    assert result.exit_code == 2


def test_simulate_schemes_share_start(invoke, tmp_path):
    """Test Euler and Taylor runs start from the same recorded point"""
    for scheme in ("euler", "taylor15"):
        invoke(
            "simulate", "--field", "z4", "--start", "0.5,0", "--T", "0.1", "--scheme", scheme,
            "--out", str(tmp_path / scheme),
        )
    euler = _rows(tmp_path / "euler" / "trajectory.csv")
    taylor = _rows(tmp_path / "taylor15" / "trajectory.csv")
    assert euler[1] == taylor[1] == "0,0.5,0"
    assert euler[-1] != taylor[-1]


def test_simulate_explosion_exit_code(invoke, tmp_out):
    """Test a path leaving the guard radius exits with 3 and keeps partial output"""
    result = invoke(
        "simulate", "--field", "z4", "--start", "50,0", "--delta", "0.01", "--T", "0.1",
        "--scheme", "euler", "--stride", "1", "--out", str(tmp_out),
    )
    assert result.exit_code == 3
    assert len(_rows(tmp_out / "trajectory.csv")) < 12


def test_seed_from_environment(invoke, monkeypatch, tmp_path):
    """Test ERGODIFF_SEED supplies the seed when no flag is given"""
    monkeypatch.setenv("ERGODIFF_SEED", "7")
    invoke("simulate", "--field", "z4", "--T", "0.1", "--out", str(tmp_path / "env"))
    invoke(
        "simulate", "--field", "z4", "--T", "0.1", "--seed", "7", "--out", str(tmp_path / "flag")
    )
    assert read_manifest(tmp_path / "env" / "simulate_manifest.json").master_seed == 7
    env_csv = (tmp_path / "env" / "trajectory.csv").read_bytes()
    assert env_csv == (tmp_path / "flag" / "trajectory.csv").read_bytes()


def test_manifest_replay(invoke, tmp_path):
    """Test replaying a manifest reproduces the outputs byte for byte"""
    first = tmp_path / "first"
    invoke(
        "simulate", "--field", "z4", "--start", "0.3,-0.2", "--seed", "11", "--T", "0.2",
        "--stride", "50", "--out", str(first),
    )
    second = tmp_path / "second"
    result = invoke(
        "simulate", "--manifest", str(first / "simulate_manifest.json"), "--out", str(second)
    )
    assert result.exit_code == 0
    assert (first / "trajectory.csv").read_bytes() == (second / "trajectory.csv").read_bytes()


def test_manifest_of_another_subcommand(invoke, tmp_path):
    """Test a manifest is only replayed by the subcommand that wrote it"""
    invoke("classify", "--profile", "brownian", "--dim", "1", "--out", str(tmp_path / "c"))
    result = invoke(
        "simulate", "--manifest", str(tmp_path / "c" / "classify_manifest.json"),
        "--out", str(tmp_path / "s"),
    )
    assert result.exit_code == 2


def test_config_table_and_flag_precedence(invoke, tmp_path):
    """Test TOML values fill in defaults while explicit flags win"""
    config = tmp_path / "ergodiff.toml"
    config.write_text('seed = 3\n\n[simulate]\nfield = "z4"\ndelta = 0.001\nstride = 10\n')
    invoke("simulate", "--config", str(config), "--out", str(tmp_path / "toml"))
    rows = _rows(tmp_path / "toml" / "trajectory.csv")
    assert len(rows) == 102
    assert read_manifest(tmp_path / "toml" / "simulate_manifest.json").master_seed == 3

    invoke(
        "simulate", "--config", str(config), "--delta", "0.01", "--out", str(tmp_path / "flag")
    )
    assert len(_rows(tmp_path / "flag" / "trajectory.csv")) == 12


def test_classify_brownian_plane(invoke, tmp_out):
    """Test planar Brownian motion is reported recurrent"""
    result = invoke("classify", "--profile", "brownian", "--dim", "2", "--out", str(tmp_out))
    assert result.exit_code == 0
    assert "summary: recurrent" in result.output
    report = json.loads((tmp_out / "classify_report.json").read_text())
    assert report["summary"] == "recurrent"
    assert [c["name"] for c in report["criteria"]] == ["cr1", "cr2", "cr4", "cr5"]


def test_classify_power_well(invoke, tmp_out):
    """Test V = -1/r in three dimensions is reported transient"""
    result = invoke(
        "classify", "--profile", "power-well", "--dim", "3", "--alpha", "1", "--out", str(tmp_out)
    )
    assert result.exit_code == 0
    assert "summary: transient" in result.output


def test_classify_z4(invoke, tmp_out):
    """Test the z4 profile is reported inconclusive"""
    result = invoke("classify", "--profile", "z4", "--out", str(tmp_out))
    assert result.exit_code == 0
    assert "summary: inconclusive" in result.output


def test_classify_requires_a_profile(invoke, tmp_out):
    """Test classify needs a profile or a field file"""
    assert invoke("classify", "--out", str(tmp_out)).exit_code == 2


def test_ergodic_single_trajectory(invoke, tmp_out):
    """Test one trajectory draws exactly one line per center"""
    result = invoke(
        "ergodic", "--n-traj", "1", "--center", "0,0", "--T", "0.5", "--delta", "0.001",
        "--start-box=-1,1", "--seed", "2", "--out", str(tmp_out),
    )
    assert result.exit_code == 0
    svg = (tmp_out / "series_center0.svg").read_text()
    assert svg.count("<polyline") == 1
    rows = _rows(tmp_out / "series_center0.csv")
    assert rows[0] == "T,f_T,trajectory,start_x1,start_x2,center_x1,center_x2"
    assert len(rows) == 6
    summary = json.loads((tmp_out / "ergodic_summary.json").read_text())
    assert summary["centers"][0]["center"] == [0.0, 0.0]
    assert len(summary["occupation"]) == 1


def test_ergodic_is_reproducible(invoke, tmp_path):
    """Test the same seed gives identical plots and series"""
    for name in ("a", "b"):
        invoke(
            "ergodic", "--n-traj", "2", "--center", "0,0", "--center", "2,0", "--T", "0.5",
            "--delta", "0.001", "--start-box=-1,1", "--seed", "8", "--out", str(tmp_path / name),
        )
    for filename in ("series_center0.svg", "series_center1.csv"):
        assert (tmp_path / "a" / filename).read_bytes() == (tmp_path / "b" / filename).read_bytes()


def test_order_check_zero_field(invoke, tmp_out):
    """Test the order check runs and records its estimates"""
    result = invoke(
        "order-check", "--field", "zero", "--T", "0.25", "--deltas", "0.0625,0.03125",
        "--delta-ref", "0.00390625", "--n-paths", "5", "--scheme", "euler", "--out", str(tmp_out),
    )
    assert result.exit_code == 0
    [estimate] = json.loads((tmp_out / "order_check.json").read_text())
    assert estimate["scheme"] == "euler"
    assert max(estimate["errors"]) < 1e-12
    assert (tmp_out / "order-check_manifest.json").exists()


def test_numerical_failure_exit_code(invoke, mocker, tmp_out):
    """Test a quadrature failure exits with 3"""
    mocker.patch(
        "ergodiff.cli.classify.classify", side_effect=QuadratureError("no convergence")
    )
    result = invoke("classify", "--profile", "z4", "--out", str(tmp_out))
    assert result.exit_code == 3
    assert "no convergence" in result.output


def test_classify_rejects_zero_radius(invoke, tmp_out):
    """Test --r0 0 is a usage error"""
    result = invoke("classify", "--profile", "brownian", "--r0", "0", "--out", str(tmp_out))
    assert result.exit_code == 2
