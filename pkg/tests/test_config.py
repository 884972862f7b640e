"""Tests for settings"""
import pytest
from pydantic import ValidationError

from ergodiff.config import ClassifierSettings, Settings, load_settings


def test_defaults(settings):
    """Test the documented defaults"""
    assert settings.seed == 0
    assert settings.workers == 1
    assert settings.checkpoint_stride == 100
    assert settings.guard_radius == 1e6
    assert settings.classifier.doublings == 12
    assert settings.classifier.n_angles == 256
    assert not settings.classifier.report_null_recurrence
    assert settings.diagnostic.window_fraction == 0.25
    assert settings.table("order-check") == {}


def test_environment(monkeypatch, settings):
    """Test ERGODIFF_ variables, nested ones included"""
    monkeypatch.setenv("ERGODIFF_SEED", "17")
    monkeypatch.setenv("ERGODIFF_CLASSIFIER__DOUBLINGS", "5")
    loaded = Settings()
    assert loaded.seed == 17
    assert loaded.classifier.doublings == 5


def test_toml_file(monkeypatch, tmp_path):
    """Test a TOML file with subcommand tables"""
    monkeypatch.delenv("ERGODIFF_SEED", raising=False)
    path = tmp_path / "run.toml"
    path.write_text(
        "seed = 9\nworkers = 2\n\n"
        "[classifier]\nr0 = 0.5\n\n"
        "[ergodic]\nn-traj = 4\ncenters = [[0.0, 0.0], [2.0, 0.0]]\n\n"
        "[order_check]\nn_paths = 10\n"
    )
    loaded = load_settings(path)
    assert loaded.seed == 9
    assert loaded.workers == 2
    assert loaded.classifier.r0 == 0.5
    assert loaded.table("ergodic")["n-traj"] == 4
    assert loaded.table("order-check") == {"n_paths": 10}


def test_overrides_beat_the_file(monkeypatch, tmp_path):
    """Test keyword overrides take precedence over the TOML file and the environment"""
    monkeypatch.setenv("ERGODIFF_SEED", "1")
    path = tmp_path / "run.toml"
    path.write_text("seed = 2\n")
    assert load_settings(path).seed == 2
    assert load_settings(path, seed=3).seed == 3


def test_invalid_values():
    """Test out-of-range settings are rejected"""
    with pytest.raises(ValidationError):
        Settings(workers=0)
    with pytest.raises(ValidationError):
        ClassifierSettings(geometric_ratio=1.5)
