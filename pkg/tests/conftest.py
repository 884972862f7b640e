"""Pytest configuration and fixtures"""
import pytest
from click.testing import CliRunner

from ergodiff.config import Settings
from ergodiff.main import cli
from ergodiff.services.drift_fields import make_quartic_well_field, make_z4_field, make_zero_field


@pytest.fixture
def z4_field():
    """The drift b = -(d/dz) z^4"""
    return make_z4_field()


@pytest.fixture
def zero_field():
    """Zero drift in the plane"""
    return make_zero_field(2)


@pytest.fixture
def quartic_well_field():
    """b = -grad(r^4)"""
    return make_quartic_well_field(2)


@pytest.fixture
def settings(monkeypatch):
    """Settings built without environment leakage"""
    for name in ("ERGODIFF_SEED", "ERGODIFF_WORKERS", "ERGODIFF_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
    return Settings()


@pytest.fixture
def tmp_out(tmp_path):
    """Output directory for command runs"""
    out = tmp_path / "out"
    out.mkdir()
    return out


@pytest.fixture
def runner():
    """Click test runner"""
    return CliRunner()


@pytest.fixture
def invoke(runner, monkeypatch, tmp_path):
    """Invoke the command line from a scratch working directory"""
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("ERGODIFF_SEED", raising=False)

    def _invoke(*args):
        return runner.invoke(cli, list(args), catch_exceptions=False)

    return _invoke
