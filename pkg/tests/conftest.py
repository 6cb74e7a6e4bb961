import numpy as np
import pytest

from experiments.config import build_config
from walks.process import InitialHistory, RepulsionParams

CENSUS_BETAS = (0.0, 0.5, 1.0, 1.5, 2.5, 3.0, 4.0, 8.0)
SUPERCRITICAL_BETAS = (2.5, 3.0, 4.0, 8.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


@pytest.fixture
def history():
    return InitialHistory()


@pytest.fixture
def params_one():
    return RepulsionParams(1.0)


@pytest.fixture(autouse=True)
def _no_lab_environment(monkeypatch):
    monkeypatch.delenv("RWLAB_WORKERS", raising=False)
    monkeypatch.delenv("RWLAB_LOG_LEVEL", raising=False)


@pytest.fixture
def make_config(tmp_path):
    """Build a validated config with small defaults; keyword arguments override them."""

    def _make(experiment, **overrides):
        values = {"steps": 2000, "replicas": 6, "seed": 7, "out": str(tmp_path / "out")}
        values.update(overrides)
        return build_config(experiment, flag_values=values, environ={})

    return _make


def random_occupations(rng, count):
    u = rng.uniform(0.0, 1.0, size=(count, 2))
    return np.stack([u[:, 0], 1.0 - u[:, 0], u[:, 1], 1.0 - u[:, 1]], axis=-1)


def random_unit_tangents(rng, count):
    a = rng.uniform(-1.0, 1.0, size=count)
    b = rng.uniform(-1.0, 1.0, size=count)
    scale = 2.0 * (np.abs(a) + np.abs(b))
    return np.stack([a, -a, b, -b], axis=-1) / scale[:, None]
