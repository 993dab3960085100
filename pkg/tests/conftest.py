import numpy as np
import pytest
from fastapi.testclient import TestClient

from app.models.density import DeConfig, DeTrace
from app.services import threshold_service


def csv_rows(text: str):
    """Data rows of a CSV with `#` metadata lines, header row dropped."""
    lines = [line for line in text.splitlines() if line and not line.startswith("#")]
    return [line.split(",") for line in lines[1:]]


def metadata(text: str) -> dict:
    entries = {}
    for line in text.splitlines():
        if line.startswith("# ") and ": " in line:
            key, value = line[2:].split(": ", 1)
            entries[key] = value
    return entries


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def small_cfg():
    return DeConfig(population_size=2000, max_iterations=100, seed=7)


@pytest.fixture
def step_threshold(monkeypatch):
    """
    Replace DE probes by a step function: decodable iff sigma < threshold(spec).

    `threshold` is a float or a callable of the ensemble.
    """
    def install(threshold):
        calls = []

        def fake_is_decodable(spec, sigma, cfg=None):
            cfg = cfg or DeConfig()
            limit = threshold(spec) if callable(threshold) else threshold
            verdict = sigma < limit
            calls.append(sigma)
            trace = DeTrace(
                label=spec.label,
                sigma=sigma,
                positions=(1,),
                ber=np.array([[0.0 if verdict else 0.1]]),
                decodable=verdict,
                decoded_at=1 if verdict else None,
                config=cfg
            )
            return verdict, trace

        monkeypatch.setattr(threshold_service, "is_decodable", fake_is_decodable)
        return calls

    return install


@pytest.fixture(scope="session")
def client(tmp_path_factory):
    from config import settings
    from main import app

    settings.results_dir = str(tmp_path_factory.mktemp("results"))
    with TestClient(app) as test_client:
        yield test_client
