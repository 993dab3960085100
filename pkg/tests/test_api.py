import pytest

from config import settings

PREFIX = settings.api_prefix


class TestSystem:
    def test_health(self, client):
        response = client.get("/health")
        assert response.status_code == 200
        body = response.json()
        assert body["status"] == "healthy"
        assert body["version"] == settings.app_version

    def test_root(self, client):
        assert client.get("/").json()["docs"] == "/docs"


class TestSir:
    def test_sigma_sym_of_rate(self, client):
        response = client.get(f"{PREFIX}/sir", params={"rate": 0.5})
        assert response.status_code == 200
        [point] = response.json()["points"]
        assert point["sigma"] == pytest.approx(0.805, abs=0.003)
        assert point["rate"] == 0.5

    def test_rate_at_low_noise(self, client):
        [point] = client.get(f"{PREFIX}/sir", params={"sigma": 0.05}).json()["points"]
        assert point["rate"] == pytest.approx(1.0, abs=1e-3)

    @pytest.mark.parametrize("params", [{}, {"sigma": 0.8, "rate": 0.5}])
    def test_exactly_one_target(self, client, params):
        assert client.get(f"{PREFIX}/sir", params=params).status_code == 400

    def test_rate_out_of_range(self, client):
        assert client.get(f"{PREFIX}/sir", params={"rate": 1.5}).status_code == 422


class TestEnsembles:
    def test_describe_coupled(self, client):
        response = client.get(f"{PREFIX}/ensembles/describe", params={"length": 5})
        assert response.status_code == 200
        assert response.json()["check_count"] == 7

    def test_even_variable_degree_chain(self, client):
        response = client.get(f"{PREFIX}/ensembles/describe", params={"d_l": 4, "d_r": 8, "length": 10})
        assert response.status_code == 422


class TestDensityEvolution:
    def test_trace(self, client):
        response = client.post(
            f"{PREFIX}/density-evolution/trace",
            json={"sigma": 0.6, "population_size": 2000, "max_iterations": 100, "seed": 3}
        )
        assert response.status_code == 200
        trace = response.json()["trace"]
        assert trace["decodable"] is True
        assert trace["positions"] == [1]
        assert trace["ber"][-1] == [0.0]
        assert trace["config"]["population_size"] == 2000

    def test_population_cap(self, client):
        response = client.post(
            f"{PREFIX}/density-evolution/trace",
            json={"sigma": 0.6, "population_size": settings.api_max_population_size + 1}
        )
        assert response.status_code == 422


class TestThresholds:
    def test_search(self, client, step_threshold):
        step_threshold(0.7423)
        response = client.post(f"{PREFIX}/thresholds", json={"tolerance": 0.01})
        assert response.status_code == 200
        result = response.json()
        assert result["lower"] < 0.7423 <= result["upper"]
        assert result["lower_trace"]["decodable"] is True

    def test_invalid_bracket(self, client, step_threshold):
        step_threshold(5.0)
        response = client.post(f"{PREFIX}/thresholds", json={"bracket": [0.4, 1.0], "tolerance": 0.01})
        assert response.status_code == 422

    def test_sweep_requires_lengths(self, client):
        assert client.post(f"{PREFIX}/thresholds/sweep", json={}).status_code == 400

    def test_sweep(self, client, step_threshold):
        step_threshold(lambda spec: 0.75 + 0.5 / spec.length)
        response = client.post(
            f"{PREFIX}/thresholds/sweep",
            json={"sweep_lengths": [5, 10, 20], "tolerance": 0.0005}
        )
        assert response.status_code == 200
        sweep = response.json()
        assert len(sweep["rows"]) == 3
        assert sweep["extrapolation"]["sigma_inf"] == pytest.approx(0.75, abs=0.005)


class TestSimulations:
    def test_low_noise(self, client):
        response = client.post(
            f"{PREFIX}/simulations",
            json={"n": 200, "sigma": 0.05, "trials": 2, "iterations": 3, "seed": 1}
        )
        assert response.status_code == 200
        result = response.json()
        assert result["ber"] == [0.0, 0.0, 0.0]
        assert result["trial_ber"] == [[0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]
        assert result["fer"] == 0.0

    def test_block_length_cap(self, client):
        response = client.post(
            f"{PREFIX}/simulations",
            json={"n": settings.api_max_block_length + 2, "sigma": 0.5}
        )
        assert response.status_code == 422

    def test_incompatible_block_length(self, client):
        response = client.post(f"{PREFIX}/simulations", json={"n": 201, "sigma": 0.5, "trials": 1})
        assert response.status_code == 422
