import pytest
from fastapi.testclient import TestClient

from server import app


@pytest.fixture
def client():
    return TestClient(app)


def test_status(client):
    response = client.get("/status")
    assert response.status_code == 200
    data = response.json()
    assert data["status"] == "ok"
    assert "nls_validity" in data["experiments"] and "property_suite" in data["experiments"]


def test_carrier(client):
    data = client.get("/carrier", params={"k0": 1.0}).json()
    assert data["delta"] == pytest.approx(0.045)
    assert data["nu2"] == pytest.approx(-0.0643, abs=1e-3)
    assert client.get("/carrier", params={"k0": 1.0, "delta": 0.5}).status_code == 422


def test_unknown_experiment(client):
    assert client.post("/experiments/nope", json={}).status_code == 404


def test_invalid_config(client):
    response = client.post("/experiments/simulate", json={"eps_list": [0.1, 0.2]})
    assert response.status_code == 422
    assert response.json()["detail"][0]["loc"][-1] == "eps_list"


def test_small_simulation(client):
    response = client.post("/experiments/simulate", json={"eps_list": [0.1], "T0": 0.1, "workers": 1})
    assert response.status_code == 200
    data = response.json()
    assert data["experiment"] == "simulate"
    assert data["passed"] is True
    assert data["runlog"]["final_t"] == pytest.approx(2.0)
