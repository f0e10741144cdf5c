import numpy as np
import pytest
from fastapi.testclient import TestClient

from chol import PeakonConfig, multipeakon_pair
from chol.serialization import pair_to_dict
from chol.service import app

client = TestClient(app)


def peakon_pair_dict(amplitudes=(1.0,), positions=(0.0,), n=400, window=15.0):
    x = np.linspace(-window, window, n)
    return pair_to_dict(multipeakon_pair(PeakonConfig(amplitudes, positions), x))


def scenario(t_end=0.1, n=400):
    return {
        "name": "svc-test",
        "initial": {"peakons": {"amplitudes": [1.0], "positions": [0.0]}},
        "grid": {"x_min": -15.0, "x_max": 15.0, "n": n},
        "solver": {"dt": 5e-3, "t_end": t_end, "monitor_every": 10},
        "outputs": {"prefix": "svc", "lagrangian": True},
    }


def test_health():
    r = client.get("/health")
    assert r.status_code == 200
    assert r.json()["status"] == "ok"


def test_simulate_endpoint():
    r = client.post("/simulate", json={"scenarios": [scenario()]})
    assert r.status_code == 200
    body = r.json()
    res = body["results"][0]
    assert res["manifest"]["energy_drift"] <= 1e-8
    assert len(res["manifest"]["config_sha256"]) == 64
    assert res["snapshots"][0]["pair"] is not None
    assert res["snapshots"][0]["state"] is not None
    assert res["snapshots"][-1]["t"] == pytest.approx(0.1)


def test_simulate_rejects_peakon_outside_window():
    bad = scenario()
    bad["initial"]["peakons"]["positions"] = [40.0]
    r = client.post("/simulate", json={"scenarios": [bad]})
    assert r.status_code == 422


def test_transform_roundtrip_endpoint():
    pair = peakon_pair_dict()
    r = client.post(
        "/transform",
        json={"direction": "to_lagrangian", "pair": pair, "roundtrip": True},
    )
    assert r.status_code == 200
    body = r.json()
    assert body["state"] is not None
    assert body["roundtrip_u_linf"] < 1e-2
    r2 = client.post("/transform", json={"direction": "to_eulerian", "state": body["state"]})
    assert r2.status_code == 200
    assert r2.json()["pair"] is not None


def test_transform_validation_error():
    r = client.post("/transform", json={"direction": "sideways"})
    assert r.status_code == 422


def test_metric_endpoint_identical_pairs():
    pair = peakon_pair_dict()
    r = client.post("/metric", json={"pair_a": pair, "pair_b": pair})
    assert r.status_code == 200
    body = r.json()
    assert body["lower"] == 0.0 and body["upper"] == 0.0
    assert "f1" in body["witness_knots"]


def test_metric_restricted_gate():
    pair = peakon_pair_dict()  # energy ~ 2
    r = client.post(
        "/metric", json={"pair_a": pair, "pair_b": pair, "restricted_m": 1.0}
    )
    assert r.status_code == 422
    r = client.post(
        "/metric", json={"pair_a": pair, "pair_b": pair, "restricted_m": 3.0}
    )
    assert r.status_code == 200


def test_validate_endpoint():
    r = client.post("/validate", json={"suite": "hyperelastic"})
    assert r.status_code == 200
    body = r.json()
    assert body["passed"] is True
    assert body["report"][0]["cid"] == 12


def test_validate_unknown_suite():
    r = client.post("/validate", json={"suite": "nope"})
    assert r.status_code == 422
