import numpy as np
import pytest
from fastapi.testclient import TestClient

from taskfmm.dense import dense_matvec
from taskfmm.geometry import CurveSpec, generate_sources
from taskfmm.service import app


@pytest.fixture()
def client():
    return TestClient(app)


@pytest.fixture()
def problem_id(client):
    resp = client.post("/problems", json={"n": 600, "p_avg": 30, "q_aux": 8})
    assert resp.status_code == 200
    pid = resp.json()["problem_id"]
    yield pid
    client.delete(f"/problems/{pid}")


def test_health(client):
    resp = client.get("/health")
    assert resp.status_code == 200
    assert resp.json() == {"status": "ok"}


def test_problem_lifecycle(client):
    resp = client.post("/problems", json={"n": 500, "p_avg": 25, "q_aux": 8})
    assert resp.status_code == 200
    info = resp.json()
    pid = info["problem_id"]
    assert info["n"] == 500
    assert info["tree_stats"]["n_leaves"] >= 1
    assert sum(info["task_counts"].values()) > 0

    again = client.get(f"/problems/{pid}")
    assert again.status_code == 200
    assert again.json() == info

    assert client.delete(f"/problems/{pid}").json() == {"deleted": pid}
    assert client.get(f"/problems/{pid}").status_code == 404
    assert client.delete(f"/problems/{pid}").status_code == 404


def test_problem_validation(client):
    assert client.post("/problems", json={"n": 1}).status_code == 422
    resp = client.post("/problems", json={
        "n": 100, "curve": {"kind": "helix"}})
    assert resp.status_code == 422


def test_mvp_modes_agree(client, problem_id):
    url = f"/problems/{problem_id}/mvp"
    phis = {}
    for mode in ("dense", "serial", "parallel"):
        resp = client.post(url, json={"mode": mode, "seed": 4,
                                      "workers": 2, "return_phi": True})
        assert resp.status_code == 200
        body = resp.json()
        assert body["mode"] == mode and body["wall_ms"] > 0
        phis[mode] = np.asarray(body["phi"])
    ref = phis["dense"]
    for mode in ("serial", "parallel"):
        rel = np.linalg.norm(phis[mode] - ref) / np.linalg.norm(ref)
        assert rel <= 1e-2


def test_mvp_compare_dense(client, problem_id):
    resp = client.post(f"/problems/{problem_id}/mvp",
                       json={"mode": "serial", "compare_dense": True})
    assert resp.status_code == 200
    body = resp.json()
    assert body["rel_l2_vs_dense"] <= 1e-2
    assert body["phi"] is None


def test_mvp_explicit_charges(client, problem_id):
    q = np.random.default_rng(9).standard_normal(600)
    resp = client.post(f"/problems/{problem_id}/mvp",
                       json={"mode": "dense", "charges": q.tolist(),
                             "return_phi": True})
    assert resp.status_code == 200
    pts = generate_sources(CurveSpec(), 600)
    np.testing.assert_allclose(resp.json()["phi"], dense_matvec(pts, q),
                               rtol=1e-9, atol=1e-9)


def test_mvp_errors(client, problem_id):
    url = f"/problems/{problem_id}/mvp"
    assert client.post(url, json={"charges": [1.0, 2.0]}).status_code == 422
    assert client.post(url, json={"mode": "warp"}).status_code == 422
    assert client.post("/problems/999999/mvp", json={}).status_code == 404


def test_benchmarks_endpoint(client):
    resp = client.post("/benchmarks", json={
        "n": 500, "p_avg": 25, "q_aux": 8, "threads": [1, 2],
        "modes": ["serial", "parallel", "verify"], "repeats": 1})
    assert resp.status_code == 200
    report = resp.json()
    assert report["accuracy_rel_l2"] <= 1e-2
    assert set(report["parallel"]) == {"1", "2"}
    assert client.post("/benchmarks",
                       json={"n": 100, "modes": ["warp"]}).status_code == 422
