import pytest

pytest.importorskip("fastapi")
pytest.importorskip("httpx")

from fastapi.testclient import TestClient  # noqa: E402

from qsdlab.service import create_app  # noqa: E402


@pytest.fixture
def client(tmp_path):
    return TestClient(create_app(cache_dir=tmp_path))


def test_health(client):
    r = client.get("/health")
    assert r.status_code == 200 and r.json() == {"status": "ok"}


def test_run(client):
    r = client.post("/run", json={"space": "P2", "bundle": [1], "D": 2, "suites": ["compact", "narrowqsd"]})
    assert r.status_code == 200
    body = r.json()
    assert body["status"] == "pass"
    assert set(body["suites"]) == {"compact", "narrowqsd"}


def test_run_scope_error_is_a_report(client):
    r = client.post("/run", json={"space": "P2", "bundle": [-1], "D": 2, "suites": ["narrow"]})
    assert r.status_code == 200 and r.json()["status"] == "scope-error"


@pytest.mark.parametrize("body", [
    {"space": "P7", "bundle": [1]},
    {"space": "P2", "bundle": [1], "D": 40},
    {"space": "P2", "bundle": [1], "suites": ["bogus"]},
    {"bundle": [1]},
])
def test_run_rejects_bad_input(client, body):
    assert client.post("/run", json=body).status_code == 422


def test_invariants(client):
    r = client.get("/invariants/P2", params={"bundle": "3", "degrees": 2})
    assert r.status_code == 200
    assert r.json()["suites"]["invariants"]["derived"]["local_invariants"] == {"1": "3", "2": "-45/8"}


def test_invariants_bad_space(client):
    assert client.get("/invariants/P9", params={"bundle": "3"}).status_code == 422
