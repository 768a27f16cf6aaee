import warnings

import pytest

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from starlette.testclient import TestClient

from sphere_lab.service.app import create_app


@pytest.fixture(scope="module")
def client():
    with TestClient(create_app(), base_url="http://sphere-lab") as c:
        yield c


def test_health(client):
    resp = client.get("/health")
    assert resp.status_code == 200
    body = resp.json()
    assert body["status"] == "ok" and "version" in body


def test_enumerate(client):
    resp = client.post("/enumerate", json={"n": 4, "lambda": 1, "include_points": True})
    assert resp.status_code == 200
    body = resp.json()
    assert body["size"] == 8 and body["N"] == 2 and body["lambda"] == 1
    assert [1, 0, 0, 0] in body["points"]
    resp2 = client.post("/enumerate", json={"n": 4, "lambda": 25})
    assert resp2.json()["size"] == 248 and resp2.json()["points"] is None


def test_energy(client):
    resp = client.post("/energy", json={"n": 4, "lambda": 25})
    body = resp.json()
    assert body["energy"] == 505176 and body["set_size"] == 248 and body["N"] == 6


def test_incidence(client):
    resp = client.post("/incidence", json={"n": 4, "lambda": 25})
    body = resp.json()
    assert body["incidences"] == 61256
    assert body["num_hyperplanes"] == 13856
    assert body["satisfied"] is True and body["check"] == "lemma21"


def test_gram_count(client):
    resp = client.post("/gram-count", json={"lambda": 5, "a": 1, "b": 2})
    body = resp.json()
    assert body["count"] == 384 and body["det"] == "36"


def test_density(client):
    resp = client.post(
        "/density", json={"lambda": 5, "a": 1, "b": 2, "p": 3, "r_max": 2}
    )
    body = resp.json()
    assert body["stabilized"] is False
    assert body["nu"] is None
    assert body["normalized"] == [[1, "88/81"], [2, "128/81"]]
    assert body["good_prime"] is False


def test_gcd_sum(client):
    resp = client.post("/gcd-sum", json={"lambda": 5})
    assert resp.json() == {"lambda": 5, "value": 393}


def test_paraboloid(client):
    resp = client.post("/paraboloid", json={"N": 2})
    body = resp.json()
    assert body["size"] == 125 and body["energy"] == 128901


def test_moments_exact(client):
    resp = client.post("/moments", json={"n": 4, "lambda": 1, "p": 4})
    body = resp.json()
    assert body["exact"] is True and body["value_exact"] == 168


def test_fit(client):
    rows = [[1, 2], [2, 16], [3, 54], [4, 128]]  # y = 2 x^3
    resp = client.post("/fit", json={"rows": rows})
    body = resp.json()
    assert abs(body["slope"] - 3.0) < 1e-9


def test_suite_single(client):
    resp = client.post("/suite", json={"names": ["03-chain-counts"]})
    body = resp.json()
    assert body["passed"] is True
    assert body["results"][0]["name"] == "03-chain-counts"


def test_usage_error_mapping(client):
    resp = client.post("/energy", json={"n": 9, "lambda": 1})
    assert resp.status_code == 422  # pydantic bound
    resp2 = client.post("/enumerate", json={"n": 4, "lambda": 10**6, "budget_points": 10})
    assert resp2.status_code == 400
    body = resp2.json()
    assert body["kind"] == "run" and body["error"] == "BudgetExceeded"
    resp3 = client.post("/suite", json={"names": ["zz-not-a-suite"]})
    assert resp3.status_code == 400
    assert resp3.json()["kind"] == "usage"
