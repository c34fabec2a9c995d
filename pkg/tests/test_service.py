"""HTTP endpoints: validation, simulation, and detection round trips."""

import pytest
from fastapi.testclient import TestClient

from phlink.service import create_app

FAST_TOML = """
[experiment]
kind = "comm_run"
seed = 2
n_symbols = 3
threshold_source = "fixed"

[transport]
n = 128
"""


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


class TestHealth:
    def test_health(self, client):
        r = client.get("/health")
        assert r.status_code == 200
        body = r.json()
        assert body["status"] == "ok"
        assert body["version"]


class TestValidate:
    def test_empty_config_is_valid(self, client):
        r = client.post("/validate", json={"config_toml": ""})
        assert r.status_code == 200
        assert r.json() == {"valid": True, "errors": []}

    def test_invariant_violations_reported(self, client):
        toml = "[experiment]\nseed = -3\n\n[transport]\nn = 4\n"
        r = client.post("/validate", json={"config_toml": toml})
        assert r.status_code == 200
        body = r.json()
        assert body["valid"] is False
        assert len(body["errors"]) == 2

    def test_malformed_toml_reported_not_crashed(self, client):
        r = client.post("/validate", json={"config_toml": "[broken"})
        assert r.status_code == 200
        body = r.json()
        assert body["valid"] is False
        assert any("TOML" in e for e in body["errors"])


class TestSimulate:
    def test_small_run_returns_artifacts(self, client):
        r = client.post("/simulate", json={"config_toml": FAST_TOML})
        assert r.status_code == 200
        body = r.json()
        assert body["run_id"] == "comm_run-s2"
        assert body["kind"] == "comm_run"
        assert body["seed"] == 2
        assert "ser" in body["summary"]
        names = [a["name"] for a in body["artifacts"]]
        assert names == sorted(names)
        assert "trace.csv" in names
        assert "summary.csv" in names

    def test_overrides_take_effect(self, client):
        r = client.post(
            "/simulate", json={"config_toml": FAST_TOML, "seed": 5}
        )
        assert r.status_code == 200
        assert r.json()["run_id"] == "comm_run-s5"
        assert r.json()["seed"] == 5

    def test_invalid_config_gives_422_with_errors(self, client):
        r = client.post(
            "/simulate", json={"config_toml": "[transport]\nn = 4\n"}
        )
        assert r.status_code == 422
        assert r.json()["detail"]["errors"]

    def test_request_schema_enforced(self, client):
        r = client.post("/simulate", json={"config_toml": FAST_TOML, "seed": -1})
        assert r.status_code == 422

    def test_deterministic_across_requests(self, client):
        a = client.post("/simulate", json={"config_toml": FAST_TOML}).json()
        b = client.post("/simulate", json={"config_toml": FAST_TOML}).json()
        assert a == b


class TestDetect:
    def test_round_trip_against_simulation(self, client):
        sim = client.post("/simulate", json={"config_toml": FAST_TOML}).json()
        artifacts = {a["name"]: a["content"] for a in sim["artifacts"]}
        r = client.post(
            "/detect",
            json={"trace_csv": artifacts["trace.csv"], "config_toml": FAST_TOML},
        )
        assert r.status_code == 200
        body = r.json()
        assert body["n_symbols"] == 3
        stored_rx = [
            int(line.split(",")[6])
            for line in artifacts["frames.csv"].splitlines()[1:]
        ]
        assert body["symbols"] == stored_rx
        assert len(body["bits"]) == 2 * body["n_symbols"]
        assert len(body["frames"]) == body["n_symbols"]
        frame = body["frames"][0]
        assert frame["t_end_s"] > frame["t_start_s"]
        assert frame["bits"] in ("00", "01", "11", "10")

    def test_malformed_trace_gives_422(self, client):
        r = client.post(
            "/detect", json={"trace_csv": "bogus,header\n1,2\n", "config_toml": ""}
        )
        assert r.status_code == 422
        assert r.json()["detail"]["errors"]

    def test_bad_config_gives_422(self, client):
        r = client.post(
            "/detect",
            json={
                "trace_csv": "t_s,dv_mv\n0.0,0.0\n0.1,0.0\n",
                "config_toml": "[transport]\nn = 1\n",
            },
        )
        assert r.status_code == 422
