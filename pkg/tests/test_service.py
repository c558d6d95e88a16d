"""HTTP layer: endpoint contracts, validation mapping, artifact payloads."""

from dataclasses import replace

import pytest
from fastapi.testclient import TestClient

import ringform.service as service
from ringform import __version__
from ringform.scenario import make_regular_scenario, scenario_to_dict


@pytest.fixture(scope="module")
def client():
    with TestClient(service.app) as c:
        yield c


def small_doc(a: float = 1.0, t_max: float = 1.0) -> dict:
    return {
        "name": "svc-test",
        "n": 5,
        "targets_deg": [36.0] * 5,
        "initial": {"kind": "star", "winding": 2, "perturb": 0.3, "seed": 11},
        "sim": {"a": a, "t_max": t_max},
    }


class TestHealth:
    def test_ok(self, client):
        resp = client.get("/health")
        assert resp.status_code == 200
        assert resp.json() == {"status": "ok", "version": __version__}


class TestRun:
    def test_run_returns_summary_and_artifacts(self, client):
        resp = client.post("/run", json={"scenario": small_doc()})
        assert resp.status_code == 200
        body = resp.json()
        assert body["summary"]["scenario_name"] == "svc-test"
        assert body["summary"]["terminal_event"] in (
            "Converged",
            "Collision",
            "HorizonReached",
        )
        art = body["artifacts"]
        assert art["trajectory_csv"].startswith("t,z1x,z1y")
        assert art["scenario_json"].startswith("{")
        assert art["summary_json"].rstrip().endswith("}")
        for key in ("trajectory_svg", "errors_svg", "diagnostics_svg"):
            assert "<svg" in art[key] and "<polyline" in art[key]

    def test_assumption_violation_maps_to_422(self, client):
        doc = small_doc()
        doc["targets_deg"] = [180.0] * 5
        resp = client.post("/run", json={"scenario": doc})
        assert resp.status_code == 422
        assert "180" in resp.json()["detail"]

    def test_inconsistent_n_maps_to_422(self, client):
        doc = small_doc()
        doc["n"] = 6
        resp = client.post("/run", json={"scenario": doc})
        assert resp.status_code == 422

    def test_missing_scenario_field_is_422(self, client):
        resp = client.post("/run", json={})
        assert resp.status_code == 422


class TestVerify:
    def test_full_suite(self, client):
        resp = client.post("/verify", json={"seed": 1})
        assert resp.status_code == 200
        body = resp.json()
        assert body["seed"] == 1
        assert body["passed"] is True
        assert len(body["checks"]) >= 20
        assert all(set(c) == {"name", "passed", "detail", "seconds"} for c in body["checks"])

    def test_null_seed_resolves(self, client, monkeypatch):
        from ringform.verification import CHECKS

        monkeypatch.setenv("RINGFORM_SEED", "55")
        fast = [c for c in CHECKS if c[0] == "lemma3-power-sums"]
        monkeypatch.setattr("ringform.verification.CHECKS", fast)
        resp = client.post("/verify", json={"seed": None})
        assert resp.status_code == 200
        assert resp.json()["seed"] == 55

    def test_non_integer_seed_rejected(self, client):
        resp = client.post("/verify", json={"seed": "abc"})
        assert resp.status_code == 422


class TestSweep:
    def test_explicit_base(self, client):
        doc = small_doc(t_max=0.5)
        resp = client.post(
            "/sweep", json={"param": "a", "values": [0.6, 1.0], "scenario": doc}
        )
        assert resp.status_code == 200
        rows = resp.json()["rows"]
        assert [r["a"] for r in rows] == [0.6, 1.0]
        assert rows[0]["name"] == "svc-test-a0.6"
        assert all(r["terminal_event"] == "HorizonReached" for r in rows)

    def test_default_base_is_decagon(self, client, monkeypatch):
        # trim the default so the test stays fast; the endpoint still owns naming
        real = service.reproduce_scenarios

        def trimmed(figure):
            return [replace(sc, sim=replace(sc.sim, t_max=0.2)) for sc in real(figure)]

        monkeypatch.setattr(service, "reproduce_scenarios", trimmed)
        resp = client.post("/sweep", json={"values": [1.0]})
        assert resp.status_code == 200
        rows = resp.json()["rows"]
        assert rows[0]["name"] == "decagon-a1"

    def test_bad_param_maps_to_422(self, client):
        resp = client.post(
            "/sweep", json={"param": "dt", "values": [0.1], "scenario": small_doc(t_max=0.2)}
        )
        assert resp.status_code == 422
        assert "'dt'" in resp.json()["detail"]

    def test_empty_values_rejected(self, client):
        resp = client.post("/sweep", json={"values": []})
        assert resp.status_code == 422


class TestReproduce:
    def test_fig3_trimmed(self, client, monkeypatch):
        real = service.reproduce_scenarios

        def trimmed(figure):
            return [replace(sc, sim=replace(sc.sim, t_max=0.3)) for sc in real(figure)]

        monkeypatch.setattr(service, "reproduce_scenarios", trimmed)
        resp = client.post("/reproduce", json={"figure": "fig3"})
        assert resp.status_code == 200
        runs = resp.json()["runs"]
        assert [r["name"] for r in runs] == [
            "fig3-exponential-a1.0",
            "fig3-finite-time-a0.3",
        ]
        for r in runs:
            assert r["artifacts"]["trajectory_csv"].startswith("t,")
            assert r["summary"]["n"] == 5

    def test_unknown_figure_rejected(self, client):
        resp = client.post("/reproduce", json={"figure": "fig9"})
        assert resp.status_code == 422


class TestScenarioEcho:
    def test_run_echoes_canonical_scenario(self, client):
        sc = make_regular_scenario(5, 2, 36.0, 0.1, 3, name="echo")
        sc = replace(sc, sim=replace(sc.sim, t_max=0.2))
        resp = client.post("/run", json={"scenario": scenario_to_dict(sc)})
        assert resp.status_code == 200
        import json

        echoed = json.loads(resp.json()["artifacts"]["scenario_json"])
        assert echoed == scenario_to_dict(sc)
