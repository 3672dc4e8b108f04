"""HTTP service contract tests (status codes, schemas, CLI consistency)."""

import json
import time

import pytest
from fastapi.testclient import TestClient

from sharedctrl.api import create_app
from sharedctrl.cli import main as cli_main

STAHL = {"n0": 20169, "n1": 5539, "n0p": 8806, "n1p": 6768}
GWAS = {"alpha": 5e-6, "beta": 5e-4, "gamma": 5e-8}


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app({"cors_origin": "http://localhost:5173"}))


class TestHealth:
    def test_health(self, client):
        r = client.get("/v1/health")
        assert r.status_code == 200
        body = r.json()
        assert body["status"] == "ok"
        assert "version" in body


class TestThresholdsEndpoint:
    def test_stahl_ordering(self, client):
        r = client.post("/v1/thresholds", json={"design": STAHL, "thresholds": GWAS})
        assert r.status_code == 200
        body = r.json()
        assert body["engine_version"]
        assert body["elapsed_ms"] >= 0
        res = body["result"]
        assert res["beta_perp"] < res["beta_star"] < GWAS["beta"]

    def test_matches_cli_bit_for_bit(self, client, capsys, tmp_path):
        r = client.post("/v1/thresholds", json={"design": STAHL, "thresholds": GWAS})
        api_res = r.json()["result"]
        out = tmp_path / "cli.json"
        code = cli_main([
            "thresholds",
            "--n0", "20169", "--n1", "5539", "--n0p", "8806", "--n1p", "6768",
            "--alpha", "5e-6", "--beta", "5e-4", "--gamma", "5e-8",
            "--out", str(out), "--quiet",
        ])
        assert code == 0
        cli_res = json.loads(out.read_text())
        assert api_res["beta_star"] == cli_res["beta_star"]
        assert api_res["beta_perp"] == cli_res["beta_perp"]
        assert api_res["p0"] == cli_res["p0"]

    def test_missing_field_is_400_with_path(self, client):
        bad = {k: v for k, v in STAHL.items() if k != "n1"}
        r = client.post("/v1/thresholds", json={"design": bad, "thresholds": GWAS})
        assert r.status_code == 400
        assert any("n1" in d["field"] for d in r.json()["detail"])

    def test_zero_alpha_is_422(self, client):
        r = client.post(
            "/v1/thresholds",
            json={"design": STAHL, "thresholds": {**GWAS, "alpha": 0.0}},
        )
        assert r.status_code == 422
        assert "thresholds must lie in (0,1]" in r.json()["detail"]


class TestPowerEndpoint:
    def test_matches_cli_grid(self, client, capsys):
        body = {
            "design": {"n0": 4000, "n1": 2000, "n0p": 1500, "n1p": 1500},
            "thresholds": {"alpha": 1e-4, "beta": 1e-3, "gamma": 1e-5},
            "scenario": {"maf": 0.1},
            "grid": {"grid_points": 4, "log_or_min": 0.0, "log_or_max": 0.3},
        }
        r = client.post("/v1/power-curve", json=body)
        assert r.status_code == 200
        api_grid = r.json()["result"]["grid"]
        code = cli_main([
            "power",
            "--n0", "4000", "--n1", "2000", "--n0p", "1500", "--n1p", "1500",
            "--alpha", "1e-4", "--beta", "1e-3", "--gamma", "1e-5",
            "--maf", "0.1", "--grid-points", "4",
            "--log-or-min", "0.0", "--log-or-max", "0.3",
            "--format", "json", "--quiet",
        ])
        assert code == 0
        cli_grid = json.loads(capsys.readouterr().out)["grid"]
        assert api_grid == cli_grid  # byte-identical values through one core


class TestCompareEndpoint:
    def test_argmax_matches_cli(self, client, capsys):
        body = {
            "design": {"n0": 10000, "n1": 5000, "n0p": 4000, "n1p": 6000},
            "thresholds": GWAS,
            "scenario": {"odds_ratio": 1.3, "maf": 0.1},
            "new_samples": 10000,
        }
        r = client.post("/v1/compare", json=body)
        assert r.status_code == 200
        res = r.json()["result"]
        code = cli_main([
            "compare",
            "--n0", "10000", "--n1", "5000", "--new-samples", "10000",
            "--n0p", "4000", "--n1p", "6000",
            "--alpha", "5e-6", "--beta", "5e-4", "--gamma", "5e-8",
            "--maf", "0.1", "--or", "1.3", "--quiet",
        ])
        assert code == 0
        cli_res = json.loads(capsys.readouterr().out)
        assert res["best_A"] == cli_res["best_A"]
        assert res["best_B"] == cli_res["best_B"]
        assert res["chosen_B_beats_all_A"] is True


class TestErrorProfileEndpoint:
    def test_limits_present(self, client):
        body = {
            "design": {"n0": 4000, "n1": 2000, "n0p": 1500, "n1p": 1500},
            "thresholds": {"alpha": 1e-4, "beta": 1e-3, "gamma": 1e-5},
            "cohorts": ["C0"],
            "base_maf": 0.1,
            "grid": {"grid_points": 3, "log_or_min": -2, "log_or_max": 2},
        }
        r = client.post("/v1/error-profile", json=body)
        assert r.status_code == 200
        res = r.json()["result"]
        assert res["limits"]["B"]["at_pos_inf"] == 1.0
        assert res["columns"] == ["zeta_driver", "R_A", "R_B", "R_C"]

    def test_unknown_cohort_is_400(self, client):
        body = {
            "design": {"n0": 4000, "n1": 2000, "n0p": 1500, "n1p": 1500},
            "thresholds": {"alpha": 1e-4, "beta": 1e-3, "gamma": 1e-5},
            "cohorts": ["C9"],
        }
        r = client.post("/v1/error-profile", json=body)
        assert r.status_code == 400


class TestMcValidateEndpoint:
    def test_sync_small_run_with_warning(self, client):
        body = {
            "design": {"n0": 500, "n1": 500, "n0p": 500, "n1p": 500},
            "thresholds": {"alpha": 0.05, "beta": 0.05, "gamma": 0.1},
            "scenario": {"odds_ratio": 1.0, "maf": 0.3},
            "reps": 1000,
            "seed": 5,
        }
        r = client.post("/v1/mc-validate", json=body)
        assert r.status_code == 200
        doc = r.json()
        assert "low replicate count" in doc["warnings"]
        assert doc["result"]["checks"]

    def test_seed_required(self, client):
        body = {
            "design": {"n0": 500, "n1": 500, "n0p": 500, "n1p": 500},
            "thresholds": {"alpha": 0.05, "beta": 0.05, "gamma": 0.1},
            "reps": 1000,
        }
        r = client.post("/v1/mc-validate", json=body)
        assert r.status_code == 400
        assert any("seed" in d["field"] for d in r.json()["detail"])

    def test_determinism_across_requests(self, client):
        body = {
            "design": {"n0": 500, "n1": 500, "n0p": 500, "n1p": 500},
            "thresholds": {"alpha": 0.05, "beta": 0.05, "gamma": 0.1},
            "scenario": {"odds_ratio": 1.2, "maf": 0.3},
            "reps": 20000,
            "seed": 9,
        }
        r1 = client.post("/v1/mc-validate", json=body).json()["result"]
        r2 = client.post("/v1/mc-validate", json=body).json()["result"]
        assert r1["checks"] == r2["checks"]

    def test_async_job_flow(self, client):
        body = {
            "design": {"n0": 200, "n1": 200, "n0p": 200, "n1p": 200},
            "thresholds": {"alpha": 0.05, "beta": 0.05, "gamma": 0.1},
            "scenario": {"odds_ratio": 1.0, "maf": 0.3},
            "reps": 1_500_000,
            "seed": 2,
        }
        r = client.post("/v1/mc-validate", json=body)
        assert r.status_code == 202
        job_url = r.json()["status_url"]
        deadline = time.time() + 120
        while time.time() < deadline:
            jr = client.get(job_url)
            assert jr.status_code == 200
            if jr.json()["status"] != "running":
                break
            time.sleep(0.2)
        doc = jr.json()
        assert doc["status"] == "done"
        assert doc["result"]["replicates"] == 1_500_000

    def test_unknown_job_404(self, client):
        assert client.get("/v1/jobs/deadbeef").status_code == 404
