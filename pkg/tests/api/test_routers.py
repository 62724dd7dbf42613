from typing import Iterator

import numpy as np
import pytest
from fastapi.testclient import TestClient

from emitterkit.config import AppConfig
from emitterkit.main import app, container
from tests.factories import make_g2_histogram

RATES = {"excitation_rate": 1e8, "radiative_rate": 1e9, "intersystem_rate": 1e7, "deshelving_rate": 1e6}


@pytest.fixture
def client(settings: AppConfig) -> Iterator[TestClient]:
    container.config.override(settings)
    with TestClient(app) as client:
        yield client
    container.config.reset_override()


class TestModel:
    def test_g2_from_rates(self, client):
        response = client.post("/model/g2", json={"rates": RATES})
        body = response.json()

        assert response.status_code == 200
        assert 1.0 - body["antibunch_amp"] + body["bunch_amp"] == pytest.approx(0.0, abs=1e-9)
        assert body["shelving_lifetime"] > body["excited_lifetime"]

    def test_background_lifts_the_dip(self, client):
        body = client.post("/model/g2", json={"rates": RATES, "signal_fraction": 0.9}).json()
        assert 1.0 - body["antibunch_amp"] + body["bunch_amp"] == pytest.approx(0.19, abs=1e-6)

    def test_lifetime_bandwidth_product(self, client):
        response = client.post("/model/product", json={"center_nm": 553.23, "fwhm_nm": 2.82, "lifetime_ns": 1.123})
        body = response.json()

        assert response.status_code == 200
        assert body["product"] == pytest.approx(3102, rel=0.01)
        assert body["schema_version"] == 1

    def test_degenerate_rates(self, client):
        response = client.post("/model/g2", json={"rates": {**RATES, "excitation_rate": 0.0}})

        assert response.status_code == 422
        assert response.json()["code"] == "rates-degenerate"


class TestFit:
    def test_saturation(self, client):
        powers = np.geomspace(1e-5, 1e-1, 10)
        response = client.post("/fit/saturation", json={
            "power_w": powers.tolist(),
            "intensity_cps": (1e6 * powers / (powers + 1e-3)).tolist(),
            "n_samples": 0,
        })

        assert response.status_code == 200
        assert response.json()["params"]["sat_power"] == pytest.approx(1e-3, rel=1e-3)

    def test_saturation_needs_four_powers(self, client):
        response = client.post("/fit/saturation", json={"power_w": [1.0, 2.0, 3.0], "intensity_cps": [1.0, 2.0, 3.0]})

        assert response.status_code == 422
        assert response.json()["code"] == "design-degenerate"

    def test_g2(self, client, g2_params):
        hist = make_g2_histogram(g2_params)
        response = client.post("/fit/g2", json={
            "bin_edges_ps": hist.bin_edges.tolist(),
            "raw_counts": hist.raw_counts.tolist(),
            "normalized": hist.normalized.tolist(),
            "normalization_factor": hist.normalization_factor,
            "n_samples": 0,
        })

        assert response.status_code == 200
        assert response.json()["derived"]["g2_zero"] == pytest.approx(0.3, abs=0.01)

    def test_mismatched_bins(self, client):
        response = client.post("/fit/g2", json={
            "bin_edges_ps": [0, 1], "raw_counts": [1, 2], "normalized": [1.0, 2.0], "normalization_factor": 1.0,
        })
        assert response.status_code == 422


class TestThinFilm:
    def test_curve(self, client):
        body = client.post("/thinfilm/curve", json={"stop_nm": 100}).json()

        assert body["thickness_nm"][0] == 0.0
        assert body["opl_nm"][0] == pytest.approx(0.0, abs=1e-9)
        assert 40 < body["injectivity_limit_nm"] < 60
        assert body["schema_version"] == 1

    def test_invert(self, client):
        curve = client.post("/thinfilm/curve", json={"stop_nm": 30}).json()
        response = client.post("/thinfilm/invert", json={"stop_nm": 30, "opl_nm": curve["opl_nm"][20]})

        assert response.status_code == 200
        assert response.json()["thickness"] == pytest.approx(20e-9, abs=1e-12)

    def test_range_order(self, client):
        response = client.post("/thinfilm/curve", json={"start_nm": 30, "stop_nm": 10})

        assert response.status_code == 422
        assert response.json()["code"] == "range-order"


class TestSurvey:
    def test_stats(self, client):
        records = [
            {"flake_id": "F1", "defect_id": "1", "zpl_center": 560e-9, "g2_zero": 0.2},
            {"flake_id": "F1", "defect_id": "2", "zpl_center": 600e-9},
            {"flake_id": "F2"},
        ]
        body = client.post("/survey/stats", json={"records": records}).json()

        assert body["n_flakes"] == 2
        assert body["n_defects"] == 2
        assert body["mean_defects_per_hosting_flake"] == 2.0

    def test_ensembles_are_rejected(self, client):
        records = [{"flake_id": "F1", "defect_id": "1", "g2_zero": 0.7}]

        assert client.post("/survey/stats", json={"records": records}).status_code == 422
        assert client.post("/survey/stats", json={"records": records, "allow_ensembles": True}).status_code == 200

    def test_anneal(self, client):
        response = client.post("/survey/anneal", json={"groups": {"1073.15": [9.0, 10.0], "1123.15": [11.0, 12.0]}})

        assert response.status_code == 200
        assert response.json()["best_temperature"] == 1123.15
