import numpy as np
import pytest
from fastapi.testclient import TestClient

from distsel.datasets import generate_two_gaussians
from distsel.gmm import GaussianMixture1D
from distsel.pipeline import run_scan
from distsel.server import create_app


@pytest.fixture()
def client(tmp_path):
    app = create_app(tmp_path / "sessions")
    with TestClient(app) as c:
        yield c


@pytest.fixture(scope="module")
def dataset():
    data, labels = generate_two_gaussians(60, 0.6, 0.05, seed=3)
    return data, labels


def scan_payload(dataset, session="s1", metrics=("euclidean",)):
    data, labels = dataset
    return {"session": session, "data": {"values": data.values.tolist()},
            "labels": labels.labels.tolist(), "metrics": list(metrics),
            "seed": 3, "n_boot": 200}


class TestScanEndpoints:
    def test_post_then_get(self, client, dataset):
        r = client.post("/scan", json=scan_payload(dataset))
        assert r.status_code == 200
        body = r.json()
        assert body["schema"] == 1 and body["session"] == "s1"
        r2 = client.get("/scan", params={"session": "s1"})
        assert r2.status_code == 200
        assert r2.json()["scan"] == body["scan"]

    def test_matches_direct_pipeline_call(self, client, dataset):
        client.post("/scan", json=scan_payload(dataset))
        served = client.get("/scan", params={"session": "s1"}).json()["scan"]
        data, _ = dataset
        direct = run_scan(data, ["euclidean"], seed=3, n_boot=200).to_dict()
        assert served == direct

    def test_unknown_session_404(self, client):
        assert client.get("/scan", params={"session": "missing"}).status_code == 404
        assert client.get("/report", params={"session": "missing"}).status_code == 404

    def test_bad_payload_400(self, client):
        assert client.post("/scan", json={"metrics": ["euclidean"]}).status_code == 400
        r = client.post("/scan", json={"data": {"values": [[1, 2], [3, "x"]]},
                                       "metrics": ["euclidean"]})
        assert r.status_code == 400

    def test_density_endpoint(self, client, dataset):
        client.post("/scan", json=scan_payload(dataset))
        r = client.get("/density/euclidean", params={"session": "s1"})
        assert r.status_code == 200
        assert len(r.json()["plot"]["series"]) == 1
        assert client.get("/density/chord", params={"session": "s1"}).status_code == 404


class TestModelEndpoints:
    def fit(self, client, dataset, session="s2"):
        client.post("/scan", json=scan_payload(dataset, session=session))
        return client.post("/gmm/fit", json={"session": session, "metric": "euclidean",
                                             "m": 2, "restarts": 2})

    def test_fit(self, client, dataset):
        r = self.fit(client, dataset)
        assert r.status_code == 200
        body = r.json()
        assert body["bd"] is not None
        assert len(body["model"]["means"]) == 2
        assert body["gof"] is not None and body["qq"] is not None

    def test_put_params_recomputes_boundaries(self, client, dataset):
        self.fit(client, dataset)
        r = client.put("/gmm/params", json={"session": "s2", "weights": [0.5, 0.5],
                                            "means": [0.1, 0.9], "sds": [0.05, 0.1]})
        assert r.status_code == 200
        body = r.json()
        model = GaussianMixture1D.from_dict(body["model"])
        recomputed = model.boundaries()
        assert body["boundaries"]["boundaries"] == pytest.approx(list(recomputed.boundaries))
        # posterior at every boundary is 0.5 within 1e-6 for the stored model
        for b in body["boundaries"]["boundaries"]:
            post = model.posterior(b)[0]
            assert abs(sorted(post)[-1] - 0.5) <= 1e-6
        got = client.get("/gmm", params={"session": "s2"}).json()
        assert got["bd"] == body["bd"]

    def test_put_params_validates_weights(self, client, dataset):
        self.fit(client, dataset)
        r = client.put("/gmm/params", json={"session": "s2", "weights": [0.7, 0.5],
                                            "means": [0.1, 0.9], "sds": [0.05, 0.1]})
        assert r.status_code == 400
        # tolerance 1e-6 on the weight sum
        r = client.put("/gmm/params", json={"session": "s2",
                                            "weights": [0.5000000001, 0.4999999999],
                                            "means": [0.1, 0.9], "sds": [0.05, 0.1]})
        assert r.status_code == 200

    def test_put_params_rejects_bad_sds(self, client, dataset):
        self.fit(client, dataset)
        r = client.put("/gmm/params", json={"session": "s2", "weights": [0.5, 0.5],
                                            "means": [0.1, 0.9], "sds": [0.05, -0.1]})
        assert r.status_code == 400


class TestEvaluateEndpoint:
    def test_labels_and_builtin(self, client, dataset):
        data, labels = dataset
        client.post("/scan", json=scan_payload(dataset, session="s3"))
        client.post("/gmm/fit", json={"session": "s3", "metric": "euclidean", "m": 2,
                                      "restarts": 2})
        r = client.post("/evaluate", json={
            "session": "s3",
            "partitions": [{"name": "truth", "labels": labels.labels.tolist()},
                           {"name": "ward2", "algorithm": "ward", "k": 2},
                           {"name": "km", "algorithm": "kmeans", "k": 2}]})
        assert r.status_code == 200
        body = r.json()
        assert [rep["name"] for rep in body["reports"]] == ["truth", "ward2", "km"]
        assert set(body["plots"]) == {"truth", "ward2", "km"}

    def test_evaluate_needs_model(self, client, dataset):
        client.post("/scan", json=scan_payload(dataset, session="s4"))
        r = client.post("/evaluate", json={"session": "s4",
                                           "partitions": [{"name": "x", "labels": [1, 2]}]})
        assert r.status_code == 400


class TestUiMount:
    def test_built_frontend_served_under_ui(self, tmp_path, dataset):
        from pathlib import Path

        dist = Path(__file__).resolve().parent.parent / "frontend" / "dist"
        if not (dist / "index.html").exists():
            pytest.skip("frontend not built")
        with TestClient(create_app(tmp_path / "s", ui_dir=dist)) as client:
            page = client.get("/ui/")
            assert page.status_code == 200
            assert "<script type=\"module\" src=\"main.js\">" in page.text
            assert client.get("/ui/main.js").status_code == 200
            # UI and API share the server: the API still answers
            r = client.post("/scan", json=scan_payload(dataset, session="ui"))
            assert r.status_code == 200


class TestPersistence:
    def test_sessions_survive_restart(self, tmp_path, dataset):
        directory = tmp_path / "sessions"
        with TestClient(create_app(directory)) as client:
            client.post("/scan", json=scan_payload(dataset, session="keep"))
            client.post("/gmm/fit", json={"session": "keep", "metric": "euclidean",
                                          "m": 2, "restarts": 2})
            before = client.get("/report", params={"session": "keep"}).json()
        with TestClient(create_app(directory)) as client:
            after = client.get("/report", params={"session": "keep"}).json()
            assert after["metric"] == "euclidean"
            assert after["bd"] == before["bd"]
            assert after["model"] == before["model"]
