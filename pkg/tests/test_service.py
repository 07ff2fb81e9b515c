import json
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from unreflect.cli import run
from unreflect.image import encode_png, save_image
from unreflect.selection import save_mask
from unreflect.service import create_app
from unreflect.solver import SolverParams, suppress
from unreflect.synth import SyntheticSceneParams, make_scene


def png_bytes(arr):
    return encode_png(arr)


def wait_done(client, job_id, timeout=60.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        job = client.get(f"/jobs/{job_id}").json()
        if job["status"] in ("done", "failed"):
            return job
        time.sleep(0.02)
    raise TimeoutError(f"job {job_id} did not finish")


@pytest.fixture
def client():
    app = create_app(workers=2, max_upload_mb=8)
    with TestClient(app) as c:
        yield c


@pytest.fixture
def scene():
    y, t, _ = make_scene((24, 24), SyntheticSceneParams(seed=2))
    return y, t


class TestEndpoints:
    def test_healthz(self, client):
        assert client.get("/healthz").json() == {"status": "ok"}

    def test_job_without_mask_uses_default_selection(self, client, scene):
        y, _ = scene
        params = {"inner_iters": 4}
        resp = client.post(
            "/jobs",
            files={"image": ("y.png", png_bytes(y), "image/png")},
            data={"params": json.dumps(params)},
        )
        assert resp.status_code == 200
        job_id = resp.json()["id"]
        job = wait_done(client, job_id)
        assert job["status"] == "done"
        assert job["progress"] == 1.0
        result = client.get(f"/jobs/{job_id}/result")
        assert result.status_code == 200
        assert result.headers["content-type"] == "image/png"
        from unreflect.image import decode_image

        expected, _ = suppress(
            decode_image(png_bytes(y)), None, SolverParams(inner_iters=4)
        )
        assert result.content == encode_png(expected)

    def test_mask_dim_mismatch_is_machine_readable_400(self, client, scene):
        y, _ = scene
        bad_mask = np.ones((5, 5))
        resp = client.post(
            "/jobs",
            files={
                "image": ("y.png", png_bytes(y), "image/png"),
                "mask": ("m.png", png_bytes(bad_mask), "image/png"),
            },
        )
        assert resp.status_code == 400
        assert resp.json()["reason"] == "mask_dims"

    def test_undecodable_image_400(self, client):
        resp = client.post(
            "/jobs", files={"image": ("y.png", b"not a png", "image/png")}
        )
        assert resp.status_code == 400
        assert resp.json()["reason"] == "image_decode"

    def test_bad_params_400(self, client, scene):
        y, _ = scene
        for payload in ("not json", json.dumps({"warp": 1}), json.dumps({"kappa": 0.5})):
            resp = client.post(
                "/jobs",
                files={"image": ("y.png", png_bytes(y), "image/png")},
                data={"params": payload},
            )
            assert resp.status_code == 400
            assert resp.json()["reason"] == "params"

    def test_oversized_upload_413(self, scene):
        app = create_app(workers=1, max_upload_mb=0)
        y, _ = scene
        with TestClient(app) as tight:
            resp = tight.post(
                "/jobs", files={"image": ("y.png", png_bytes(y), "image/png")}
            )
        assert resp.status_code == 413

    def test_unknown_job_404(self, client):
        assert client.get("/jobs/deadbeef").status_code == 404
        assert client.get("/jobs/deadbeef/result").status_code == 404

    def test_result_before_done_409(self, client):
        y, _, _ = make_scene((128, 128), SyntheticSceneParams(seed=5))
        resp = client.post(
            "/jobs",
            files={"image": ("y.png", png_bytes(y), "image/png")},
            data={"params": json.dumps({"inner_iters": 60})},
        )
        job_id = resp.json()["id"]
        early = client.get(f"/jobs/{job_id}/result")
        if early.status_code == 409:  # job may already be done on fast machines
            job = client.get(f"/jobs/{job_id}").json()
            assert job["status"] in ("queued", "running")
            assert 0.0 <= job["progress"] < 1.0
        wait_done(client, job_id)
        assert client.get(f"/jobs/{job_id}/result").status_code == 200

    @pytest.mark.filterwarnings("ignore:overflow encountered:RuntimeWarning")
    def test_failed_job_reports_error_and_409(self, client, scene):
        y, _ = scene
        resp = client.post(
            "/jobs",
            files={"image": ("y.png", png_bytes(y), "image/png")},
            data={"params": json.dumps({"adam_step": 1e155, "inner_iters": 3})},
        )
        job_id = resp.json()["id"]
        job = wait_done(client, job_id)
        assert job["status"] == "failed"
        assert job["error"]
        assert client.get(f"/jobs/{job_id}/result").status_code == 409

    def test_duplicate_submissions_get_distinct_jobs(self, client, scene):
        y, _ = scene
        body = {
            "files": {"image": ("y.png", png_bytes(y), "image/png")},
            "data": {"params": json.dumps({"inner_iters": 1})},
        }
        id1 = client.post("/jobs", **body).json()["id"]
        id2 = client.post("/jobs", **body).json()["id"]
        assert id1 != id2
        assert wait_done(client, id1)["status"] == "done"
        assert wait_done(client, id2)["status"] == "done"

    def test_params_echoed_with_defaults(self, client, scene):
        y, _ = scene
        resp = client.post(
            "/jobs",
            files={"image": ("y.png", png_bytes(y), "image/png")},
            data={"params": json.dumps({"inner_iters": 1})},
        )
        job = client.get(f"/jobs/{resp.json()['id']}").json()
        assert job["params"]["lam"] == 2e-3
        assert job["params"]["beta_min"] == 4e-3
        assert job["params"]["inner_iters"] == 1

    def test_result_cache_evicts_oldest(self, scene):
        app = create_app(workers=1, result_cache=2)
        y, _ = scene
        with TestClient(app) as c:
            ids = []
            for _ in range(3):
                resp = c.post(
                    "/jobs",
                    files={"image": ("y.png", png_bytes(y), "image/png")},
                    data={"params": json.dumps({"inner_iters": 1})},
                )
                ids.append(resp.json()["id"])
            for jid in ids:
                assert wait_done(c, jid)["status"] == "done"
            # oldest result evicted from the bounded cache; job stays done
            assert c.get(f"/jobs/{ids[0]}/result").status_code == 404
            assert c.get(f"/jobs/{ids[0]}").json()["status"] == "done"
            assert c.get(f"/jobs/{ids[2]}/result").status_code == 200

    def test_fifo_completion_order_single_worker(self, scene):
        app = create_app(workers=1)
        y, _ = scene
        with TestClient(app) as c:
            ids = []
            for _ in range(3):
                resp = c.post(
                    "/jobs",
                    files={"image": ("y.png", png_bytes(y), "image/png")},
                    data={"params": json.dumps({"inner_iters": 5})},
                )
                ids.append(resp.json()["id"])
            jobs = [wait_done(c, jid) for jid in ids]
        finished = [j["completed_at"] for j in jobs]
        assert finished == sorted(finished)


class TestCliServiceEquivalence:
    def test_byte_identical_results(self, tmp_path, scene):
        y, _ = scene
        rng = np.random.default_rng(0)
        mask = (rng.random((24, 24)) > 0.4).astype(float)
        y_path = tmp_path / "y.png"
        m_path = tmp_path / "m.png"
        out_path = tmp_path / "out.png"
        save_image(y, y_path)
        save_mask(mask, m_path)

        code = run([
            "suppress", str(y_path), str(out_path),
            "--mask", str(m_path), "--inner-iters", "6", "--gamma", "0.02",
        ])
        assert code == 0

        app = create_app(workers=1)
        with TestClient(app) as client:
            resp = client.post(
                "/jobs",
                files={
                    "image": ("y.png", y_path.read_bytes(), "image/png"),
                    "mask": ("m.png", m_path.read_bytes(), "image/png"),
                },
                data={"params": json.dumps({"inner_iters": 6, "gamma": 0.02})},
            )
            assert resp.status_code == 200
            job_id = resp.json()["id"]
            job = wait_done(client, job_id)
            assert job["status"] == "done"
            service_png = client.get(f"/jobs/{job_id}/result").content

        assert service_png == out_path.read_bytes()
