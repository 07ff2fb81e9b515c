"""Job-based HTTP API for the browser mask-painting UI.

POST /jobs takes a multipart image (plus optional mask and params JSON),
queues a solve, and returns a job id. GET /jobs/{id} reports status and
progress; GET /jobs/{id}/result streams the restored PNG. Jobs and results
live in memory only: this is a workstation companion, not a durable store.
"""

import json
import queue
import threading
import time
import uuid
from collections import OrderedDict
from contextlib import asynccontextmanager
from dataclasses import asdict, dataclass, field

from fastapi import FastAPI, File, Form, HTTPException, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response

from .image import DimensionError, decode_image, encode_png
from .selection import decode_mask, default_mask
from .solver import SolverParams, beta_schedule, suppress

QUEUED = "queued"
RUNNING = "running"
DONE = "done"
FAILED = "failed"

_PARAM_FIELDS = (
    "lam", "gamma", "beta_min", "beta_max", "kappa",
    "adam_step", "adam_b1", "adam_b2", "adam_eps",
    "inner_iters", "inner_rel_tol",
)


@dataclass
class Job:
    id: str
    status: str = QUEUED
    progress: float = 0.0
    created_at: float = field(default_factory=time.time)
    completed_at: float = None  # type: ignore[assignment]
    error: str = None  # type: ignore[assignment]
    params: dict = field(default_factory=dict)

    def snapshot(self):
        return asdict(self)


class JobStore:
    """FIFO job queue with a fixed worker pool and a bounded result cache."""

    def __init__(self, workers=2, result_cache=32):
        self._lock = threading.Lock()
        self._jobs = {}
        self._results = OrderedDict()
        self._queue = queue.Queue()
        self._result_cache = result_cache
        self._workers = [
            threading.Thread(target=self._work, name=f"solver-{i}", daemon=True)
            for i in range(workers)
        ]
        self._started = False

    def start(self):
        if not self._started:
            self._started = True
            for t in self._workers:
                t.start()

    def stop(self):
        if self._started:
            for _ in self._workers:
                self._queue.put(None)
            for t in self._workers:
                t.join(timeout=30)
            self._started = False

    def submit(self, image, phi, params: SolverParams) -> Job:
        echo = {f: getattr(params, f) for f in _PARAM_FIELDS}
        echo["beta_min"] = params.beta_min_resolved
        job = Job(id=uuid.uuid4().hex, params=echo)
        with self._lock:
            self._jobs[job.id] = job
        self._queue.put((job.id, image, phi, params))
        return job

    def get(self, job_id) -> Job:
        with self._lock:
            return self._jobs.get(job_id)

    def result(self, job_id) -> bytes:
        with self._lock:
            return self._results.get(job_id)

    def _work(self):
        while True:
            item = self._queue.get()
            if item is None:
                return
            job_id, image, phi, params = item
            with self._lock:
                job = self._jobs[job_id]
                job.status = RUNNING
            total = len(beta_schedule(params))

            def observer(rec, done, n=total, jid=job_id):
                if done < n:
                    with self._lock:
                        self._jobs[jid].progress = done / n

            try:
                restored, _ = suppress(image, phi, params, observer=observer)
                png = encode_png(restored)
                with self._lock:
                    self._results[job_id] = png
                    while len(self._results) > self._result_cache:
                        self._results.popitem(last=False)
                    job.status = DONE
                    job.progress = 1.0
                    job.completed_at = time.time()
            except Exception as exc:
                with self._lock:
                    job.status = FAILED
                    job.error = str(exc)
                    job.completed_at = time.time()


def _reject(status, reason, detail):
    return JSONResponse(status_code=status, content={"reason": reason, "detail": detail})


def _upload_size(upload: UploadFile) -> int:
    upload.file.seek(0, 2)
    size = upload.file.tell()
    upload.file.seek(0)
    return size


def create_app(workers=2, max_upload_mb=64, result_cache=32, cors_origins=("*",)) -> FastAPI:
    store = JobStore(workers=workers, result_cache=result_cache)
    cap_bytes = max_upload_mb * 1024 * 1024

    @asynccontextmanager
    async def lifespan(app):
        store.start()
        yield
        store.stop()

    app = FastAPI(title="unreflect service", lifespan=lifespan)
    app.state.store = store
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(cors_origins),
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/jobs")
    async def create_job(
        image: UploadFile = File(...),
        mask: UploadFile = File(None),
        params: str = Form(None),
    ):
        if _upload_size(image) > cap_bytes:
            return _reject(413, "image_too_large", f"cap is {max_upload_mb} MB")
        if mask is not None and _upload_size(mask) > cap_bytes:
            return _reject(413, "mask_too_large", f"cap is {max_upload_mb} MB")

        overrides = {}
        if params:
            try:
                raw = json.loads(params)
                if not isinstance(raw, dict):
                    raise ValueError("params must be a JSON object")
                unknown = set(raw) - set(_PARAM_FIELDS)
                if unknown:
                    raise ValueError(f"unknown params: {sorted(unknown)}")
                overrides = raw
            except ValueError as exc:
                return _reject(400, "params", str(exc))

        try:
            solver_params = SolverParams().with_overrides(**overrides)
        except (TypeError, ValueError) as exc:
            return _reject(400, "params", str(exc))

        try:
            img = decode_image(await image.read(), image.filename or "image")
        except (OSError, DimensionError) as exc:
            return _reject(400, "image_decode", str(exc))

        if mask is not None:
            try:
                phi = decode_mask(
                    await mask.read(),
                    expected_dims=img.shape[:2],
                    label=mask.filename or "mask",
                )
            except DimensionError as exc:
                return _reject(400, "mask_dims", str(exc))
            except OSError as exc:
                return _reject(400, "mask_decode", str(exc))
        else:
            phi = default_mask(img.shape[:2])

        job = store.submit(img, phi, solver_params)
        return {"id": job.id}

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        job = store.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail="unknown job")
        return job.snapshot()

    @app.get("/jobs/{job_id}/result")
    def get_result(job_id: str):
        job = store.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail="unknown job")
        if job.status != DONE:
            raise HTTPException(
                status_code=409, detail=f"job is {job.status}, not done"
            )
        png = store.result(job_id)
        if png is None:
            raise HTTPException(status_code=404, detail="result evicted")
        return Response(content=png, media_type="image/png")

    return app
