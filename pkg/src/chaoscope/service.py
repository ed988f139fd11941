"""HTTP facade over the store, integrator, and boundary analysis.

Endpoints (JSON bodies; schemas under docs/schemas/):

    GET    /api/health
    GET    /api/runs
    GET    /api/runs/{run_id}
    GET    /api/runs/{run_id}/results
    GET    /api/runs/{run_id}/trajectories?vars=x,z&window=-10..0,20..30&decimate=K
    POST   /api/jobs                       {"kind": "solve|boxcount|fdim", "params": {...}}
    GET    /api/jobs/{job_id}
    DELETE /api/jobs/{job_id}

Jobs run on a single background executor thread; progress is completed
initial conditions over total. Cancellation is best effort between IC
batches and reported as state "failed" with error "canceled".
"""
from __future__ import annotations

import queue
import threading
import uuid
from dataclasses import dataclass, field
from typing import Optional

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware

from .boundary import classify
from .errors import ChaoscopeError, JobCancelled, RunNotFoundError
from .pipeline import (
    BoxcountRequest,
    FdimRequest,
    SolveRequest,
    run_boxcount,
    run_fdim,
    run_solve,
)
from .store import list_runs, load_run, utc_now
from .sysdsl import parse_predicate, parse_system

_JOB_KINDS = ("solve", "boxcount", "fdim")


@dataclass
class Job:
    job_id: str
    kind: str
    payload: dict
    state: str = "queued"  # queued -> running -> done | failed
    progress: float = 0.0
    result_ref: Optional[str] = None
    error: Optional[str] = None
    created_at: str = field(default_factory=utc_now)
    cancel_event: threading.Event = field(default_factory=threading.Event)

    def to_json(self) -> dict:
        return {
            "job_id": self.job_id,
            "kind": self.kind,
            "state": self.state,
            "progress": self.progress,
            "result_ref": self.result_ref,
            "error": self.error,
            "created_at": self.created_at,
        }


class JobExecutor:
    """Serial background executor; the ensemble inside a job fans out to
    the configured number of workers."""

    def __init__(self, store_root: str, workers: int):
        self.store_root = store_root
        self.workers = workers
        self.jobs: dict[str, Job] = {}
        self.lock = threading.Lock()
        self.queue: "queue.Queue[str]" = queue.Queue()
        self.thread = threading.Thread(target=self._loop, daemon=True)
        self.thread.start()

    def submit(self, kind: str, params: dict) -> Job:
        job = Job(job_id=uuid.uuid4().hex[:12], kind=kind, payload=params)
        with self.lock:
            self.jobs[job.job_id] = job
        self.queue.put(job.job_id)
        return job

    def get(self, job_id: str) -> Job | None:
        with self.lock:
            return self.jobs.get(job_id)

    def cancel(self, job_id: str) -> Job | None:
        job = self.get(job_id)
        if job is not None:
            job.cancel_event.set()
        return job

    def _loop(self) -> None:
        while True:
            job_id = self.queue.get()
            job = self.get(job_id)
            if job is None:
                continue
            if job.cancel_event.is_set():
                self._finish(job, error="canceled")
                continue
            with self.lock:
                job.state = "running"
            try:
                run_id = self._run(job)
                with self.lock:
                    job.progress = 1.0
                    job.result_ref = run_id
                    job.state = "done"
            except JobCancelled:
                self._finish(job, error="canceled")
            except (ChaoscopeError, ValueError, OSError) as exc:
                self._finish(job, error=str(exc))

    def _finish(self, job: Job, error: str) -> None:
        with self.lock:
            job.state = "failed"
            job.error = error

    def _run(self, job: Job) -> str:
        def progress(done: int, total: int) -> None:
            with self.lock:
                job.progress = done / total if total else 1.0

        cancel = job.cancel_event.is_set
        if job.kind == "solve":
            req = SolveRequest.from_dict(job.payload)
            return run_solve(req, self.store_root, self.workers, progress, cancel)
        if job.kind == "boxcount":
            req = BoxcountRequest.from_dict(job.payload)
            run_id, _ = run_boxcount(req, self.store_root, self.workers, progress, cancel)
            return run_id
        req = FdimRequest.from_dict(job.payload)
        run_id, _ = run_fdim(req, self.store_root, self.workers, progress, cancel)
        return run_id


def _parse_window(text: str | None) -> Optional[tuple[tuple[float, float], tuple[float, float]]]:
    if text is None or text.strip() == "":
        return None
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError("window must be two ranges: xlo..xhi,ylo..yhi")
    out = []
    for part in parts:
        bounds = part.split("..", 1)
        if len(bounds) != 2:
            raise ValueError(f"bad window range {part!r}")
        lo, hi = float(bounds[0]), float(bounds[1])
        if lo > hi:
            raise ValueError(f"window range {part!r} has lo > hi")
        out.append((lo, hi))
    return out[0], out[1]


def _window_segments(px, py, window) -> list[tuple[int, int]]:
    """Maximal runs of consecutive samples inside the closed window."""
    (xlo, xhi), (ylo, yhi) = window
    inside = (px >= xlo) & (px <= xhi) & (py >= ylo) & (py <= yhi)
    segments = []
    start = None
    for i, flag in enumerate(inside):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            segments.append((start, i))
            start = None
    if start is not None:
        segments.append((start, len(inside)))
    return segments


def _decimate_segment(indices: list[int], stride: int) -> list[int]:
    if stride <= 1 or len(indices) <= 2:
        return indices
    kept = indices[::stride]
    if kept[-1] != indices[-1]:
        kept.append(indices[-1])
    return kept


def create_app(store_root: str, workers: int = 1, cors_origins: list[str] | None = None) -> FastAPI:
    app = FastAPI(title="chaoscope service", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=cors_origins or ["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    executor = JobExecutor(store_root, workers)
    app.state.executor = executor
    app.state.store_root = store_root

    @app.get("/api/health")
    def health():
        return {"status": "ok"}

    @app.get("/api/runs")
    def runs():
        return [
            {"run_id": rid, "created_at": created, "system_name": name}
            for rid, created, name in list_runs(store_root)
        ]

    @app.get("/api/runs/{run_id}")
    def run_manifest(run_id: str):
        try:
            return load_run(store_root, run_id).manifest.to_json()
        except RunNotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc

    @app.get("/api/runs/{run_id}/results")
    def run_results(run_id: str):
        try:
            loaded = load_run(store_root, run_id)
        except RunNotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        out = []
        for ref in loaded.manifest.result_refs:
            data = loaded.load_result(ref)
            out.append({"file": ref, "data": data})
        return out

    @app.get("/api/runs/{run_id}/trajectories")
    def run_trajectories(
        run_id: str,
        vars: str = Query(..., description="two comma-separated variable names"),
        window: str | None = Query(None, description="xlo..xhi,ylo..yhi closed bounds"),
        decimate: int | None = Query(None, ge=1, description="target points per orbit"),
    ):
        try:
            loaded = load_run(store_root, run_id)
        except RunNotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        names = vars.split(",")
        if len(names) != 2 or names[0] == names[1]:
            raise HTTPException(status_code=400, detail="vars must name two distinct variables")
        manifest = loaded.manifest
        system = parse_system(manifest.system_source, manifest.system_name)
        for name in names:
            if name not in system.state_vars:
                raise HTTPException(status_code=400, detail=f"unknown variable {name!r}")
        ix = system.state_vars.index(names[0])
        iy = system.state_vars.index(names[1])
        try:
            win = _parse_window(window)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        predicate = None
        if manifest.predicate_source.strip():
            predicate = parse_predicate(manifest.predicate_source, system)

        orbits = []
        for traj in loaded.iter_trajectories():
            px = traj.states[:, ix]
            py = traj.states[:, iy]
            if win is None:
                segments = [(0, len(px))]
            else:
                segments = _window_segments(px, py, win)
            indices = [i for a, b in segments for i in range(a, b)]
            total = len(indices)
            if decimate is not None and total > decimate:
                stride = -(-total // decimate)  # ceil
                kept = []
                for a, b in segments:
                    kept.extend(_decimate_segment(list(range(a, b)), stride))
                indices = kept
            label = None
            if predicate is not None:
                label = classify(system, traj, predicate).value
            orbits.append(
                {
                    "ic_index": traj.ic_index,
                    "class": label,
                    "points": [[float(px[i]), float(py[i])] for i in indices],
                }
            )
        return {"run_id": run_id, "vars": names, "orbits": orbits}

    @app.post("/api/jobs", status_code=202)
    def submit_job(body: dict):
        kind = body.get("kind")
        if kind not in _JOB_KINDS:
            raise HTTPException(status_code=400, detail=f"kind must be one of {_JOB_KINDS}")
        params = body.get("params")
        if not isinstance(params, dict):
            raise HTTPException(status_code=400, detail="params must be an object")
        # validate eagerly so bad payloads fail the POST, not the job
        try:
            if kind == "solve":
                SolveRequest.from_dict(params)
            elif kind == "boxcount":
                BoxcountRequest.from_dict(params)
            else:
                FdimRequest.from_dict(params)
        except (ValueError, ChaoscopeError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        job = executor.submit(kind, params)
        return {"job_id": job.job_id, "state": job.state}

    @app.get("/api/jobs/{job_id}")
    def job_status(job_id: str):
        job = executor.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail=f"unknown job {job_id!r}")
        return job.to_json()

    @app.delete("/api/jobs/{job_id}")
    def cancel_job(job_id: str):
        job = executor.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail=f"unknown job {job_id!r}")
        if job.state == "done":
            raise HTTPException(status_code=409, detail="job already done")
        executor.cancel(job_id)
        return {"job_id": job_id, "state": job.state, "cancel_requested": True}

    return app
