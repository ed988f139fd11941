"""On-disk run persistence shared by the CLI, the service, and the UI.

Layout: one directory per run under the store root.

    <root>/<run_id>/manifest.json
    <root>/<run_id>/ic_<index>.csv      header "t,<var>,<var>,..."
    <root>/<run_id>/<result file>.json / .csv

Runs are written into a hidden staging directory and renamed into place, so
readers never observe a partial run. Reals go to disk with 17 significant
digits, which round-trips doubles exactly.
"""
from __future__ import annotations

import json
import os
import secrets
import shutil
import tempfile
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterator, Sequence

import numpy as np

from .boundary import BoxcountResult, FdimResult, InitRegion
from .errors import DuplicateRunError, IntegrityError, RunNotFoundError, StoreError
from .integrate import (
    IntegratorConfig,
    METHOD_NATIVE,
    Trajectory,
    TrajectoryStatus,
)

ENV_STORE = "CHAOSCOPE_STORE"
MANIFEST_FILE = "manifest.json"


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def new_run_id() -> str:
    stamp = time.strftime("%Y%m%d-%H%M%S", time.gmtime())
    return f"{stamp}-{secrets.token_hex(4)}"


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass(frozen=True)
class RunManifest:
    run_id: str
    created_at: str
    system_source: str
    system_name: str
    predicate_source: str
    region: InitRegion
    cfg: IntegratorConfig
    seed: int
    result_refs: tuple[str, ...] = ()
    n_trajectories: int = 0
    trajectory_status: tuple[dict, ...] = field(default=(), compare=False)

    def to_json(self) -> dict:
        return {
            "run_id": self.run_id,
            "created_at": self.created_at,
            "system_source": self.system_source,
            "system_name": self.system_name,
            "predicate_source": self.predicate_source,
            "region": self.region.to_json(),
            "cfg": {
                "method": self.cfg.method,
                "h": self.cfg.h,
                "t0": self.cfg.t0,
                "t1": self.cfg.t1,
                "sample_stride": self.cfg.sample_stride,
            },
            "seed": self.seed,
            "result_refs": list(self.result_refs),
            "n_trajectories": self.n_trajectories,
            "trajectory_status": list(self.trajectory_status),
        }

    @staticmethod
    def from_json(obj: dict) -> "RunManifest":
        cfg = obj["cfg"]
        return RunManifest(
            run_id=obj["run_id"],
            created_at=obj["created_at"],
            system_source=obj["system_source"],
            system_name=obj.get("system_name", ""),
            predicate_source=obj.get("predicate_source", ""),
            region=InitRegion.from_json(obj["region"]),
            cfg=IntegratorConfig(
                h=cfg["h"],
                t0=cfg["t0"],
                t1=cfg["t1"],
                sample_stride=cfg["sample_stride"],
                method=cfg.get("method", METHOD_NATIVE),
            ),
            seed=obj["seed"],
            result_refs=tuple(obj.get("result_refs", ())),
            n_trajectories=obj.get("n_trajectories", 0),
            trajectory_status=tuple(obj.get("trajectory_status", ())),
        )


def _trajectory_status_json(traj: Trajectory) -> dict:
    return {
        "ic_index": traj.ic_index,
        "completed": traj.status.completed,
        "reason": traj.status.reason,
        "last_good_time": traj.status.last_good_time,
    }


def _write_trajectory_csv(path: str, traj: Trajectory, var_names: Sequence[str]) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write("t," + ",".join(var_names) + "\n")
        for t, state in zip(traj.times, traj.states):
            fh.write(_fmt(t) + "," + ",".join(_fmt(v) for v in state) + "\n")


def _result_to_json(result) -> dict:
    if isinstance(result, (BoxcountResult, FdimResult)):
        payload = result.to_json()
        payload["kind"] = "boxcount" if isinstance(result, BoxcountResult) else "fdim"
        return payload
    raise TypeError(f"unsupported result type {type(result)!r}")


def save_run(
    root: str,
    manifest: RunManifest,
    trajectories: Sequence[Trajectory] = (),
    results: Sequence[BoxcountResult | FdimResult] = (),
    extra_files: dict[str, str] | None = None,
) -> str:
    """Persist a run atomically; returns the run id.

    result_refs in the stored manifest are derived from `results` (named
    result_<i>.json) plus any extra_files (name -> text content).
    """
    if not manifest.run_id:
        raise StoreError("manifest.run_id must be set")
    os.makedirs(root, exist_ok=True)
    final_dir = os.path.join(root, manifest.run_id)
    if os.path.exists(final_dir):
        raise DuplicateRunError(f"run {manifest.run_id!r} already exists")

    var_names = manifest.region.names
    refs = [f"result_{i}.json" for i in range(len(results))]
    if extra_files:
        refs.extend(extra_files)

    staging = tempfile.mkdtemp(prefix=".staging-", dir=root)
    try:
        for traj in trajectories:
            _write_trajectory_csv(
                os.path.join(staging, f"ic_{traj.ic_index}.csv"), traj, var_names
            )
        for i, result in enumerate(results):
            with open(os.path.join(staging, f"result_{i}.json"), "w", encoding="ascii") as fh:
                json.dump(_result_to_json(result), fh, indent=1)
                fh.write("\n")
        if extra_files:
            for name, content in extra_files.items():
                with open(os.path.join(staging, name), "w", encoding="ascii") as fh:
                    fh.write(content)
        full = RunManifest(
            run_id=manifest.run_id,
            created_at=manifest.created_at,
            system_source=manifest.system_source,
            system_name=manifest.system_name,
            predicate_source=manifest.predicate_source,
            region=manifest.region,
            cfg=manifest.cfg,
            seed=manifest.seed,
            result_refs=tuple(refs),
            n_trajectories=len(trajectories),
            trajectory_status=tuple(_trajectory_status_json(t) for t in trajectories),
        )
        with open(os.path.join(staging, MANIFEST_FILE), "w", encoding="ascii") as fh:
            json.dump(full.to_json(), fh, indent=1)
            fh.write("\n")
        try:
            os.rename(staging, final_dir)
        except OSError as exc:
            raise DuplicateRunError(
                f"run {manifest.run_id!r} already exists"
            ) from exc
    except Exception:
        shutil.rmtree(staging, ignore_errors=True)
        raise
    return manifest.run_id


@dataclass
class LoadedRun:
    root: str
    manifest: RunManifest

    @property
    def run_dir(self) -> str:
        return os.path.join(self.root, self.manifest.run_id)

    def trajectory_path(self, ic_index: int) -> str:
        return os.path.join(self.run_dir, f"ic_{ic_index}.csv")

    def load_trajectory(self, ic_index: int) -> Trajectory:
        path = self.trajectory_path(ic_index)
        if not os.path.exists(path):
            raise IntegrityError(f"missing trajectory file ic_{ic_index}.csv")
        times = []
        states = []
        with open(path, "r", encoding="ascii") as fh:
            header = fh.readline()
            if not header.startswith("t,"):
                raise IntegrityError(f"corrupt trajectory header in ic_{ic_index}.csv")
            for line in fh:
                fields = line.rstrip("\n").split(",")
                times.append(float(fields[0]))
                states.append([float(v) for v in fields[1:]])
        status = TrajectoryStatus(completed=True)
        for entry in self.manifest.trajectory_status:
            if entry["ic_index"] == ic_index:
                status = TrajectoryStatus(
                    completed=entry["completed"],
                    reason=entry.get("reason"),
                    last_good_time=entry.get("last_good_time"),
                )
                break
        return Trajectory(
            ic_index=ic_index,
            times=np.asarray(times),
            states=np.asarray(states),
            status=status,
        )

    def iter_trajectories(self) -> Iterator[Trajectory]:
        for i in range(self.manifest.n_trajectories):
            yield self.load_trajectory(i)

    def load_result(self, ref: str) -> dict | str:
        path = os.path.join(self.run_dir, ref)
        if not os.path.exists(path):
            raise IntegrityError(f"missing result file {ref!r}")
        with open(path, "r", encoding="ascii") as fh:
            if ref.endswith(".json"):
                return json.load(fh)
            return fh.read()


def load_run(root: str, run_id: str) -> LoadedRun:
    """Load a run manifest; trajectory files are read lazily on access."""
    run_dir = os.path.join(root, run_id)
    manifest_path = os.path.join(run_dir, MANIFEST_FILE)
    if not os.path.isdir(run_dir) or not os.path.exists(manifest_path):
        raise RunNotFoundError(f"no run named {run_id!r} in {root!r}")
    try:
        with open(manifest_path, "r", encoding="ascii") as fh:
            manifest = RunManifest.from_json(json.load(fh))
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise IntegrityError(f"corrupt manifest for run {run_id!r}: {exc}") from exc
    loaded = LoadedRun(root=root, manifest=manifest)
    for ref in manifest.result_refs:
        if not os.path.exists(os.path.join(run_dir, ref)):
            raise IntegrityError(f"manifest of {run_id!r} references missing file {ref!r}")
    return loaded


def list_runs(root: str) -> list[tuple[str, str, str]]:
    """(run_id, created_at, system name) for every run, newest first."""
    if not os.path.exists(root):
        return []
    if not os.path.isdir(root):
        raise StoreError(f"store root {root!r} is not a directory")
    entries = []
    try:
        names = os.listdir(root)
    except OSError as exc:
        raise StoreError(f"cannot read store root {root!r}: {exc}") from exc
    for name in names:
        if name.startswith("."):
            continue
        manifest_path = os.path.join(root, name, MANIFEST_FILE)
        if not os.path.exists(manifest_path):
            continue
        try:
            with open(manifest_path, "r", encoding="ascii") as fh:
                obj = json.load(fh)
            entries.append(
                (obj["run_id"], obj["created_at"], obj.get("system_name", ""))
            )
        except (OSError, json.JSONDecodeError, KeyError):
            continue
    entries.sort(key=lambda e: e[1], reverse=True)
    return entries
