"""The committed JSON schemas must accept what the code actually produces."""
from __future__ import annotations

import json
from pathlib import Path

import pytest
from jsonschema import Draft202012Validator
from referencing import Registry, Resource

from chaoscope.boundary import BoxcountResult, FdimResult, InitRegion
from chaoscope.integrate import IntegratorConfig
from chaoscope.store import RunManifest
from chaoscope.systems import CONSTANT_SOURCE

SCHEMA_DIR = Path(__file__).resolve().parent.parent / "docs" / "schemas"


def _validator(name: str) -> Draft202012Validator:
    resources = []
    for path in SCHEMA_DIR.glob("*.schema.json"):
        schema = json.loads(path.read_text())
        resources.append((path.name, Resource.from_contents(schema)))
        resources.append((schema["$id"], Resource.from_contents(schema)))
    registry = Registry().with_resources(resources)
    root = json.loads((SCHEMA_DIR / name).read_text())
    return Draft202012Validator(root, registry=registry)


REGION = InitRegion((("x", -1.0, 1.0),))


def test_init_region_schema():
    _validator("init_region.schema.json").validate(REGION.to_json())


def test_solve_request_schema():
    payload = {
        "system_source": CONSTANT_SOURCE,
        "system_name": "constant",
        "region": REGION.to_json(),
        "t_range": [0, 1],
        "t_calc_step": 0.1,
        "number_ic": 5,
        "seed": 0,
    }
    _validator("solve_request.schema.json").validate(payload)


def test_boxcount_request_schema():
    payload = {
        "system_source": CONSTANT_SOURCE,
        "predicate": "x<0",
        "region": REGION.to_json(),
        "t_final": 1,
        "t_calc_step": 0.5,
        "number_ic": 100,
        "epsilon": 0.05,
    }
    _validator("boxcount_request.schema.json").validate(payload)


def test_fdim_request_schema():
    payload = {
        "system_source": CONSTANT_SOURCE,
        "predicate": "x<0",
        "region": REGION.to_json(),
        "t_final": 1,
        "t_calc_step": 0.5,
        "number_ic": 100,
        "epsilon_range": [1e-3, 1e-1],
        "n_epsilons": 5,
    }
    _validator("fdim_request.schema.json").validate(payload)


def test_result_schemas():
    box = BoxcountResult(epsilon=1e-3, delta=5e-4, n_testable=100, n_boundary=7,
                         n_excluded=0)
    payload = box.to_json()
    payload["kind"] = "boxcount"
    _validator("boxcount_result.schema.json").validate(payload)

    fdim = FdimResult(D=3, alpha=1.0, d_B=2.0, se_percent=0.5, pearson_r=-0.999,
                      intercept=-1.2, points=((0.5, 0.1), (0.25, 0.05)))
    payload = fdim.to_json()
    payload["kind"] = "fdim"
    _validator("fdim_result.schema.json").validate(payload)


def test_manifest_schema():
    manifest = RunManifest(
        run_id="r", created_at="2026-01-01T00:00:00+00:00",
        system_source=CONSTANT_SOURCE, system_name="constant",
        predicate_source="x<0", region=REGION,
        cfg=IntegratorConfig(h=0.1, t0=0.0, t1=1.0), seed=1,
        result_refs=("result_0.json",), n_trajectories=1,
        trajectory_status=({"ic_index": 0, "completed": True, "reason": None,
                            "last_good_time": None},),
    )
    _validator("manifest.schema.json").validate(manifest.to_json())


def test_trajectories_response_schema():
    response = {
        "run_id": "r",
        "vars": ["x", "z"],
        "orbits": [
            {"ic_index": 0, "class": "true", "points": [[0.1, 22.0], [0.2, 22.5]]},
            {"ic_index": 1, "class": None, "points": []},
        ],
    }
    _validator("trajectories_response.schema.json").validate(response)


def test_job_schema():
    job = {"job_id": "abc", "kind": "fdim", "state": "running", "progress": 0.25,
           "result_ref": None, "error": None, "created_at": "2026-01-01T00:00:00+00:00"}
    _validator("job.schema.json").validate(job)
