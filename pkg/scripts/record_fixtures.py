"""Record real service responses as JSON fixtures for the workbench tests.

Run from the repo root: python3 scripts/record_fixtures.py
"""

import json
import sys
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))
from conftest import DEMO_ACTIVITY_IMPACT, DEMO_ENTITIES, DEMO_IMPACT_RECEPTOR

from seadss.service import create_app
from seadss.store import WorkspaceStore

OUT = Path(__file__).resolve().parent.parent / "frontend" / "tests" / "fixtures"

SCENARIO_DOC = {
    "name": "logistics",
    "magnitudes": {"ext_mov": 2.0, "int_mov": 1.0},
    "receptor_limits": {"health": 100.0},
    "costs": {"ext_mov": 1.0, "int_mov": 1.0},
    "budget": 10.0,
    "demand_groups": [{"activities": ["ext_mov", "int_mov"], "lower_bound": 1.0}],
}


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        store = WorkspaceStore(tmp)
        with TestClient(create_app(store)) as client:
            client.put("/matrices", json={
                "activity_impact": DEMO_ACTIVITY_IMPACT,
                "impact_receptor": DEMO_IMPACT_RECEPTOR,
                "entities": DEMO_ENTITIES,
            })

            def save(name, payload):
                (OUT / name).write_text(json.dumps(payload, indent=2) + "\n")
                print(f"wrote {name}")

            save("summary.json", client.get("/matrices/summary").json())

            save("footprint.json",
                 client.post("/assess", json={"scenario": SCENARIO_DOC}).json())

            save("causal_anchor.json", client.post("/causal/query", json={
                "do": ["ext_mov", "int_mov"], "target": "disp"}).json())

            save("causal_receptor.json", client.post("/causal/query", json={
                "do": ["ext_mov", "int_mov"], "target": "health"}).json())

            save("optimize_capacity.json", client.post("/optimize", json={
                "kind": "capacity", "scenario": SCENARIO_DOC,
                "objective": {"kind": "group_total", "sense": "max"}}).json())

            r = client.post("/optimize", json={
                "kind": "capacity",
                "scenario": {
                    "name": "impossible",
                    "costs": {"ext_mov": 1.0, "int_mov": 1.0},
                    "budget": 0.0,
                    "demand_groups": [{"activities": ["ext_mov", "int_mov"],
                                       "lower_bound": 10.0}],
                },
                "objective": {"kind": "group_total"}})
            assert r.status_code == 422
            save("optimize_infeasible.json", r.json())

            save("optimize_delta.json", client.post("/optimize", json={
                "kind": "delta", "scenario": SCENARIO_DOC,
                "receptor": "health", "delta": 0.01}).json())

            r = client.post("/scenarios", json={"id": "logistics",
                                                "scenario": SCENARIO_DOC})
            assert r.status_code == 201
            save("scenario_created.json", r.json())

            r = client.put("/scenarios/logistics", json={
                "scenario": SCENARIO_DOC, "expected_version": 99})
            assert r.status_code == 409
            save("scenario_conflict.json", r.json())

            (OUT / "scatter.csv").write_text(client.get("/compare/scatter").text)
            print("wrote scatter.csv")

            save("divergence.json", client.get("/compare/divergence").json())


if __name__ == "__main__":
    main()
