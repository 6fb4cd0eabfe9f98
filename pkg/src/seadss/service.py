"""HTTP facade over the assessment engine.

Every endpoint is a thin adapter: request documents are parsed, handed to
the corresponding engine function, and the result serialized back, so HTTP
responses match in-process calls number for number.  Validation failures
come back as 400 with machine-readable field paths; unknown ids as 404;
duplicate/stale scenario writes as 409; infeasible, unbounded, or
out-of-budget computations as a structured 422 status document.
"""

from __future__ import annotations

import time
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel, Field

from . import compare as compare_mod
from .budget import TimeBudgetError
from .causal import (
    OracleLimitError,
    build_program,
    impact_probability,
    intervene,
    receptor_probability,
)
from .linear import (
    CapacityObjective,
    SignConvention,
    assess,
    build_capacity_problem,
    build_max_receptor_problem,
    optimize_scenario_delta,
    solve_max_receptor,
)
from .lp import sensitivity_report, solve_lp, solve_mip
from .matrices import (
    MatrixFormatError,
    Scenario,
    UnknownEntityError,
    scenario_from_dict,
    scenario_to_dict,
    validate_scenario,
)
from .store import (
    DuplicateScenarioError,
    InvalidScenarioIdError,
    StaleVersionError,
    StoredScenario,
    WorkspaceStore,
)

DEFAULT_TIME_BUDGET = 30.0


class ApiError(Exception):
    def __init__(self, status_code: int, payload: dict):
        self.status_code = status_code
        self.payload = payload
        super().__init__(str(payload))


# -- request documents -------------------------------------------------------


class DemandGroupDoc(BaseModel):
    activities: list[str] = Field(default_factory=list)
    lower_bound: float = 0.0


class ScenarioDoc(BaseModel):
    name: str = ""
    magnitudes: dict[str, float] = Field(default_factory=dict)
    receptor_limits: dict[str, float] = Field(default_factory=dict)
    costs: dict[str, float] | None = None
    budget: float | None = None
    demand_groups: list[DemandGroupDoc] = Field(default_factory=list)

    def to_plain(self) -> dict:
        return self.model_dump()


class MatricesUpload(BaseModel):
    activity_impact: str
    impact_receptor: str
    entities: dict


class ScenarioCreate(BaseModel):
    id: str
    scenario: ScenarioDoc


class ScenarioPut(BaseModel):
    scenario: ScenarioDoc
    expected_version: int | None = None


class ObjectiveDoc(BaseModel):
    kind: str = "receptor"
    sense: str = "max"
    receptor: str | None = None
    weights: dict[str, float] | None = None
    group_index: int = 0


class AssessRequest(BaseModel):
    scenario_id: str | None = None
    scenario: ScenarioDoc | None = None
    convention: str = SignConvention.POLARITY_SIGNED.value


class OptimizeRequest(BaseModel):
    kind: str
    receptor: str | None = None
    sense: str = "max"
    scenario_id: str | None = None
    scenario: ScenarioDoc | None = None
    objective: ObjectiveDoc | None = None
    delta: float | None = None
    enforce_budget: bool = False
    convention: str = SignConvention.POLARITY_SIGNED.value


class CausalRequest(BaseModel):
    do: list[str] = Field(default_factory=list)
    activity_probs: dict[str, float] = Field(default_factory=dict)
    target: str


# -- helpers -----------------------------------------------------------------


def _validation_error(details: list[dict]) -> ApiError:
    return ApiError(400, {"error": "validation", "details": details})


def _doc_findings(doc: ScenarioDoc) -> list[dict]:
    out = []
    for aid, v in doc.magnitudes.items():
        if v < 0:
            out.append({"path": f"magnitudes.{aid}",
                        "message": "magnitude must be >= 0"})
    if doc.budget is not None and doc.budget < 0:
        out.append({"path": "budget", "message": "budget must be >= 0"})
    if doc.costs:
        for aid, v in doc.costs.items():
            if v < 0:
                out.append({"path": f"costs.{aid}", "message": "cost must be >= 0"})
    return out


def _stored_to_doc(stored: StoredScenario) -> dict:
    return {
        "id": stored.id,
        "version": stored.version,
        "scenario": scenario_to_dict(stored.scenario),
    }


def _solution_payload(kind, sol, sens, extra=None) -> dict:
    payload = {
        "status": sol.status,
        "kind": kind,
        "objective_value": sol.objective_value,
        "primal": sol.primal,
        "duals": {str(k): v for k, v in sol.duals.items()},
        "reduced_costs": sol.reduced_costs,
        "dual_source": sol.dual_source,
        "sensitivity": sens.to_dict() if sens else None,
    }
    if extra:
        payload.update(extra)
    return payload


def create_app(
    store: WorkspaceStore,
    time_budget: float = DEFAULT_TIME_BUDGET,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="seadss", version="0.1.0")

    # -- error plumbing -----------------------------------------------------

    @app.exception_handler(ApiError)
    async def _api_error(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status_code, content=exc.payload)

    @app.exception_handler(RequestValidationError)
    async def _request_validation(request: Request, exc: RequestValidationError):
        details = [
            {"path": ".".join(str(p) for p in err["loc"] if p != "body"),
             "message": err["msg"]}
            for err in exc.errors()
        ]
        return JSONResponse(
            status_code=400, content={"error": "validation", "details": details}
        )

    def _require_matrices():
        if store.matrices is None:
            raise ApiError(400, {"error": "no-matrices",
                                 "details": [{"path": "", "message":
                                              "upload matrices first"}]})
        return store.matrices

    def _convention(name: str) -> SignConvention:
        try:
            return SignConvention(name)
        except ValueError:
            raise _validation_error(
                [{"path": "convention", "message": f"unknown convention {name!r}"}]
            ) from None

    def _resolve_scenario(scenario_id, scenario_doc) -> Scenario:
        m = _require_matrices()
        if scenario_id is not None:
            try:
                scenario = store.get_scenario(scenario_id).scenario
            except KeyError:
                raise ApiError(404, {"error": "unknown-id",
                                     "detail": f"scenario {scenario_id!r}"}) from None
        elif scenario_doc is not None:
            findings = _doc_findings(scenario_doc)
            if findings:
                raise _validation_error(findings)
            scenario = scenario_from_dict(scenario_doc.to_plain())
        else:
            raise _validation_error(
                [{"path": "scenario", "message":
                  "provide scenario_id or an inline scenario"}]
            )
        report = validate_scenario(m, scenario)
        if not report.ok:
            raise _validation_error(
                [{"path": f.path, "message": f.message} for f in report.errors]
            )
        return scenario

    # -- matrices -----------------------------------------------------------

    @app.put("/matrices")
    def put_matrices(body: MatricesUpload):
        try:
            store.set_matrices(body.activity_impact, body.impact_receptor,
                               body.entities)
        except MatrixFormatError as exc:
            raise _validation_error(
                [{"path": "", "message": f} for f in exc.findings]
            ) from None
        return store.matrices_summary()

    @app.get("/matrices/summary")
    def matrices_summary():
        return store.matrices_summary()

    # -- scenarios ----------------------------------------------------------

    @app.get("/scenarios")
    def list_scenarios():
        return {"scenarios": [_stored_to_doc(s) for s in store.list_scenarios()]}

    @app.post("/scenarios", status_code=201)
    def create_scenario(body: ScenarioCreate):
        findings = _doc_findings(body.scenario)
        if findings:
            raise _validation_error(findings)
        scenario = scenario_from_dict(body.scenario.to_plain())
        if store.matrices is not None:
            report = validate_scenario(store.matrices, scenario)
            if not report.ok:
                raise _validation_error(
                    [{"path": f.path, "message": f.message} for f in report.errors]
                )
        try:
            stored = store.create_scenario(body.id, scenario)
        except DuplicateScenarioError:
            raise ApiError(409, {"error": "duplicate-id", "detail": body.id}) from None
        except InvalidScenarioIdError as exc:
            raise _validation_error([{"path": "id", "message": str(exc)}]) from None
        return _stored_to_doc(stored)

    @app.get("/scenarios/{scenario_id}")
    def get_scenario(scenario_id: str):
        try:
            return _stored_to_doc(store.get_scenario(scenario_id))
        except KeyError:
            raise ApiError(404, {"error": "unknown-id",
                                 "detail": f"scenario {scenario_id!r}"}) from None

    @app.put("/scenarios/{scenario_id}")
    def put_scenario(scenario_id: str, body: ScenarioPut):
        findings = _doc_findings(body.scenario)
        if findings:
            raise _validation_error(findings)
        scenario = scenario_from_dict(body.scenario.to_plain())
        try:
            stored = store.put_scenario(scenario_id, scenario,
                                        expected_version=body.expected_version)
        except KeyError:
            raise ApiError(404, {"error": "unknown-id",
                                 "detail": f"scenario {scenario_id!r}"}) from None
        except StaleVersionError as exc:
            raise ApiError(409, {
                "error": "stale-version",
                "detail": str(exc),
                "current_version": exc.current,
            }) from None
        return _stored_to_doc(stored)

    @app.delete("/scenarios/{scenario_id}")
    def delete_scenario(scenario_id: str):
        try:
            store.delete_scenario(scenario_id)
        except KeyError:
            raise ApiError(404, {"error": "unknown-id",
                                 "detail": f"scenario {scenario_id!r}"}) from None
        return {"deleted": scenario_id}

    # -- engine endpoints ----------------------------------------------------

    @app.post("/assess")
    def assess_endpoint(body: AssessRequest):
        m = _require_matrices()
        scenario = _resolve_scenario(body.scenario_id, body.scenario)
        return assess(m, scenario, _convention(body.convention)).to_dict()

    @app.post("/optimize")
    def optimize_endpoint(body: OptimizeRequest):
        m = _require_matrices()
        convention = _convention(body.convention)
        try:
            if body.kind == "max_receptor":
                if body.receptor is None:
                    raise _validation_error(
                        [{"path": "receptor", "message": "receptor is required"}]
                    )
                problem = build_max_receptor_problem(
                    m, body.receptor, body.sense, convention)
                sol = solve_mip(problem, time_budget=time_budget)
                if sol.status != "optimal":
                    return JSONResponse(status_code=422,
                                        content={"status": sol.status,
                                                 "kind": body.kind})
                best = solve_max_receptor(m, body.receptor, body.sense, convention)
                sens = sensitivity_report(problem, sol)
                return _solution_payload(
                    body.kind, sol, sens,
                    {"chosen_activity": best.activity_id,
                     "enumeration_value": best.value},
                )

            if body.kind == "capacity":
                scenario = _resolve_scenario(body.scenario_id, body.scenario)
                obj_doc = body.objective or ObjectiveDoc()
                objective = CapacityObjective(
                    kind=obj_doc.kind,
                    sense=obj_doc.sense,
                    receptor_id=obj_doc.receptor,
                    weights=obj_doc.weights,
                    group_index=obj_doc.group_index,
                )
                try:
                    problem = build_capacity_problem(m, scenario, objective,
                                                     convention)
                except ValueError as exc:
                    raise _validation_error(
                        [{"path": "objective", "message": str(exc)}]
                    ) from None
                sol = solve_lp(problem, time_budget=time_budget)
                if sol.status != "optimal":
                    return JSONResponse(status_code=422,
                                        content={"status": sol.status,
                                                 "kind": body.kind})
                sens = sensitivity_report(problem, sol)
                return _solution_payload(body.kind, sol, sens)

            if body.kind == "delta":
                scenario = _resolve_scenario(body.scenario_id, body.scenario)
                if body.receptor is None or body.delta is None:
                    raise _validation_error(
                        [{"path": "delta", "message":
                          "delta optimization needs receptor and delta"}]
                    )
                result = optimize_scenario_delta(
                    m, scenario, body.delta, body.receptor, body.sense,
                    convention, enforce_budget=body.enforce_budget,
                )
                if result.solution.status != "optimal":
                    return JSONResponse(status_code=422,
                                        content={"status": result.solution.status,
                                                 "kind": body.kind})
                sens = sensitivity_report(result.problem, result.solution)
                return _solution_payload(
                    body.kind, result.solution, sens,
                    {"scenario": scenario_to_dict(result.scenario),
                     "footprint": result.footprint.to_dict()},
                )

            raise _validation_error(
                [{"path": "kind", "message": f"unknown kind {body.kind!r}"}]
            )
        except UnknownEntityError as exc:
            raise ApiError(404, {"error": "unknown-id", "detail": str(exc)}) from None
        except TimeBudgetError:
            return JSONResponse(status_code=422,
                                content={"status": "timeout", "kind": body.kind})

    @app.post("/causal/query")
    def causal_query(body: CausalRequest):
        m = _require_matrices()
        try:
            program = intervene(
                build_program(m, activity_probs=body.activity_probs), body.do
            )
        except (UnknownEntityError, KeyError) as exc:
            raise ApiError(404, {"error": "unknown-id", "detail": str(exc)}) from None
        except ValueError as exc:
            raise _validation_error(
                [{"path": "activity_probs", "message": str(exc)}]
            ) from None

        started = time.perf_counter()
        try:
            if body.target in m.impact_ids:
                kind = "impact"
                prob = impact_probability(program, body.target,
                                          time_budget=time_budget)
            elif body.target in m.receptor_ids:
                kind = "receptor"
                prob = receptor_probability(program, body.target,
                                            time_budget=time_budget)
            else:
                raise ApiError(404, {"error": "unknown-id",
                                     "detail": f"target {body.target!r}"})
        except TimeBudgetError:
            return JSONResponse(status_code=422, content={"status": "timeout"})
        except OracleLimitError as exc:
            return JSONResponse(status_code=422,
                                content={"status": "limit", "detail": str(exc)})
        elapsed_ms = (time.perf_counter() - started) * 1000.0
        return {
            "target": body.target,
            "target_kind": kind,
            "probability": prob,
            "elapsed_ms": elapsed_ms,
        }

    # -- comparison ----------------------------------------------------------

    @app.get("/compare/table")
    def compare_table():
        m = _require_matrices()
        table = compare_mod.build_table(m)
        return {
            "nope": table.nope,
            "nric": table.nric,
            "cells": [
                {"activity": c.activity_id, "receptor": c.receptor_id,
                 "linear": c.linear_value, "probability": c.causal_prob}
                for c in table.cells
            ],
        }

    @app.get("/compare/scatter")
    def compare_scatter():
        m = _require_matrices()
        text = compare_mod.scatter_export(compare_mod.build_table(m))
        return PlainTextResponse(text, media_type="text/csv")

    @app.get("/compare/divergence")
    def compare_divergence():
        m = _require_matrices()
        table = compare_mod.build_table(m)
        try:
            entries = compare_mod.divergence_rank(table)
        except ValueError as exc:
            return JSONResponse(status_code=422,
                                content={"status": "degenerate", "detail": str(exc)})
        return {
            "entries": [
                {"activity": e.cell.activity_id, "receptor": e.cell.receptor_id,
                 "linear": e.cell.linear_value, "probability": e.cell.causal_prob,
                 "fitted": e.fitted, "residual": e.residual}
                for e in entries
            ],
        }

    @app.get("/health")
    def health():
        return {"status": "ok", "matrices_loaded": store.matrices is not None}

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
