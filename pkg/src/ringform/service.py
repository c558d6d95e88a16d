"""HTTP facade over the simulation core.

The service owns all computation; artifacts (CSV, JSON, SVG) come back as
strings in the response body so clients stay free of numerics.  The CLI is
one such client, mounted in-process by default.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Literal

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__
from .dynamics import TrajectoryLog
from .errors import RingformError
from .plots import plot_diagnostics, plot_errors, plot_trajectories
from .scenario import (
    RunSummary,
    Scenario,
    canonical_json,
    reproduce_scenarios,
    run_scenario,
    run_sweep,
    scenario_from_dict,
    scenario_to_dict,
    summary_to_dict,
    trajectory_csv,
)
from .verification import resolve_seed, run_verification


class ArtifactBundle(BaseModel):
    scenario_json: str
    trajectory_csv: str
    summary_json: str
    trajectory_svg: str
    errors_svg: str
    diagnostics_svg: str


class RunRequest(BaseModel):
    scenario: dict


class RunResponse(BaseModel):
    summary: dict
    artifacts: ArtifactBundle


class VerifyRequest(BaseModel):
    seed: int | None = None


class CheckModel(BaseModel):
    name: str
    passed: bool
    detail: str
    seconds: float


class VerifyResponse(BaseModel):
    passed: bool
    seed: int
    checks: list[CheckModel]


class SweepRequest(BaseModel):
    param: str = "a"
    values: list[float] = Field(min_length=1)
    scenario: dict | None = None  # defaults to the regular-decagon setup


class SweepRow(BaseModel):
    name: str
    a: float
    terminal_event: str
    terminal_time: float
    settling_time: float | None
    exp_rate: float | None
    min_pair_dist: float
    eps_inf_final: float


class SweepResponse(BaseModel):
    rows: list[SweepRow]


class ReproduceRequest(BaseModel):
    figure: Literal["fig3", "fig4"]


class ReproduceRun(BaseModel):
    name: str
    summary: dict
    artifacts: ArtifactBundle


class ReproduceResponse(BaseModel):
    runs: list[ReproduceRun]


def _bundle(scenario: Scenario, log: TrajectoryLog, summary: RunSummary) -> ArtifactBundle:
    return ArtifactBundle(
        scenario_json=canonical_json(scenario_to_dict(scenario)),
        trajectory_csv=trajectory_csv(log),
        summary_json=canonical_json(summary_to_dict(summary)),
        trajectory_svg=plot_trajectories(log),
        errors_svg=plot_errors(log),
        diagnostics_svg=plot_diagnostics(log),
    )


def _parse_scenario(doc: dict) -> Scenario:
    try:
        return scenario_from_dict(doc)
    except RingformError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


def _default_sweep_base() -> Scenario:
    return replace(reproduce_scenarios("fig4")[0], name="decagon")


app = FastAPI(title="ringform", version=__version__)


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/run", response_model=RunResponse)
def run(req: RunRequest) -> RunResponse:
    scenario = _parse_scenario(req.scenario)
    try:
        log, summary = run_scenario(scenario)
    except RingformError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return RunResponse(
        summary=summary_to_dict(summary), artifacts=_bundle(scenario, log, summary)
    )


@app.post("/verify", response_model=VerifyResponse)
def verify(req: VerifyRequest) -> VerifyResponse:
    seed = resolve_seed(req.seed)
    results = run_verification(seed)
    return VerifyResponse(
        passed=all(r.passed for r in results),
        seed=seed,
        checks=[
            CheckModel(name=r.name, passed=r.passed, detail=r.detail, seconds=r.seconds)
            for r in results
        ],
    )


@app.post("/sweep", response_model=SweepResponse)
def sweep(req: SweepRequest) -> SweepResponse:
    base = _parse_scenario(req.scenario) if req.scenario else _default_sweep_base()
    try:
        triples = run_sweep(base, req.param, req.values)
    except RingformError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    rows = [
        SweepRow(
            name=sc.name,
            a=summary.a,
            terminal_event=summary.terminal_event,
            terminal_time=summary.terminal_time,
            settling_time=summary.settling_time,
            exp_rate=summary.exp_rate,
            min_pair_dist=summary.min_pair_dist,
            eps_inf_final=summary.eps_inf_final,
        )
        for sc, _, summary in triples
    ]
    return SweepResponse(rows=rows)


@app.post("/reproduce", response_model=ReproduceResponse)
def reproduce(req: ReproduceRequest) -> ReproduceResponse:
    runs = []
    for scenario in reproduce_scenarios(req.figure):
        log, summary = run_scenario(scenario)
        runs.append(
            ReproduceRun(
                name=scenario.name,
                summary=summary_to_dict(summary),
                artifacts=_bundle(scenario, log, summary),
            )
        )
    return ReproduceResponse(runs=runs)
