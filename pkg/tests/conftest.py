"""Shared fixtures.

The reproduction runs cost seconds each, so every consumer shares one
session-scoped instance.  Fixtures hand out either the RunArtifact (scenario
+ log + summary + wall time) or just the log, whichever the test needs.
"""

import time
from dataclasses import dataclass, replace

import pytest

from ringform.dynamics import SimParams, TrajectoryLog
from ringform.scenario import (
    RunSummary,
    Scenario,
    make_regular_scenario,
    reproduce_scenarios,
    run_scenario,
)


@dataclass(frozen=True)
class RunArtifact:
    scenario: Scenario
    log: TrajectoryLog
    summary: RunSummary
    wall_time: float


def _run(scenario: Scenario) -> RunArtifact:
    t0 = time.perf_counter()
    log, summary = run_scenario(scenario)
    return RunArtifact(scenario, log, summary, time.perf_counter() - t0)


@pytest.fixture(scope="session")
def fig3_runs() -> list[RunArtifact]:
    return [_run(s) for s in reproduce_scenarios("fig3")]


@pytest.fixture(scope="session")
def fig4_runs() -> list[RunArtifact]:
    return [_run(s) for s in reproduce_scenarios("fig4")]


@pytest.fixture(scope="session")
def acceptance_runs(fig3_runs, fig4_runs) -> list[RunArtifact]:
    return fig3_runs + fig4_runs


@pytest.fixture(scope="session")
def fig3_a1_art(fig3_runs) -> RunArtifact:
    return fig3_runs[0]


@pytest.fixture(scope="session")
def fig3_a1(fig3_a1_art) -> TrajectoryLog:
    return fig3_a1_art.log


@pytest.fixture(scope="session")
def fig3_a03(fig3_runs) -> TrajectoryLog:
    return fig3_runs[1].log


@pytest.fixture(scope="session")
def fig3_seed_arts(fig3_runs) -> list[RunArtifact]:
    """The a=1 pentagram under three perturbation seeds (rate stability)."""
    base = fig3_runs[0].scenario
    arts = [fig3_runs[0]]
    for seed in (12, 13):
        sc = make_regular_scenario(
            5, 2, 36.0, 0.3, seed, name=f"fig3-a1-seed{seed}", sim=base.sim
        )
        arts.append(_run(sc))
    return arts


@pytest.fixture(scope="session")
def pentagram_family(fig3_runs) -> list[TrajectoryLog]:
    """Perturbation scales 1, 1/2, 1/4 of the fig3 base, same seed and draws."""
    base = fig3_runs[0].scenario
    logs = [fig3_runs[0].log]
    for perturb in (0.15, 0.075):
        sc = make_regular_scenario(
            5, 2, 36.0, perturb, 11, name=f"pentagram-p{perturb:g}", sim=base.sim
        )
        logs.append(_run(sc).log)
    return logs


@pytest.fixture(scope="session")
def dt_refinement_pair(fig3_runs) -> list[TrajectoryLog]:
    """The pentagram truncated to 2 s at dt and dt/2 (discretization order)."""
    base = fig3_runs[0].scenario
    out = []
    for dt in (1e-3, 5e-4):
        sc = replace(
            base,
            name=f"{base.name}-dt{dt:g}",
            sim=replace(base.sim, dt=dt, t_max=2.0),
        )
        out.append(_run(sc).log)
    return out


@pytest.fixture(scope="session")
def short_run():
    sc = make_regular_scenario(
        5, 2, 36.0, 0.3, 11, name="short", sim=SimParams(a=1.0, t_max=0.4)
    )
    log, summary = run_scenario(sc)
    return log, summary
