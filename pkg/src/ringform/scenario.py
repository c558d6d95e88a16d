"""Scenario files, experiment generators, run summaries, and artifact writers.

Scenario schema (JSON, angles in degrees for readability, radians internally):

    {
      "name": "fig3-exponential",
      "n": 5,
      "targets_deg": [36, 36, 36, 36, 36],
      "initial": {"kind": "star", "winding": 2, "perturb": 0.3, "seed": 11}
                 | {"kind": "explicit", "positions": [[x, y], ...]}
                 | {"kind": "decagon_collinear"},
      "frames": {"kind": "none"}
                | {"kind": "random", "seed": 7}
                | {"kind": "explicit", "offsets_deg": [...]},
      "sim": {"a": 1.0, "dt": 0.001, "t_max": 120.0, "eps_tol": 1e-9,
              "sample_stride": 10, "dwell_samples": 100,
              "collision_dist": null, "method": "rk4"}
    }

Serialization is canonical (sorted keys, two-space indent, trailing newline),
so write -> load -> write is byte-stable.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .analysis import BoundReport, bound_report
from .dynamics import (
    FormationState,
    SimParams,
    TargetFormation,
    TrajectoryLog,
    settling_time,
    simulate,
)
from .errors import InfeasibleWinding, ScenarioError

_INITIAL_KINDS = ("star", "explicit", "decagon_collinear")
_FRAME_KINDS = ("none", "random", "explicit")


@dataclass(frozen=True)
class Scenario:
    name: str
    n: int
    targets_deg: tuple[float, ...]
    initial: dict
    frames: dict = field(default_factory=lambda: {"kind": "none"})
    sim: SimParams = field(default_factory=SimParams)

    def targets(self) -> TargetFormation:
        return TargetFormation(np.radians(np.asarray(self.targets_deg, dtype=float)))

    def initial_positions(self) -> np.ndarray:
        kind = self.initial["kind"]
        if kind == "star":
            return star_positions(
                self.n,
                int(self.initial["winding"]),
                float(self.initial.get("perturb", 0.0)),
                int(self.initial.get("seed", 0)),
            )
        if kind == "explicit":
            z = np.asarray(self.initial["positions"], dtype=float)
            if z.shape != (self.n, 2):
                raise ScenarioError(
                    f"explicit positions shape {z.shape} does not match n={self.n}"
                )
            return z
        if kind == "decagon_collinear":
            if self.n != 10:
                raise ScenarioError("decagon_collinear requires n = 10")
            return decagon_collinear_positions()
        raise ScenarioError(f"unknown initial kind {kind!r}")

    def frame_offsets(self) -> np.ndarray | None:
        kind = self.frames.get("kind", "none")
        if kind == "none":
            return None
        if kind == "random":
            rng = np.random.default_rng(int(self.frames.get("seed", 0)))
            return rng.uniform(0.0, 2.0 * np.pi, self.n)
        if kind == "explicit":
            off = np.radians(np.asarray(self.frames["offsets_deg"], dtype=float))
            if len(off) != self.n:
                raise ScenarioError("frame offsets length does not match n")
            return off
        raise ScenarioError(f"unknown frames kind {kind!r}")

    def feasibility_warnings(self) -> list[str]:
        """Warn (never reject) when sum(theta*) is not (n-2k)pi for integer k >= 1."""
        total = math.radians(sum(self.targets_deg))
        k = (self.n - total / math.pi) / 2.0
        if abs(k - round(k)) > 1e-9 or round(k) < 1:
            return [
                f"target angle sum {total / math.pi:.6f} pi is not of the form "
                f"(n - 2k) pi with integer k >= 1; no realizing polygon may exist"
            ]
        return []


# ---------------------------------------------------------------------------
# generators


def star_positions(n: int, winding: int, perturb: float = 0.0, seed: int = 0) -> np.ndarray:
    """Vertices of the regular {n/winding} star, traversed clockwise, perturbed.

    Clockwise placement realizes the subtended angle pi - 2 pi winding / n at
    every vertex, so the exact star is an equilibrium of the matching target.
    Perturbations are uniform over the disc of radius `perturb`, drawn from a
    seeded generator.
    """
    _check_winding(n, winding)
    ang = -2.0 * np.pi * winding * np.arange(n) / n
    z = np.column_stack([np.cos(ang), np.sin(ang)])
    if perturb > 0.0:
        rng = np.random.default_rng(seed)
        r = perturb * np.sqrt(rng.uniform(0.0, 1.0, n))
        phi = rng.uniform(0.0, 2.0 * np.pi, n)
        z = z + np.column_stack([r * np.cos(phi), r * np.sin(phi)])
    return z


def _check_winding(n: int, winding: int) -> None:
    if n < 3:
        raise InfeasibleWinding(f"need n >= 3, got {n}")
    if winding < 1 or 2 * winding >= n or math.gcd(n, winding) != 1:
        raise InfeasibleWinding(
            f"winding {winding} infeasible for n={n}: need 1 <= w < n/2, gcd(n, w) = 1"
        )


def star_target_deg(n: int, winding: int) -> float:
    """The angle realized at every vertex of the regular {n/winding} star."""
    _check_winding(n, winding)
    return 180.0 - 360.0 * winding / n


def decagon_collinear_positions() -> np.ndarray:
    """Regular decagon degraded so agents 2, 3, 7, 8, 10 (1-indexed) sit at theta = pi.

    Adjacent collinear pairs are the simultaneous solution of the
    neighbors'-chord-midpoint conditions (thirds of the spanning chord);
    the lone collinear agent sits at its neighbors' midpoint.  Vertex 5 is
    reflected across its neighbors' chord, which flips theta_5 to the reflex
    value 216 deg in (pi, 2 pi).  All angles are exact by construction and
    the angle sum stays 8 pi.
    """
    z = star_positions(10, 1)
    out = z.copy()
    out[1] = z[0] + (z[3] - z[0]) / 3.0
    out[2] = z[0] + 2.0 * (z[3] - z[0]) / 3.0
    out[6] = z[5] + (z[8] - z[5]) / 3.0
    out[7] = z[5] + 2.0 * (z[8] - z[5]) / 3.0
    out[9] = 0.5 * (z[8] + z[0])
    chord = z[5] - z[3]
    d = chord / np.linalg.norm(chord)
    rel = z[4] - z[3]
    out[4] = z[3] + 2.0 * np.dot(rel, d) * d - rel
    return out


def make_regular_scenario(
    n: int,
    winding: int,
    target_deg: float,
    perturb: float,
    seed: int,
    name: str | None = None,
    sim: SimParams | None = None,
) -> Scenario:
    """Perturbed regular star scenario with uniform targets.

    The target must match the angle the star realizes (pi - 2 pi w / n),
    else the winding is rejected as inconsistent.
    """
    _check_winding(n, winding)
    if abs(target_deg - star_target_deg(n, winding)) > 1e-9:
        raise InfeasibleWinding(
            f"target {target_deg} deg inconsistent with the {{{n}/{winding}}} star "
            f"angle {star_target_deg(n, winding):.6f} deg"
        )
    return Scenario(
        name=name or f"star-{n}-{winding}",
        n=n,
        targets_deg=(float(target_deg),) * n,
        initial={"kind": "star", "winding": winding, "perturb": perturb, "seed": seed},
        sim=sim or SimParams(),
    )


# ---------------------------------------------------------------------------
# embedded reproduction scenarios (initial coordinates of the source figures
# are not published; these are the documented stand-ins)

FIG3_SEED = 11


def reproduce_scenarios(figure: str) -> list[Scenario]:
    if figure == "fig3":
        base = dict(n=5, winding=2, target_deg=36.0, perturb=0.3, seed=FIG3_SEED)
        return [
            make_regular_scenario(
                **base,
                name="fig3-exponential-a1.0",
                sim=SimParams(a=1.0, t_max=120.0, eps_tol=1e-9),
            ),
            make_regular_scenario(
                **base,
                name="fig3-finite-time-a0.3",
                sim=SimParams(a=0.3, t_max=60.0, eps_tol=1e-9, dwell_samples=2900),
            ),
        ]
    if figure == "fig4":
        common = dict(
            n=10,
            targets_deg=(144.0,) * 10,
            initial={"kind": "decagon_collinear"},
        )
        return [
            Scenario(
                name="fig4-exponential-a1.0",
                sim=SimParams(a=1.0, t_max=90.0, eps_tol=1e-9),
                **common,
            ),
            Scenario(
                name="fig4-finite-time-a0.6",
                sim=SimParams(a=0.6, t_max=20.0, eps_tol=1e-9, dwell_samples=600),
                **common,
            ),
        ]
    raise ScenarioError(f"unknown figure {figure!r}; choose fig3 or fig4")


# ---------------------------------------------------------------------------
# serialization


def scenario_to_dict(s: Scenario) -> dict:
    sim = {
        "a": s.sim.a,
        "dt": s.sim.dt,
        "t_max": s.sim.t_max,
        "eps_tol": s.sim.eps_tol,
        "collision_dist": s.sim.collision_dist,
        "sample_stride": s.sim.sample_stride,
        "dwell_samples": s.sim.dwell_samples,
        "method": s.sim.method,
    }
    return {
        "name": s.name,
        "n": s.n,
        "targets_deg": list(s.targets_deg),
        "initial": dict(s.initial),
        "frames": dict(s.frames),
        "sim": sim,
    }


def scenario_from_dict(d: dict) -> Scenario:
    try:
        n = int(d["n"])
        targets_deg = tuple(float(t) for t in d["targets_deg"])
        initial = dict(d["initial"])
    except KeyError as exc:
        raise ScenarioError(f"scenario missing required field {exc}") from exc
    if len(targets_deg) != n:
        raise ScenarioError(f"{len(targets_deg)} targets for n={n} agents")
    for t in targets_deg:
        # Assumption 1: theta* not in {0, pi} (mod 2 pi)
        if abs(math.sin(math.radians(t))) < 1e-12:
            raise ScenarioError(
                f"target angle {t} deg violates the theta* not in {{0, 180}} assumption"
            )
    if initial.get("kind") not in _INITIAL_KINDS:
        raise ScenarioError(f"initial kind must be one of {_INITIAL_KINDS}")
    frames = dict(d.get("frames", {"kind": "none"}))
    if frames.get("kind") not in _FRAME_KINDS:
        raise ScenarioError(f"frames kind must be one of {_FRAME_KINDS}")
    sim_d = dict(d.get("sim", {}))
    sim_d.setdefault("collision_dist", None)
    try:
        sim = SimParams(**sim_d)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"bad sim block: {exc}") from exc
    scenario = Scenario(
        name=str(d.get("name", "scenario")),
        n=n,
        targets_deg=targets_deg,
        initial=initial,
        frames=frames,
        sim=sim,
    )
    scenario.initial_positions()  # validate the generator spec eagerly
    scenario.frame_offsets()
    return scenario


def canonical_json(d: dict) -> str:
    return json.dumps(d, indent=2, sort_keys=True) + "\n"


def save_scenario(s: Scenario, path: str | Path) -> None:
    Path(path).write_text(canonical_json(scenario_to_dict(s)))


def load_scenario(path: str | Path) -> Scenario:
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}")
    if not isinstance(d, dict):
        raise ScenarioError(f"{path}: top level must be an object")
    return scenario_from_dict(d)


# ---------------------------------------------------------------------------
# running and summarizing


@dataclass(frozen=True)
class RunSummary:
    scenario_name: str
    n: int
    a: float
    terminal_event: str
    terminal_time: float
    settling_time: float | None
    exp_rate: float | None  # log-e slope of V over the final decade (a = 1 runs)
    bounds: BoundReport
    min_pair_dist: float
    theta_sum_drift: float
    eps_inf_final: float
    V_final: float
    stall_flagged: bool = False
    warnings: tuple[str, ...] = ()


def fit_exponential_rate(log: TrajectoryLog, eps_tol: float) -> float | None:
    """Least-squares slope of ln V over the final decade before eps_tol.

    The window is every sample with V in [V_cross, 10 V_cross], where V_cross
    is V at the first sample with ||eps||_inf below eps_tol.  None when the
    run never crosses or the window is too thin to fit.
    """
    eps_inf = log.eps_inf()
    below = np.nonzero(eps_inf < eps_tol)[0]
    if len(below) == 0:
        return None
    v = log.V()
    t = log.times()
    v_cross = v[below[0]]
    if v_cross <= 0.0:
        return None
    window = np.nonzero((v >= v_cross) & (v <= 10.0 * v_cross))[0]
    if len(window) < 3:
        return None
    slope = np.polyfit(t[window], np.log(v[window]), 1)[0]
    return float(slope)


def run_scenario(scenario: Scenario) -> tuple[TrajectoryLog, RunSummary]:
    targets = scenario.targets()
    z0 = scenario.initial_positions()
    log = simulate(
        FormationState(z0, 0.0), targets, scenario.sim, scenario.frame_offsets()
    )
    return log, summarize(scenario, log)


def summarize(scenario: Scenario, log: TrajectoryLog) -> RunSummary:
    targets = scenario.targets()
    event = log.terminal_event() or (float("nan"), "none")
    theta0 = log.samples[0].theta_sum
    drift = float(np.max(np.abs(log.theta_sum() - theta0)))
    rate = fit_exponential_rate(log, scenario.sim.eps_tol) if scenario.sim.a == 1.0 else None
    return RunSummary(
        scenario_name=scenario.name,
        n=scenario.n,
        a=scenario.sim.a,
        terminal_event=event[1],
        terminal_time=float(event[0]),
        settling_time=settling_time(log, scenario.sim.eps_tol),
        exp_rate=rate,
        bounds=bound_report(log, targets, scenario.sim.a),
        min_pair_dist=float(np.min(log.min_dist())),
        theta_sum_drift=drift,
        eps_inf_final=float(log.samples[-1].eps_inf_norm),
        V_final=float(log.samples[-1].V),
        stall_flagged=log.stall_flagged(),
        warnings=tuple(scenario.feasibility_warnings()),
    )


def summary_to_dict(s: RunSummary) -> dict:
    b = s.bounds
    return {
        "scenario_name": s.scenario_name,
        "n": s.n,
        "a": s.a,
        "terminal_event": s.terminal_event,
        "terminal_time": s.terminal_time,
        "settling_time": s.settling_time,
        "exp_rate": s.exp_rate,
        "bounds": {
            "K": b.K,
            "lambda2_EtE": b.lambda2_EtE,
            "lambda1_DtD": b.lambda1_DtD,
            "kappa": b.kappa,
            "C_norm": b.C_norm,
            "rho_max_observed": b.rho_max_observed,
            "eta_fit": b.eta_fit if math.isfinite(b.eta_fit) else None,
            "beta_observed": b.beta_observed,
            "k_boundary": b.k_boundary,
        },
        "min_pair_dist": s.min_pair_dist,
        "theta_sum_drift": s.theta_sum_drift,
        "eps_inf_final": s.eps_inf_final,
        "V_final": s.V_final,
        "stall_flagged": s.stall_flagged,
        "warnings": list(s.warnings),
    }


# ---------------------------------------------------------------------------
# artifact writers


def _fmt(x: float) -> str:
    return format(x, ".17g")


def trajectory_csv(log: TrajectoryLog) -> str:
    """Trajectory table: 17-significant-digit decimal formatting throughout."""
    n = log.states[0].n
    cols = ["t"]
    for i in range(1, n + 1):
        cols += [f"z{i}x", f"z{i}y"]
    cols += [f"eps{i}" for i in range(1, n + 1)]
    cols += ["V", "rho", "theta_sum", "min_dist", "V_dot_analytic"]
    lines = [",".join(cols)]
    for state, s in zip(log.states, log.samples):
        row = [_fmt(s.time)]
        row += [_fmt(v) for v in state.positions.ravel()]
        row += [_fmt(v) for v in s.eps]
        row += [
            _fmt(s.V),
            _fmt(s.rho),
            _fmt(s.theta_sum),
            _fmt(s.min_pair_dist),
            _fmt(s.V_dot_analytic),
        ]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def write_outputs(
    log: TrajectoryLog,
    summary: RunSummary,
    out_dir: str | Path,
    scenario: Scenario | None = None,
) -> dict[str, Path]:
    """Write trajectory CSV, summary JSON, and the three SVG plots."""
    from .plots import plot_diagnostics, plot_errors, plot_trajectories

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths: dict[str, Path] = {}
    if scenario is not None:
        paths["scenario"] = out / "scenario.json"
        save_scenario(scenario, paths["scenario"])
    paths["trajectory"] = out / "trajectory.csv"
    paths["trajectory"].write_text(trajectory_csv(log))
    paths["summary"] = out / "summary.json"
    paths["summary"].write_text(canonical_json(summary_to_dict(summary)))
    paths["trajectory_plot"] = out / "trajectory.svg"
    paths["trajectory_plot"].write_text(plot_trajectories(log))
    paths["errors_plot"] = out / "errors.svg"
    paths["errors_plot"].write_text(plot_errors(log))
    paths["diagnostics_plot"] = out / "diagnostics.svg"
    paths["diagnostics_plot"].write_text(plot_diagnostics(log))
    return paths


# ---------------------------------------------------------------------------
# sweeps


def sweep_values(base: Scenario, param: str, values: list[float]) -> list[Scenario]:
    if param != "a":
        raise ScenarioError(f"sweep parameter must be 'a', got {param!r}")
    out = []
    for v in values:
        sim = replace(base.sim, a=float(v))
        out.append(replace(base, name=f"{base.name}-a{v:g}", sim=sim))
    return out


def run_sweep(
    base: Scenario, param: str, values: list[float], max_workers: int | None = None
) -> list[tuple[Scenario, TrajectoryLog, RunSummary]]:
    """Run one simulation per value concurrently; results follow input order."""
    scenarios = sweep_values(base, param, values)
    workers = max_workers or min(len(scenarios), 4)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        logs = list(pool.map(run_scenario, scenarios))
    return [(sc, log, summary) for sc, (log, summary) in zip(scenarios, logs)]
