"""Named self-checks behind the `verify` subcommand.

Each check re-derives one lemma, identity, or run-level invariant from
scratch and reports pass/fail with a one-line detail.  Randomized checks
draw from seeds derived from a single master seed, which the RINGFORM_SEED
environment variable (or an explicit argument) overrides, so a failing
fuzz draw can be replayed exactly.
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass, replace

import numpy as np

from .analysis import (
    decay_rhs,
    k_constant,
    kappa_constant,
    lemma1_oracle,
    lemma2_bound,
    lemma3_check,
    lyapunov,
    norm_equivalence_constant,
    proof_diagnostics,
)
from .controller import ring_control_velocities, sigma
from .dynamics import FormationState, TargetFormation, diagnostics, simulate
from .errors import DegenerateD, MixedSignViolated
from .scenario import (
    FIG3_SEED,
    Scenario,
    canonical_json,
    make_regular_scenario,
    run_scenario,
    scenario_from_dict,
    scenario_to_dict,
    star_positions,
    trajectory_csv,
)
from .topology import (
    ring_incidence,
    ring_lambda2,
    symmetric_eigenvalues,
    zero_eigenvalue_count,
)

ENV_SEED = "RINGFORM_SEED"
DEFAULT_SEED = 0


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def resolve_seed(seed: int | None = None) -> int:
    """Explicit argument wins, then RINGFORM_SEED, then the default."""
    if seed is not None:
        return int(seed)
    env = os.environ.get(ENV_SEED)
    if env is not None:
        return int(env)
    return DEFAULT_SEED


def _short_scenario(a: float = 1.0, t_max: float = 2.0) -> Scenario:
    sc = make_regular_scenario(5, 2, 36.0, perturb=0.3, seed=FIG3_SEED)
    return replace(sc, sim=replace(sc.sim, a=a, t_max=t_max))


# ---------------------------------------------------------------------------
# structural / spectral checks


def _check_incidence(rng: np.random.Generator) -> tuple[bool, str]:
    worst = 0.0
    for n in (3, 5, 10, 17):
        E = ring_incidence(n)
        z = rng.standard_normal((n, 2))
        e = np.roll(z, -1, axis=0) - z
        worst = max(worst, float(np.max(np.abs(E @ z + e))))
        worst = max(worst, float(np.max(np.abs(E.sum(axis=1)))))
        if np.trace(E) != n:
            return False, f"trace(E) != n at n={n}"
    return worst < 1e-12, f"max |E z + e| and row-sum residual {worst:.2e}"


def _check_eigensolver(rng: np.random.Generator) -> tuple[bool, str]:
    worst = 0.0
    for n in range(3, 51):
        E = ring_incidence(n)
        M = E.T @ E
        eigs = symmetric_eigenvalues(M)
        worst = max(worst, abs(float(eigs[1]) - ring_lambda2(n)))
        if float(np.trace(M)) != 2.0 * n:
            return False, f"trace(E'E) != 2n at n={n}"
        if zero_eigenvalue_count(M) != 1:
            return False, f"kernel dimension != 1 at n={n}"
    return worst <= 1e-10, f"max |lambda2 - closed form| = {worst:.2e} over n=3..50"


def _check_lemma1(rng: np.random.Generator) -> tuple[bool, str]:
    margin = np.inf
    probe_err = 0.0
    for n in range(3, 9):
        E = ring_incidence(n)
        oracle = lemma1_oracle(E.T @ E, sample_count=100_000, seed=int(rng.integers(2**31)))
        margin = min(margin, oracle.sampled_min - oracle.bound)
        probe_err = max(probe_err, float(np.max(np.abs(oracle.probe_values - oracle.bound))))
    ok = margin >= -1e-9 and probe_err <= 1e-3
    return ok, f"min sampled margin {margin:.3e}, max probe gap {probe_err:.2e}"


def _check_lemma3(rng: np.random.Generator) -> tuple[bool, str]:
    violations = 0
    for _ in range(100):
        x = rng.uniform(1e-12, 10.0, size=int(rng.integers(2, 30)))
        p = float(rng.uniform(1e-6, 1.0))
        lo, mid, hi = lemma3_check(x, p)
        if not (lo <= mid * (1 + 1e-12) and mid <= hi * (1 + 1e-12)):
            violations += 1
    lo, mid, hi = lemma3_check(rng.uniform(0.1, 5.0, 7), 1.0)
    eq = abs(lo - mid) < 1e-12 * abs(mid) and abs(mid - hi) < 1e-12 * abs(mid)
    return violations == 0 and eq, f"{violations} violations; equality holds at p=1"


def _check_norm_equivalence(rng: np.random.Generator) -> tuple[bool, str]:
    worst = -np.inf
    for _ in range(200):
        n = int(rng.integers(3, 20))
        a = float(rng.uniform(0.05, 1.0))
        C = norm_equivalence_constant(n, a)
        x = np.abs(rng.standard_normal(n)) + 1e-9
        ratio = float(x.sum() / np.sum(x ** (a + 1)) ** (1.0 / (a + 1)))
        worst = max(worst, ratio / C)
        tight = float(np.sum(np.ones(n)) / n ** (1.0 / (a + 1)))
        if abs(tight / C - 1.0) > 1e-12:
            return False, f"constant not attained at the ones vector (n={n}, a={a:.3f})"
    return worst <= 1.0 + 1e-12, f"max ||x||_1 / (C ||x||_(1+a)) = {worst:.12f}"


def _check_constants(rng: np.random.Generator) -> tuple[bool, str]:
    k_lo, k_hi = np.inf, -np.inf
    for n in range(3, 13):
        for a in (0.3, 0.6, 1.0):
            lam1 = float(rng.uniform(1e-3, 1.0))
            K = k_constant(n, a, lam1)
            k_lo, k_hi = min(k_lo, K), max(k_hi, K)
            kap = kappa_constant(n, a)
            ref = (a + 1.0) ** (2.0 * a / (a + 1.0)) * n ** ((1.0 - a) / (1.0 + a))
            if abs(kap - ref) > 1e-12 * ref:
                return False, f"kappa mismatch at n={n}, a={a}"
    ok = 0.0 < k_lo and k_hi < 2.0
    return ok, f"K in [{k_lo:.4f}, {k_hi:.4f}] over the sampled grid"


def _check_lemma2_domain(rng: np.random.Generator) -> tuple[bool, str]:
    vals = []
    for _ in range(50):
        k = float(rng.uniform(1e-3, 1.0 - 1e-3))
        c = float(rng.uniform(0.1, 10.0))
        eta = lemma2_bound(k, c)
        if not (math.isfinite(eta) and eta > c):
            return False, f"eta not finite/above x(0) at k={k:.4f}, c={c:.4f}"
        vals.append(eta)
    for bad in (0.0, 1.0, -0.5, 2.5):
        try:
            lemma2_bound(bad, 1.0)
            return False, f"k={bad} accepted outside (0, 1)"
        except ValueError:
            pass
    return True, f"finite and above x(0) on 50 draws, max {max(vals):.3e}"


# ---------------------------------------------------------------------------
# controller-level checks


def _check_sigma(rng: np.random.Generator) -> tuple[bool, str]:
    x = rng.standard_normal(2000) * 3.0
    for a in (0.3, 0.6, 1.0):
        s = sigma(x, a)
        if not np.allclose(s, np.sign(x) * np.abs(x) ** a, rtol=1e-12, atol=0.0):
            return False, f"sigma deviates from sign(x)|x|^a at a={a}"
        if not np.allclose(sigma(-x, a), -s, rtol=1e-12, atol=0.0):
            return False, f"sigma not odd at a={a}"
    return True, "matches sign(x)|x|^a and odd symmetry on 2000 draws"


def _check_stationarity(rng: np.random.Generator) -> tuple[bool, str]:
    for n, w in ((5, 2), (10, 1)):
        z = star_positions(n, w)
        cos_t = np.full(n, math.cos(math.radians(180.0 - 360.0 * w / n)))
        v = ring_control_velocities(z, cos_t, 1.0)
        if np.max(np.abs(v)) > 1e-12:
            return False, f"nonzero velocity {np.max(np.abs(v)):.2e} at the exact {n}/{w} star"
        zp = z + 0.05 * rng.standard_normal(z.shape)
        if np.max(np.abs(ring_control_velocities(zp, cos_t, 1.0))) < 1e-8:
            return False, f"velocity vanished off-equilibrium (n={n})"
    return True, "zero exactly on stars, nonzero off them"


def _check_frame_equivariance(rng: np.random.Generator) -> tuple[bool, str]:
    sc = _short_scenario(t_max=1.0)
    base, _ = run_scenario(sc)
    offs = rng.uniform(0.0, 2.0 * np.pi, sc.n)
    framed = simulate(
        FormationState(sc.initial_positions(), 0.0), sc.targets(), sc.sim, offs
    )
    worst = max(
        float(np.max(np.abs(sa.positions - sb.positions)))
        for sa, sb in zip(base.states, framed.states)
    )
    return worst <= 1e-10, f"max per-component drift {worst:.2e} with random frames"


def _check_rigid_motion(rng: np.random.Generator) -> tuple[bool, str]:
    sc = _short_scenario(t_max=0.5)
    z0 = sc.initial_positions()
    base = simulate(FormationState(z0, 0.0), sc.targets(), sc.sim)
    shift = rng.standard_normal(2)
    ang = float(rng.uniform(0.0, 2.0 * np.pi))
    c, s = math.cos(ang), math.sin(ang)
    R = np.array([[c, -s], [s, c]])
    moved = simulate(
        FormationState(z0 @ R.T + shift, 0.0), sc.targets(), sc.sim
    )
    worst = max(
        float(np.max(np.abs(sa.positions @ R.T + shift - sb.positions)))
        for sa, sb in zip(base.states, moved.states)
    )
    return worst <= 1e-9, f"max drift under rotation+translation {worst:.2e}"


# ---------------------------------------------------------------------------
# trajectory-level checks


def _check_lyapunov_descent(rng: np.random.Generator) -> tuple[bool, str]:
    log, _ = run_scenario(_short_scenario())
    V = log.V()
    tol = 10.0 * (1e-3) ** 2 * float(np.max(np.abs(log.vdot())))
    rises = float(np.max(np.diff(V))) if len(V) > 1 else 0.0
    return rises <= tol, f"max single-step V increase {rises:.2e} (tol {tol:.2e})"


def _check_vdot_identity(rng: np.random.Generator) -> tuple[bool, str]:
    log, _ = run_scenario(_short_scenario())
    t, V, vd = log.times(), log.V(), log.vdot()
    fd = np.diff(V) / np.diff(t)
    mid = 0.5 * (vd[1:] + vd[:-1])
    med = float(np.median(np.abs(fd - mid)))
    tol = 5.0 * 1e-3 * float(np.max(np.abs(vd)))
    return med < tol, f"median |fd - analytic| = {med:.2e} (tol {tol:.2e})"


def _check_decay_bound(rng: np.random.Generator) -> tuple[bool, str]:
    targets = TargetFormation(np.full(5, math.radians(36.0)))
    checked = skipped = passed = 0
    for _ in range(300):
        z = star_positions(5, 2) + rng.uniform(-0.35, 0.35, (5, 2))
        state = FormationState(z, 0.0)
        d = diagnostics(state, targets, 1.0)
        if d.eps_inf_norm < 1e-12:
            skipped += 1
            continue
        try:
            rhs = decay_rhs(state, targets, 1.0)
        except (DegenerateD, MixedSignViolated):
            skipped += 1
            continue
        checked += 1
        if d.V_dot_analytic <= rhs + 1e-9:
            passed += 1
    ok = checked >= 100 and passed >= 0.95 * checked
    return ok, f"{passed}/{checked} sampled states within bound, {skipped} excluded"


def _check_angle_sum(rng: np.random.Generator) -> tuple[bool, str]:
    log, _ = run_scenario(_short_scenario())
    ts = log.theta_sum()
    drift = float(np.max(np.abs(ts - ts[0])))
    return drift < 1e-6, f"max |sum theta(t) - sum theta(0)| = {drift:.2e}"


def _check_factorization(rng: np.random.Generator) -> tuple[bool, str]:
    targets = TargetFormation(np.full(5, math.radians(36.0)))
    worst = 0.0
    sum_delta = 0.0
    for _ in range(100):
        z = star_positions(5, 2) + rng.uniform(-0.25, 0.25, (5, 2))
        state = FormationState(z, 0.0)
        pd = proof_diagnostics(state, targets)
        d = diagnostics(state, targets, 1.0)
        worst = max(worst, float(np.max(np.abs(pd.w * pd.delta - d.eps))))
        sum_delta = max(sum_delta, abs(float(np.sum(pd.delta))))
    ok = worst <= 1e-10 and sum_delta <= 1e-9
    return ok, f"max |w delta - eps| = {worst:.2e}, max |sum delta| = {sum_delta:.2e}"


def _check_rho_bounded(rng: np.random.Generator) -> tuple[bool, str]:
    log, _ = run_scenario(_short_scenario(t_max=4.0))
    rho = log.rho()
    ratio = float(np.max(rho) / rho[0])
    return ratio < 2.0, f"max rho / rho(0) = {ratio:.4f} over the run"


def _check_finite_time(rng: np.random.Generator) -> tuple[bool, str]:
    log, summary = run_scenario(_short_scenario(a=0.3, t_max=1.5))
    if summary.settling_time is None:
        return False, "a=0.3 run never settled below eps_tol"
    tail = log.eps_inf()[log.times() >= 2.0 * summary.settling_time]
    resid = float(np.max(tail)) if len(tail) else float(log.samples[-1].eps_inf_norm)
    return resid <= 1e-12, f"settled at t={summary.settling_time:.3f}, tail residual {resid:.1e}"


def _check_roundtrip(rng: np.random.Generator) -> tuple[bool, str]:
    sc = _short_scenario()
    d1 = scenario_to_dict(sc)
    j1 = canonical_json(d1)
    j2 = canonical_json(scenario_to_dict(scenario_from_dict(d1)))
    return j1 == j2, f"canonical form stable over {len(j1)} bytes"


def _check_determinism(rng: np.random.Generator) -> tuple[bool, str]:
    sc = _short_scenario(t_max=1.0)
    a = trajectory_csv(run_scenario(sc)[0])
    b = trajectory_csv(run_scenario(sc)[0])
    return a == b, f"two runs agree byte-for-byte over {len(a)} CSV bytes"


def _check_lyapunov_values(rng: np.random.Generator) -> tuple[bool, str]:
    # frozen spot values: V = (1/(a+1)) sum |eps|^(a+1)
    v1 = lyapunov(np.array([0.5, 0.0, -0.5]), 1.0)
    v2 = lyapunov(np.array([0.3, -0.2, 0.1, 0.4]), 0.5)
    ref2 = (0.3**1.5 + 0.2**1.5 + 0.1**1.5 + 0.4**1.5) / 1.5
    ok = abs(v1 - 0.25) < 1e-15 and abs(v2 - ref2) < 1e-15
    return ok, f"V spot values {v1:.6f}, {v2:.12f}"


CHECKS: list[tuple[str, object]] = [
    ("incidence-structure", _check_incidence),
    ("eigensolver-closed-form", _check_eigensolver),
    ("lemma1-mixed-sign-bound", _check_lemma1),
    ("lemma3-power-sums", _check_lemma3),
    ("norm-equivalence-constant", _check_norm_equivalence),
    ("decay-constants-range", _check_constants),
    ("lemma2-eta-domain", _check_lemma2_domain),
    ("sigma-odd-power", _check_sigma),
    ("stationarity-at-stars", _check_stationarity),
    ("frame-equivariance", _check_frame_equivariance),
    ("rigid-motion-invariance", _check_rigid_motion),
    ("lyapunov-spot-values", _check_lyapunov_values),
    ("lyapunov-descent", _check_lyapunov_descent),
    ("vdot-identity", _check_vdot_identity),
    ("decay-bound-sampled", _check_decay_bound),
    ("angle-sum-conservation", _check_angle_sum),
    ("error-factorization", _check_factorization),
    ("perimeter-bounded", _check_rho_bounded),
    ("finite-time-settling", _check_finite_time),
    ("scenario-roundtrip", _check_roundtrip),
    ("run-determinism", _check_determinism),
]


def run_verification(seed: int | None = None) -> list[CheckResult]:
    """Run every check with per-check generators derived from one master seed."""
    master = resolve_seed(seed)
    seeds = np.random.SeedSequence(master).spawn(len(CHECKS))
    results = []
    for (name, fn), ss in zip(CHECKS, seeds):
        t0 = time.perf_counter()
        try:
            passed, detail = fn(np.random.default_rng(ss))
        except Exception as exc:  # a crashed check is a failed check
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(passed), detail, time.perf_counter() - t0))
    return results


def format_table(results: list[CheckResult]) -> str:
    width = max(len(r.name) for r in results)
    lines = []
    for r in results:
        mark = "PASS" if r.passed else "FAIL"
        lines.append(f"{r.name:<{width}}  {mark}  [{r.seconds:6.2f}s]  {r.detail}")
    n_pass = sum(r.passed for r in results)
    lines.append(f"{n_pass}/{len(results)} checks passed")
    return "\n".join(lines)
