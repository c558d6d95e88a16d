"""Acceptance gate: twelve run-level criteria, one pass/fail line each.

Every criterion prints `[criterion NN] name: PASS/FAIL (detail)` before
asserting, so the table survives in captured output either way.  The heavy
reference runs come from session-scoped fixtures in conftest.
"""

import time
from dataclasses import replace

import numpy as np

from ringform.analysis import decay_rhs, k_constant, displacement_check, lemma1_oracle, lemma3_check
from ringform.errors import DegenerateD, MixedSignViolated
from ringform.geometry import ring_angles, ring_edges
from ringform.scenario import reproduce_scenarios, run_scenario, trajectory_csv
from ringform.topology import ring_incidence, ring_lambda2, symmetric_eigenvalues


def _criterion(num: int, name: str, ok: bool, detail: str) -> None:
    mark = "PASS" if ok else "FAIL"
    print(f"[criterion {num:2d}] {name}: {mark} ({detail})")
    assert ok, f"criterion {num} ({name}): {detail}"


def _unstalled(log):
    """Sample mask excluding instants flagged ThetaPiStall."""
    stall_times = {t for t, kind in log.events if kind == "ThetaPiStall"}
    return np.array([t not in stall_times for t in log.times()])


def test_c01_lyapunov_descent(fig3_a1_art):
    log = fig3_a1_art.log
    V = log.V()
    tol = 10.0 * 1e-3**2 * float(np.max(np.abs(log.vdot())))
    max_rise = float(np.max(np.diff(V)))
    ok = max_rise <= tol and fig3_a1_art.wall_time < 10.0
    _criterion(
        1,
        "Lyapunov descent",
        ok,
        f"max rise {max_rise:.2e} vs tol {tol:.2e}, wall {fig3_a1_art.wall_time:.1f}s",
    )


def test_c02_vdot_identity_and_order(fig3_a1, dt_refinement_pair):
    def median_gap(log):
        t, V, vd = log.times(), log.V(), log.vdot()
        fd = np.diff(V) / np.diff(t)
        return float(np.median(np.abs(fd - 0.5 * (vd[1:] + vd[:-1]))))

    med = median_gap(fig3_a1)
    tol = 5.0 * 1e-3 * float(np.max(np.abs(fig3_a1.vdot())))
    coarse, fine = dt_refinement_pair
    ratio = median_gap(coarse) / median_gap(fine)
    ok = med < tol and 2.5 <= ratio <= 6.0
    _criterion(
        2,
        "V-dot identity",
        ok,
        f"median gap {med:.2e} vs tol {tol:.2e}; dt-halving ratio {ratio:.2f}",
    )


def test_c03_exponential_rate_stable(fig3_seed_arts):
    rates = np.array([art.summary.exp_rate for art in fig3_seed_arts], dtype=float)
    spread = float(np.std(rates) / np.abs(np.mean(rates)))
    ok = bool(np.all(rates < 0.0)) and spread < 0.25
    _criterion(
        3,
        "exponential rate stability",
        ok,
        f"rates {np.round(rates, 4).tolist()}, std/|mean| = {spread:.3f}",
    )


def test_c04_finite_time_settling(fig3_runs, fig4_runs):
    details = []
    ok = True
    for art in (fig3_runs[1], fig4_runs[1]):
        log, summary = art.log, art.summary
        a = summary.a
        settle = summary.settling_time
        if settle is None:
            ok = False
            details.append(f"a={a}: never settled")
            continue
        t = log.times()
        tail = log.eps_inf()[t >= 2.0 * settle]
        resid = float(np.max(tail)) if len(tail) else np.inf
        # affine witness: U(t) <= U(0) - c t on the approach, c > 0
        U = log.V() ** ((1.0 - a) / (1.0 + a))
        window = (t > 0.0) & (t <= settle)
        c = float(np.min((U[0] - U[window]) / t[window]))
        dominated = bool(np.all(U[window] <= U[0] - c * t[window] + 1e-12))
        ok = ok and resid <= 1e-12 and c > 0.0 and dominated and int(window.sum()) >= 3
        details.append(f"a={a}: settle {settle:.2f}, tail {resid:.1e}, slope {c:.3f}")
    _criterion(4, "finite-time settling", ok, "; ".join(details))


def test_c05_angle_sum_conservation(acceptance_runs):
    worst = 0.0
    for art in acceptance_runs:
        if art.summary.terminal_event == "Collision":
            continue
        mask = _unstalled(art.log)
        ts = art.log.theta_sum()[mask]
        worst = max(worst, float(np.max(np.abs(ts - ts[0]))))
    ok = worst < 1e-6
    _criterion(5, "angle-sum conservation", ok, f"max drift {worst:.2e} rad")


def test_c06_frame_equivariance(fig3_a1_art):
    base = fig3_a1_art.scenario
    framed_sc = replace(base, name="fig3-framed", frames={"kind": "random", "seed": 1234})
    framed, _ = run_scenario(framed_sc)
    ref = fig3_a1_art.log
    ok = len(framed.states) == len(ref.states)
    worst = max(
        float(np.max(np.abs(sa.positions - sb.positions)))
        for sa, sb in zip(ref.states, framed.states)
    )
    ok = ok and worst <= 1e-10
    _criterion(
        6,
        "frame equivariance",
        ok,
        f"max per-component gap {worst:.2e} over {len(ref.states)} samples",
    )


def test_c07_lemma1_suite():
    t0 = time.perf_counter()
    margin = np.inf
    probe_gap = 0.0
    bounds = {}
    for n in range(3, 9):
        E = ring_incidence(n)
        oracle = lemma1_oracle(E.T @ E, sample_count=100_000, seed=n)
        bounds[n] = oracle.bound
        margin = min(margin, oracle.sampled_min - oracle.bound)
        probe_gap = max(probe_gap, float(np.max(np.abs(oracle.probe_values - oracle.bound))))
    wall = time.perf_counter() - t0
    ok = (
        margin >= -1e-9
        and probe_gap <= 1e-3
        and abs(bounds[3] - 1.0) < 1e-12
        and abs(bounds[4] - 0.5) < 1e-12
        and wall < 5.0
    )
    _criterion(
        7,
        "mixed-sign quadratic bound",
        ok,
        f"margin {margin:.2e}, probe gap {probe_gap:.1e}, "
        f"bounds(3)={bounds[3]:.3f} bounds(4)={bounds[4]:.3f}, wall {wall:.2f}s",
    )


def test_c08_constants(acceptance_runs):
    worst_eig = 0.0
    for n in range(3, 51):
        M = ring_incidence(n).T @ ring_incidence(n)
        worst_eig = max(worst_eig, abs(float(symmetric_eigenvalues(M)[1]) - ring_lambda2(n)))
        if float(np.trace(M)) != 2.0 * n:
            _criterion(8, "decay constants", False, f"trace(E'E) != 2n at n={n}")
    k_lo, k_hi = np.inf, -np.inf
    for art in acceptance_runs:
        a, n = art.summary.a, art.summary.n
        for state in art.log.states:
            sin_t = np.sin(ring_angles(ring_edges(state.positions)[2]))
            K = k_constant(n, a, float(np.min(sin_t**2)))
            k_lo, k_hi = min(k_lo, K), max(k_hi, K)
    ok = worst_eig <= 1e-10 and 0.0 < k_lo and k_hi < 2.0
    _criterion(
        8,
        "decay constants",
        ok,
        f"eig gap {worst_eig:.1e}; K in [{k_lo:.2e}, {k_hi:.4f}] over all samples",
    )


def test_c09_decay_bound(acceptance_runs):
    checked = passed = excluded_eq = excluded_precond = 0
    for art in acceptance_runs:
        targets = art.scenario.targets()
        a = art.summary.a
        for state, sample in zip(art.log.states, art.log.samples):
            if sample.eps_inf_norm < 1e-12:
                excluded_eq += 1
                continue
            try:
                rhs = decay_rhs(state, targets, a)
            except (DegenerateD, MixedSignViolated):
                excluded_precond += 1
                continue
            checked += 1
            if sample.V_dot_analytic <= rhs + 1e-9:
                passed += 1
    rate = passed / checked if checked else 0.0
    ok = checked > 0 and rate >= 0.95
    _criterion(
        9,
        "decay bound",
        ok,
        f"{passed}/{checked} within bound ({100*rate:.1f}%); "
        f"excluded {excluded_eq} at equilibrium, {excluded_precond} precondition",
    )


def test_c10_displacement_scaling(pentagram_family):
    ratios = [displacement_check(log, 1.0)[2] for log in pentagram_family]
    spread = max(ratios) / min(ratios)
    md = pentagram_family[-1].min_dist()
    dist_ok = float(np.min(md)) > 0.5 * float(md[0])
    ok = spread < 3.0 and dist_ok
    _criterion(
        10,
        "displacement scaling",
        ok,
        f"ratio spread {spread:.2f} over perturb scales 1, 1/2, 1/4; "
        f"min dist {np.min(md):.3f} vs half-initial {0.5*md[0]:.3f}",
    )


def test_c11_lemma3_fuzz():
    rng = np.random.default_rng(2024)
    violations = 0
    for _ in range(100_000):
        x = rng.uniform(1e-9, 10.0, size=int(rng.integers(2, 12)))
        p = float(rng.uniform(1e-6, 1.0 - 1e-9))
        lo, mid, hi = lemma3_check(x, p)
        if lo > mid * (1.0 + 1e-12) or mid > hi * (1.0 + 1e-12):
            violations += 1
    lo, mid, hi = lemma3_check(rng.uniform(0.1, 5.0, 9), 1.0)
    eq = lo == mid == hi
    ok = violations == 0 and eq
    _criterion(
        11,
        "power-sum inequality fuzz",
        ok,
        f"{violations} violations in 1e5 draws; exact equality at p=1: {eq}",
    )


def test_c12_reproduce_determinism(fig3_runs):
    fresh = [run_scenario(s)[0] for s in reproduce_scenarios("fig3")]
    same = [
        trajectory_csv(art.log) == trajectory_csv(log)
        for art, log in zip(fig3_runs, fresh)
    ]
    sizes = [len(trajectory_csv(log)) for log in fresh]
    ok = all(same) and len(same) == 2
    _criterion(
        12,
        "reproduce determinism",
        ok,
        f"byte-identical CSVs: {same}, sizes {sizes}",
    )
