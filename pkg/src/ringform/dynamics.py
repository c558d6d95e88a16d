"""Closed-loop integration, trajectory logging, and event detection.

The integrator is explicit fixed-step RK4 on the sampling grid (an Euler mode
is retained for order cross-checks).  For a < 1 the right-hand side is not
Lipschitz at eps = 0; a fixed step of any size chatters around the
equilibrium at a residual floor of order (c dt)^(1/(1-a)), which is many
orders above the post-settling residual the finite-time claims are checked
against.  Once a trajectory enters the terminal phase the interior of each
outer step is therefore integrated with deterministic state-scaled RK4
sub-steps; outer sample times, logging, and the a = 1 path are untouched.
Velocities clamp to exactly zero once ||eps||_inf < 1e-13.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CoincidentAgents, CollisionError, InvalidOrder
from .geometry import (
    COINCIDENCE_TOL,
    min_pairwise_distance,
    closest_pair,
    ring_angles,
    ring_edges,
)
from .controller import _check_exponent

# velocities are clamped to exactly zero below this residual
CLAMP_EPS_INF = 1e-13
# a sample is flagged ThetaPiStall when any theta_i is this close to {0, pi, 2pi}
STALL_ANGLE_TOL = 1e-6
# terminal sub-stepping engages when ||eps||_inf^(1-a) < TERMINAL_FACTOR * dt
TERMINAL_FACTOR = 4.0
SUBSTEP_FRACTION = 0.25


@dataclass(frozen=True)
class TargetFormation:
    """Per-agent target angles theta_i* in radians, with cached cosines."""

    angles: np.ndarray
    cosines: np.ndarray = field(init=False)

    def __post_init__(self):
        ang = np.remainder(np.asarray(self.angles, dtype=float), 2.0 * np.pi)
        if len(ang) < 3:
            raise InvalidOrder(f"ring needs n >= 3 targets, got {len(ang)}")
        # Assumption 1: theta* not in {0, pi}
        if np.any(np.abs(np.sin(ang)) < 1e-12):
            bad = int(np.argmin(np.abs(np.sin(ang))))
            raise ValueError(
                f"target angle {ang[bad]:.6f} rad at agent {bad} violates "
                "the theta* not in {0, pi} assumption"
            )
        object.__setattr__(self, "angles", ang)
        object.__setattr__(self, "cosines", np.cos(ang))

    @property
    def n(self) -> int:
        return len(self.angles)


@dataclass(frozen=True)
class SimParams:
    """Integration controls; dt is the fixed outer step."""

    a: float = 1.0
    dt: float = 1e-3
    t_max: float = 100.0
    eps_tol: float = 1e-9
    collision_dist: float | None = None  # None: 1e-6 x initial mean edge length
    sample_stride: int = 10
    dwell_samples: int = 100
    method: str = "rk4"  # "rk4" | "euler"

    def __post_init__(self):
        _check_exponent(self.a)
        if self.dt <= 0 or self.t_max <= 0 or self.eps_tol <= 0:
            raise ValueError("dt, t_max and eps_tol must be positive")
        if self.sample_stride < 1 or self.dwell_samples < 1:
            raise ValueError("sample_stride and dwell_samples must be >= 1")
        if self.method not in ("rk4", "euler"):
            raise ValueError(f"unknown integration method {self.method!r}")
        if self.collision_dist is not None and self.collision_dist < COINCIDENCE_TOL:
            raise ValueError("collision_dist below the coincidence tolerance")


@dataclass(frozen=True)
class FormationState:
    """World positions of the n agents at a time instant."""

    positions: np.ndarray  # (n, 2)
    time: float = 0.0

    def __post_init__(self):
        z = np.asarray(self.positions, dtype=float)
        if z.ndim != 2 or z.shape[1] != 2:
            raise ValueError(f"positions must be (n, 2), got {z.shape}")
        if len(z) < 3:
            raise InvalidOrder(f"ring needs n >= 3 agents, got {len(z)}")
        if not np.all(np.isfinite(z)):
            raise ValueError("positions contain NaN or infinity")
        d_min = min_pairwise_distance(z)
        if d_min <= COINCIDENCE_TOL:
            pair = closest_pair(z)
            raise CoincidentAgents(
                f"agents {pair[0]} and {pair[1]} coincide (distance {d_min:.3e})"
            )
        object.__setattr__(self, "positions", z)

    @property
    def n(self) -> int:
        return len(self.positions)


@dataclass(frozen=True)
class DiagnosticsSample:
    time: float
    eps: np.ndarray
    V: float
    rho: float
    theta_sum: float
    min_pair_dist: float
    eps_inf_norm: float
    V_dot_analytic: float


@dataclass
class TrajectoryLog:
    """Time-ordered samples, matching states, and (time, kind) events."""

    samples: list[DiagnosticsSample] = field(default_factory=list)
    states: list[FormationState] = field(default_factory=list)
    events: list[tuple[float, str]] = field(default_factory=list)

    TERMINAL_KINDS = ("Converged", "Collision", "HorizonReached")

    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.samples])

    def V(self) -> np.ndarray:
        return np.array([s.V for s in self.samples])

    def eps_matrix(self) -> np.ndarray:
        return np.array([s.eps for s in self.samples])

    def eps_inf(self) -> np.ndarray:
        return np.array([s.eps_inf_norm for s in self.samples])

    def rho(self) -> np.ndarray:
        return np.array([s.rho for s in self.samples])

    def theta_sum(self) -> np.ndarray:
        return np.array([s.theta_sum for s in self.samples])

    def min_dist(self) -> np.ndarray:
        return np.array([s.min_pair_dist for s in self.samples])

    def vdot(self) -> np.ndarray:
        return np.array([s.V_dot_analytic for s in self.samples])

    def terminal_event(self) -> tuple[float, str] | None:
        terminal = [e for e in self.events if e[1] in self.TERMINAL_KINDS]
        return terminal[-1] if terminal else None

    def stall_flagged(self) -> bool:
        return any(kind == "ThetaPiStall" for _, kind in self.events)

    def validate(self) -> None:
        times = self.times()
        if np.any(np.diff(times) <= 0):
            raise ValueError("sample times are not strictly increasing")
        n_terminal = sum(1 for _, k in self.events if k in self.TERMINAL_KINDS)
        if n_terminal > 1:
            raise ValueError(f"{n_terminal} terminal events recorded")


# ---------------------------------------------------------------------------
# right-hand side and diagnostics


def _make_rhs(
    n: int,
    cos_targets: np.ndarray,
    a: float,
    frame_offsets: np.ndarray | None = None,
):
    """Closure evaluating the closed-loop velocity field.

    Returns velocities (n, 2) and the eps vector at the evaluation point.
    With frame_offsets every agent measures and acts in its own static frame
    (rotate in, compute, rotate out); algebraically a no-op, so the world
    trajectory agrees with the frame-free field to roundoff.
    """
    nxt = (np.arange(n) + 1) % n
    prv = (np.arange(n) - 1) % n
    power = a != 1.0
    if frame_offsets is not None:
        co = np.cos(np.asarray(frame_offsets, dtype=float))
        so = np.sin(np.asarray(frame_offsets, dtype=float))
        if len(co) != n:
            raise ValueError(f"{len(co)} frame offsets for n={n} agents")

    def rhs(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        e = z[nxt] - z
        lengths = np.sqrt(np.einsum("ij,ij->i", e, e))
        g = e / lengths[:, None]
        gp = g[prv]
        if frame_offsets is None:
            eps = -np.einsum("ij,ij->i", g, gp) - cos_targets
            sig = np.sign(eps) * np.abs(eps) ** a if power else eps
            return sig[:, None] * (g - gp), eps
        # measured pair in agent i's frame: u = R(-o) g_i, m = R(-o)(-g_{i-1})
        ux = co * g[:, 0] + so * g[:, 1]
        uy = -so * g[:, 0] + co * g[:, 1]
        mx = -(co * gp[:, 0] + so * gp[:, 1])
        my = -(-so * gp[:, 0] + co * gp[:, 1])
        eps = ux * mx + uy * my - cos_targets
        sig = np.sign(eps) * np.abs(eps) ** a if power else eps
        vlx = sig * (ux + mx)
        vly = sig * (uy + my)
        v = np.column_stack([co * vlx - so * vly, so * vlx + co * vly])
        return v, eps

    return rhs


def lyapunov_value(eps: np.ndarray, a: float) -> float:
    """V = 1/(a+1) sum |eps_i|^(a+1)."""
    return float(np.sum(np.abs(eps) ** (a + 1.0)) / (a + 1.0))


def diagnostics(state: FormationState, targets: TargetFormation, a: float) -> DiagnosticsSample:
    """Per-state diagnostics: eps, V, rho, angle sum, min distance, analytic V-dot.

    The analytic derivative is the exact chain form
    V-dot = -sum_i (1/||e_i||) ((g_i^perp)^T (sigma_{i+1} g_{i+1} + sigma_i g_{i-1}))^2,
    nonpositive by construction.
    """
    _check_exponent(a)
    z = state.positions
    n = len(z)
    e, lengths, g = ring_edges(z)
    gp = np.roll(g, 1, axis=0)
    gn = np.roll(g, -1, axis=0)
    eps = -np.einsum("ij,ij->i", g, gp) - targets.cosines
    sig = eps if a == 1.0 else np.sign(eps) * np.abs(eps) ** a
    sig_next = np.roll(sig, -1)
    # q_i = perp(g_i) . (sigma_{i+1} g_{i+1} + sigma_i g_{i-1})
    wx = sig_next * gn[:, 0] + sig * gp[:, 0]
    wy = sig_next * gn[:, 1] + sig * gp[:, 1]
    q = -g[:, 1] * wx + g[:, 0] * wy
    v_dot = float(-np.sum(q * q / lengths))
    theta = ring_angles(g)
    return DiagnosticsSample(
        time=state.time,
        eps=eps,
        V=lyapunov_value(eps, a),
        rho=float(lengths.sum()),
        theta_sum=float(theta.sum()),
        min_pair_dist=min_pairwise_distance(z),
        eps_inf_norm=float(np.max(np.abs(eps))),
        V_dot_analytic=v_dot,
    )


# ---------------------------------------------------------------------------
# stepping


def _rk4(rhs, z: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    k1, eps = rhs(z)
    k2, _ = rhs(z + 0.5 * h * k1)
    k3, _ = rhs(z + 0.5 * h * k2)
    k4, _ = rhs(z + h * k3)
    return z + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4), eps

def _euler(rhs, z: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    k1, eps = rhs(z)
    return z + h * k1, eps


def _advance_terminal(rhs, z: np.ndarray, dt: float, a: float, stepper) -> np.ndarray:
    """Advance one outer step with state-scaled sub-steps (a < 1 terminal phase).

    The sub-step h = safety * min(remaining, SUBSTEP_FRACTION * m^(1-a)) with
    m = ||eps||_inf is a pure function of the state, so the path is
    deterministic.  A sub-step that increases V is rejected and the safety
    factor halved; it recovers geometrically after accepted steps.
    """
    remaining = dt
    safety = 1.0
    _, eps = rhs(z)
    while remaining > 0.0:
        m = float(np.max(np.abs(eps)))
        if m < CLAMP_EPS_INF:
            break  # clamped: the state is frozen for the rest of the step
        h = min(remaining, safety * SUBSTEP_FRACTION * m ** (1.0 - a))
        z_try, _ = stepper(rhs, z, h)
        _, eps_try = rhs(z_try)
        if (
            lyapunov_value(eps_try, a) > lyapunov_value(eps, a)
            and safety > 1e-9
        ):
            safety *= 0.5
            continue
        z, eps = z_try, eps_try
        remaining -= h
        safety = min(1.0, 2.0 * safety)
    return z


def step(state: FormationState, targets: TargetFormation, params: SimParams) -> FormationState:
    """One synchronous fixed step of all agents; time advances by dt.

    Raises
    ------
    CollisionError
        If any pairwise distance falls below collision_dist after the step.
    """
    z = state.positions
    collision_dist = _resolve_collision_dist(z, params)
    i, j, d0 = closest_pair(z)
    if d0 < collision_dist:
        raise CollisionError(state.time, (i, j), d0)
    rhs = _make_rhs(state.n, targets.cosines, params.a)
    stepper = _rk4 if params.method == "rk4" else _euler
    _, eps = rhs(z)
    m = float(np.max(np.abs(eps)))
    if m < CLAMP_EPS_INF:
        z_new = z.copy()  # velocities clamped to exactly zero
    elif params.a < 1.0 and m ** (1.0 - params.a) < TERMINAL_FACTOR * params.dt:
        z_new = _advance_terminal(rhs, z, params.dt, params.a, stepper)
    else:
        z_new, _ = stepper(rhs, z, params.dt)
    i, j, d = closest_pair(z_new)
    if d < collision_dist:
        raise CollisionError(state.time + params.dt, (i, j), d)
    return FormationState(z_new, state.time + params.dt)


def _resolve_collision_dist(z0: np.ndarray, params: SimParams) -> float:
    if params.collision_dist is not None:
        return params.collision_dist
    _, lengths, _ = ring_edges(z0)
    return 1e-6 * float(lengths.mean())


def _is_stalled(theta: np.ndarray) -> bool:
    # near 0, pi, or 2pi the angle chart is ambiguous and D is singular
    gap = np.minimum(np.minimum(theta, np.abs(theta - np.pi)), 2.0 * np.pi - theta)
    return bool(np.min(gap) < STALL_ANGLE_TOL)


def simulate(
    initial: FormationState | np.ndarray,
    targets: TargetFormation,
    params: SimParams,
    frame_offsets: np.ndarray | None = None,
) -> TrajectoryLog:
    """Integrate until convergence dwell, collision, or the horizon.

    Diagnostics are recorded every sample_stride steps (plus the initial and
    final instants).  Convergence requires ||eps||_inf < eps_tol for
    dwell_samples consecutive samples; a collision terminates the run as a
    logged event rather than an exception.  ThetaPiStall flags mark samples
    whose angles sit on the chart boundary {0, pi}.  frame_offsets routes
    every velocity evaluation through static per-agent local frames.
    """
    if not isinstance(initial, FormationState):
        initial = FormationState(np.asarray(initial, dtype=float), 0.0)
    z = initial.positions.copy()
    n = len(z)
    t0 = initial.time
    dt, stride = params.dt, params.sample_stride
    a = params.a
    collision_dist = _resolve_collision_dist(z, params)
    rhs = _make_rhs(n, targets.cosines, a, frame_offsets)
    stepper = _rk4 if params.method == "rk4" else _euler

    log = TrajectoryLog()
    dwell = 0

    def record(t: float, z_now: np.ndarray) -> DiagnosticsSample:
        state = FormationState(z_now.copy(), t)
        diag = diagnostics(state, targets, a)
        log.samples.append(diag)
        log.states.append(state)
        theta = ring_angles(ring_edges(z_now)[2])
        if _is_stalled(theta):
            log.events.append((t, "ThetaPiStall"))
        return diag

    diag0 = record(t0, z)
    if diag0.min_pair_dist < collision_dist:
        log.events.append((t0, "Collision"))
        return log
    if diag0.eps_inf_norm < CLAMP_EPS_INF:
        # started at an exact equilibrium: velocities are identically zero
        log.events.append((t0, "Converged"))
        return log
    if diag0.eps_inf_norm < params.eps_tol:
        dwell = 1

    n_steps = int(round(params.t_max / dt))
    margin = diag0.min_pair_dist - collision_dist  # certified safety margin
    m_prev = diag0.eps_inf_norm
    frozen = False

    for k in range(1, n_steps + 1):
        t = t0 + k * dt
        if not frozen:
            if m_prev < CLAMP_EPS_INF:
                frozen = True
            else:
                if a < 1.0 and m_prev ** (1.0 - a) < TERMINAL_FACTOR * dt:
                    z_new = _advance_terminal(rhs, z, dt, a, stepper)
                    _, eps_now = rhs(z_new)
                    m_prev = float(np.max(np.abs(eps_now)))
                else:
                    z_new, eps_at_z = stepper(rhs, z, dt)
                    m_prev = float(np.max(np.abs(eps_at_z)))
                dz = z_new - z
                disp = np.sqrt(np.max(np.einsum("ij,ij->i", dz, dz)))
                margin -= 2.0 * disp  # min pairwise distance shrinks at most this much
                z = z_new
                if margin <= 0.0:
                    d_now = min_pairwise_distance(z)
                    if d_now < collision_dist:
                        record(t, z)
                        log.events.append((t, "Collision"))
                        return log
                    margin = d_now - collision_dist

        if k % stride == 0 or k == n_steps:
            diag = record(t, z)
            if diag.eps_inf_norm < params.eps_tol:
                dwell += 1
                if dwell >= params.dwell_samples:
                    log.events.append((t, "Converged"))
                    return log
            else:
                dwell = 0

    log.events.append((t0 + n_steps * dt, "HorizonReached"))
    return log


def settling_time(log: TrajectoryLog, tol: float) -> float | None:
    """First sample time with ||eps||_inf < tol that stays below for all later samples."""
    if not log.samples:
        return None
    eps_inf = log.eps_inf()
    above = np.nonzero(eps_inf >= tol)[0]
    if len(above) == 0:
        return log.samples[0].time
    last_above = above[-1]
    if last_above == len(eps_inf) - 1:
        return None
    return float(log.samples[last_above + 1].time)
