"""The bearing-only control law and its local-frame measurement model.

Each agent moves with velocity sgn(eps_i)|eps_i|^a (g_i - g_{i-1}), a in (0, 1].
The same velocity is computable entirely from the two bearings the agent
measures in its own (rotated) body frame; agent_control demonstrates that
pipeline and must agree with the world-frame evaluation to roundoff.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidExponent
from .geometry import bearing, normalize_angle, rotate


def _check_exponent(a: float) -> None:
    if not (0.0 < a <= 1.0):
        raise InvalidExponent(f"exponent a must lie in (0, 1], got {a}")


def sigma(eps, a: float):
    """Signed power sgn(eps)|eps|^a; odd and continuous in eps, sgn(0) = 0.

    Accepts scalars or arrays.  a = 1 reduces to the identity.
    """
    _check_exponent(a)
    if a == 1.0:
        return eps if np.ndim(eps) else float(eps)
    out = np.sign(eps) * np.abs(eps) ** a
    return out if np.ndim(eps) else float(out)


def control_velocity(
    g_next: np.ndarray, g_prev: np.ndarray, eps: float, a: float
) -> np.ndarray:
    """World-frame velocity sgn(eps)|eps|^a (g_next - g_prev).

    Points along the bisector of the subtended angle; vanishes when
    theta_i = pi (g_next = g_prev) even for nonzero eps.
    """
    return sigma(eps, a) * (np.asarray(g_next, float) - np.asarray(g_prev, float))


@dataclass(frozen=True)
class LocalFrame:
    """Static rotation of an agent's body frame relative to the world frame."""

    offset: float  # radians

    def __post_init__(self):
        object.__setattr__(self, "offset", normalize_angle(self.offset))


def _positions(state) -> np.ndarray:
    # accepts a FormationState or a bare (n, 2) array
    return np.asarray(getattr(state, "positions", state), dtype=float)


def _cosines(targets) -> np.ndarray:
    # accepts a TargetFormation or a bare cosine array
    return np.asarray(getattr(targets, "cosines", targets), dtype=float)


def local_measurements(state, frame: LocalFrame, i: int) -> tuple[np.ndarray, np.ndarray]:
    """Agent i's two bearing measurements in its own frame.

    Returns (R(-offset) g_i, R(-offset)(-g_{i-1})): the bearing toward the
    next neighbor and the bearing toward the previous one.
    """
    z = _positions(state)
    n = len(z)
    g_next = bearing(z[i], z[(i + 1) % n])
    g_prev = bearing(z[(i - 1) % n], z[i])
    return rotate(-frame.offset, g_next), rotate(-frame.offset, -g_prev)


def agent_control(state, frame: LocalFrame, i: int, targets, a: float) -> np.ndarray:
    """Control velocity of agent i computed purely from local measurements.

    eps and the velocity direction are built from the body-frame bearings,
    then the result is mapped back to world coordinates.  Must match
    control_velocity evaluated in the world frame to within 1e-12.
    """
    u, m = local_measurements(state, frame, i)
    # u . m = g_i . (-g_{i-1}), a rotation-invariant inner product
    eps = float(u @ m) - _cosines(targets)[i]
    v_local = sigma(eps, a) * (u + m)  # g_i - g_{i-1} seen in the body frame
    return rotate(frame.offset, v_local)


def ring_control_velocities(
    z: np.ndarray,
    cos_targets: np.ndarray,
    a: float,
    frame_offsets: np.ndarray | None = None,
) -> np.ndarray:
    """Synchronous control velocities for all agents, shape (n, 2).

    With frame_offsets given, every agent's velocity is computed through its
    local measurement pipeline (rotate in, evaluate, rotate out); otherwise
    the world-frame expression is used directly.  Both paths agree to
    roundoff, which is the testable content of bearing-only implementability.
    """
    from .geometry import ring_edges  # local import keeps module load cheap

    _, _, g = ring_edges(np.asarray(z, float))
    gp = np.roll(g, 1, axis=0)
    if frame_offsets is None:
        eps = -np.einsum("ij,ij->i", g, gp) - cos_targets
        return sigma(eps, a)[:, None] * (g - gp)

    co, so = np.cos(frame_offsets), np.sin(frame_offsets)
    # body-frame measurements u = R(-o) g_i, m = R(-o)(-g_{i-1})
    ux = co * g[:, 0] + so * g[:, 1]
    uy = -so * g[:, 0] + co * g[:, 1]
    mx = -(co * gp[:, 0] + so * gp[:, 1])
    my = -(-so * gp[:, 0] + co * gp[:, 1])
    eps = (ux * mx + uy * my) - cos_targets
    s = sigma(eps, a)
    vx, vy = s * (ux + mx), s * (uy + my)
    # back to world coordinates
    return np.column_stack([co * vx - so * vy, so * vx + co * vy])
