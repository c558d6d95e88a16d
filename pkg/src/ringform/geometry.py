"""Planar primitives: rotations, bearings, perpendiculars, projections, subtended angles.

Positions and directions are numpy arrays of shape (2,) for the pointwise
operations, and (n, 2) row-stacked for the ring-wide helpers used by the
simulation loop.  Angles are radians, normalized into [0, 2pi).
"""

from __future__ import annotations

import numpy as np

from .errors import CoincidentAgents

# positions closer than this have no defined bearing
COINCIDENCE_TOL = 1e-9

TWO_PI = 2.0 * np.pi


def rotate(alpha: float, v: np.ndarray) -> np.ndarray:
    """Rotate v counterclockwise by alpha radians."""
    c, s = np.cos(alpha), np.sin(alpha)
    v = np.asarray(v, dtype=float)
    return np.array([c * v[0] - s * v[1], s * v[0] + c * v[1]])


def bearing(p_from: np.ndarray, p_to: np.ndarray) -> np.ndarray:
    """Unit vector pointing from p_from toward p_to.

    Raises
    ------
    CoincidentAgents
        If the two positions are closer than COINCIDENCE_TOL.
    """
    d = np.asarray(p_to, dtype=float) - np.asarray(p_from, dtype=float)
    r = np.hypot(d[0], d[1])
    if r < COINCIDENCE_TOL:
        raise CoincidentAgents(f"positions within {r:.3e} of each other")
    return d / r


def perp(g: np.ndarray) -> np.ndarray:
    """Quarter-turn counterclockwise: returns R(pi/2) g."""
    return np.array([-g[1], g[0]])


def projection(g: np.ndarray) -> np.ndarray:
    """Orthogonal projection I - g g^T onto the line normal to the unit vector g."""
    g = np.asarray(g, dtype=float)
    return np.eye(2) - np.outer(g, g)


def normalize_angle(theta: float) -> float:
    """Wrap into [0, 2pi)."""
    out = np.remainder(theta, TWO_PI)
    # remainder can return 2pi itself when theta is a tiny negative number
    if out >= TWO_PI:
        out -= TWO_PI
    return float(out)


def subtended_angle(g_prev: np.ndarray, g_next: np.ndarray) -> float:
    """Counterclockwise angle in [0, 2pi) rotating -g_prev onto g_next.

    This is the angle subtended at agent i by its two neighbors, with
    g_prev the bearing of edge i-1 and g_next the bearing of edge i.
    Computed from the two-argument arctangent of the cross and dot
    products of -g_prev and g_next.
    """
    mx, my = -g_prev[0], -g_prev[1]
    s = mx * g_next[1] - my * g_next[0]
    c = mx * g_next[0] + my * g_next[1]
    return normalize_angle(np.arctan2(s, c))


def angle_error(g_next: np.ndarray, g_prev: np.ndarray, cos_target: float) -> float:
    """Cosine angle error: cos(theta) - cos(theta*) = -g_next . g_prev - cos_target."""
    if abs(cos_target) > 1.0:
        raise ValueError(f"cos_target {cos_target} outside [-1, 1]")
    return float(-(g_next[0] * g_prev[0] + g_next[1] * g_prev[1]) - cos_target)


# ---------------------------------------------------------------------------
# ring-wide vectorized forms


def ring_edges(z: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Edges, lengths and unit bearings of the ring at positions z (n, 2).

    Edge i runs from agent i to agent i+1 (mod n).  Returns (e, lengths, g)
    with shapes (n, 2), (n,), (n, 2).

    Raises
    ------
    CoincidentAgents
        If any consecutive pair is closer than COINCIDENCE_TOL.
    """
    e = np.roll(z, -1, axis=0) - z
    lengths = np.sqrt(np.einsum("ij,ij->i", e, e))
    if np.any(lengths < COINCIDENCE_TOL):
        i = int(np.argmin(lengths))
        raise CoincidentAgents(
            f"agents {i} and {(i + 1) % len(z)} within {lengths[i]:.3e}"
        )
    return e, lengths, e / lengths[:, None]


def ring_angles(g: np.ndarray) -> np.ndarray:
    """Subtended angles theta_i in [0, 2pi) at every agent from bearings g (n, 2)."""
    gp = np.roll(g, 1, axis=0)  # g_{i-1}
    mx, my = -gp[:, 0], -gp[:, 1]
    s = mx * g[:, 1] - my * g[:, 0]
    c = mx * g[:, 0] + my * g[:, 1]
    theta = np.arctan2(s, c)
    theta = np.remainder(theta, TWO_PI)
    theta[theta >= TWO_PI] = 0.0
    return theta


def ring_angle_errors(g: np.ndarray, cos_targets: np.ndarray) -> np.ndarray:
    """eps_i = -g_i . g_{i-1} - cos(theta_i*) for the whole ring."""
    gp = np.roll(g, 1, axis=0)
    return -np.einsum("ij,ij->i", g, gp) - cos_targets


def min_pairwise_distance(z: np.ndarray) -> float:
    """Smallest distance over all agent pairs."""
    d = z[:, None, :] - z[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", d, d))
    n = len(z)
    dist[np.arange(n), np.arange(n)] = np.inf
    return float(dist.min())


def closest_pair(z: np.ndarray) -> tuple[int, int, float]:
    """Indices and distance of the closest agent pair."""
    d = z[:, None, :] - z[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", d, d))
    n = len(z)
    dist[np.arange(n), np.arange(n)] = np.inf
    i, j = np.unravel_index(np.argmin(dist), dist.shape)
    return int(i), int(j), float(dist[i, j])
