"""Ring-graph matrices and the symmetric eigensolver behind the stability constants.

E is the directed ring incidence matrix with [E]_ii = 1 and [E]_{i,i+1} = -1
(indices mod n), so E 1 = 0 and rank(E) = n - 1.  D is the diagonal matrix
with entries (g_i^perp)^T g_{i-1} = sin(theta_i).  The eigensolver is a
cyclic Jacobi iteration; n stays small here, so robustness beats speed.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidOrder, NotSymmetric
from .geometry import ring_angles

# rank counting: eigenvalues below this count as zero for O(1)-normed matrices
ZERO_EIG_TOL = 1e-9

_JACOBI_OFF_TOL = 1e-12
_JACOBI_MAX_SWEEPS = 60


def ring_incidence(n: int) -> np.ndarray:
    """Incidence matrix of the directed n-ring, shape (n, n)."""
    if n < 3:
        raise InvalidOrder(f"ring needs n >= 3 agents, got {n}")
    E = np.eye(n)
    E[np.arange(n), (np.arange(n) + 1) % n] = -1.0
    return E


def bearing_diagonal(bearings: np.ndarray) -> np.ndarray:
    """Diagonal matrix with [D]_ii = perp(g_i) . g_{i-1} = sin(theta_i).

    Parameters
    ----------
    bearings : (n, 2) array of unit edge bearings in ring order.
    """
    g = np.asarray(bearings, dtype=float)
    if len(g) < 3:
        raise InvalidOrder(f"ring needs n >= 3 bearings, got {len(g)}")
    gp = np.roll(g, 1, axis=0)
    # cross(g_i, g_{i-1}) written out: perp(g_i) . g_{i-1}
    d = g[:, 0] * gp[:, 1] - g[:, 1] * gp[:, 0]
    return np.diag(d)


def bearing_diagonal_entries(bearings: np.ndarray) -> np.ndarray:
    """The sin(theta_i) entries of D without forming the matrix."""
    return np.sin(ring_angles(np.asarray(bearings, dtype=float)))


def symmetric_eigenvalues(A: np.ndarray, sym_tol: float = 1e-10) -> np.ndarray:
    """Ascending eigenvalues of a symmetric matrix via cyclic Jacobi rotations.

    Sweeps annihilate each off-diagonal pair in turn until the off-diagonal
    Frobenius norm drops below 1e-12 (scaled up for matrices with norm
    above O(1)).

    Raises
    ------
    NotSymmetric
        If A is not square or max |A - A^T| exceeds sym_tol.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NotSymmetric(f"expected square matrix, got shape {A.shape}")
    if A.size and np.max(np.abs(A - A.T)) > sym_tol:
        raise NotSymmetric(f"asymmetry exceeds {sym_tol}")
    a = 0.5 * (A + A.T)  # fold roundoff asymmetry
    n = a.shape[0]
    if n == 1:
        return a.diagonal().copy()

    off_tol = _JACOBI_OFF_TOL * max(1.0, np.abs(a).max())
    for _ in range(_JACOBI_MAX_SWEEPS):
        off = np.sqrt(2.0 * np.sum(np.tril(a, -1) ** 2))
        if off < off_tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < off_tol / (n * n):
                    continue
                # classic Jacobi rotation zeroing a[p, q]
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(tau) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                if tau == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                cp, cq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
    return np.sort(a.diagonal())


def ring_lambda2(n: int) -> float:
    """Smallest positive eigenvalue of E^T E for the n-ring: 2 - 2 cos(2 pi / n)."""
    if n < 3:
        raise InvalidOrder(f"ring needs n >= 3 agents, got {n}")
    return 2.0 - 2.0 * np.cos(2.0 * np.pi / n)


def zero_eigenvalue_count(A: np.ndarray) -> int:
    """Number of eigenvalues with magnitude below the zero threshold."""
    eigs = symmetric_eigenvalues(A)
    tol = ZERO_EIG_TOL * max(1.0, np.abs(A).max())
    return int(np.sum(np.abs(eigs) < tol))
