"""Numerical certification machinery: stability constants, decay bounds, lemma oracles.

Everything here is a pure function of states or logs.  Sampling oracles take
an explicit seed so results are reproducible; constants follow the closed
forms K = (a+1)^(2a/(a+1)) lambda1(D'D) lambda2(E'E)/n,
kappa = (a+1)^(2a/(a+1)) n^((1-a)/(1+a)), C = n^(a/(a+1)),
eta = 2 C (a+1) gamma / K.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateD,
    InvalidOrder,
    MixedSignViolated,
    PreconditionViolated,
)
from .dynamics import FormationState, TargetFormation, TrajectoryLog, lyapunov_value
from .geometry import ring_angles, ring_edges
from .topology import ring_lambda2, symmetric_eigenvalues

# instantaneous D is treated as singular below this |sin theta|
DEGENERATE_SIN_TOL = 1e-9


def lyapunov(eps: np.ndarray, a: float) -> float:
    """V = 1/(a+1) sum |eps_i|^(a+1); zero iff eps = 0."""
    if not (0.0 < a <= 1.0):
        raise ValueError(f"a must lie in (0, 1], got {a}")
    return lyapunov_value(np.asarray(eps, dtype=float), a)


def k_constant(n: int, a: float, lambda1_DtD: float) -> float:
    """Decay constant K = (a+1)^(2a/(a+1)) lambda1(D'D) lambda2(E'E)/n.

    K < 2 strictly except at the unattainable boundary lambda1 = 1 with
    lambda2/n = 1 (only n = 3), where a warning is emitted.
    """
    if n < 3:
        raise InvalidOrder(f"ring needs n >= 3, got {n}")
    if not (0.0 < a <= 1.0):
        raise ValueError(f"a must lie in (0, 1], got {a}")
    if not (0.0 < lambda1_DtD <= 1.0):
        raise ValueError(f"lambda1(D'D) must lie in (0, 1], got {lambda1_DtD}")
    k = (a + 1.0) ** (2.0 * a / (a + 1.0)) * lambda1_DtD * ring_lambda2(n) / n
    if k >= 2.0 - 1e-15:
        # lambda2/n = 1 and lambda1(D'D) = 1 cannot hold at any realizable state
        warnings.warn(
            "K reached the boundary value 2; the inputs are not simultaneously "
            "realizable by a formation",
            RuntimeWarning,
            stacklevel=2,
        )
    return k


def kappa_constant(n: int, a: float) -> float:
    """kappa = (a+1)^(2a/(a+1)) n^((1-a)/(1+a)) from the settling-time bound."""
    return (a + 1.0) ** (2.0 * a / (a + 1.0)) * n ** ((1.0 - a) / (1.0 + a))


def norm_equivalence_constant(n: int, a: float) -> float:
    """Tight C with ||x||_1 <= C ||x||_{a+1}: C = n^(a/(a+1)), equality at x = 1."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not (0.0 < a <= 1.0):
        raise ValueError(f"a must lie in (0, 1], got {a}")
    return float(n ** (a / (a + 1.0)))


def lemma2_bound(k: float, c: float) -> float:
    """Finite upper bound x(0) + (1/k) mu^(-1/k) e^(1-k) Gamma(1/k), mu = (1-k)/c^k.

    x(0) is supplied as c, per the lemma's requirement c >= x(0) > 0.
    """
    if not (0.0 < k < 1.0):
        raise ValueError(f"k must lie in the open interval (0, 1), got {k}")
    if c <= 0.0:
        raise ValueError(f"c must be positive, got {c}")
    mu = (1.0 - k) / c**k
    return c + (1.0 / k) * mu ** (-1.0 / k) * math.e ** (1.0 - k) * math.gamma(1.0 / k)


def lemma3_check(x: np.ndarray, p: float) -> tuple[float, float, float]:
    """The three expressions of (sum x)^p <= sum x^p <= n^(1-p) (sum x)^p.

    Caller asserts the ordering; equality holds throughout at p = 1.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0):
        raise ValueError("entries must be nonnegative")
    if not (0.0 < p <= 1.0):
        raise ValueError(f"p must lie in (0, 1], got {p}")
    s = float(x.sum())
    return s**p, float(np.sum(x**p)), len(x) ** (1.0 - p) * s**p


def mixed_sign_check(values: np.ndarray) -> bool:
    """True iff the nonzero entries carry both signs, or all entries are zero.

    The all-zero convention makes the decay-bound precondition vacuous at
    equilibrium, where the bound reads 0 <= 0.
    """
    v = np.asarray(values, dtype=float)
    nonzero = v[v != 0.0]
    if len(nonzero) == 0:
        return True
    return bool(np.any(nonzero > 0.0) and np.any(nonzero < 0.0))


# ---------------------------------------------------------------------------
# Lemma 1: quadratic forms over the mixed-sign cone


def _check_lemma1_matrix(A: np.ndarray) -> tuple[np.ndarray, int]:
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    eigs = symmetric_eigenvalues(A)  # raises NotSymmetric on bad input
    scale = max(1.0, float(np.abs(A).max()))
    if eigs[0] < -1e-9 * scale:
        raise PreconditionViolated(f"matrix not positive semidefinite: {eigs[0]}")
    if np.max(np.abs(A @ np.ones(n))) > 1e-9 * scale:
        raise PreconditionViolated("the all-ones vector is not in the null space")
    if abs(eigs[0]) > 1e-9 * scale or eigs[1] <= 1e-9 * scale:
        raise PreconditionViolated(
            f"need lambda1 = 0 < lambda2, got {eigs[0]}, {eigs[1]}"
        )
    return eigs, n


def lemma1_bound(A: np.ndarray) -> float:
    """lambda2(A)/n: lower bound of x'Ax over mixed-sign unit vectors."""
    eigs, n = _check_lemma1_matrix(A)
    return float(eigs[1]) / n


@dataclass(frozen=True)
class Lemma1Oracle:
    """Sampled minimum of the raw form, plus boundary-probe values of the bound chain."""

    sampled_min: float
    probe_values: np.ndarray
    bound: float


def lemma1_oracle(A: np.ndarray, sample_count: int = 100_000, seed: int = 0) -> Lemma1Oracle:
    """Brute-force check of the mixed-sign quadratic-form bound.

    The sampled minimum takes x'Ax over random unit vectors whose entries
    carry both signs (vectors of one sign are rejected: they are outside the
    cone).  The boundary probes sit near the projection directions p_i (one
    entry pushed just below zero, the rest equal) and evaluate the chained
    bound expression sin^2(phi) lambda2(A), whose angle factor attains 1/n
    exactly on the cone boundary; this is the quantity the bound's tightness
    argument controls, and it coincides with the raw form on the 3-ring.
    """
    eigs, n = _check_lemma1_matrix(A)
    A = np.asarray(A, dtype=float)
    lam2 = float(eigs[1])
    rng = np.random.default_rng(seed)

    best = np.inf
    drawn = 0
    while drawn < sample_count:
        batch = min(sample_count - drawn, 50_000)
        x = rng.standard_normal((batch, n))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        mixed = np.logical_and((x > 0).any(axis=1), (x < 0).any(axis=1))
        x = x[mixed]
        drawn += batch
        if len(x):
            vals = np.einsum("ij,jk,ik->i", x, A, x)
            best = min(best, float(vals.min()))

    ones = np.ones(n)
    probes = []
    for i in range(n):
        p = ones.copy()
        p[i] = -1e-6
        for x in (p, -p):
            x = x / np.linalg.norm(x)
            c0 = float(x @ ones) / math.sqrt(n)
            probes.append((1.0 - c0 * c0) * lam2)  # sin^2(phi) lambda2
    return Lemma1Oracle(best, np.array(probes), lam2 / n)


# ---------------------------------------------------------------------------
# state-level decay bound


def _state_quantities(state: FormationState, targets: TargetFormation, a: float):
    _, lengths, g = ring_edges(state.positions)
    gp = np.roll(g, 1, axis=0)
    eps = -np.einsum("ij,ij->i", g, gp) - targets.cosines
    sin_theta = g[:, 0] * gp[:, 1] - g[:, 1] * gp[:, 0]  # perp(g_i) . g_{i-1}
    sig = eps if a == 1.0 else np.sign(eps) * np.abs(eps) ** a
    return lengths, eps, sin_theta, sig


def decay_rhs(state: FormationState, targets: TargetFormation, a: float) -> float:
    """-(K_inst / rho) V^(2a/(a+1)) with the instantaneous lambda1(D'D) = min sin^2(theta_i).

    The analytic V-dot upper bound certified along converging runs.

    Raises
    ------
    DegenerateD
        If any |sin theta_i| < 1e-9 (the bound's preconditions fail there).
    MixedSignViolated
        If the nonzero entries of D sigma share one sign.
    """
    lengths, eps, sin_theta, sig = _state_quantities(state, targets, a)
    if np.min(np.abs(sin_theta)) < DEGENERATE_SIN_TOL:
        i = int(np.argmin(np.abs(sin_theta)))
        raise DegenerateD(f"sin(theta_{i}) = {sin_theta[i]:.3e}")
    # entries at roundoff level are numerical equilibria, not sign evidence
    d_sigma = np.where(np.abs(eps) < 1e-14, 0.0, sin_theta * sig)
    if not mixed_sign_check(d_sigma):
        raise MixedSignViolated("nonzero entries of D sigma share one sign")
    lam1 = float(np.min(sin_theta**2))
    n = len(eps)
    k_inst = (a + 1.0) ** (2.0 * a / (a + 1.0)) * lam1 * ring_lambda2(n) / n
    rho = float(lengths.sum())
    v = lyapunov_value(eps, a)
    return -(k_inst / rho) * v ** (2.0 * a / (a + 1.0))


# ---------------------------------------------------------------------------
# proof-structure diagnostics (Step 1 quantities)


@dataclass(frozen=True)
class ProofDiagnostics:
    """w_i = (cos theta_i - cos theta_i*)/(theta_i - theta_i*), delta_i, and D sigma."""

    w: np.ndarray
    delta: np.ndarray
    D_sigma: np.ndarray

    def dw_products(self, sin_theta: np.ndarray) -> np.ndarray:
        """[D]_ii w_i, negative whenever theta_i, theta_i* share a side of pi."""
        return sin_theta * self.w


def proof_diagnostics(
    state: FormationState, targets: TargetFormation, a: float = 1.0
) -> ProofDiagnostics:
    """The factorization eps_i = w_i delta_i and the D sigma vector.

    w takes its limit value -sin(theta_i*) when |delta_i| < 1e-9.  The sign
    pattern of D sigma is independent of a, since sign(sigma_i) = sign(eps_i).
    """
    _, eps, sin_theta, sig = _state_quantities(state, targets, a)
    _, _, g = ring_edges(state.positions)
    theta = ring_angles(g)
    delta = theta - targets.angles
    w = np.where(
        np.abs(delta) < 1e-9,
        -np.sin(targets.angles),
        np.divide(eps, np.where(np.abs(delta) < 1e-9, 1.0, delta)),
    )
    return ProofDiagnostics(w=w, delta=delta, D_sigma=sin_theta * sig)


# ---------------------------------------------------------------------------
# run-level report and displacement bound


@dataclass(frozen=True)
class BoundReport:
    """Theoretical constants evaluated along a run.

    lambda1_DtD is the minimum over sampled states of min_i sin^2(theta_i);
    rho_max_observed stands in for gamma and beta_observed for the level-set
    maximum of ||v||, both existential in the source analysis.  K is zero
    (and the decay bound vacuous) when a sampled state had a degenerate D.
    """

    K: float
    lambda2_EtE: float
    lambda1_DtD: float
    kappa: float
    C_norm: float
    rho_max_observed: float
    eta_fit: float
    beta_observed: float
    k_boundary: bool = False


def bound_report(log: TrajectoryLog, targets: TargetFormation, a: float) -> BoundReport:
    """Evaluate the stability constants over a trajectory log."""
    if not log.samples:
        raise ValueError("empty trajectory log")
    n = targets.n
    lam2 = ring_lambda2(n)
    lam1 = np.inf
    beta = 0.0
    for state in log.states:
        _, _, g = ring_edges(state.positions)
        gp = np.roll(g, 1, axis=0)
        sin_theta = g[:, 0] * gp[:, 1] - g[:, 1] * gp[:, 0]
        lam1 = min(lam1, float(np.min(sin_theta**2)))
        v_vec = np.einsum("ij,ij->i", g, gp) - 1.0  # v_i = g_i . g_{i-1} - 1
        beta = max(beta, float(np.linalg.norm(v_vec)))
    rho_max = float(np.max(log.rho()))
    c_norm = norm_equivalence_constant(n, a)
    if lam1 > 0.0:
        k = (a + 1.0) ** (2.0 * a / (a + 1.0)) * lam1 * lam2 / n
    else:
        k = 0.0
    eta = 2.0 * c_norm * (a + 1.0) * rho_max / k if k > 0.0 else math.inf
    return BoundReport(
        K=k,
        lambda2_EtE=lam2,
        lambda1_DtD=lam1,
        kappa=kappa_constant(n, a),
        C_norm=c_norm,
        rho_max_observed=rho_max,
        eta_fit=eta,
        beta_observed=beta,
        k_boundary=bool(k >= 2.0 - 1e-12),
    )


def displacement_check(log: TrajectoryLog, a: float) -> tuple[float, float, float]:
    """Total displacement, ||eps(0)||_{a+1}, and their ratio (0 at equilibrium starts)."""
    if not log.states:
        raise ValueError("empty trajectory log")
    z0 = log.states[0].positions
    z1 = log.states[-1].positions
    total = float(np.sum(np.sqrt(np.einsum("ij,ij->i", z1 - z0, z1 - z0))))
    eps0 = log.samples[0].eps
    eps0_norm = float(np.sum(np.abs(eps0) ** (a + 1.0)) ** (1.0 / (a + 1.0)))
    ratio = total / eps0_norm if eps0_norm > 0.0 else 0.0
    return total, eps0_norm, ratio
