"""Single-issue Friedkin-Johnsen dynamics and the influence matrix."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionMismatch, NonConvergent
from .graph import (
    ZERO_TOL,
    InfluenceNetwork,
    check_assumption1,
    check_assumption2,
    reachable,
    scc_decompose,
)
from .oracles import SPECTRAL_TOL, eigenvalues_dense

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 100_000


@dataclass(frozen=True)
class OpinionState:
    x: np.ndarray
    issue: int
    time: int


@dataclass(frozen=True)
class Trajectory:
    """Result of one single-issue run.

    ``status`` is one of ``converged``, ``oscillating`` (the network fails
    the aperiodicity condition, so the orbit can rotate forever) or
    ``budget_exhausted`` (aperiodic, just slow).  Without ``record_full``
    only the first state and the final two are kept.
    """

    states: tuple
    converged: bool
    limit: Optional[np.ndarray]
    iterations: int
    status: str

    @property
    def final(self) -> np.ndarray:
        return self.states[-1].x


@dataclass(frozen=True)
class InfluenceLimit:
    psi: np.ndarray
    support: np.ndarray
    method: str  # "closed_form" | "iterative"


def _vec(x, n, name):
    x = np.asarray(x, dtype=float)
    if x.shape != (n,):
        raise DimensionMismatch(f"{name} must have length {n}, got shape {x.shape}")
    return x


def fj_step(net: InfluenceNetwork, x, x0) -> np.ndarray:
    x = _vec(x, net.n, "x")
    x0 = _vec(x0, net.n, "x0")
    return net.xi * (net.W @ x) + (1.0 - net.xi) * x0


def simulate_single_issue(net: InfluenceNetwork, x0, tol: float = DEFAULT_TOL,
                          max_iter: int = DEFAULT_MAX_ITER, record_full: bool = False,
                          issue: int = 0) -> Trajectory:
    if tol <= 0 or max_iter < 1:
        raise ValueError("tol must be > 0 and max_iter >= 1")
    x0 = _vec(x0, net.n, "x0")
    XiW, anchor = net.XiW, (1.0 - net.xi) * x0
    x = x0.copy()
    states = [OpinionState(x0.copy(), issue, 0)]
    prev = None
    converged = False
    k = 0
    while k < max_iter:
        nxt = XiW @ x + anchor
        k += 1
        if record_full:
            states.append(OpinionState(nxt, issue, k))
        prev, x = x, nxt
        if np.max(np.abs(x - prev)) <= tol:
            converged = True
            break
    if not record_full:
        if k >= 2:
            states.append(OpinionState(prev, issue, k - 1))
        states.append(OpinionState(x, issue, k))
    if converged:
        status = "converged"
    elif check_assumption1(net).holds:
        status = "budget_exhausted"
    else:
        status = "oscillating"
    return Trajectory(tuple(states), converged, x.copy() if converged else None, k, status)


def influence_matrix_k(net: InfluenceNetwork, k: int) -> np.ndarray:
    """Accumulated influence after ``k`` steps, so that ``x(k) = Psi(k) x(0)``."""
    if k < 0:
        raise ValueError("k must be >= 0")
    XiW, anchor = net.XiW, np.diag(1.0 - net.xi)
    P = np.eye(net.n)
    for _ in range(k):
        P = XiW @ P + anchor
    return P


def _finish(psi, method):
    psi = np.where(psi < 0.0, 0.0, psi)
    psi.setflags(write=False)
    support = psi > ZERO_TOL
    support.setflags(write=False)
    return InfluenceLimit(psi, support, method)


def limit_influence_matrix(net: InfluenceNetwork, tol: float = DEFAULT_TOL,
                           max_iter: int = DEFAULT_MAX_ITER) -> InfluenceLimit:
    """Limit of the accumulated influence matrix.

    Uses ``(I - Xi W)^-1 (I - Xi)`` when every ISCC holds a stubborn agent.
    Otherwise, for aperiodic networks, iterates by doubling
    ``Psi(2k) = A Psi(k) + Psi(k) - A`` with ``A = (Xi W)^k`` and confirms the
    result is a fixed point of the one-step map before accepting it.
    """
    scc = scc_decompose(net)
    n = net.n
    if check_assumption2(net, scc).holds:
        psi = np.linalg.solve(np.eye(n) - net.XiW, np.diag(1.0 - net.xi))
        return _finish(psi, "closed_form")
    if not check_assumption1(net, scc).holds:
        raise NonConvergent("a non-stubborn ISCC is periodic; the influence matrix has no limit")

    XiW, anchor = net.XiW, np.diag(1.0 - net.xi)
    A = XiW.copy()
    P = XiW + anchor
    for _ in range(max_iter):
        P_next = A @ P + P - A
        A = A @ A
        settled = np.max(np.abs(P_next - P)) <= tol
        P = P_next
        if settled and np.max(np.abs(XiW @ P + anchor - P)) <= tol:
            return _finish(P, "iterative")
    raise NonConvergent(f"influence matrix did not settle within {max_iter} doublings")


@dataclass(frozen=True)
class SpectralVerdict:
    converges: bool
    max_modulus_eigenvalues: tuple


def check_convergence_spectral(net: InfluenceNetwork, tol: float = SPECTRAL_TOL) -> SpectralVerdict:
    """Convergent iff every eigenvalue of Xi W on the unit circle equals 1."""
    report = eigenvalues_dense(net.XiW, tol)
    ok = all(abs(lam - 1.0) <= tol for lam in report.unit_circle_eigenvalues)
    return SpectralVerdict(ok, report.unit_circle_eigenvalues)


def predicted_zero_columns(net: InfluenceNetwork) -> frozenset:
    """Non-stubborn agents that some stubborn agent reaches in G(W)."""
    part = net.partition
    if not part.v_n:
        return frozenset()
    hit = set()
    for j in part.stubborn:
        hit |= reachable(net, j)
    return frozenset(hit & part.v_n)
