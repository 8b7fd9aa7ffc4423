"""Issue sequences where initial opinions form under bounded confidence.

Per issue, agents settle at ``y = Psi x`` and then average the settled
opinions lying strictly within ``d`` of their own with gain ``h``:
``x_next = H(y) y``.  Neighbourhoods use exact IEEE comparison ``< d``;
gaps within 1e-9 of ``d`` are reported by :func:`near_ties`, never fudged.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import GainOutOfRange
from .graph import InfluenceNetwork
from .issues import (
    DEFAULT_CLUSTER_TOL,
    DEFAULT_CONSENSUS_TOL,
    DEFAULT_MAX_ISSUES,
    SETTLE_TOL,
    IssueSequenceResult,
    Outcome,
    classify,
    closed_form_psi,
    partially_stubborn_root,
)
from .single import DEFAULT_TOL, InfluenceLimit, _vec, simulate_single_issue

TIE_MARGIN = 1e-9


@dataclass(frozen=True)
class ConfidenceConfig:
    d: float
    h: float

    def __post_init__(self):
        if not self.d > 0:
            raise ValueError(f"confidence bound d must be positive, got {self.d!r}")
        if not self.h > 0:
            raise GainOutOfRange(f"gain h must be positive, got {self.h!r}")

    def validate_for(self, n: int):
        if not 1.0 - (n - 1) * self.h > 0:
            raise GainOutOfRange(f"need 1 - (n-1) h > 0; n={n}, h={self.h!r}")

    def warnings(self, n: int) -> list:
        lo, _ = gain_window(n)
        out = []
        if not self.h > lo:
            out.append(f"h={self.h!r} <= 1/(2n)={lo!r}: common-neighbour condition cannot hold")
        return out


def gain_window(n: int):
    """Open interval of gains for which the common-neighbour condition is feasible."""
    return 1.0 / (2 * n), (1.0 / (n - 1) if n > 1 else float("inf"))


def assumption3_threshold(n: int, h: float, fully_stubborn_pair: bool = False) -> float:
    return n / 2 if fully_stubborn_pair else n / 2 + 1.0 / (4.0 * h)


@dataclass(frozen=True)
class ConfidenceGraphState:
    neighbor_sets: tuple
    H: np.ndarray
    edges: frozenset  # pairs (i, j) with i < j


def confidence_neighbors(y, d: float) -> tuple:
    y = np.asarray(y, dtype=float)
    if not d > 0:
        raise ValueError("d must be positive")
    close = np.abs(y[:, None] - y[None, :]) < d
    return tuple(frozenset(int(j) for j in np.flatnonzero(row)) for row in close)


def near_ties(y, d: float, margin: float = TIE_MARGIN) -> list:
    """Pairs whose gap sits within ``margin`` of the bound."""
    y = np.asarray(y, dtype=float)
    gaps = np.abs(y[:, None] - y[None, :])
    ii, jj = np.nonzero(np.triu(np.abs(gaps - d) <= margin, k=1))
    return [(int(i), int(j)) for i, j in zip(ii, jj)]


def build_H(neighbor_sets, h: float) -> np.ndarray:
    n = len(neighbor_sets)
    if not (h > 0 and 1.0 - (n - 1) * h > 0):
        raise GainOutOfRange(f"need h > 0 and 1 - (n-1) h > 0; n={n}, h={h!r}")
    H = np.zeros((n, n))
    for i, nb in enumerate(neighbor_sets):
        for j in nb:
            if j != i:
                H[i, j] = h
        H[i, i] = 1.0 - h * (len(nb) - 1)
    return H


def edge_set(neighbor_sets) -> frozenset:
    return frozenset((i, j) for i, nb in enumerate(neighbor_sets) for j in nb if i < j)


def confidence_state(y, cfg: ConfidenceConfig) -> ConfidenceGraphState:
    nb = confidence_neighbors(y, cfg.d)
    return ConfidenceGraphState(nb, build_H(nb, cfg.h), edge_set(nb))


def bc_issue_step(net: InfluenceNetwork, psi: InfluenceLimit, x, cfg: ConfidenceConfig):
    """One issue: settle to ``y = Psi x``, then mix within the confidence bound."""
    x = _vec(x, net.n, "x")
    y = psi.psi @ x
    state = confidence_state(y, cfg)
    return state.H @ y, state


# --------------------------------------------------------------------------
# conditions


@dataclass(frozen=True)
class Assumption3Check:
    holds: bool
    violations: tuple  # ("clause_i", i, j, l) or ("clause_ii", i, j, count, threshold)


def psi_neighbors(psi: InfluenceLimit, j: int) -> frozenset:
    return frozenset(int(l) for l in np.flatnonzero(psi.support[j]))


def check_assumption3(net: InfluenceNetwork, psi: InfluenceLimit, y0, cfg: ConfidenceConfig) -> Assumption3Check:
    """Common-neighbour and Psi-containment conditions on the first issue.

    Both clauses range over edges of G(H(0)), i.e. distinct pairs ``i != j``.
    Clause (i) for a fully stubborn ``i`` only asks ``l`` to neighbour ``i``;
    that asymmetry is kept as written.
    """
    y0 = _vec(y0, net.n, "y0")
    n = net.n
    part = net.partition
    nb = confidence_neighbors(y0, cfg.d)
    violations = []
    for i in range(n):
        i_full = i in part.v_f
        for j in sorted(nb[i] - {i}):
            if j in part.susceptible:
                need = nb[i] if i_full else nb[i] & nb[j]
                for l in sorted(psi_neighbors(psi, j) - need):
                    violations.append(("clause_i", i, j, l))
    for i, j in sorted(edge_set(nb)):
        both_full = i in part.v_f and j in part.v_f
        common = len(nb[i] & nb[j])
        thr = assumption3_threshold(n, cfg.h, fully_stubborn_pair=both_full)
        if not common > thr:
            violations.append(("clause_ii", i, j, common, thr))
    return Assumption3Check(not violations, tuple(violations))


@dataclass(frozen=True)
class Theorem3Verdict:
    consensus: bool
    failed_conditions: tuple
    root_agent: Optional[int] = None


def _connected_undirected(vertices, edges) -> bool:
    vertices = sorted(vertices)
    if len(vertices) <= 1:
        return True
    adj = {v: set() for v in vertices}
    for i, j in edges:
        if i in adj and j in adj:
            adj[i].add(j)
            adj[j].add(i)
    seen = {vertices[0]}
    stack = [vertices[0]]
    while stack:
        u = stack.pop()
        for v in adj[u] - seen:
            seen.add(v)
            stack.append(v)
    return len(seen) == len(vertices)


def check_theorem3(net: InfluenceNetwork, psi: InfluenceLimit, y0, cfg: ConfidenceConfig) -> Theorem3Verdict:
    y0 = _vec(y0, net.n, "y0")
    part = net.partition
    edges = edge_set(confidence_neighbors(y0, cfg.d))
    failed = []
    root = partially_stubborn_root(net)
    if root is None:
        failed.append("i: no partially stubborn root reaching all of V_p through V_p or V_n")
    if not _connected_undirected(part.v_f, edges):
        failed.append("ii: fully stubborn agents are not connected in G(H(0))")
    if part.v_f and not any(
        (i in part.v_p and j in part.v_f) or (i in part.v_f and j in part.v_p) for i, j in edges
    ):
        failed.append("iii: no G(H(0)) edge joins a partially and a fully stubborn agent")
    return Theorem3Verdict(not failed, tuple(failed), root)


# --------------------------------------------------------------------------
# simulation


@dataclass(frozen=True)
class BoundedRunResult:
    result: IssueSequenceResult
    edge_log: tuple
    preservation_ok: bool
    lost_edges: tuple  # (issue, (i, j)) for every H(0) edge missing later
    inner_max_deviation: Optional[float] = None


def simulate_bc_sequence(net: InfluenceNetwork, x00, cfg: ConfidenceConfig,
                         max_issues: int = DEFAULT_MAX_ISSUES,
                         consensus_tol: float = DEFAULT_CONSENSUS_TOL,
                         cluster_tol: float = DEFAULT_CLUSTER_TOL,
                         record_full: bool = False,
                         psi: Optional[InfluenceLimit] = None,
                         diagnose_inner: bool = False,
                         inner_tol: float = DEFAULT_TOL) -> BoundedRunResult:
    """Iterate bounded-confidence issues until the initial opinions settle.

    Edge preservation against G(H(0)) is monitored on every issue.  With
    ``diagnose_inner`` each settled vector is also recomputed by running the
    within-issue dynamics to ``inner_tol`` and the worst gap is reported.
    """
    x = _vec(x00, net.n, "x00").copy()
    cfg.validate_for(net.n)
    if psi is None:
        psi = closed_form_psi(net)
    history = [(0, x.copy())]
    spreads = [float(x.max() - x.min())]
    means = [float(x.mean())]
    edge_log = []
    lost = []
    base = None
    inner_dev = 0.0 if diagnose_inner else None
    settled = False
    s = 0
    prev = None
    while not settled and s < max_issues:
        nxt, state = bc_issue_step(net, psi, x, cfg)
        if diagnose_inner:
            traj = simulate_single_issue(net, x, tol=inner_tol)
            inner_dev = max(inner_dev, float(np.max(np.abs(traj.final - psi.psi @ x))))
        if base is None:
            base = state.edges
        edge_log.append(state.edges)
        lost.extend((s, e) for e in sorted(base - state.edges))
        s += 1
        spreads.append(float(nxt.max() - nxt.min()))
        means.append(float(nxt.mean()))
        if record_full:
            history.append((s, nxt))
        prev, x = x, nxt
        settled = np.max(np.abs(x - prev)) <= SETTLE_TOL
    if not record_full and s >= 1:
        if s >= 2:
            history.append((s - 1, prev))
        history.append((s, x))
    outcome = classify(x, consensus_tol, cluster_tol) if settled else Outcome("budget_exhausted")
    result = IssueSequenceResult(tuple(history), outcome, s, bool(settled), tuple(spreads), tuple(means))
    return BoundedRunResult(result, tuple(edge_log), not lost, tuple(lost), inner_dev)
