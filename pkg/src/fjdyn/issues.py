"""Opinion formation over a path-dependent sequence of issues.

Each agent carries its cognitive inertia ``zeta = 1 - xi`` from one issue to
the next, so the initial opinions obey ``x(s+1) = Psi x(s)`` with
``Psi = (I - Xi W)^-1 (I - Xi)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import PreconditionViolated, SingularSystem
from .graph import (
    InfluenceNetwork,
    check_assumption2,
    restricted_reachable,
    scc_decompose,
)
from .single import InfluenceLimit, _vec, fj_step, limit_influence_matrix

DEFAULT_CONSENSUS_TOL = 1e-6
DEFAULT_CLUSTER_TOL = 1e-6
DEFAULT_MAX_ISSUES = 10_000
SETTLE_TOL = 1e-12


@dataclass(frozen=True)
class CognitiveInertia:
    zeta: np.ndarray

    @classmethod
    def of(cls, net: InfluenceNetwork):
        return cls(1.0 - net.xi)


@dataclass(frozen=True)
class Outcome:
    kind: str  # "consensus" | "clusters" | "budget_exhausted"
    value: Optional[float] = None
    clusters: tuple = ()  # ((frozenset of agents, representative value), ...)


@dataclass(frozen=True)
class IssueSequenceResult:
    """Initial opinions per issue plus the settled classification.

    ``initial_opinions_per_issue`` holds ``(issue, vector)`` pairs: every
    issue when the run was recorded in full, otherwise the first and the
    final two.  ``spreads`` and ``means`` always cover every issue.
    """

    initial_opinions_per_issue: tuple
    outcome: Outcome
    issues_run: int
    settled: bool
    spreads: tuple = field(default=(), repr=False)
    means: tuple = field(default=(), repr=False)

    @property
    def final(self) -> np.ndarray:
        return self.initial_opinions_per_issue[-1][1]


def _require_assumption2(net: InfluenceNetwork, scc=None):
    chk = check_assumption2(net, scc)
    if not chk.holds:
        raise SingularSystem(
            "I - Xi W is singular: ISCC(s) without a stubborn agent "
            + ", ".join(str(sorted(c)) for c in chk.violating_isccs)
        )


def closed_form_psi(net: InfluenceNetwork) -> InfluenceLimit:
    _require_assumption2(net)
    return limit_influence_matrix(net)


def evaluate_cost(net: InfluenceNetwork, i: int, x, prev_initial) -> float:
    """Myopic cost agent ``i`` minimises when forming its next initial opinion."""
    x = _vec(x, net.n, "x")
    prev = _vec(prev_initial, net.n, "prev_initial")
    zeta = 1.0 - net.xi[i]
    inertia = zeta * (x[i] - prev[i]) ** 2
    social = float(np.dot(net.W[i], (x[i] - x) ** 2))
    return float(inertia + (1.0 - zeta) * social)


def issue_transition(net: InfluenceNetwork, x_init, psi: Optional[InfluenceLimit] = None) -> np.ndarray:
    x_init = _vec(x_init, net.n, "x_init")
    if psi is None:
        psi = closed_form_psi(net)
    return psi.psi @ x_init


def predicted_psi_support(net: InfluenceNetwork) -> np.ndarray:
    """Sign pattern of Psi read off G(W) alone."""
    _require_assumption2(net)
    part = net.partition
    n = net.n
    S = np.zeros((n, n), dtype=bool)
    for i in part.stubborn:
        S[i, i] = True
    through = part.susceptible
    for j in part.stubborn:
        for i in restricted_reachable(net, j, through):
            if i in through:
                S[i, j] = True
    return S


def psi_graph(support: np.ndarray) -> np.ndarray:
    """Arc matrix of G(Psi): ``j -> i`` whenever ``psi_ij > 0``."""
    A = support.T.copy()
    np.fill_diagonal(A, False)
    return A


@dataclass(frozen=True)
class Theorem2Verdict:
    consensus: bool
    root_agent: Optional[int]


def _require_no_fully_stubborn(net, scc=None):
    if net.partition.v_f:
        raise PreconditionViolated(
            f"fully stubborn agents present: {sorted(net.partition.v_f)}"
        )
    if not check_assumption2(net, scc).holds:
        raise PreconditionViolated("an ISCC has no stubborn agent")


def partially_stubborn_root(net: InfluenceNetwork) -> Optional[int]:
    """A partially stubborn agent that reaches every other one through V_p or V_n."""
    part = net.partition
    for p in sorted(part.v_p):
        if part.v_p - {p} <= restricted_reachable(net, p, part.susceptible):
            return p
    return None


def check_theorem2(net: InfluenceNetwork) -> Theorem2Verdict:
    _require_no_fully_stubborn(net)
    root = partially_stubborn_root(net)
    return Theorem2Verdict(root is not None, root)


@dataclass(frozen=True)
class ClusterVerdict:
    clusters: bool
    isccs: tuple


def check_corollary1(net: InfluenceNetwork) -> ClusterVerdict:
    scc = scc_decompose(net)
    _require_no_fully_stubborn(net, scc)
    isccs = tuple(sorted(scc.isccs(), key=min))
    return ClusterVerdict(len(isccs) > 1, isccs)


def group_values(x, tol):
    """Transitive closure of ``|x_i - x_j| <= tol``, as (agents, mean) pairs."""
    order = np.argsort(x, kind="stable")
    groups, current = [], [int(order[0])]
    for a, b in zip(order[:-1], order[1:]):
        if x[b] - x[a] <= tol:
            current.append(int(b))
        else:
            groups.append(current)
            current = [int(b)]
    groups.append(current)
    return tuple((frozenset(g), float(np.mean(x[g]))) for g in groups)


def classify(x, consensus_tol, cluster_tol) -> Outcome:
    spread = float(x.max() - x.min())
    if spread <= consensus_tol:
        return Outcome("consensus", float(np.mean(x)))
    return Outcome("clusters", None, group_values(x, cluster_tol))


def simulate_issue_sequence(net: InfluenceNetwork, x00, max_issues: int = DEFAULT_MAX_ISSUES,
                            consensus_tol: float = DEFAULT_CONSENSUS_TOL,
                            cluster_tol: float = DEFAULT_CLUSTER_TOL,
                            record_full: bool = False,
                            psi: Optional[InfluenceLimit] = None) -> IssueSequenceResult:
    x = _vec(x00, net.n, "x00").copy()
    if psi is None:
        psi = closed_form_psi(net)
    P = psi.psi
    history = [(0, x.copy())]
    spreads = [float(x.max() - x.min())]
    means = [float(x.mean())]
    settled = bool(spreads[0] == 0.0)
    s = 0
    prev = None
    while not settled and s < max_issues:
        nxt = P @ x
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
    return IssueSequenceResult(tuple(history), outcome, s, bool(settled), tuple(spreads), tuple(means))


def inner_trajectory(net: InfluenceNetwork, x_init, steps: int) -> list:
    """Within-issue F-J trajectory ``x(s, k_s + t)`` for ``t = 0..steps``."""
    x_init = _vec(x_init, net.n, "x_init")
    out = [x_init.copy()]
    x = x_init
    for _ in range(steps):
        x = fj_step(net, x, x_init)
        out.append(x)
    return out


def consensus_weights(psi: InfluenceLimit, part) -> np.ndarray:
    """Left weight vector ``nu`` with ``Psi_pp^s -> 1 nu^T``, padded to length n.

    ``nu`` is the stationary distribution of the stochastic block ``Psi_pp``,
    found by least squares on ``nu^T (Psi_pp - I) = 0`` with ``sum(nu) = 1``;
    unique whenever the consensus condition holds.
    """
    vp = sorted(part.v_p)
    Ppp = psi.psi[np.ix_(vp, vp)]
    m = len(vp)
    A = np.vstack([Ppp.T - np.eye(m), np.ones((1, m))])
    b = np.zeros(m + 1)
    b[-1] = 1.0
    sol, *_ = np.linalg.lstsq(A, b, rcond=None)
    nu = np.zeros(psi.psi.shape[0])
    nu[vp] = sol
    return nu
