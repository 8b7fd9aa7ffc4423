"""Influence networks and the structural predicates defined on them.

Arc convention: ``u -> v`` exists iff ``W[v, u] > 0``, i.e. agent ``v``
places weight on agent ``u`` and so receives information from it.  Every
reachability question in the package uses this orientation.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from math import gcd
from typing import Iterable, Optional

import numpy as np

from .errors import DimensionMismatch, NonStochasticRow, OutOfRangeEntry

ZERO_TOL = 1e-12
ROW_SUM_TOL = 1e-9


@dataclass(frozen=True)
class AgentPartition:
    """Fully stubborn (xi=0), partially stubborn, and non-stubborn (xi=1) agents."""

    v_f: frozenset
    v_p: frozenset
    v_n: frozenset

    @classmethod
    def from_xi(cls, xi):
        v_f = frozenset(int(i) for i in np.flatnonzero(xi == 0.0))
        v_n = frozenset(int(i) for i in np.flatnonzero(xi == 1.0))
        v_p = frozenset(range(len(xi))) - v_f - v_n
        return cls(v_f, v_p, v_n)

    @property
    def stubborn(self):
        return self.v_f | self.v_p

    @property
    def susceptible(self):
        return self.v_p | self.v_n


@dataclass(frozen=True, eq=False)
class InfluenceNetwork:
    W: np.ndarray
    xi: np.ndarray
    partition: AgentPartition
    # successors[u] lists every v with an arc u -> v
    successors: tuple = field(repr=False)

    @property
    def n(self) -> int:
        return self.W.shape[0]

    @property
    def XiW(self) -> np.ndarray:
        return self.xi[:, None] * self.W

    def arc_matrix(self) -> np.ndarray:
        """Boolean adjacency with ``A[u, v]`` true iff arc ``u -> v``."""
        return (self.W > 0.0).T.copy()


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def build_network(W, xi) -> InfluenceNetwork:
    """Validate ``W`` and ``xi`` and return an immutable network.

    Entries within 1e-12 of the unit interval are clamped into it, entries
    below 1e-12 become exact zeros, and ``xi`` values within 1e-12 of 0 or 1
    snap to exactly 0 or 1 so the agent partition is stable.  Rows whose sum
    is within 1e-9 of one are renormalised; anything further off is rejected.
    """
    W = np.array(W, dtype=float)
    xi = np.array(xi, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1] or W.shape[0] == 0:
        raise DimensionMismatch(f"W must be a non-empty square matrix, got shape {W.shape}")
    n = W.shape[0]
    if xi.shape != (n,):
        raise DimensionMismatch(f"xi must have length {n}, got shape {xi.shape}")

    for (i, j), w in np.ndenumerate(W):
        if not (-ZERO_TOL <= w <= 1.0 + ZERO_TOL):
            raise OutOfRangeEntry(f"W[{i}][{j}]", float(w))
    for i, v in enumerate(xi):
        if not (-ZERO_TOL <= v <= 1.0 + ZERO_TOL):
            raise OutOfRangeEntry(f"xi[{i}]", float(v))

    W = np.clip(W, 0.0, 1.0)
    W[W < ZERO_TOL] = 0.0
    sums = W.sum(axis=1)
    for i, total in enumerate(sums):
        if abs(total - 1.0) > ROW_SUM_TOL:
            raise NonStochasticRow(i, float(total))
    W = W / sums[:, None]

    xi = np.clip(xi, 0.0, 1.0)
    xi[xi < ZERO_TOL] = 0.0
    xi[xi > 1.0 - ZERO_TOL] = 1.0

    successors = tuple(
        tuple(int(v) for v in np.flatnonzero(W[:, u] > 0.0)) for u in range(n)
    )
    return InfluenceNetwork(_frozen(W), _frozen(xi), AgentPartition.from_xi(xi), successors)


# --------------------------------------------------------------------------
# strongly connected components


@dataclass(frozen=True)
class SccDecomposition:
    components: tuple
    is_independent: tuple
    component_period: tuple

    def isccs(self):
        return [c for c, ind in zip(self.components, self.is_independent) if ind]

    def component_of(self, v):
        for idx, comp in enumerate(self.components):
            if v in comp:
                return idx
        raise KeyError(v)


def tarjan(n, successors):
    """Iterative Tarjan; yields components sinks-first (reverse topological)."""
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack = []
    counter = 0
    out = []
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, pos = work.pop()
            if pos == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            succ = successors[v]
            while pos < len(succ):
                w = succ[pos]
                pos += 1
                if index[w] == -1:
                    work.append((v, pos))
                    work.append((w, 0))
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            else:
                if low[v] == index[v]:
                    comp = []
                    while True:
                        w = stack.pop()
                        on_stack[w] = False
                        comp.append(w)
                        if w == v:
                            break
                    out.append(frozenset(comp))
                if work:
                    parent = work[-1][0]
                    low[parent] = min(low[parent], low[v])
                continue
    return out


def component_period(members, successors) -> int:
    """gcd of cycle lengths inside a strongly connected vertex set.

    BFS levels from an arbitrary member; every internal arc u -> v
    contributes ``level[u] + 1 - level[v]``.  Returns 0 when the set has no
    internal arc (a singleton without self-loop).
    """
    members = set(members)
    root = min(members)
    level = {root: 0}
    queue = deque([root])
    g = 0
    while queue:
        u = queue.popleft()
        for v in successors[u]:
            if v not in members:
                continue
            if v not in level:
                level[v] = level[u] + 1
                queue.append(v)
            else:
                g = gcd(g, abs(level[u] + 1 - level[v]))
    return g


def scc_decompose(net: InfluenceNetwork) -> SccDecomposition:
    comps = tarjan(net.n, net.successors)
    owner = {}
    for idx, comp in enumerate(comps):
        for v in comp:
            owner[v] = idx
    independent = [True] * len(comps)
    for u in range(net.n):
        for v in net.successors[u]:
            if owner[u] != owner[v]:
                independent[owner[v]] = False
    periods = tuple(component_period(c, net.successors) for c in comps)
    return SccDecomposition(tuple(comps), tuple(independent), periods)


# --------------------------------------------------------------------------
# structural conditions


@dataclass(frozen=True)
class AssumptionCheck:
    holds: bool
    violating_isccs: tuple = ()


def check_assumption1(net: InfluenceNetwork, scc: Optional[SccDecomposition] = None) -> AssumptionCheck:
    """Every multi-agent ISCC made only of non-stubborn agents is aperiodic."""
    scc = scc or scc_decompose(net)
    bad = []
    for comp, ind, period in zip(scc.components, scc.is_independent, scc.component_period):
        if ind and len(comp) > 1 and comp <= net.partition.v_n and period != 1:
            bad.append(comp)
    return AssumptionCheck(not bad, tuple(sorted(bad, key=min)))


def check_assumption2(net: InfluenceNetwork, scc: Optional[SccDecomposition] = None) -> AssumptionCheck:
    """Every ISCC contains at least one stubborn agent (xi < 1)."""
    scc = scc or scc_decompose(net)
    bad = [c for c in scc.isccs() if c <= net.partition.v_n]
    return AssumptionCheck(not bad, tuple(sorted(bad, key=min)))


def restricted_reachable(net: InfluenceNetwork, source: int, allowed_intermediate: Iterable[int]) -> frozenset:
    """Vertices reachable from ``source`` through intermediates in the allowed set.

    The endpoint itself need not be allowed; the source is never reported.
    """
    if not 0 <= source < net.n:
        raise IndexError(f"vertex {source} out of range for n={net.n}")
    allowed = set(allowed_intermediate)
    seen = {source}
    found = set()
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in net.successors[u]:
            if v == source:
                continue
            found.add(v)
            if v not in seen and v in allowed:
                seen.add(v)
                queue.append(v)
    return frozenset(found)


def reachable(net: InfluenceNetwork, source: int) -> frozenset:
    return restricted_reachable(net, source, range(net.n))


def _subset(adj, vertices):
    if vertices is None:
        return list(range(adj.shape[0]))
    return sorted(set(vertices))


def has_spanning_tree(adj: np.ndarray, vertices=None) -> Optional[int]:
    """A root of the subgraph induced on ``vertices``, or None.

    ``adj[u, v]`` true means arc ``u -> v``.
    """
    verts = _subset(adj, vertices)
    if not verts:
        raise ValueError("vertex subset must be non-empty")
    vset = set(verts)
    for r in verts:
        seen = {r}
        queue = deque([r])
        while queue:
            u = queue.popleft()
            for v in verts:
                if v not in seen and adj[u, v]:
                    seen.add(v)
                    queue.append(v)
        if seen == vset:
            return r
    return None


def has_star_center(adj: np.ndarray, vertices=None) -> Optional[int]:
    """A vertex with a direct arc to every other vertex of the subset, or None."""
    verts = _subset(adj, vertices)
    if not verts:
        raise ValueError("vertex subset must be non-empty")
    for c in verts:
        if all(adj[c, v] for v in verts if v != c):
            return c
    return None


def is_star_center(adj: np.ndarray, vertices, c) -> bool:
    return all(adj[c, v] for v in vertices if v != c)
