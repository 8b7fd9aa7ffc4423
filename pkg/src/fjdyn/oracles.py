"""Independent numerical oracles and random fixtures.

Nothing here calls into the analytical predicates it is meant to check:
the eigen-route uses LAPACK, the augmented route iterates the 2n-state
leader/follower system, and the brute-force classifiers iterate the raw
dynamics without the closed-form influence matrix.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import gcd

import numpy as np

from .errors import EigensolverFailure
from .graph import InfluenceNetwork, build_network

SPECTRAL_TOL = 1e-8
MAX_DENSE_N = 64


@dataclass(frozen=True)
class SpectralReport:
    eigenvalues: tuple
    spectral_radius: float
    unit_circle_eigenvalues: tuple


def eigenvalues_dense(A, tol: float = SPECTRAL_TOL) -> SpectralReport:
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if A.ndim != 2 or A.shape[1] != n:
        raise ValueError(f"square matrix required, got shape {A.shape}")
    if n > MAX_DENSE_N:
        raise ValueError(f"dense eigensolver limited to n <= {MAX_DENSE_N}, got {n}")
    try:
        lam = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise EigensolverFailure(str(exc)) from exc
    if not np.all(np.isfinite(lam)):
        raise EigensolverFailure("non-finite eigenvalue")
    # fixed ordering keeps reports byte-stable
    order = np.lexsort((lam.imag, lam.real, -np.abs(lam)))
    lam = lam[order]
    mods = np.abs(lam)
    radius = float(mods.max()) if n else 0.0
    unit = tuple(complex(z) for z, m in zip(lam, mods) if m >= 1.0 - tol)
    return SpectralReport(tuple(complex(z) for z in lam), radius, unit)


def charpoly_roots(A) -> np.ndarray:
    """Eigenvalues as companion-matrix roots of the characteristic polynomial."""
    return np.roots(np.poly(np.asarray(A, dtype=float)))


def augmented_matrix(net: InfluenceNetwork) -> np.ndarray:
    n = net.n
    top = np.hstack([np.eye(n), np.zeros((n, n))])
    bottom = np.hstack([np.diag(1.0 - net.xi), net.XiW])
    return np.vstack([top, bottom])


def simulate_augmented(net: InfluenceNetwork, x0, k: int) -> np.ndarray:
    """Opinions at time ``k`` via the stacked state ``[x(0); x(k)]``."""
    if k < 0:
        raise ValueError("k must be >= 0")
    x0 = np.asarray(x0, dtype=float)
    M = augmented_matrix(net)
    z = np.concatenate([x0, x0])
    for _ in range(k):
        z = M @ z
    return z[net.n:]


# --------------------------------------------------------------------------
# fixtures


def random_network(n, density, class_mix, seed) -> InfluenceNetwork:
    """Seeded random network.

    Each off-diagonal or diagonal entry of the support is kept with
    probability ``density``; rows left empty get one random entry.  Weights
    are uniform on [0.1, 1) before row normalisation.  Classes are drawn
    from ``class_mix = (p_f, p_p, p_n)``; partially stubborn agents get
    xi uniform on (0.05, 0.95).
    """
    if not 0.0 < density <= 1.0:
        raise ValueError("density must lie in (0, 1]")
    mix = np.asarray(class_mix, dtype=float)
    if mix.shape != (3,) or np.any(mix < 0) or abs(mix.sum() - 1.0) > 1e-12:
        raise ValueError("class_mix must be three non-negative probabilities summing to 1")
    rng = np.random.default_rng(seed)
    support = rng.random((n, n)) < density
    for i in range(n):
        if not support[i].any():
            support[i, rng.integers(n)] = True
    weights = rng.uniform(0.1, 1.0, size=(n, n)) * support
    W = weights / weights.sum(axis=1, keepdims=True)
    classes = rng.choice(3, size=n, p=mix)
    xi = np.where(classes == 0, 0.0, np.where(classes == 2, 1.0, rng.uniform(0.05, 0.95, size=n)))
    return build_network(W, xi)


# --------------------------------------------------------------------------
# brute-force graph oracles (small n only)


def transitive_closure(adj) -> np.ndarray:
    R = np.array(adj, dtype=bool) | np.eye(len(adj), dtype=bool)
    for k in range(len(R)):
        R |= R[:, [k]] & R[[k], :]
    return R


def scc_bruteforce(net: InfluenceNetwork) -> list:
    """SCCs as classes of mutual reachability."""
    R = transitive_closure(net.arc_matrix())
    mutual = R & R.T
    comps, seen = [], set()
    for v in range(net.n):
        if v not in seen:
            comp = frozenset(int(u) for u in np.flatnonzero(mutual[v]))
            seen |= comp
            comps.append(comp)
    return comps


def simple_cycle_lengths(adj, vertices) -> set:
    """Lengths of all simple cycles inside ``vertices`` by exhaustive DFS."""
    verts = sorted(vertices)
    lengths = set()

    def extend(start, path, onpath):
        u = path[-1]
        for v in verts:
            if not adj[u, v]:
                continue
            if v == start:
                lengths.add(len(path))
            elif v > start and v not in onpath:
                onpath.add(v)
                path.append(v)
                extend(start, path, onpath)
                path.pop()
                onpath.discard(v)

    for s in verts:
        extend(s, [s], {s})
    return lengths


def cycle_gcd_bruteforce(adj, vertices) -> int:
    g = 0
    for length in simple_cycle_lengths(adj, vertices):
        g = gcd(g, length)
    return g


def simple_paths(adj, src, dst, vertices=None):
    """Every simple path src -> ... -> dst as a vertex tuple."""
    verts = range(len(adj)) if vertices is None else sorted(vertices)
    out = []

    def walk(path):
        u = path[-1]
        for v in verts:
            if not adj[u, v] or v in path:
                continue
            if v == dst:
                out.append(tuple(path) + (v,))
            else:
                walk(path + [v])

    if src != dst:
        walk([src])
    return out


def cycle_lengths_upto(adj, vertices, max_len) -> set:
    """Closed-walk lengths up to ``max_len`` found by boolean matrix powers."""
    idx = sorted(vertices)
    A = np.asarray(adj, dtype=bool)[np.ix_(idx, idx)].astype(int)
    P = np.eye(len(idx), dtype=int)
    found = set()
    for m in range(1, max_len + 1):
        P = np.minimum(P @ A, 1)
        if np.trace(P) > 0:
            found.add(m)
    return found


# --------------------------------------------------------------------------
# empirical outcome classifier


def _classify_vector(x, tol):
    spread = float(x.max() - x.min()) if x.size else 0.0
    return "consensus" if spread <= tol else "clusters"


def _fj_limit_by_iteration(net, budget, tol=1e-15):
    """Influence limit by iterating the raw dynamics on every basis vector."""
    XiW, anchor = net.XiW, np.diag(1.0 - net.xi)
    P = np.eye(net.n)
    for _ in range(budget):
        nxt = XiW @ P + anchor
        if np.max(np.abs(nxt - P)) <= tol:
            return nxt, True
        P = nxt
    return P, False


def brute_force_outcome(net: InfluenceNetwork, x00, mode: str, budget: int = 20000,
                        tol: float = 1e-10, consensus_tol: float = 1e-6,
                        d: float | None = None, h: float | None = None) -> str:
    """Long-horizon empirical label for one run.

    Labels: ``converges``, ``oscillates``, ``consensus``, ``clusters``,
    ``budget_exhausted``.
    """
    x00 = np.asarray(x00, dtype=float)
    if mode == "single_issue":
        XiW, anchor = net.XiW, (1.0 - net.xi) * x00
        x = x00.copy()
        half = max(budget // 2, 1)
        mid_inc = inc = 0.0
        for k in range(1, 2 * half + 1):
            nxt = XiW @ x + anchor
            inc = float(np.max(np.abs(nxt - x)))
            x = nxt
            if inc <= tol:
                return "converges"
            if k == half:
                mid_inc = inc
        # rotation on the unit circle keeps the step size from shrinking;
        # comparing x(k) with x(2k) alone is blind when the period divides k
        if inc >= 0.5 * mid_inc:
            return "oscillates"
        return "budget_exhausted"

    P, ok = _fj_limit_by_iteration(net, budget)
    if not ok:
        return "budget_exhausted"
    if mode == "issue_sequence":
        x = x00.copy()
        for _ in range(budget):
            nxt = P @ x
            if np.max(np.abs(nxt - x)) <= 1e-12:
                return _classify_vector(nxt, consensus_tol)
            x = nxt
        return "budget_exhausted"
    if mode == "bounded_confidence":
        if d is None or h is None:
            raise ValueError("bounded_confidence mode needs d and h")
        x = x00.copy()
        for _ in range(budget):
            y = P @ x
            close = np.abs(y[:, None] - y[None, :]) < d
            H = h * close
            np.fill_diagonal(H, 0.0)
            np.fill_diagonal(H, 1.0 - H.sum(axis=1))
            nxt = H @ y
            if np.max(np.abs(nxt - x)) <= 1e-12:
                return _classify_vector(nxt, consensus_tol)
            x = nxt
        return "budget_exhausted"
    raise ValueError(f"unknown mode {mode!r}")
