"""Small hand-built networks used by tests, the CLI samples and the suites.

The ten-agent topologies are reconstructions: only agent classes, the
qualitative SCC structure and the initial opinions are pinned down, so the
weights below were chosen to reproduce those features.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .bounded import ConfidenceConfig
from .graph import InfluenceNetwork, build_network


@dataclass(frozen=True)
class Fixture:
    name: str
    net: InfluenceNetwork
    x0: np.ndarray
    confidence: Optional[ConfidenceConfig] = None


def from_listeners(n: int, rows: dict) -> np.ndarray:
    """Weight matrix from ``{agent: {listened_to: weight}}`` with 1-based labels."""
    W = np.zeros((n, n))
    for i, row in rows.items():
        for j, w in row.items():
            W[i - 1, j - 1] = w
    return W


def two_agent() -> Fixture:
    """Two partially stubborn agents with xi = 1/2 listening to each other.

    Psi = [[2/3, 1/3], [1/3, 2/3]], so issue sequences from (0, 1) meet at 1/2.
    """
    W = np.array([[0.0, 1.0], [1.0, 0.0]])
    return Fixture("two_agent", build_network(W, [0.5, 0.5]), np.array([0.0, 1.0]))


def two_cycle() -> Fixture:
    """Non-stubborn pair swapping opinions forever."""
    W = np.array([[0.0, 1.0], [1.0, 0.0]])
    return Fixture("two_cycle", build_network(W, [1.0, 1.0]), np.array([0.0, 1.0]))


def three_cycle() -> Fixture:
    """Non-stubborn directed 3-cycle (period 3)."""
    W = np.roll(np.eye(3), 1, axis=1)
    return Fixture("three_cycle", build_network(W, [1.0, 1.0, 1.0]), np.array([0.0, 1.0, 2.0]))


def periodic_but_convergent() -> Fixture:
    """Ten agents whose graph has a period-3 ISCC that is anchored by stubborn agents.

    W itself has the cube roots of unity on the unit circle, yet the only
    maximum-modulus eigenvalue of Xi W is 1, so single-issue opinions converge.
    Agent 7 (0-based 6) is non-stubborn and reached by stubborn agents, so its
    column of the limit vanishes; the non-stubborn ISCC {8, 9, 10} keeps weight.
    """
    W = from_listeners(10, {
        1: {5: 1.0}, 4: {1: 1.0}, 5: {4: 1.0},
        3: {7: 0.5, 3: 0.5}, 6: {3: 0.5, 5: 0.5}, 7: {6: 0.6, 7: 0.4},
        2: {2: 1.0},
        8: {10: 1.0}, 9: {8: 0.5, 10: 0.5}, 10: {9: 1.0},
    })
    xi = [0, 0, 0, 0.2, 0.5, 0.7, 1, 1, 1, 1]
    x0 = np.array([-1, 0, 1, 1, -2, 0, -1, -2, 1, 2], dtype=float)
    return Fixture("periodic_but_convergent", build_network(W, xi), x0)


def ring_consensus() -> Fixture:
    """No fully stubborn agents; partially stubborn agent 1 (0-based 0) reaches
    every other partially stubborn one, so issue sequences reach consensus."""
    W = from_listeners(10, {
        1: {5: 1.0}, 2: {1: 1.0}, 3: {2: 1.0}, 4: {3: 0.5, 7: 0.5}, 5: {4: 1.0},
        6: {1: 1.0}, 7: {6: 0.5, 3: 0.5}, 8: {5: 1.0}, 9: {8: 0.5, 10: 0.5},
        10: {9: 0.5, 2: 0.5},
    })
    xi = [0.3, 0.6, 0.2, 0.8, 0.7, 1, 1, 1, 1, 1]
    x0 = np.array([-1, 0, 1, 1, -2, 0, -1, -2, 1, 2], dtype=float)
    return Fixture("ring_consensus", build_network(W, xi), x0)


def bounded_clique() -> Fixture:
    """Three fully stubborn agents under bounded confidence (d = 1, h = 0.1).

    The first settled opinions are
    (-0.7, 0.2, 0, 0.2, 1.46, -1.9876, 0.0082, 0.0274, 0.2, -0.25): agents
    5 and 6 (0-based 4, 5) are isolated and the other eight form a clique.
    """
    W = from_listeners(10, {
        1: {1: 1.0}, 2: {2: 1.0}, 3: {3: 1.0}, 4: {2: 1.0}, 5: {4: 1.0},
        6: {4: 0.31, 3: 0.69}, 7: {3: 0.959, 4: 0.041}, 8: {3: 0.863, 4: 0.137},
        9: {2: 1.0}, 10: {1: 0.5, 2: 0.5},
    })
    xi = [0, 0, 0, 0.8, 0.3, 0.2, 1, 1, 1, 1]
    x0 = np.array([-0.7, 0.2, 0, 0.2, 2, -2.5, -1.5, 1, 1.5, -1])
    return Fixture("bounded_clique", build_network(W, xi), x0, ConfidenceConfig(1.0, 0.1))


ALL = {f.__name__: f for f in (two_agent, two_cycle, three_cycle, periodic_but_convergent,
                               ring_consensus, bounded_clique)}


def all_fixtures() -> list:
    return [make() for make in ALL.values()]
