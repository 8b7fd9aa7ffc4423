"""Friedkin-Johnsen opinion dynamics over sequences of interdependent issues."""
from .bounded import ConfidenceConfig, simulate_bc_sequence
from .errors import FJError
from .graph import InfluenceNetwork, build_network, check_assumption1, check_assumption2, scc_decompose
from .issues import check_corollary1, check_theorem2, simulate_issue_sequence
from .scenario import Scenario, load_scenario, write_trajectory
from .single import limit_influence_matrix, simulate_single_issue

__version__ = "0.1.0"

__all__ = [
    "ConfidenceConfig",
    "FJError",
    "InfluenceNetwork",
    "Scenario",
    "build_network",
    "check_assumption1",
    "check_assumption2",
    "check_corollary1",
    "check_theorem2",
    "limit_influence_matrix",
    "load_scenario",
    "scc_decompose",
    "simulate_bc_sequence",
    "simulate_issue_sequence",
    "simulate_single_issue",
    "write_trajectory",
]
