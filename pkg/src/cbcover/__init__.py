"""Approximation algorithms for connected budgeted coverage and node-weighted Steiner trees."""

from cbcover.errors import (
    CapExceededError,
    CertificateError,
    CoverageError,
    InfeasibleBudgetError,
    InfeasibleError,
    LpError,
    UnreachableError,
    ValidationError,
)
from cbcover.graph import (
    DistanceMap,
    Endpoints,
    NodeWeightedDigraph,
    OutTree,
    b_proper_prune,
    extract_out_tree,
    induced_subgraph,
    shortest_paths,
    validate_out_tree,
)
from cbcover.instances import CoverageInstance, GroupInstance, SteinerInstance

__version__ = "0.1.0"

__all__ = [
    "CapExceededError",
    "CertificateError",
    "CoverageError",
    "CoverageInstance",
    "DistanceMap",
    "Endpoints",
    "GroupInstance",
    "InfeasibleBudgetError",
    "InfeasibleError",
    "LpError",
    "NodeWeightedDigraph",
    "OutTree",
    "SteinerInstance",
    "UnreachableError",
    "ValidationError",
    "b_proper_prune",
    "extract_out_tree",
    "induced_subgraph",
    "shortest_paths",
    "validate_out_tree",
]
