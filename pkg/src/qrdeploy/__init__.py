"""Quantum repeater placement over existing fiber topologies."""

__version__ = "0.1.0"

from .bench import BenchRecord, run_sweep, scaling_fit, solve
from .coverage import CoverageSet, coverage, coverage_score
from .estimators import ExactPlacer, GhostAttacher, LongLinkAugmenter, MCAPlacer, SCAPlacer
from .exact import OracleBudget, exact_min_placement, optimality_gap
from .exceptions import BudgetExceededError, InfeasibleError, TopologyError, UnknownNodeError
from .mca import center_mst, choose_centers, choose_centers_robust, run_mca
from .placement import Placement, SyntheticSite, read_solution, write_solution
from .sca import run_sca, run_sca_robust
from .topology import (
    DistanceOracle,
    Topology,
    all_pairs_distances,
    attach_ghosts,
    augment_long_links,
    generate_random_topology,
    read_topology,
    write_topology,
)
from .verify import VerifyReport, route_count, survive_failures, verify

__all__ = [
    "BenchRecord", "BudgetExceededError", "CoverageSet", "DistanceOracle", "ExactPlacer",
    "GhostAttacher", "InfeasibleError", "LongLinkAugmenter", "MCAPlacer", "OracleBudget",
    "Placement", "SCAPlacer", "SyntheticSite", "Topology", "TopologyError", "UnknownNodeError",
    "VerifyReport", "all_pairs_distances", "attach_ghosts", "augment_long_links", "center_mst",
    "choose_centers", "choose_centers_robust", "coverage", "coverage_score",
    "exact_min_placement", "generate_random_topology", "optimality_gap", "read_solution",
    "read_topology", "route_count", "run_mca", "run_sca", "run_sca_robust", "run_sweep",
    "scaling_fit", "solve", "survive_failures", "verify", "write_solution", "write_topology",
]
