"""Exact minimum placement by exhaustive search over node subsets.

Only usable on small instances; it exists to measure how far the heuristics
land from the optimum.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .exceptions import BudgetExceededError, InfeasibleError
from .placement import Placement, repeater_placement
from .topology import DistanceOracle, Topology, ghost_id
from .verify import ReachChecker


@dataclass(frozen=True)
class OracleBudget:
    max_candidate_nodes: int = 20
    max_subsets: int = 5_000_000


def exact_min_placement(t: Topology, oracle: DistanceOracle, l_max: float, k: int = 1,
                        budget: OracleBudget | None = None) -> Placement:
    """Smallest repeater set (ties: lexicographically smallest) that verifies at ``(l_max, k)``.

    Subsets are enumerated by increasing size in lexicographic order, so the
    first feasible one is the answer.
    """
    budget = budget or OracleBudget()
    if k < 1:
        raise ValueError("k must be >= 1")
    ids = t.site_ids
    n = len(ids)
    if n > budget.max_candidate_nodes:
        raise BudgetExceededError(
            f"exact search limited to {budget.max_candidate_nodes} candidate nodes, "
            f"topology {t.name!r} has {n}")
    dist = oracle.submatrix(ids)
    checker = ReachChecker(dist, range(n), l_max)

    failure, _ = checker.first_failure(range(n), k)
    if failure is not None:
        a, b = ids[failure[0]], ids[failure[1]]
        raise InfeasibleError(
            f"no repeater set on existing nodes gives {ghost_id(a)} and {ghost_id(b)} "
            f"{k} route(s) at l_max={l_max:g}", pair=(ghost_id(a), ghost_id(b)))

    reach = dist <= l_max
    # a pair without a direct link needs all k routes through repeaters near each end
    need = [k - int(reach[i].all()) for i in range(n)] if n > 1 else [0]
    near_bits = [sum(1 << j for j in np.flatnonzero(reach[i])) for i in range(n)]
    demanding = [(near_bits[i], need[i]) for i in range(n) if need[i] > 0]

    evaluated = 0
    for size in range(n + 1):
        for combo in itertools.combinations(range(n), size):
            evaluated += 1
            if evaluated > budget.max_subsets:
                raise BudgetExceededError(
                    f"exact search exceeded {budget.max_subsets} subsets on {t.name!r}")
            mask = 0
            for j in combo:
                mask |= 1 << j
            if any((bits & mask).bit_count() < req for bits, req in demanding):
                continue
            failure, _ = checker.first_failure(combo, k)
            if failure is None:
                return repeater_placement((ids[j] for j in combo), algorithm="exact",
                                          l_max=l_max, k=k, topology_name=t.name)
    raise AssertionError("full node set verified but no subset did")  # unreachable


def optimality_gap(heuristic: Placement, exact: Placement) -> int:
    """Extra repeaters the heuristic uses over the exact optimum."""
    if heuristic.l_max != exact.l_max or heuristic.k != exact.k:
        raise ValueError(
            f"placements solved different problems: l_max {heuristic.l_max} vs {exact.l_max}, "
            f"k {heuristic.k} vs {exact.k}")
    if heuristic.topology_name and exact.topology_name and heuristic.topology_name != exact.topology_name:
        raise ValueError(f"placements are for different topologies: "
                         f"{heuristic.topology_name!r} vs {exact.topology_name!r}")
    return heuristic.n_repeaters - exact.n_repeaters
