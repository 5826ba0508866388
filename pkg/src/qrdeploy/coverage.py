"""Coverage areas: which nodes a repeater can serve within ``l_max`` of graph distance."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .topology import DistanceOracle, Topology


@dataclass(frozen=True)
class CoverageSet:
    center: str
    members: frozenset
    l_max: float

    def __contains__(self, node_id: object) -> bool:
        return node_id in self.members

    def __len__(self) -> int:
        return len(self.members)


def _check_l_max(l_max: float) -> None:
    if not l_max > 0:
        raise ValueError(f"l_max must be positive, got {l_max}")


def coverage(center: str, oracle: DistanceOracle, l_max: float) -> CoverageSet:
    """Non-ghost nodes whose shortest-path distance from ``center`` is at most ``l_max``."""
    _check_l_max(l_max)
    row = oracle.row(center)
    members = frozenset(nid for nid in oracle.site_ids if row[oracle.index[nid]] <= l_max)
    return CoverageSet(center, members, l_max)


def coverage_score(candidate: str, uncovered: Iterable[str], oracle: DistanceOracle,
                   l_max: float) -> int:
    """How many of ``uncovered`` lie within ``l_max`` of ``candidate`` (ghosts ignored)."""
    row = oracle.row(candidate)
    count = 0
    for u in uncovered:
        if u in oracle.ghosts:
            continue
        if row[oracle.idx(u)] <= l_max:
            count += 1
    return count


class CoverageModel:
    """Boolean reach matrix over the non-ghost nodes of a topology.

    Row/column order is the sorted site order, so ``argmax`` over a score
    vector breaks ties towards the lexicographically smallest ID.
    """

    def __init__(self, t: Topology, oracle: DistanceOracle, l_max: float):
        _check_l_max(l_max)
        self.topology = t
        self.oracle = oracle
        self.l_max = float(l_max)
        self.ids: list[str] = t.site_ids
        self.pos = {nid: i for i, nid in enumerate(self.ids)}
        self.dist = oracle.submatrix(self.ids)
        self.reach = self.dist <= self.l_max

    def __len__(self) -> int:
        return len(self.ids)

    def mask(self, ids: Iterable[str]) -> np.ndarray:
        m = np.zeros(len(self.ids), dtype=bool)
        for nid in ids:
            m[self.pos[nid]] = True
        return m

    def names(self, mask: np.ndarray) -> list[str]:
        return [self.ids[i] for i in np.flatnonzero(mask)]

    def scores(self, uncovered: np.ndarray) -> np.ndarray:
        """coverage_score of every node against the uncovered mask."""
        return self.reach[:, uncovered].sum(axis=1)

    def empty_is_feasible(self) -> bool:
        """True when every pair of endpoints is already within ``l_max``."""
        return bool(self.reach.all())
