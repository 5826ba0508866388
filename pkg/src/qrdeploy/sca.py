"""Single-center placement: grow one connected coverage region outward.

The first repeater is the node with the largest coverage area.  Every later
repeater is drawn from nodes already inside the covered region, so it is
within ``l_max`` of an existing repeater and no separate connection step is
needed.
"""

from __future__ import annotations

import logging

import numpy as np

from .coverage import CoverageModel
from .exceptions import InfeasibleError
from .placement import BRIDGE, GREEDY_COVER, CenterSet, Placement, SyntheticSite, empty_placement, sites_on_link
from .topology import DistanceOracle, Topology
from .verify import verify

logger = logging.getLogger(__name__)


def _site_reach(model: CoverageModel, site: SyntheticSite) -> np.ndarray:
    t = model.topology
    a, b = model.pos[site.a], model.pos[site.b]
    rest = t.edge_length(site.a, site.b) - site.offset_km
    dist = np.minimum(site.offset_km + model.dist[a], rest + model.dist[b])
    return dist <= model.l_max


def _bridge(model: CoverageModel, covered: np.ndarray, starts: np.ndarray):
    """Shortest link longer than ``l_max`` from an allowed covered node to an uncovered one."""
    t = model.topology
    best = None
    for i in np.flatnonzero(covered & starts):
        u = model.ids[i]
        for w in t.neighbors(u):
            j = model.pos.get(w)
            if j is None or covered[j]:
                continue
            length = t.edge_length(u, w)
            if length > model.l_max:
                cand = (length, u, w)
                if best is None or cand < best:
                    best = cand
    return best


def _sca_round(model: CoverageModel, excluded: set[str], tag: str = ""):
    """Grow one full cover, never selecting nodes in ``excluded``."""
    eligible = ~model.mask(excluded)
    if not eligible.any():
        raise InfeasibleError("no candidate nodes left for another round")
    sizes = np.where(eligible, model.reach.sum(axis=1), -1)
    first = int(np.argmax(sizes))
    centers = [(model.ids[first], GREEDY_COVER)]
    is_center = np.zeros(len(model), dtype=bool)
    is_center[first] = True
    covered = model.reach[first].copy()
    sites: list[SyntheticSite] = []

    while not covered.all():
        remaining = ~covered
        scores = model.scores(remaining)
        pool = covered & eligible & ~is_center
        best = np.where(pool, scores, -1)
        v = int(np.argmax(best))
        if best[v] > 0:
            centers.append((model.ids[v], GREEDY_COVER))
            is_center[v] = True
            covered |= model.reach[v]
            continue

        link = _bridge(model, covered, (eligible & ~is_center) | is_center)
        if link is None:
            node = model.ids[int(np.argmax(remaining))]
            raise InfeasibleError(
                f"coverage cannot be extended to node {node!r}: every route passes through "
                f"nodes reserved by earlier rounds", node=node)
        _, u, w = link
        iu = model.pos[u]
        if not is_center[iu]:
            centers.append((u, BRIDGE))
            is_center[iu] = True
            covered |= model.reach[iu]
        new = sites_on_link(model.topology, u, w, model.l_max, tag=tag)
        logger.debug("bridging %s-%s with %d synthetic repeaters", u, w, len(new))
        for s in new:
            covered |= _site_reach(model, s)
        sites.extend(new)
    return centers, sites


def _assemble(rounds, algorithm: str, l_max: float, k: int, name: str) -> Placement:
    centers = CenterSet()
    sites: list[SyntheticSite] = []
    for round_centers, round_sites in rounds:
        for nid, how in round_centers:
            centers = centers.add(nid, how)
        sites.extend(round_sites)
    return Placement(centers, (), tuple(sites), algorithm, float(l_max), int(k), name)


def _check(placement: Placement, t: Topology, oracle: DistanceOracle) -> Placement:
    report = verify(placement, t, oracle)
    if not report.feasible:
        raise InfeasibleError(
            f"sca placement leaves {report.failing_pair[0]} and {report.failing_pair[1]} "
            f"with fewer than {placement.k} route(s)", pair=report.failing_pair)
    return placement


def run_sca(t: Topology, oracle: DistanceOracle, l_max: float) -> Placement:
    model = CoverageModel(t, oracle, l_max)
    if model.empty_is_feasible():
        return empty_placement("sca", l_max, 1, t.name)
    placement = _assemble([_sca_round(model, set())], "sca", l_max, 1, t.name)
    return _check(placement, t, oracle)


def run_sca_robust(t: Topology, oracle: DistanceOracle, l_max: float, k: int) -> Placement:
    """Union of ``k`` independent single-center covers with pairwise disjoint repeaters."""
    if k < 1:
        raise ValueError("k must be >= 1")
    model = CoverageModel(t, oracle, l_max)
    if len(model) <= 1 or (k == 1 and model.empty_is_feasible()):
        return empty_placement("sca", l_max, k, t.name)
    rounds = []
    used: set[str] = set()
    for r in range(k):
        round_centers, round_sites = _sca_round(model, used, tag="" if r == 0 else f"#r{r + 1}")
        used.update(nid for nid, _ in round_centers)
        rounds.append((round_centers, round_sites))
    return _check(_assemble(rounds, "sca", l_max, k, t.name), t, oracle)
