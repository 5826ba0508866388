"""Multi-center placement.

Centers are picked first so that every node sits inside some center's
coverage area, then intermediate repeaters connect the centers along a
minimum spanning tree.  Two connection strategies are offered: walking the
shortest path between each pair of tree neighbours (``gp``), or picking nodes
reachable from both ends of several tree edges at once (``flex``).
"""

from __future__ import annotations

import logging
from typing import Iterable, Sequence

import numpy as np

from .coverage import CoverageModel
from .exceptions import InfeasibleError
from .placement import (ACCESS_RULE, GREEDY_COVER, CenterSet, Placement, SyntheticSite,
                        empty_placement, sites_on_link)
from .topology import DistanceOracle, Topology, restricted_shortest_path
from .verify import verify

logger = logging.getLogger(__name__)

VARIANTS = ("gp", "flex")


# -- center selection -----------------------------------------------------------

def _leaves_by_access(t: Topology) -> dict[str, list[str]]:
    """Access node -> its degree-1 neighbours (ghosts ignored)."""
    out: dict[str, list[str]] = {}
    for v in t.site_ids:
        if t.degree(v) == 1:
            (access,) = [w for w in t.neighbors(v) if t.kind(w) != "ghost"]
            out.setdefault(access, []).append(v)
    return {a: sorted(ls) for a, ls in sorted(out.items())}


def _leaves_far_apart(leaves: Sequence[str], oracle: DistanceOracle, l_max: float) -> bool:
    return any(oracle.d(x, y) > l_max
               for i, x in enumerate(leaves) for y in leaves[i + 1:])


def choose_centers(t: Topology, oracle: DistanceOracle, l_max: float) -> CenterSet:
    """Centers whose coverage areas jointly contain every node.

    Access nodes whose leaves are more than ``l_max`` apart are taken first;
    the rest is greedy: among still-uncovered nodes, take the one covering
    the most uncovered nodes (ties to the smallest ID).
    """
    model = CoverageModel(t, oracle, l_max)
    covered = np.zeros(len(model), dtype=bool)
    centers = CenterSet()
    for access, leaves in _leaves_by_access(t).items():
        if _leaves_far_apart(leaves, oracle, l_max):
            centers = centers.add(access, ACCESS_RULE)
            covered |= model.reach[model.pos[access]]
    while not covered.all():
        remaining = ~covered
        scores = np.where(remaining, model.scores(remaining), -1)
        v = int(np.argmax(scores))
        centers = centers.add(model.ids[v], GREEDY_COVER)
        covered |= model.reach[v]
    return centers


def _center_round(model: CoverageModel, t: Topology, candidates: np.ndarray,
                  demand: np.ndarray) -> list[tuple[str, str]]:
    """One cover round restricted to ``candidates`` for the nodes in ``demand``."""
    picked: list[tuple[str, str]] = []
    covered = ~demand
    for access, leaves in _leaves_by_access(t).items():
        if not candidates[model.pos[access]]:
            continue
        pending = [x for x in leaves if demand[model.pos[x]]]
        if _leaves_far_apart(pending, model.oracle, model.l_max):
            picked.append((access, ACCESS_RULE))
            covered |= model.reach[model.pos[access]]
    available = candidates.copy()
    for nid, _ in picked:
        available[model.pos[nid]] = False
    while not covered.all():
        remaining = ~covered
        scores = model.scores(remaining)
        pool = remaining & available
        if not pool.any():
            pool = available.copy()
        pool &= scores > 0
        if not pool.any():
            node = model.ids[int(np.argmax(remaining))]
            raise InfeasibleError(
                f"node {node!r} cannot be covered by another center within {model.l_max:g} "
                f"(all nearby candidates already used)", node=node)
        v = int(np.argmax(np.where(pool, scores, -1)))
        picked.append((model.ids[v], GREEDY_COVER))
        available[v] = False
        covered |= model.reach[v]
    return picked


def choose_centers_robust(t: Topology, oracle: DistanceOracle, l_max: float, k: int) -> CenterSet:
    """Repeat center selection ``k`` times so every node sees ``k`` centers.

    Each round may not reuse earlier centers, and only serves nodes still
    covered by fewer than ``k`` centers.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    model = CoverageModel(t, oracle, l_max)
    candidates = np.ones(len(model), dtype=bool)
    multiplicity = np.zeros(len(model), dtype=int)
    centers = CenterSet()
    for _ in range(k):
        demand = multiplicity < k
        if not demand.any():
            break
        for nid, how in _center_round(model, t, candidates, demand):
            centers = centers.add(nid, how)
            i = model.pos[nid]
            candidates[i] = False
            multiplicity += model.reach[i]
    return centers


# -- spanning tree over centers -------------------------------------------------

def center_mst(centers: Iterable[str], oracle: DistanceOracle) -> list[tuple[str, str]]:
    """Kruskal MST of the complete graph on ``centers`` weighted by path distance.

    Edges come back in acceptance order, each as (smaller ID, larger ID).
    """
    nodes = sorted(centers)
    parent = {c: c for c in nodes}

    def root(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    pairs = sorted(((oracle.d(a, b), a, b) for i, a in enumerate(nodes) for b in nodes[i + 1:]))
    tree = []
    for _, a, b in pairs:
        ra, rb = root(a), root(b)
        if ra != rb:
            parent[rb] = ra
            tree.append((a, b))
            if len(tree) == len(nodes) - 1:
                break
    return tree


# -- chains of repeaters along paths --------------------------------------------

class _ChainBuilder:
    """Lays repeaters along node paths so consecutive repeaters are within ``l_max``."""

    def __init__(self, t: Topology, oracle: DistanceOracle, l_max: float, repeaters: Iterable[str]):
        self.t = t
        self.oracle = oracle
        self.l_max = l_max
        self.repeaters = set(repeaters)
        self.intermediates: list[str] = []
        self.sites: list[SyntheticSite] = []
        self._link_sites: dict[tuple[str, str], list[SyntheticSite]] = {}

    def dist(self, anchor, node: str) -> float:
        if isinstance(anchor, str):
            return self.oracle.d(anchor, node)
        rest = self.t.edge_length(anchor.a, anchor.b) - anchor.offset_km
        return min(anchor.offset_km + self.oracle.d(anchor.a, node),
                   rest + self.oracle.d(anchor.b, node))

    def _sites(self, u: str, v: str) -> list[SyntheticSite]:
        key = (u, v) if u <= v else (v, u)
        if key not in self._link_sites:
            forward = sites_on_link(self.t, key[0], key[1], self.l_max)
            self._link_sites[key] = forward
            self.sites.extend(forward)
            logger.debug("inserted %d synthetic repeaters on %s-%s", len(forward), *key)
        forward = self._link_sites[key]
        return forward if u == key[0] else forward[::-1]

    def walk(self, path: Sequence[str]) -> None:
        # anchor: last repeater position behind the walk (node ID or on-link site)
        anchor = path[0]
        for idx in range(1, len(path)):
            cur = path[idx]
            if self.dist(anchor, cur) > self.l_max:
                prev = path[idx - 1]
                if prev != anchor:
                    if prev not in self.repeaters:
                        self.repeaters.add(prev)
                        self.intermediates.append(prev)
                    anchor = prev
                if self.dist(anchor, cur) > self.l_max:
                    anchor = self._sites(prev, cur)[-1]
            if cur in self.repeaters:
                anchor = cur


def intermediates_gp(centers: Iterable[str], t: Topology, oracle: DistanceOracle,
                     l_max: float) -> tuple[tuple[str, ...], tuple[SyntheticSite, ...]]:
    """Repeaters on the shortest paths between MST-adjacent centers.

    Walking each path, the node before the first one out of reach of the last
    repeater is selected; links longer than ``l_max`` get synthetic sites.
    """
    centers = list(centers)
    if len(centers) <= 1:
        return (), ()
    builder = _ChainBuilder(t, oracle, l_max, centers)
    for a, b in center_mst(centers, oracle):
        builder.walk(oracle.path(a, b))
    return tuple(builder.intermediates), tuple(builder.sites)


def intermediates_flex(centers: Iterable[str], t: Topology, oracle: DistanceOracle,
                       l_max: float) -> tuple[tuple[str, ...], tuple[SyntheticSite, ...]]:
    """Repeaters shared between MST-adjacent center pairs that are out of direct reach.

    A node within ``l_max`` of both ends of a long tree edge bridges it.  The
    node bridging the most still-open edges is taken repeatedly; edges with
    no such node fall back to :func:`intermediates_gp` on that pair.
    """
    centers = list(centers)
    if len(centers) <= 1:
        return (), ()
    model = CoverageModel(t, oracle, l_max)
    is_center = model.mask(centers)
    pending, fallback = [], []
    for a, b in center_mst(centers, oracle):
        if oracle.d(a, b) <= l_max:
            continue
        common = model.reach[model.pos[a]] & model.reach[model.pos[b]]
        if (common & is_center).any():
            continue
        (pending if common.any() else fallback).append((a, b, common))

    chosen: list[str] = []
    while pending:
        counts = np.sum([c for _, _, c in pending], axis=0)
        v = int(np.argmax(counts))
        chosen.append(model.ids[v])
        pending = [e for e in pending if not e[2][v]]

    builder = _ChainBuilder(t, oracle, l_max, centers + chosen)
    for a, b, _ in fallback:
        builder.walk(oracle.path(a, b))
    return tuple(chosen + builder.intermediates), tuple(builder.sites)


def _redundant_chains(builder: _ChainBuilder, t: Topology, a: str, b: str, count: int,
                      banned: set[str]) -> None:
    """Add ``count`` more node-disjoint repeater chains between centers ``a`` and ``b``."""
    banned = set(banned)
    banned_links: set[tuple[str, str]] = set()
    for made in range(count):
        if not banned and not banned_links:
            path = builder.oracle.path(a, b)
        else:
            path = restricted_shortest_path(t, a, b, banned_nodes=banned, banned_edges=banned_links)
        if path is None:
            raise InfeasibleError(
                f"centers {a!r} and {b!r} admit only {made} further disjoint route(s), "
                f"{count} needed", pair=(a, b))
        builder.walk(path)
        banned.update(path[1:-1])
        if len(path) == 2:
            banned_links.add((a, b))


def intermediates_flex_robust(centers: Iterable[str], t: Topology, oracle: DistanceOracle,
                              l_max: float, k: int) -> tuple[tuple[str, ...], tuple[SyntheticSite, ...]]:
    """Flexible intermediates giving each long MST edge ``k`` disjoint bridges.

    Each long tree edge starts with a demand of ``k``; every shared node
    (existing centers first) pays one unit towards each edge it bridges.
    Edges still short of ``k`` once shared nodes run out get disjoint
    graph-path chains for the remainder.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    centers = list(centers)
    if len(centers) <= 1:
        return (), ()
    model = CoverageModel(t, oracle, l_max)
    is_center = model.mask(centers)
    edges = []
    for a, b in center_mst(centers, oracle):
        if oracle.d(a, b) <= l_max:
            continue
        common = model.reach[model.pos[a]] & model.reach[model.pos[b]]
        served = [model.ids[i] for i in np.flatnonzero(common & is_center)]
        edges.append({"a": a, "b": b, "common": common, "need": k - len(served), "used": served})

    available = ~is_center
    chosen: list[str] = []

    def active():
        return [e for e in edges if e["need"] > 0 and (e["common"] & available).any()]

    open_edges = active()
    while open_edges:
        counts = np.sum([e["common"] & available for e in open_edges], axis=0)
        v = int(np.argmax(counts))
        chosen.append(model.ids[v])
        available[v] = False
        for e in open_edges:
            if e["common"][v]:
                e["need"] -= 1
                e["used"].append(model.ids[v])
        open_edges = active()

    builder = _ChainBuilder(t, oracle, l_max, centers + chosen)
    for e in edges:
        if e["need"] > 0:
            _redundant_chains(builder, t, e["a"], e["b"], e["need"], set(e["used"]))
    return tuple(chosen + builder.intermediates), tuple(builder.sites)


def intermediates_gp_robust(centers: Iterable[str], t: Topology, oracle: DistanceOracle,
                            l_max: float, k: int) -> tuple[tuple[str, ...], tuple[SyntheticSite, ...]]:
    """``k`` node-disjoint graph-path chains for every long MST edge."""
    if k < 1:
        raise ValueError("k must be >= 1")
    centers = list(centers)
    if len(centers) <= 1:
        return (), ()
    builder = _ChainBuilder(t, oracle, l_max, centers)
    for a, b in center_mst(centers, oracle):
        if k == 1 or oracle.d(a, b) <= l_max:
            builder.walk(oracle.path(a, b))
        else:
            _redundant_chains(builder, t, a, b, k, set())
    return tuple(builder.intermediates), tuple(builder.sites)


# -- composition ------------------------------------------------------------------

def run_mca(t: Topology, oracle: DistanceOracle, l_max: float, k: int = 1, variant: str = "flex",
            centers: Sequence[str] | None = None) -> Placement:
    """Full multi-center placement, verified at ``(l_max, k)``.

    ``centers`` overrides center selection (useful for reproducing a known
    configuration).  Raises :class:`InfeasibleError` when the result does not
    give every endpoint pair ``k`` routes.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    if k < 1:
        raise ValueError("k must be >= 1")
    algorithm = f"mca_{variant}"
    model = CoverageModel(t, oracle, l_max)
    if len(model) <= 1 or (k == 1 and model.empty_is_feasible()):
        return empty_placement(algorithm, l_max, k, t.name)

    if centers is not None:
        center_set = CenterSet(tuple(centers), ("given",) * len(centers))
    elif k == 1:
        center_set = choose_centers(t, oracle, l_max)
    else:
        center_set = choose_centers_robust(t, oracle, l_max, k)

    if variant == "gp":
        connect = intermediates_gp if k == 1 else intermediates_gp_robust
    else:
        connect = intermediates_flex if k == 1 else intermediates_flex_robust
    args = (list(center_set), t, oracle, l_max) + (() if k == 1 else (k,))
    inter, sites = connect(*args)

    placement = Placement(center_set, inter, sites, algorithm, float(l_max), int(k), t.name)
    report = verify(placement, t, oracle, l_max, k)
    if not report.feasible:
        raise InfeasibleError(
            f"{algorithm} placement with {placement.n_repeaters} repeaters leaves "
            f"{report.failing_pair[0]} and {report.failing_pair[1]} with fewer than {k} route(s)",
            pair=report.failing_pair)
    return placement
