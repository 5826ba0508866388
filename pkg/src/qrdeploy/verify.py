"""Feasibility and robustness checks for placements.

Endpoints are the non-ghost nodes (each stands for the users attached to it).
Two endpoints can talk when they are within ``l_max`` of each other or when a
chain of repeaters links them, every hop at most ``l_max``; endpoints never
relay.  Robustness ``k`` asks for ``k`` internally node-disjoint routes per
pair, a direct link counting as one route.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .exceptions import UnknownNodeError
from .placement import Placement, extended_distances
from .topology import GHOST, DistanceOracle, Topology, ghost_id


@dataclass(frozen=True)
class VerifyReport:
    feasible: bool
    failing_pair: tuple[str, str] | None = None
    min_routes: dict = field(default_factory=dict)
    k: int = 1
    l_max: float = 0.0
    notes: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.feasible


def disjoint_routes(src: np.ndarray, dst: np.ndarray, adj: np.ndarray, cap: int | None = None) -> int:
    """Maximum number of node-disjoint repeater chains from ``src`` to ``dst``.

    ``src``/``dst`` are boolean masks of the repeaters adjacent to each
    endpoint, ``adj`` the repeater-repeater reach matrix.  Unit vertex
    capacities via in/out splitting; augmenting paths by BFS, stopping early
    once ``cap`` routes are found.
    """
    r = len(src)
    if r == 0 or not src.any() or not dst.any():
        return 0
    limit = int(min(src.sum(), dst.sum()))
    if cap is not None:
        limit = min(limit, cap)
    source, sink = 2 * r, 2 * r + 1
    graph: list[list[int]] = [[] for _ in range(2 * r + 2)]
    cap_of: dict[tuple[int, int], int] = {}

    def arc(u: int, v: int) -> None:
        if (u, v) not in cap_of:
            graph[u].append(v)
            graph[v].append(u)
            cap_of.setdefault((v, u), 0)
        cap_of[(u, v)] = 1

    for i in range(r):
        arc(2 * i, 2 * i + 1)
        if src[i]:
            arc(source, 2 * i)
        if dst[i]:
            arc(2 * i + 1, sink)
    rows, cols = np.nonzero(adj)
    for i, j in zip(rows.tolist(), cols.tolist()):
        if i != j:
            arc(2 * i + 1, 2 * j)

    flow = 0
    while flow < limit:
        parent = {source: source}
        queue = deque([source])
        while queue and sink not in parent:
            u = queue.popleft()
            for v in graph[u]:
                if v not in parent and cap_of[(u, v)] > 0:
                    parent[v] = u
                    queue.append(v)
        if sink not in parent:
            break
        v = sink
        while v != source:
            u = parent[v]
            cap_of[(u, v)] -= 1
            cap_of[(v, u)] += 1
            v = u
        flow += 1
    return flow


class ReachChecker:
    """Index-level pair checker over a fixed distance matrix.

    ``endpoints`` index the demand nodes; repeater sets are passed per call
    so the exact search can reuse one checker for many candidate sets.
    """

    def __init__(self, dist: np.ndarray, endpoints: Sequence[int], l_max: float):
        self.dist = dist
        self.endpoints = np.asarray(endpoints, dtype=np.intp)
        self.l_max = float(l_max)
        self.direct = dist[np.ix_(self.endpoints, self.endpoints)] <= self.l_max

    def first_failure(self, repeaters: Sequence[int], k: int = 1, *,
                      collect: bool = False) -> tuple[tuple[int, int] | None, dict]:
        """First failing endpoint pair (positions in ``endpoints``) and, if asked, route counts.

        Route counts are capped at ``k``.
        """
        rep = np.asarray(repeaters, dtype=np.intp)
        n_ep = len(self.endpoints)
        near = self.dist[np.ix_(self.endpoints, rep)] <= self.l_max      # endpoint x repeater
        adj = self.dist[np.ix_(rep, rep)] <= self.l_max

        if k == 1 and not collect:
            if len(rep):
                _, labels = connected_components(csr_matrix(adj), directed=False)
                onehot = np.zeros((len(rep), labels.max() + 1), dtype=np.int32)
                onehot[np.arange(len(rep)), labels] = 1
                touch = (near.astype(np.int32) @ onehot) > 0
                linked = (touch.astype(np.int32) @ touch.T.astype(np.int32)) > 0
                ok = self.direct | linked
            else:
                ok = self.direct
            bad = np.argwhere(np.triu(~ok, 1))
            return (tuple(int(x) for x in bad[0]) if len(bad) else None), {}

        shared = near.astype(np.int32) @ near.T.astype(np.int32)
        keys = [row.tobytes() for row in near]
        cache: dict[tuple[bytes, bytes], int] = {}
        routes: dict[tuple[int, int], int] = {}
        failure = None
        for i in range(n_ep):
            for j in range(i + 1, n_ep):
                d = int(self.direct[i, j])
                need = k - d
                if shared[i, j] >= need:
                    got = k
                else:
                    key = (keys[i], keys[j]) if keys[i] <= keys[j] else (keys[j], keys[i])
                    if key not in cache:
                        cache[key] = disjoint_routes(near[i], near[j], adj, cap=k)
                    got = min(k, d + cache[key])
                if collect:
                    routes[(i, j)] = got
                if got < k and failure is None:
                    failure = (i, j)
                    if not collect:
                        return failure, routes
        return failure, routes


def _resolve(placement: Placement, t: Topology, oracle: DistanceOracle):
    for nid in placement.node_repeaters:
        if nid not in t:
            raise UnknownNodeError(nid)
        if t.kind(nid) == GHOST:
            raise ValueError(f"repeater placed on ghost node {nid!r}")
    ids, dist = extended_distances(t, oracle, placement.synthetic_added)
    pos = {nid: i for i, nid in enumerate(ids)}
    endpoints = list(range(len(t.site_ids)))
    repeaters = [pos[r] for r in placement.repeaters]
    return ids, dist, endpoints, repeaters


def verify(placement: Placement, t: Topology, oracle: DistanceOracle,
           l_max: float | None = None, k: int | None = None) -> VerifyReport:
    """Check every endpoint pair for ``k`` node-disjoint repeater routes.

    ``l_max``/``k`` default to the placement's own.  The first failing pair
    (host order) is reported by ghost ID.
    """
    l_max = placement.l_max if l_max is None else float(l_max)
    k = placement.k if k is None else int(k)
    if k < 1:
        raise ValueError("k must be >= 1")
    if not l_max > 0:
        raise ValueError("l_max must be positive")
    ids, dist, endpoints, repeaters = _resolve(placement, t, oracle)
    checker = ReachChecker(dist, endpoints, l_max)
    failure, routes = checker.first_failure(repeaters, k, collect=k > 1)
    names = [ids[e] for e in endpoints]
    min_routes = {(ghost_id(names[i]), ghost_id(names[j])): c for (i, j), c in routes.items()}
    if failure is None:
        return VerifyReport(True, None, min_routes, k, l_max)
    s, d = names[failure[0]], names[failure[1]]
    note = f"{ghost_id(s)} and {ghost_id(d)} have fewer than {k} route(s) at l_max={l_max:g}"
    return VerifyReport(False, (ghost_id(s), ghost_id(d)), min_routes, k, l_max, (note,))


def route_count(a: str, b: str, placement: Placement, t: Topology, oracle: DistanceOracle,
                l_max: float | None = None) -> int:
    """Exact number of node-disjoint routes between endpoints ``a`` and ``b``."""
    l_max = placement.l_max if l_max is None else float(l_max)
    ids, dist, endpoints, repeaters = _resolve(placement, t, oracle)
    pos = {nid: i for i, nid in enumerate(ids)}
    ia, ib = pos[t.host_of(a)], pos[t.host_of(b)]
    rep = np.asarray(repeaters, dtype=np.intp)
    near_a = dist[ia, rep] <= l_max
    near_b = dist[ib, rep] <= l_max
    adj = dist[np.ix_(rep, rep)] <= l_max
    return int(dist[ia, ib] <= l_max) + disjoint_routes(near_a, near_b, adj)


def survive_failures(placement: Placement, t: Topology, oracle: DistanceOracle,
                     l_max: float | None = None, k: int | None = None) -> bool:
    """True when deleting any ``k - 1`` repeaters leaves the placement feasible at k=1."""
    l_max = placement.l_max if l_max is None else float(l_max)
    k = placement.k if k is None else int(k)
    if k < 2:
        raise ValueError("survive_failures needs k >= 2")
    ids, dist, endpoints, repeaters = _resolve(placement, t, oracle)
    checker = ReachChecker(dist, endpoints, l_max)
    drop = min(k - 1, len(repeaters))
    for removed in itertools.combinations(range(len(repeaters)), drop):
        keep = [r for i, r in enumerate(repeaters) if i not in removed]
        failure, _ = checker.first_failure(keep, 1)
        if failure is not None:
            return False
    return True
