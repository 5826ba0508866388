"""Repeater placements, synthetic repeater sites and the solution file format."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .exceptions import TopologyError, UnknownNodeError
from .topology import GHOST, DistanceOracle, Topology, split_offsets

ALGORITHMS = ("mca_gp", "mca_flex", "sca", "exact")

ACCESS_RULE = "access_rule"
GREEDY_COVER = "greedy_cover"
BRIDGE = "bridge"
EXACT = "exact"
LOADED = "loaded"


@dataclass(frozen=True)
class SyntheticSite:
    """A repeater placed part-way along an existing link ``a``-``b``.

    ``offset_km`` is measured from ``a``; ``a < b`` always holds.
    """

    id: str
    a: str
    b: str
    offset_km: float

    def __post_init__(self):
        if self.b < self.a:
            raise ValueError("SyntheticSite endpoints must be ordered (a < b)")


def sites_on_link(t: Topology, u: str, v: str, l_max: float, *, tag: str = "") -> list[SyntheticSite]:
    """Equally spaced sites cutting link ``u``-``v`` into pieces of at most ``l_max``.

    Returned in walking order from ``u`` towards ``v``.
    """
    a, b = (u, v) if u <= v else (v, u)
    length = t.edge_length(a, b)
    offs = split_offsets(length, l_max)
    m = len(offs) + 1
    sites = [SyntheticSite(f"{a}~{b}+{i}/{m}{tag}", a, b, off) for i, off in enumerate(offs, start=1)]
    return sites if u == a else sites[::-1]


@dataclass(frozen=True)
class CenterSet:
    centers: tuple[str, ...] = ()
    provenance: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.centers) != len(self.provenance):
            raise ValueError("every center needs a provenance tag")
        if len(set(self.centers)) != len(self.centers):
            raise ValueError("duplicate center")

    def __iter__(self):
        return iter(self.centers)

    def __len__(self) -> int:
        return len(self.centers)

    def __contains__(self, node_id: object) -> bool:
        return node_id in self.centers

    def add(self, node_id: str, how: str) -> "CenterSet":
        return CenterSet(self.centers + (node_id,), self.provenance + (how,))

    def union(self, other: "CenterSet") -> "CenterSet":
        out = self
        for c, how in zip(other.centers, other.provenance):
            if c not in out:
                out = out.add(c, how)
        return out


@dataclass(frozen=True)
class Placement:
    centers: CenterSet
    intermediates: tuple[str, ...] = ()
    synthetic_added: tuple[SyntheticSite, ...] = ()
    algorithm: str = "sca"
    l_max: float = 0.0
    k: int = 1
    topology_name: str = ""
    notes: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        overlap = set(self.centers) & set(self.intermediates)
        if overlap:
            raise ValueError(f"nodes both center and intermediate: {sorted(overlap)}")
        if len(set(self.intermediates)) != len(self.intermediates):
            raise ValueError("duplicate intermediate node")
        ids = [s.id for s in self.synthetic_added]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate synthetic site ID")

    @property
    def node_repeaters(self) -> tuple[str, ...]:
        """Repeaters located at existing topology nodes."""
        return tuple(self.centers.centers) + tuple(self.intermediates)

    @property
    def repeaters(self) -> tuple[str, ...]:
        return self.node_repeaters + tuple(s.id for s in self.synthetic_added)

    @property
    def n_repeaters(self) -> int:
        return len(self.centers) + len(self.intermediates) + len(self.synthetic_added)

    def __len__(self) -> int:
        return self.n_repeaters

    def node_set(self) -> frozenset:
        return frozenset(self.repeaters)

    def n_synthetic(self, t: Topology) -> int:
        """Repeaters on synthetic locations: augmentation nodes plus added sites."""
        on_nodes = sum(1 for r in self.node_repeaters if r in t and t.kind(r) == "synthetic")
        return on_nodes + len(self.synthetic_added)


def empty_placement(algorithm: str, l_max: float, k: int, topology_name: str = "") -> Placement:
    return Placement(CenterSet(), (), (), algorithm, float(l_max), int(k), topology_name)


# -- distances involving synthetic sites ----------------------------------------

def extended_distances(t: Topology, oracle: DistanceOracle,
                       sites: Sequence[SyntheticSite]) -> tuple[list[str], np.ndarray]:
    """Distance matrix over the non-ghost nodes plus the given on-link sites.

    A shortest path from a site leaves along its link through one of the link
    ends (or runs along the link itself to a sibling site), so distances are
    exact without rebuilding the graph.
    """
    ids = t.site_ids
    base = oracle.submatrix(ids)
    if not sites:
        return list(ids), base
    pos = {nid: i for i, nid in enumerate(ids)}
    n, m = len(ids), len(sites)
    for s in sites:
        for end in (s.a, s.b):
            if end not in pos:
                raise UnknownNodeError(end)
    a_ix = np.array([pos[s.a] for s in sites])
    b_ix = np.array([pos[s.b] for s in sites])
    off = np.array([s.offset_km for s in sites])
    rest = np.array([t.edge_length(s.a, s.b) - s.offset_km for s in sites])

    to_nodes = np.minimum(off[:, None] + base[a_ix], rest[:, None] + base[b_ix])   # m x n
    between = np.minimum(off[:, None] + to_nodes[:, a_ix].T, rest[:, None] + to_nodes[:, b_ix].T)
    same = (a_ix[:, None] == a_ix[None, :]) & (b_ix[:, None] == b_ix[None, :])
    along = np.abs(off[:, None] - off[None, :])
    between = np.where(same, np.minimum(between, along), between)
    np.fill_diagonal(between, 0.0)

    full = np.empty((n + m, n + m))
    full[:n, :n] = base
    full[n:, :n] = to_nodes
    full[:n, n:] = to_nodes.T
    full[n:, n:] = between
    return list(ids) + [s.id for s in sites], full


# -- solution files -------------------------------------------------------------

def solution_to_dict(p: Placement) -> dict:
    from . import __version__

    return {
        "algorithm": p.algorithm,
        "l_max_km": p.l_max,
        "k": p.k,
        "centers": list(p.centers.centers),
        "intermediates": list(p.intermediates),
        "synthetic_nodes": [
            {"id": s.id, "on_edge": {"a": s.a, "b": s.b}, "offset_km": s.offset_km}
            for s in p.synthetic_added
        ],
        "topology_name": p.topology_name,
        "tool_version": __version__,
    }


def dump_solution(p: Placement) -> str:
    return json.dumps(solution_to_dict(p), indent=2) + "\n"


def write_solution(p: Placement, path: str | Path) -> None:
    Path(path).write_text(dump_solution(p))


_SOLUTION_KEYS = {"algorithm", "l_max_km", "k", "centers", "intermediates", "synthetic_nodes",
                  "topology_name", "tool_version"}


def placement_from_solution(doc: dict, t: Topology | None = None) -> Placement:
    """Rebuild a Placement from a solution document, checking it against ``t`` if given."""
    if not isinstance(doc, dict):
        raise ValueError("solution document must be a JSON object")
    extra = set(doc) - _SOLUTION_KEYS
    if extra:
        raise ValueError(f"unknown solution field(s): {sorted(extra)}")
    centers = [str(c) for c in doc.get("centers", [])]
    inter = [str(c) for c in doc.get("intermediates", [])]
    sites = []
    for raw in doc.get("synthetic_nodes", []):
        edge = raw["on_edge"]
        a, b, off = str(edge["a"]), str(edge["b"]), float(raw["offset_km"])
        if b < a:
            a, b = b, a
        sites.append(SyntheticSite(str(raw["id"]), a, b, off))
    if t is not None:
        for nid in centers + inter:
            if nid not in t:
                raise UnknownNodeError(nid)
            if t.kind(nid) == GHOST:
                raise ValueError(f"repeater cannot sit on ghost node {nid!r}")
        for s in sites:
            if not t.has_edge(s.a, s.b):
                raise TopologyError(f"synthetic node {s.id!r} sits on missing link {s.a}-{s.b}")
            length = t.edge_length(s.a, s.b)
            if not 0 < s.offset_km < length:
                raise ValueError(f"synthetic node {s.id!r} offset {s.offset_km} outside link length {length}")
    return Placement(
        CenterSet(tuple(centers), (LOADED,) * len(centers)),
        tuple(inter),
        tuple(sites),
        str(doc.get("algorithm", "")),
        float(doc.get("l_max_km", 0.0)),
        int(doc.get("k", 1)),
        str(doc.get("topology_name", "")),
    )


def read_solution(path: str | Path, t: Topology | None = None) -> Placement:
    with open(path) as fh:
        return placement_from_solution(json.load(fh), t)


def repeater_placement(nodes: Iterable[str], *, algorithm: str, l_max: float, k: int,
                       topology_name: str = "", how: str = EXACT) -> Placement:
    nodes = tuple(nodes)
    return Placement(CenterSet(nodes, (how,) * len(nodes)), (), (), algorithm, float(l_max),
                     int(k), topology_name)
