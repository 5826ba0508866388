"""Fiber topology model, file I/O and shortest-path distances.

A :class:`Topology` is an immutable, validated, connected undirected graph
whose edge lengths are kilometres.  Nodes and edges are kept in lexicographic
order so every algorithm built on top iterates deterministically.
"""

from __future__ import annotations

import io
import json
import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra, shortest_path

from .exceptions import TopologyError, UnknownNodeError

PHYSICAL = "physical"
SYNTHETIC = "synthetic"
GHOST = "ghost"
NODE_KINDS = (PHYSICAL, SYNTHETIC, GHOST)

_TOP_KEYS = {"name", "nodes", "edges"}
_NODE_KEYS = {"id", "kind", "lat", "lon"}
_EDGE_KEYS = {"a", "b", "length_km"}


def ghost_id(host: str) -> str:
    """ID of the zero-distance endpoint attached to ``host``."""
    return f"ghost({host})"


def synthetic_id(a: str, b: str, index: int) -> str:
    """ID of the ``index``-th augmentation node on link ``a``-``b`` (from ``a``)."""
    return f"{a}~{b}:{index}"


@dataclass(frozen=True)
class NodeRecord:
    id: str
    kind: str = PHYSICAL
    lat: float | None = None
    lon: float | None = None

    @property
    def coords(self) -> tuple[float, float] | None:
        if self.lat is None or self.lon is None:
            return None
        return (self.lat, self.lon)


@dataclass(frozen=True)
class EdgeRecord:
    a: str
    b: str
    length_km: float

    def normalized(self) -> "EdgeRecord":
        if self.b < self.a:
            return EdgeRecord(self.b, self.a, self.length_km)
        return self

    @property
    def key(self) -> tuple[str, str]:
        return (self.a, self.b) if self.a <= self.b else (self.b, self.a)


@dataclass(frozen=True)
class Topology:
    """Validated weighted undirected graph.

    Construction normalizes node order (by ID) and edge order (by endpoint
    pair, smaller ID first) and raises :class:`TopologyError` on any
    invariant violation, including disconnection.
    """

    nodes: tuple[NodeRecord, ...]
    edges: tuple[EdgeRecord, ...]
    name: str = ""
    _index: dict = field(default=None, init=False, repr=False, compare=False)
    _adj: dict = field(default=None, init=False, repr=False, compare=False)
    _lengths: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        nodes = tuple(sorted(self.nodes, key=lambda n: n.id))
        edges = tuple(sorted((e.normalized() for e in self.edges), key=lambda e: (e.a, e.b)))
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", edges)
        self._validate()

    def _validate(self) -> None:
        if not self.nodes:
            raise TopologyError("topology has no nodes")
        index: dict[str, NodeRecord] = {}
        for node in self.nodes:
            if not isinstance(node.id, str) or not node.id:
                raise TopologyError(f"node ID must be a non-empty string, got {node.id!r}")
            if node.kind not in NODE_KINDS:
                raise TopologyError(f"node {node.id!r} has unknown kind {node.kind!r}")
            if node.id in index:
                raise TopologyError(f"duplicate node ID {node.id!r}")
            index[node.id] = node

        adj: dict[str, list[str]] = {n.id: [] for n in self.nodes}
        lengths: dict[tuple[str, str], float] = {}
        for e in self.edges:
            for end in (e.a, e.b):
                if end not in index:
                    raise TopologyError(f"edge {e.a}-{e.b} references undeclared node {end!r}")
            if e.a == e.b:
                raise TopologyError(f"self-loop on node {e.a!r}")
            if e.key in lengths:
                raise TopologyError(f"duplicate edge {e.a}-{e.b}")
            length = e.length_km
            if isinstance(length, bool) or not isinstance(length, (int, float)) or not math.isfinite(length):
                raise TopologyError(f"edge {e.a}-{e.b} has non-finite length {length!r}")
            ghostly = index[e.a].kind == GHOST or index[e.b].kind == GHOST
            if ghostly:
                if index[e.a].kind == GHOST and index[e.b].kind == GHOST:
                    raise TopologyError(f"edge {e.a}-{e.b} joins two ghost nodes")
                if length != 0:
                    raise TopologyError(f"ghost edge {e.a}-{e.b} must have length 0, got {length}")
            elif length <= 0:
                raise TopologyError(f"edge {e.a}-{e.b} has nonpositive length {length}")
            lengths[e.key] = float(length)
            adj[e.a].append(e.b)
            adj[e.b].append(e.a)

        for node in self.nodes:
            if node.kind == GHOST and len(adj[node.id]) != 1:
                raise TopologyError(
                    f"ghost node {node.id!r} must have exactly one incident edge, has {len(adj[node.id])}")

        # connectedness
        start = self.nodes[0].id
        seen = {start}
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        if len(seen) != len(index):
            missing = sorted(set(index) - seen)
            raise TopologyError(
                f"topology {self.name!r} is disconnected: node {missing[0]!r} unreachable from {start!r}")

        for lst in adj.values():
            lst.sort()
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_adj", adj)
        object.__setattr__(self, "_lengths", lengths)

    # -- queries -----------------------------------------------------------
    @property
    def node_ids(self) -> list[str]:
        return [n.id for n in self.nodes]

    @property
    def site_ids(self) -> list[str]:
        """IDs of nodes that can host repeaters or users (non-ghost), sorted."""
        return [n.id for n in self.nodes if n.kind != GHOST]

    @property
    def n_synthetic(self) -> int:
        return sum(1 for n in self.nodes if n.kind == SYNTHETIC)

    @property
    def has_ghosts(self) -> bool:
        return any(n.kind == GHOST for n in self.nodes)

    def __contains__(self, node_id: object) -> bool:
        return node_id in self._index

    def __len__(self) -> int:
        return len(self.nodes)

    def node(self, node_id: str) -> NodeRecord:
        try:
            return self._index[node_id]
        except KeyError:
            raise UnknownNodeError(node_id) from None

    def kind(self, node_id: str) -> str:
        return self.node(node_id).kind

    def neighbors(self, node_id: str) -> list[str]:
        self.node(node_id)
        return list(self._adj[node_id])

    def degree(self, node_id: str, *, ignore_ghosts: bool = True) -> int:
        nbrs = self.neighbors(node_id)
        if ignore_ghosts:
            return sum(1 for w in nbrs if self._index[w].kind != GHOST)
        return len(nbrs)

    def edge_length(self, a: str, b: str) -> float:
        key = (a, b) if a <= b else (b, a)
        try:
            return self._lengths[key]
        except KeyError:
            raise TopologyError(f"no edge between {a!r} and {b!r}") from None

    def has_edge(self, a: str, b: str) -> bool:
        key = (a, b) if a <= b else (b, a)
        return key in self._lengths

    def host_of(self, node_id: str) -> str:
        """The physical/synthetic node a ghost hangs off; identity otherwise."""
        if self.kind(node_id) == GHOST:
            return self._adj[node_id][0]
        return node_id


# -- serialization -------------------------------------------------------------

def _read_bytes(source) -> bytes:
    if isinstance(source, (bytes, bytearray)):
        return bytes(source)
    if isinstance(source, str):
        return source.encode()
    data = source.read()
    return data.encode() if isinstance(data, str) else data


def topology_from_dict(doc: dict) -> Topology:
    """Build a Topology from the JSON document shape, rejecting unknown fields."""
    if not isinstance(doc, dict):
        raise TopologyError("topology document must be a JSON object")
    extra = set(doc) - _TOP_KEYS
    if extra:
        raise TopologyError(f"unknown top-level field(s): {sorted(extra)}")
    for key in ("nodes", "edges"):
        if not isinstance(doc.get(key, []), list):
            raise TopologyError(f"field {key!r} must be a list")
    name = doc.get("name", "")
    if not isinstance(name, str):
        raise TopologyError("field 'name' must be a string")

    nodes = []
    for raw in doc.get("nodes", []):
        if not isinstance(raw, dict):
            raise TopologyError(f"node entry must be an object, got {raw!r}")
        extra = set(raw) - _NODE_KEYS
        if extra:
            raise TopologyError(f"node {raw.get('id')!r} has unknown field(s): {sorted(extra)}")
        if "id" not in raw or not isinstance(raw["id"], str):
            raise TopologyError(f"node entry needs a string 'id': {raw!r}")
        for coord in ("lat", "lon"):
            val = raw.get(coord)
            if val is not None and (isinstance(val, bool) or not isinstance(val, (int, float))):
                raise TopologyError(f"node {raw['id']!r} field {coord!r} must be numeric")
        nodes.append(NodeRecord(raw["id"], raw.get("kind", PHYSICAL), raw.get("lat"), raw.get("lon")))

    edges = []
    for raw in doc.get("edges", []):
        if not isinstance(raw, dict):
            raise TopologyError(f"edge entry must be an object, got {raw!r}")
        extra = set(raw) - _EDGE_KEYS
        if extra:
            raise TopologyError(f"edge {raw.get('a')!r}-{raw.get('b')!r} has unknown field(s): {sorted(extra)}")
        missing = _EDGE_KEYS - set(raw)
        if missing:
            raise TopologyError(f"edge entry {raw!r} missing field(s): {sorted(missing)}")
        edges.append(EdgeRecord(raw["a"], raw["b"], raw["length_km"]))
    return Topology(tuple(nodes), tuple(edges), name)


def topology_to_dict(t: Topology) -> dict:
    nodes = []
    for n in t.nodes:
        entry: dict = {"id": n.id, "kind": n.kind}
        if n.lat is not None:
            entry["lat"] = n.lat
        if n.lon is not None:
            entry["lon"] = n.lon
        nodes.append(entry)
    edges = [{"a": e.a, "b": e.b, "length_km": e.length_km} for e in t.edges]
    return {"name": t.name, "nodes": nodes, "edges": edges}


def _load_graphml(data: bytes, length_attr: str) -> Topology:
    import networkx as nx

    try:
        g = nx.read_graphml(io.BytesIO(data))
    except Exception as exc:  # networkx raises assorted parser errors
        raise TopologyError(f"GraphML parse error: {exc}") from exc
    if g.is_multigraph():
        pairs = [tuple(sorted(map(str, (u, v)))) for u, v, _ in g.edges(keys=True)]
        dup = next((p for p in pairs if pairs.count(p) > 1), None)
        if dup:
            raise TopologyError(f"duplicate edge {dup[0]}-{dup[1]}")
    nodes = []
    for nid, attrs in g.nodes(data=True):
        lat = attrs.get("lat", attrs.get("Latitude"))
        lon = attrs.get("lon", attrs.get("Longitude"))
        nodes.append(NodeRecord(str(nid), attrs.get("kind", PHYSICAL),
                                None if lat is None else float(lat),
                                None if lon is None else float(lon)))
    edges = []
    seen = set()
    for u, v, attrs in g.edges(data=True):
        key = tuple(sorted((str(u), str(v))))
        if key in seen:
            raise TopologyError(f"duplicate edge {key[0]}-{key[1]}")
        seen.add(key)
        if length_attr not in attrs:
            raise TopologyError(f"edge {u}-{v} lacks numeric attribute {length_attr!r}")
        try:
            length = float(attrs[length_attr])
        except (TypeError, ValueError):
            raise TopologyError(f"edge {u}-{v} attribute {length_attr!r} is not numeric") from None
        edges.append(EdgeRecord(str(u), str(v), length))
    name = g.graph.get("name", "") or ""
    return Topology(tuple(nodes), tuple(edges), str(name))


def load_topology(source, format: str = "json", *, length_attr: str = "length_km") -> Topology:
    """Parse and validate a topology from bytes, text or a binary stream."""
    data = _read_bytes(source)
    if format == "json":
        try:
            doc = json.loads(data)
        except json.JSONDecodeError as exc:
            raise TopologyError(f"JSON parse error: {exc}") from exc
        return topology_from_dict(doc)
    if format == "graphml":
        return _load_graphml(data, length_attr)
    raise ValueError(f"unsupported topology format {format!r}")


def read_topology(path: str | Path, format: str | None = None, *,
                  length_attr: str = "length_km") -> Topology:
    path = Path(path)
    if format is None:
        format = "graphml" if path.suffix.lower() in (".graphml", ".xml") else "json"
    with open(path, "rb") as fh:
        return load_topology(fh, format, length_attr=length_attr)


def dump_topology(t: Topology) -> str:
    return json.dumps(topology_to_dict(t), indent=2) + "\n"


def write_topology(t: Topology, path: str | Path) -> None:
    Path(path).write_text(dump_topology(t))


# -- distances -----------------------------------------------------------------

class DistanceOracle:
    """Dense all-pairs shortest-path distances (km) over a topology.

    Ghost rows mirror their host.  Shortest paths are recoverable for
    non-ghost nodes through :meth:`path`.
    """

    def __init__(self, ids: Sequence[str], matrix: np.ndarray, core_ids: Sequence[str],
                 predecessors: np.ndarray):
        self.ids = tuple(ids)
        self.site_ids = tuple(core_ids)
        self.ghosts = frozenset(self.ids) - frozenset(core_ids)
        self.index = {nid: i for i, nid in enumerate(self.ids)}
        matrix = np.asarray(matrix, dtype=np.float64)
        matrix.flags.writeable = False
        self.matrix = matrix
        self._core_ids = tuple(core_ids)
        self._core_index = {nid: i for i, nid in enumerate(self._core_ids)}
        predecessors.flags.writeable = False
        self._pred = predecessors

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, node_id: object) -> bool:
        return node_id in self.index

    def idx(self, node_id: str) -> int:
        try:
            return self.index[node_id]
        except KeyError:
            raise UnknownNodeError(node_id) from None

    def d(self, u: str, v: str) -> float:
        return float(self.matrix[self.idx(u), self.idx(v)])

    def row(self, u: str) -> np.ndarray:
        return self.matrix[self.idx(u)]

    def submatrix(self, ids: Sequence[str]) -> np.ndarray:
        ix = np.array([self.idx(i) for i in ids], dtype=np.intp)
        return self.matrix[np.ix_(ix, ix)]

    def path(self, u: str, v: str) -> list[str]:
        """Node sequence of the stored shortest path between two non-ghost nodes."""
        for node in (u, v):
            if node not in self._core_index:
                self.idx(node)
                raise ValueError(f"paths are only defined between non-ghost nodes, got {node!r}")
        i, j = self._core_index[u], self._core_index[v]
        seq = [j]
        while seq[-1] != i:
            p = self._pred[i, seq[-1]]
            if p < 0:
                raise TopologyError(f"no path between {u!r} and {v!r}")
            seq.append(int(p))
        return [self._core_ids[k] for k in reversed(seq)]


def _core_graph(t: Topology) -> tuple[list[str], csr_matrix]:
    core = t.site_ids
    pos = {nid: i for i, nid in enumerate(core)}
    rows, cols, vals = [], [], []
    for e in t.edges:
        if e.a in pos and e.b in pos:
            rows.append(pos[e.a])
            cols.append(pos[e.b])
            vals.append(e.length_km)
    n = len(core)
    graph = csr_matrix((vals, (rows, cols)), shape=(n, n))
    return core, graph


def all_pairs_distances(t: Topology) -> DistanceOracle:
    """Exact shortest-path distances between every pair of nodes (Dijkstra)."""
    core, graph = _core_graph(t)
    dist, pred = shortest_path(graph, method="D", directed=False, return_predecessors=True)
    pos = {nid: i for i, nid in enumerate(core)}
    hosts = np.array([pos[t.host_of(nid)] for nid in t.node_ids], dtype=np.intp)
    full = dist[np.ix_(hosts, hosts)]
    return DistanceOracle(t.node_ids, full, core, pred)


def restricted_shortest_path(t: Topology, source: str, target: str, *,
                             banned_nodes: Iterable[str] = (),
                             banned_edges: Iterable[tuple[str, str]] = ()) -> list[str] | None:
    """Shortest non-ghost path avoiding the given nodes/edges, or None."""
    core, graph = _core_graph(t)
    pos = {nid: i for i, nid in enumerate(core)}
    banned = {pos[n] for n in banned_nodes if n in pos} - {pos[source], pos[target]}
    bad_edges = {tuple(sorted((pos[a], pos[b]))) for a, b in banned_edges}
    coo = graph.tocoo()
    keep = [k for k in range(coo.nnz)
            if coo.row[k] not in banned and coo.col[k] not in banned
            and tuple(sorted((int(coo.row[k]), int(coo.col[k])))) not in bad_edges]
    sub = csr_matrix((coo.data[keep], (coo.row[keep], coo.col[keep])), shape=graph.shape)
    dist, pred = dijkstra(sub, directed=False, indices=pos[source], return_predecessors=True)
    j = pos[target]
    if not np.isfinite(dist[j]):
        return None
    seq = [j]
    while seq[-1] != pos[source]:
        seq.append(int(pred[seq[-1]]))
    return [core[k] for k in reversed(seq)]


# -- transformations -----------------------------------------------------------

def attach_ghosts(t: Topology) -> Topology:
    """Attach a zero-length endpoint ("ghost") to every non-ghost node."""
    if t.has_ghosts:
        raise TopologyError(f"topology {t.name!r} already carries ghost nodes")
    nodes = list(t.nodes)
    edges = list(t.edges)
    for host in t.site_ids:
        nodes.append(NodeRecord(ghost_id(host), GHOST))
        edges.append(EdgeRecord(host, ghost_id(host), 0.0))
    return Topology(tuple(nodes), tuple(edges), t.name)


def split_offsets(length: float, l_max: float) -> list[float]:
    """Interior offsets that cut ``length`` into equal pieces no longer than ``l_max``.

    Returns ``ceil(length / l_max) - 1`` offsets measured from the start
    (more only if float rounding would push a piece past ``l_max``).
    """
    if l_max <= 0:
        raise ValueError("l_max must be positive")
    m = max(1, math.ceil(length / l_max))
    while True:
        offs = [i * length / m for i in range(1, m)]
        marks = [0.0, *offs, length]
        if all(b - a <= l_max for a, b in zip(marks, marks[1:])):
            return offs
        m += 1


def augment_long_links(t: Topology, l_max: float) -> Topology:
    """Split every non-ghost link longer than ``l_max`` with equally spaced synthetic nodes."""
    if not l_max > 0:
        raise ValueError(f"l_max must be positive, got {l_max}")
    nodes = list(t.nodes)
    edges = []
    for e in t.edges:
        ghostly = t.kind(e.a) == GHOST or t.kind(e.b) == GHOST
        if ghostly or e.length_km <= l_max:
            edges.append(e)
            continue
        offs = split_offsets(e.length_km, l_max)
        na, nb = t.node(e.a), t.node(e.b)
        chain = [e.a]
        for i, off in enumerate(offs, start=1):
            sid = synthetic_id(e.a, e.b, i)
            frac = off / e.length_km
            lat = lon = None
            if na.coords and nb.coords:
                lat = na.lat + frac * (nb.lat - na.lat)
                lon = na.lon + frac * (nb.lon - na.lon)
            nodes.append(NodeRecord(sid, SYNTHETIC, lat, lon))
            chain.append(sid)
        chain.append(e.b)
        marks = [0.0, *offs, e.length_km]
        for (u, v), (p, q) in zip(zip(chain, chain[1:]), zip(marks, marks[1:])):
            edges.append(EdgeRecord(u, v, q - p))
    return Topology(tuple(nodes), tuple(edges), t.name)


# -- generators ----------------------------------------------------------------

_MODEL_ALIASES = {"unit": "unit_complete_like", "unit_complete_like": "unit_complete_like",
                  "geometric": "geometric"}


def generate_random_topology(n: int, model: str = "geometric", seed: int = 0, *,
                             side_km: float = 1000.0, radius_km: float | None = None,
                             edge_prob: float = 0.6, max_retries: int = 200) -> Topology:
    """Seeded random topology.

    ``unit_complete_like``: random spanning tree plus each other pair with
    probability ``edge_prob``, every link 1.0 long.
    ``geometric``: nodes uniform in a ``side_km`` square, pairs within
    ``radius_km`` linked with Euclidean length; redrawn until connected.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    try:
        model = _MODEL_ALIASES[model]
    except KeyError:
        raise ValueError(f"unknown model {model!r}") from None
    width = len(str(max(n - 1, 0)))
    ids = [f"n{i:0{width}d}" for i in range(n)]
    rng = np.random.default_rng(seed)
    name = f"{model}-n{n}-s{seed}"

    if model == "unit_complete_like":
        order = rng.permutation(n)
        pairs = set()
        for pos in range(1, n):
            parent = order[rng.integers(0, pos)]
            pairs.add(tuple(sorted((int(order[pos]), int(parent)))))
        for i in range(n):
            for j in range(i + 1, n):
                if (i, j) not in pairs and rng.random() < edge_prob:
                    pairs.add((i, j))
        edges = [EdgeRecord(ids[i], ids[j], 1.0) for i, j in sorted(pairs)]
        return Topology(tuple(NodeRecord(i) for i in ids), tuple(edges), name)

    if radius_km is None:
        radius_km = side_km * min(math.sqrt(2.0), math.sqrt(2.5 * math.log(max(n, 2)) / (math.pi * n)))
    for _ in range(max_retries):
        pts = rng.random((n, 2)) * side_km
        edges = []
        for i in range(n):
            for j in range(i + 1, n):
                dist = float(math.hypot(*(pts[i] - pts[j])))
                if 0 < dist <= radius_km:
                    edges.append(EdgeRecord(ids[i], ids[j], dist))
        try:
            return Topology(tuple(NodeRecord(i) for i in ids), tuple(edges), name)
        except TopologyError:
            continue
    raise TopologyError(f"geometric generator produced no connected graph for seed {seed} "
                        f"after {max_retries} draws (n={n}, radius={radius_km:g} km)")
