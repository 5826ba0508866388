"""Input checking shared by the estimator classes and the CLI."""

from __future__ import annotations

import math
import numbers
from pathlib import Path

from .topology import Topology, load_topology, read_topology, topology_from_dict

_ALGO_NAMES = {
    "sca": "sca",
    "mca-gp": "mca_gp", "mca_gp": "mca_gp",
    "mca-flex": "mca_flex", "mca_flex": "mca_flex",
    "exact": "exact",
}


def check_topology(X, *, format: str | None = None, length_attr: str = "length_km") -> Topology:
    """Coerce ``X`` into a validated Topology.

    Accepts a Topology, a JSON-shaped dict, a filesystem path, or raw
    JSON/GraphML bytes.
    """
    if isinstance(X, Topology):
        return X
    if isinstance(X, dict):
        return topology_from_dict(X)
    if isinstance(X, (str, Path)):
        return read_topology(X, format, length_attr=length_attr)
    if isinstance(X, (bytes, bytearray)):
        return load_topology(X, format or "json", length_attr=length_attr)
    raise TypeError(f"expected a Topology, dict, path or bytes, got {type(X).__name__}")


def check_l_max(l_max) -> float:
    if isinstance(l_max, bool) or not isinstance(l_max, numbers.Real):
        raise TypeError(f"l_max must be a number, got {l_max!r}")
    l_max = float(l_max)
    if not (math.isfinite(l_max) and l_max > 0):
        raise ValueError(f"l_max must be a positive finite distance, got {l_max}")
    return l_max


def check_k(k) -> int:
    if isinstance(k, bool) or not isinstance(k, numbers.Integral):
        raise TypeError(f"k must be an integer, got {k!r}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return int(k)


def check_algorithm(name: str) -> str:
    try:
        return _ALGO_NAMES[name]
    except KeyError:
        raise ValueError(f"unknown algorithm {name!r}; choose from sca, mca-gp, mca-flex, exact") from None
