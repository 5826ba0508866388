"""Estimator-style wrappers around the placement algorithms.

``fit`` takes a topology (object, dict, path or bytes); the fitted
placement is exposed through trailing-underscore attributes, and
``predict`` returns a boolean repeater mask over the topology's sites.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .bench import solve
from .exact import OracleBudget
from .topology import Topology, all_pairs_distances, attach_ghosts, augment_long_links
from .validation import check_k, check_l_max, check_topology
from .verify import verify


class _PlacerBase(BaseEstimator):
    _algorithm = ""

    def _budget(self):
        return None

    def _algorithm_name(self) -> str:
        return self._algorithm

    def fit(self, X, y=None):
        l_max = check_l_max(self.l_max)
        k = check_k(self.k)
        t = check_topology(X)
        oracle = all_pairs_distances(t)
        placement = solve(t, oracle, self._algorithm_name(), l_max, k, self._budget())
        self.topology_ = t
        self.oracle_ = oracle
        self.placement_ = placement
        self.report_ = verify(placement, t, oracle)
        self.n_repeaters_ = placement.n_repeaters
        self.repeaters_ = placement.repeaters
        return self

    def predict(self, X=None) -> np.ndarray:
        """Boolean mask over ``topology_.site_ids``: True where a node holds a repeater.

        Synthetic sites added during the fit are not part of the mask.
        """
        check_is_fitted(self, "placement_")
        t = self.topology_ if X is None else check_topology(X)
        if t.site_ids != self.topology_.site_ids:
            raise ValueError("predict called with a topology different from the fitted one")
        chosen = set(self.placement_.node_repeaters)
        return np.array([nid in chosen for nid in t.site_ids], dtype=bool)

    def fit_predict(self, X, y=None) -> np.ndarray:
        return self.fit(X).predict()


class SCAPlacer(_PlacerBase):
    """Single-center placement; ``k > 1`` runs the robust union of disjoint covers."""

    _algorithm = "sca"

    def __init__(self, l_max=100.0, k=1):
        self.l_max = l_max
        self.k = k


class MCAPlacer(_PlacerBase):
    """Multi-center placement with ``variant`` ``"gp"`` or ``"flex"``."""

    def __init__(self, l_max=100.0, k=1, variant="flex"):
        self.l_max = l_max
        self.k = k
        self.variant = variant

    def _algorithm_name(self) -> str:
        if self.variant not in ("gp", "flex"):
            raise ValueError(f"variant must be 'gp' or 'flex', got {self.variant!r}")
        return f"mca_{self.variant}"


class ExactPlacer(_PlacerBase):
    _algorithm = "exact"

    def __init__(self, l_max=100.0, k=1, max_candidate_nodes=20, max_subsets=5_000_000):
        self.l_max = l_max
        self.k = k
        self.max_candidate_nodes = max_candidate_nodes
        self.max_subsets = max_subsets

    def _budget(self):
        return OracleBudget(int(self.max_candidate_nodes), int(self.max_subsets))


class GhostAttacher(TransformerMixin, BaseEstimator):
    """Attach a zero-length end-user node to every physical node."""

    def fit(self, X, y=None):
        check_topology(X)
        return self

    def transform(self, X) -> Topology:
        return attach_ghosts(check_topology(X))


class LongLinkAugmenter(TransformerMixin, BaseEstimator):
    """Split links longer than ``l_max`` into equal segments with synthetic nodes."""

    def __init__(self, l_max=100.0):
        self.l_max = l_max

    def fit(self, X, y=None):
        check_l_max(self.l_max)
        check_topology(X)
        return self

    def transform(self, X) -> Topology:
        t = check_topology(X)
        out = augment_long_links(t, check_l_max(self.l_max))
        self.n_added_ = len(out.node_ids) - len(t.node_ids)
        return out
