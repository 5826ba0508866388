"""Error types raised across the package."""

from __future__ import annotations


class TopologyError(ValueError):
    """A topology document or object violates the graph invariants."""


class UnknownNodeError(KeyError):
    """A node ID that does not exist in the topology was referenced."""

    def __str__(self) -> str:
        return f"unknown node ID: {self.args[0]!r}" if self.args else "unknown node ID"


class BudgetExceededError(ValueError):
    """The exact search was asked to solve an instance above its budget."""


class InfeasibleError(RuntimeError):
    """No placement satisfying the requested coverage/robustness was produced.

    ``pair`` holds the witness endpoint pair when the failure is about routes,
    ``node`` the demand node when a cover round could not be completed.
    """

    def __init__(self, message: str, *, pair: tuple[str, str] | None = None,
                 node: str | None = None):
        super().__init__(message)
        self.pair = pair
        self.node = node
