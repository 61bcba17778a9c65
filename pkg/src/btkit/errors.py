"""Exception hierarchy shared across the toolkit."""

from __future__ import annotations


class BtkitError(Exception):
    """Base class for every error raised by btkit."""


class TreeInvalidError(BtkitError):
    """A tree failed structural validation where a valid tree was required.

    Carries the violations so callers can print them.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(f"{v.node_id}: {v.message}" for v in self.violations)
        super().__init__(f"tree is not valid: {lines}")


class ExecutionError(BtkitError):
    """Execution could not proceed; names the leaf involved when known."""

    def __init__(self, message, leaf_id=None):
        super().__init__(message)
        self.leaf_id = leaf_id


class BlackboardError(ExecutionError):
    """Blackboard access violated its contract (missing key, bad type)."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class ScriptUnderrunError(ExecutionError):
    """A resolution script was asked for more outcomes than it holds."""


class ContractViolationError(ExecutionError):
    """A resolver broke a leaf contract (e.g. a condition wrote to the blackboard)."""


class SessionProtocolError(ExecutionError):
    """A session step violated the prompt/answer protocol."""


class UnsupportedNodeError(BtkitError):
    """FSM lowering hit a node kind it does not support."""

    def __init__(self, message, node_id):
        super().__init__(message)
        self.node_id = node_id


class UnknownLeafError(BtkitError):
    """A query named a leaf that does not exist in the tree or FSM."""
