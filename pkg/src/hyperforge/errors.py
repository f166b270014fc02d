"""Exception hierarchy. Each class carries the CLI exit code it maps to."""

from __future__ import annotations


class HyperforgeError(Exception):
    exit_code = 2


class InputError(HyperforgeError, ValueError):
    """Malformed input: bad file, out-of-range vertex, inconsistent dimensions."""


class PreconditionError(HyperforgeError):
    """Inputs parse but do not satisfy an operation's precondition."""


class ProofInequalityError(PreconditionError):
    """A numerical inequality used by a proof step failed after rounding."""

    def __init__(self, name: str, lhs, rhs, detail: str = ""):
        self.name = name
        self.lhs = lhs
        self.rhs = rhs
        msg = f"inequality '{name}' failed: {lhs} < {rhs}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class LimitError(HyperforgeError):
    """A search or construction exceeded its configured budget."""

    exit_code = 3

    def __init__(self, message: str, nodes: int | None = None, log: list | None = None):
        super().__init__(message)
        self.nodes = nodes
        self.log = log or []


class WitnessError(HyperforgeError, AssertionError):
    """A witness failed re-verification against its inputs (internal bug)."""
