"""Exception types shared across the package."""

from __future__ import annotations


class ReebError(Exception):
    """Base class for all errors raised by this package."""


class BadLevelSet(ReebError):
    """A requested level set is not a superset of the current one, or it
    introduces values outside the graph's level range."""


class OrderConflict(ReebError):
    """An operation would have to discard partial-order data to proceed."""


class ReticulationConflict(ReebError):
    """Vertex classification is inconsistent with the cycle count.

    Raised when the sum of (indeg - 1) over indeg >= 2 vertices disagrees with
    the Euler-formula Betti number, which happens exactly when the graph has
    more than one indeg-0 vertex.  Such graphs are outside the domain of the
    tree decomposition.
    """


class MissingLabels(ReebError):
    """A labelled operation was applied to a graph without a full labelling."""


class LabelMismatch(ReebError):
    """Two labelled graphs do not share a common label universe."""


class SizeLimitExceeded(ReebError):
    """A search exceeded its node budget."""


class NotATree(ReebError):
    """A tree-only operation was applied to a graph with cycles."""


class NotRooted(ReebError):
    """The graph does not have a unique indeg-0 vertex."""


class DimensionMismatch(ReebError):
    """Two vectors (or vector sets) do not have the same dimension."""


class EmptySet(ReebError):
    """A set distance was requested for an empty vector set."""


class IncompatibleShape(ReebError):
    """Two networks do not share leaf count and Betti number, so their
    cophenetic embeddings live in different dimensions."""


class InvalidChoice(ReebError):
    """A cut choice does not pick exactly one incoming edge per reticulation."""


class InfeasibleSpec(ReebError):
    """No graph satisfies the requested generator parameters."""


class SchemaError(ReebError):
    """Malformed JSON document.  Carries a JSON-pointer to the offending spot."""

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer or "/"
        self.reason = message


class PositionedError(ReebError):
    """Parse-stage error that knows where in the input it happened."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col
        self.reason = message


class NewickSyntaxError(PositionedError):
    """Input does not match the extended Newick grammar."""


class UnbalancedParens(NewickSyntaxError):
    """Parenthesis nesting does not balance."""


class HybridArityError(PositionedError):
    """A hybrid tag appears only once, so there is nothing to merge."""


class TimeInconsistency(PositionedError):
    """Branch data admits no strictly increasing time assignment."""
