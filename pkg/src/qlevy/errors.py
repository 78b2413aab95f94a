"""Exception hierarchy.

Precondition violations (bad inputs, inadmissible parameters) are kept
separate from certification failures so the CLI can map them to distinct
exit codes.
"""


class QlevyError(Exception):
    """Base class for all library errors."""


class PreconditionError(QlevyError):
    """An operation was called outside its stated domain."""


class ShapeError(PreconditionError):
    """Tensor dimensions are inconsistent with the declared dimension."""


class ParseError(PreconditionError):
    """A file does not parse against its schema."""


class NotAGroupError(PreconditionError):
    """A multiplication table fails the group axioms."""


class StepTooLargeError(PreconditionError):
    """Random-walk step size violates h * ||xi||^2 <= 1."""


class NotAnIsometryError(PreconditionError):
    """A matrix expected to satisfy D*D = I does not."""


class InconsistentPiError(QlevyError):
    """The GNS representation equations are unsolvable beyond tolerance."""


class ChiNotCharacterError(PreconditionError):
    """The reference functional of a structure relation is not a character."""


class HorizonError(PreconditionError):
    """A time argument exceeds the stated tail horizon."""


class BudgetError(PreconditionError):
    """A tensor construction would exceed the configured size budget."""


class BreakpointCollisionError(PreconditionError):
    """A finite-difference stencil straddles a step-function breakpoint."""
