"""Exception types shared across the package."""


class SegpackError(Exception):
    """Base class for all package errors."""


class DomainError(SegpackError):
    """An input value is outside its documented domain."""


class StructureError(SegpackError):
    """Structurally malformed input (bad ids, bad file contents)."""


class ContractError(SegpackError):
    """An internal precondition between modules was violated."""


class BudgetExceededError(SegpackError):
    """An exact search refused to run past its configured budget."""

    def __init__(self, message, nodes=None):
        super().__init__(message)
        self.nodes = nodes
