"""Exception types raised by the verification library."""


class GsciError(Exception):
    """Base class for all library errors."""


class DomainError(GsciError, ValueError):
    """An argument lies outside the domain of a closed-form expression."""


class ContractError(GsciError, ValueError):
    """An input violates a structural contract (grid mismatch, monotonicity, ...)."""


class PreconditionError(GsciError, ValueError):
    """A mathematical precondition of a check is not met."""


class UnsupportedDomainError(GsciError, ValueError):
    """The region is not a disk or a parametrizable image of one."""


class EmptyDomainError(GsciError, ValueError):
    """A restricted region contains no grid nodes."""


class BlowUpError(GsciError, ArithmeticError):
    """Radial integration left the representable range before reaching R."""

    def __init__(self, message: str, last_radius: float):
        super().__init__(message)
        self.last_radius = last_radius
