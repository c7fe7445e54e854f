"""Exception hierarchy shared by all modules."""


class DcProlateError(Exception):
    """Base class for library errors."""


class DomainError(DcProlateError, ValueError):
    """Evaluation outside the declared domain of a function or sequence."""


class ShapeError(DcProlateError, ValueError):
    """Operands with incompatible matrix sizes."""


class ContractError(DcProlateError, ValueError):
    """A precondition of an operation does not hold."""


class ConstructionError(DcProlateError, ValueError):
    """Invalid parameters for a family or transformation."""


class SolverError(DcProlateError, RuntimeError):
    """No nonconstant commuting operator within the requested bounds."""
