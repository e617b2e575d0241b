"""Exception hierarchy shared by all relasym modules."""


class RelasymError(Exception):
    """Base class for all library errors."""


class NotHermitianError(RelasymError, ValueError):
    pass


class InvalidStateError(RelasymError, ValueError):
    """A matrix failed the density-matrix invariants (trace or positivity)."""


class DimensionMismatchError(RelasymError, ValueError):
    pass


class EigensolverError(RelasymError, ArithmeticError):
    """The Hermitian eigensolver failed or returned an inconsistent result."""

    def __init__(self, message, input_hash=None):
        super().__init__(f"{message} (input sha1={input_hash})" if input_hash else message)
        self.input_hash = input_hash


class SingularLogError(RelasymError, ArithmeticError):
    """Logarithm requested of a matrix with an eigenvalue at or below the floor."""

    def __init__(self, eigenvalue, floor):
        super().__init__(f"eigenvalue {eigenvalue:.6g} is not above the log floor {floor:.3g}")
        self.eigenvalue = eigenvalue
        self.floor = floor


class DomainError(RelasymError, ValueError):
    """A scalar argument lies outside the admissible domain."""


class InfiniteAsymmetryError(RelasymError, ArithmeticError):
    pass


class PreconditionError(RelasymError, ValueError):
    pass


class RejectionBudgetError(RelasymError, RuntimeError):
    pass
