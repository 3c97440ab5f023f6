"""Exception hierarchy.

``PreconditionError`` subclasses signal invalid inputs (CLI exit code 4);
``ContractViolation`` signals a numerical contract that failed after the
computation ran.
"""


class QFockError(Exception):
    pass


class PreconditionError(QFockError, ValueError):
    pass


class InsufficientSpectralMass(PreconditionError):
    def __init__(self, available: int, requested: int):
        self.available = available
        self.requested = requested
        super().__init__(
            f"insufficient spectral mass: {available} available, d={requested} requested"
        )


class CapExceeded(PreconditionError):
    pass


class GramSingularError(PreconditionError):
    def __init__(self, level: int, min_eigenvalue: float):
        self.level = level
        self.min_eigenvalue = min_eigenvalue
        super().__init__(
            f"gram numerically singular at level {level} "
            f"(min eigenvalue {min_eigenvalue:.3e})"
        )


class StabilityError(PreconditionError):
    pass


class ContractViolation(QFockError):
    pass
