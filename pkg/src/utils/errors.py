from typing import Optional


class RegularizationError(Exception):
    pass


class ConfigurationError(RegularizationError, ValueError):
    pass


class DimensionMismatchError(RegularizationError, ValueError):
    def __init__(
        self,
        what: str,
        expected: object,
        actual: object,
    ) -> None:
        super().__init__(f"Invalid {what} shape: expected {expected}, got {actual}")
        self.expected = expected
        self.actual = actual


class NumericalError(RegularizationError, ArithmeticError):
    pass


class DecompositionError(NumericalError):
    pass


class NotPositiveDefiniteError(DecompositionError):
    def __init__(
        self,
        pivot: int,
        step: Optional[int] = None,
    ) -> None:
        message = f"Matrix is not positive definite: leading minor {pivot} failed"
        if step is not None:
            message = f"{message} at backward step k={step}"
        super().__init__(message)
        self.pivot = pivot
        self.step = step


class StabilityError(NumericalError):
    def __init__(
        self,
        message: str,
        required_steps: Optional[int] = None,
    ) -> None:
        super().__init__(message)
        self.required_steps = required_steps
