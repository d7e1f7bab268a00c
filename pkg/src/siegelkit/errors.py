"""Exception hierarchy shared by all modules."""


class SiegelError(Exception):
    """Base class for every error raised by siegelkit."""


class MalformedInputError(SiegelError, ValueError):
    pass


class GenusMismatchError(SiegelError, ValueError):
    pass


class NotSymplecticError(SiegelError, ValueError):
    pass


class NotPositiveDefiniteError(SiegelError, ValueError):
    def __init__(self, smallest_eigenvalue: float):
        self.smallest_eigenvalue = smallest_eigenvalue
        super().__init__(
            f"imaginary part is not positive definite "
            f"(smallest eigenvalue {smallest_eigenvalue:.6g})"
        )


class PrecisionError(SiegelError, ArithmeticError):
    pass


class BudgetExceededError(SiegelError, RuntimeError):
    def __init__(self, message: str, diagnostics: dict | None = None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)


class UnsupportedGenusError(SiegelError, ValueError):
    pass


class DegenerateFitError(SiegelError, ValueError):
    pass


class DomainPreconditionError(SiegelError, ValueError):
    pass


class UnknownPredicateError(SiegelError, KeyError):
    pass
