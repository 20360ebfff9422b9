"""Exception hierarchy shared by every module."""


class ModinvError(Exception):
    """Base class for all library errors."""


class InvalidInput(ModinvError, ValueError):
    """Input violates an operation's precondition (shape, hermiticity, admissibility)."""


class NotInvertible(ModinvError):
    """A vector is not cyclic and separating (its matrix is singular)."""


class NotAModularShape(ModinvError):
    """A superoperator is not a product of a left and a right multiplication."""


class NotIntertwinable(ModinvError):
    """Two modular operators have different clustered spectra."""


class PreconditionFailed(ModinvError):
    """Hypotheses of a construction do not hold; carries the offending residuals."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = dict(residuals or {})


class ConstructionFailed(ModinvError):
    """A construction finished but its certificate did not verify."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = dict(residuals or {})
