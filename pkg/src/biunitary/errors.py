"""Exception types shared across the package."""


class RangeError(ValueError):
    """A parameter (level, label, index) lies outside its valid range."""


class DomainError(ValueError):
    """Labels do not form an admissible fusion channel."""


class SpecError(ValueError):
    """A catalog entry or Q-system description is inconsistent."""


class CompositionError(ValueError):
    """Two connections cannot be composed because their shared graphs differ."""


class ResourceError(RuntimeError):
    """A requested computation exceeds the configured size bound."""


class NumericError(RuntimeError):
    """A numerical solve failed to produce a certifiable answer.

    ``residual`` carries the best residual (or offending singular value) seen.
    """

    def __init__(self, message, residual=float("nan")):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual
