"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input violates a mathematical precondition (non-Hermitian, not PSD,
    dimension mismatch, invalid exponent, ...)."""


class FormatError(ValueError):
    """A JSON document does not match the expected schema.

    Carries the path of the offending element so the CLI can point at it.
    """

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")
