class KNError(Exception):
    """Base class for library errors."""


class InsufficientPrecision(KNError, ArithmeticError):
    """A requested coefficient lies outside the trusted window.

    ``deficit`` says by how much the window would have to grow, when the
    caller can compute it.
    """

    def __init__(self, message, deficit=None):
        super().__init__(message)
        self.deficit = deficit


class ModelError(KNError, ValueError):
    """A surface model is malformed or violates its normalization."""


class WindowError(KNError, ValueError):
    """A structure-constant or Fock window is too narrow for the request."""
