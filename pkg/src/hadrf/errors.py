"""Exception types raised by hadrf."""


class NumericalError(RuntimeError):
    """A numerical procedure failed (non-convergence, bad embedding, ...)."""


class QuadratureError(NumericalError):
    pass


class EmbeddingError(NumericalError):
    pass


class DegenerateLevelError(NumericalError):
    """F is constant and equal to the requested level on an interval."""


class UnsupportedTransformError(ValueError):
    """The (transform, component count) pair has no supported GMF family."""
