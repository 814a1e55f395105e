class DomainError(ValueError):
    """Argument outside the domain of a function (e.g. on a branch cut)."""


class ConvergenceError(RuntimeError):
    """An iterative or adaptive numerical method missed its tolerance."""
