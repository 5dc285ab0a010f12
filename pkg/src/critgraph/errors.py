"""Exception hierarchy shared by all modules."""


class CritGraphError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(CritGraphError, ValueError):
    """A parameter lies outside its documented validity range."""


class InputError(CritGraphError, ValueError):
    """Malformed input data (NaN, wrong shape, inconsistent sizes)."""


class ConvergenceError(CritGraphError, RuntimeError):
    def __init__(self, message: str, residual: float = float("nan"), iterations: int = 0):
        super().__init__(f"{message} (residual={residual:.3e}, iterations={iterations})")
        self.residual = residual
        self.iterations = iterations


class DegenerateInputError(CritGraphError, ValueError):
    """Input for which the requested quantity is undefined (zero matrix, zero mass)."""


class SupercriticalError(CritGraphError, ValueError):
    """Resolvent requested for an operator with spectral radius >= 1."""


class CriticalityError(CritGraphError, ValueError):
    """Perron root differs from one where criticality is required."""


class SizeError(CritGraphError, ValueError):
    """Instance too large for an exhaustive algorithm."""
