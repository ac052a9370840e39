"""Exception types shared across the package."""


class StefanError(Exception):
    """Base class for all package errors."""


class DomainError(StefanError, ValueError):
    """Argument outside the mathematical domain of a function."""


class RangeError(StefanError, ValueError):
    """Evaluation requested outside a tabulated range."""


class NonConvergence(StefanError, RuntimeError):
    """An iterative method hit its iteration or subdivision cap."""


class TransformError(StefanError, ValueError):
    """The enthalpy substitution cannot be built for the given material."""


class GaugeError(StefanError, ValueError):
    """Requested canonical gauge needs a non-positive scaling."""


class UnsupportedSubalgebra(StefanError, NotImplementedError):
    """Admissible subalgebra whose reduction is not solved here."""


class NoRoot(StefanError, RuntimeError):
    """No admissible root of the transcendental system was found."""


class StiffnessError(StefanError, RuntimeError):
    """ODE integration failed (step size underflow)."""


class GridError(StefanError, ValueError):
    """Residual sample points intersect the interface exclusion band."""
