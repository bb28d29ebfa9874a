"""
Compute errors raised by the magrobin modules.

Every error carries a ``details`` dict that the services layer serializes
into ``result.json``.
"""

from typing import Any, Optional


class SpectralError(Exception):
    """Base class for solver, geometry and fitting failures."""

    def __init__(self, message: str, details: Optional[dict[str, Any]] = None):
        self.message = message
        self.details = dict(details or {})
        super().__init__(message)

    def to_dict(self) -> dict[str, Any]:
        return {
            "type": type(self).__name__,
            "message": self.message,
            "details": _jsonable(self.details),
        }


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "tolist"):
        return value.tolist()
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return repr(value)


# eigsolve
class InvalidMass(SpectralError):
    """Mass matrix has a non-positive diagonal entry or is not definite."""


class DimensionError(SpectralError):
    """Requested eigenpair count or matrix size is out of range."""


class SolverError(SpectralError):
    """Iterative eigensolver did not converge."""


class ShiftSingular(SpectralError):
    """The shifted matrix A - sigma M could not be factorized."""


# model1d
class InvalidWeight(SpectralError):
    """Weight of a 1D form is not strictly positive."""


class MinimizationAmbiguous(SpectralError):
    """No unique bracketed minimum was found."""


# geometry
class DegenerateChart(SpectralError):
    """Chart differential has rank below two."""


class AssumptionViolated(SpectralError):
    """Hypotheses of the harmonic-well expansion fail at the minimizer."""


class ProjectionFailed(SpectralError):
    """Closest-point projection onto the surface did not converge."""


# effective2d
class CollarTooDeep(SpectralError):
    """Collar depth reaches the focal distance of the surface."""


class PotentialInconsistent(SpectralError):
    """Curl of the supplied vector potential does not match the field."""


class AssemblyError(SpectralError):
    """Assembled form is not Hermitian or its mass is indefinite."""


class QuadratureError(SpectralError):
    """Quadrature did not converge under refinement."""


# ball
class GridError(SpectralError):
    """Assembly produced non-finite entries on the requested grid."""


class WindowExhausted(SpectralError):
    """Adaptive mode window reached its cap before the minimum was enclosed."""


# asymfit
class FitConditioning(SpectralError):
    """Design matrix is rank deficient or too ill-conditioned."""


class ExtrapolationUnsafe(SpectralError):
    """Sequence does not converge monotonically; carries the finest value."""

    def __init__(
        self,
        message: str,
        finest: float,
        details: Optional[dict[str, Any]] = None,
    ):
        self.finest = finest
        super().__init__(message, {**(details or {}), "finest": finest})
