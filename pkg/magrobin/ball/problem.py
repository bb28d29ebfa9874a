"""
Unit ball with a uniform axial field, reduced to a single Fourier mode.

After the substitution u = exp(i m phi) v(r, theta) the form of the mode m is

    int int (h^2 |v_r|^2 + h^2 / r^2 |v_theta|^2 + V_m |v|^2) r^2 sin(theta)
        - h^a int |v(1, theta)|^2 sin(theta),

with Dirichlet conditions at r = 1 - h^rho. The two supported regimes differ
only in the boundary exponent a and in the mode potential V_m:

    critical   a = 1,    V_m = (h m - b r^2 sin^2 / 2)^2 / (r^2 sin^2)
    h_bounded  a = 3/2,  V_m = h^2 (m / sin - b r^2 / 2)^2 / r^2

The radial variable is tau = (1 - r) / l with the decay length l = h^(2 - a).
Radial steps grow like 0.04 exp(tau / 2), capped at 0.5; the polar angle uses
cell-centred finite volumes so 1/sin(theta) is never evaluated at a pole.
"""

from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Literal, Optional

import numpy as np
import scipy.sparse as sp

from magrobin.eigsolve import solve_tridiagonal
from magrobin.model1d import WeightedForm1D
from magrobin.utils.errors import GridError
from magrobin.utils.logger import format_fields, get_logger
from magrobin.utils.validators import ValidationError

logger = get_logger(__name__)

Regime = Literal["critical", "h_bounded"]

BOUNDARY_EXPONENTS = {"critical": 1.0, "h_bounded": 1.5}
TRUNCATION_EXPONENTS = {"critical": 0.4, "h_bounded": 0.1}
THETA_CELLS = 256
RADIAL_STEP = 0.04
RADIAL_STEP_CAP = 0.5


@dataclass(frozen=True)
class BallProblem:
    """
    Discretized ball problem at fixed (h, b).

    Attributes:
        h: Semiclassical parameter in (0, 1).
        b: Field strength, b >= 0.
        regime: ``"critical"`` or ``"h_bounded"``.
        rho: Truncation exponent; the regime default when omitted.
        n_theta: Number of polar cells.
        radial_step: Radial step at the boundary in units of the decay length.
    """

    h: float
    b: float
    regime: Regime = "critical"
    rho: Optional[float] = None
    n_theta: int = THETA_CELLS
    radial_step: float = RADIAL_STEP

    def __post_init__(self):
        if self.regime not in BOUNDARY_EXPONENTS:
            raise ValidationError("regime", "must be 'critical' or 'h_bounded'", self.regime)
        if not 0.0 < self.h < 1.0:
            raise ValidationError("h", "must lie in (0, 1)", self.h)
        if not (np.isfinite(self.b) and self.b >= 0.0):
            raise ValidationError("b", "must be finite and non-negative", self.b)
        if self.rho is None:
            object.__setattr__(self, "rho", TRUNCATION_EXPONENTS[self.regime])
        if not 0.0 < self.rho < 1.0:
            raise ValidationError("rho", "must lie in (0, 1)", self.rho)
        if self.n_theta < 16:
            raise GridError("too few polar cells", {"n_theta": self.n_theta})
        if not 0.0 < self.radial_step <= RADIAL_STEP_CAP:
            raise GridError("radial step out of range", {"radial_step": self.radial_step})

    @property
    def boundary_exponent(self) -> float:
        return BOUNDARY_EXPONENTS[self.regime]

    @property
    def decay_length(self) -> float:
        return self.h ** (2.0 - self.boundary_exponent)

    @property
    def radial_scale(self) -> float:
        """Common factor h^(2a - 2) of the radial kinetic and boundary terms."""
        return self.h ** (2.0 * self.boundary_exponent - 2.0)

    @property
    def robin_parameter(self) -> float:
        """gamma = h^(a - 2) of the unscaled Robin condition."""
        return self.h ** (self.boundary_exponent - 2.0)

    @property
    def inner_radius(self) -> float:
        return 1.0 - self.h**self.rho

    @property
    def potential_scale(self) -> float:
        """Factor in front of the angular potential r sin(theta) / 2."""
        return self.b if self.regime == "critical" else self.h * self.b

    @cached_property
    def tau(self) -> np.ndarray:
        tau_max = self.h**self.rho / self.decay_length
        nodes = [0.0]
        while nodes[-1] < tau_max:
            step = min(self.radial_step * np.exp(0.5 * nodes[-1]), RADIAL_STEP_CAP)
            nodes.append(nodes[-1] + step)
        nodes = np.asarray(nodes)
        return nodes * (tau_max / nodes[-1])

    @property
    def radius(self) -> np.ndarray:
        return 1.0 - self.decay_length * self.tau

    @cached_property
    def theta(self) -> np.ndarray:
        step = np.pi / self.n_theta
        return (np.arange(self.n_theta) + 0.5) * step

    def radial_form(self) -> WeightedForm1D:
        """Radial zero-field form in tau with weight r^2 and unit Robin coefficient."""
        return WeightedForm1D(
            self.tau,
            self.radius**2,
            0.0,
            boundary_coeff=1.0,
            right_condition="dirichlet",
        )

    def potential(self, r: np.ndarray, theta: np.ndarray, m: int) -> np.ndarray:
        """Mode potential V_m at (r, theta)."""
        s = np.sin(theta)
        if self.regime == "critical":
            return (self.h * m - 0.5 * self.b * r**2 * s**2) ** 2 / (r**2 * s**2)
        return self.h**2 * (m / s - 0.5 * self.b * r**2) ** 2 / r**2

    def potential_bound(self) -> float:
        """sup of the m = 0 potential over the ball."""
        return 0.25 * self.potential_scale**2

    def center_mode(self, zeta0: Optional[float] = None) -> int:
        """Mode where the angular well sits on the equator."""
        if self.b == 0.0:
            return 0
        if self.regime == "h_bounded":
            return int(round(0.5 * self.b))
        return int(round(critical_center(self.h, self.b, zeta0)))

    def describe(self) -> dict:
        return {
            "h": self.h,
            "b": self.b,
            "regime": self.regime,
            "rho": self.rho,
            "boundary_exponent": self.boundary_exponent,
            "inner_radius": self.inner_radius,
            "n_r": int(self.tau.size - 1),
            "n_theta": self.n_theta,
        }


def critical_center(h: float, b: float, zeta0: Optional[float] = None) -> float:
    """Mode index b (1 + 2 (h/b)^(2/3) zeta0) / (2h) of the Montgomery reduction."""
    if b == 0.0:
        return 0.0
    if zeta0 is None:
        from magrobin.fixtures import FixtureStore

        zeta0 = FixtureStore().value("zeta0")
    return b * (1.0 + 2.0 * (h / b) ** (2.0 / 3.0) * zeta0) / (2.0 * h)


@lru_cache(maxsize=32)
def theta_operator(n: int) -> tuple[np.ndarray, np.ndarray, sp.csr_matrix]:
    """
    Cell centres, cell masses sin(theta) dtheta and the finite-volume stiffness
    of int |v_theta|^2 sin(theta) on n polar cells.
    """
    step = np.pi / n
    theta = (np.arange(n) + 0.5) * step
    mass = np.sin(theta) * step
    faces = np.sin(np.arange(1, n) * step) / step
    diag = np.zeros(n)
    diag[:-1] += faces
    diag[1:] += faces
    stiffness = sp.diags([-faces, diag, -faces], [-1, 0, 1], format="csr")
    return theta, mass, stiffness


@lru_cache(maxsize=64)
def zero_field_reference(problem: BallProblem) -> float:
    """
    Ground energy of the zero-field problem on the same discretization.

    The theta-constant m = 0 state at b = 0 reduces to the radial Robin
    problem, whose ground energy times h^(2a - 2) is the exact discrete value.
    It lies below every mode at every field strength.
    """
    spectrum = solve_tridiagonal(problem.radial_form().operator_pair(), k=1)
    value = problem.radial_scale * spectrum.ground
    logger.debug(
        "zero-field reference | "
        + format_fields(h=problem.h, regime=problem.regime, value=value)
    )
    return float(value)
