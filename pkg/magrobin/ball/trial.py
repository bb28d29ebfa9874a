"""
Trial-state upper bounds for the ball ground energy.

The trial state of the mode m is separable,

    v(r, theta) = chi((1 - r) / H) R(r) Theta(theta),

where R is the exact zero-field radial ground state sinh(k r) / r with
k coth(k) - 1 = gamma, normalized to R(1) = 1. In the critical regime Theta is
the Montgomery profile f_zeta0((theta - pi/2) / (h/b)^(1/3)) cut off at
|theta - pi/2| = H and m is the mode nearest to the Montgomery centre; in the
h-bounded regime Theta is the ground state of lambda_m(b) at the minimizing m.

Because the mode potential is a polynomial in r and 1/sin(theta), the Rayleigh
quotient reduces to products of radial and polar moments.
"""

from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from magrobin.ball.modes import LAMBDA_THETA_CELLS, e_of_b, mode_pair, polar_pair
from magrobin.ball.problem import BallProblem, critical_center, theta_operator
from magrobin.config.settings import get_settings
from magrobin.effective2d.trial import composite_rule, cutoff
from magrobin.eigsolve import solve_tridiagonal
from magrobin.model1d import montgomery_ground
from magrobin.utils.errors import QuadratureError
from magrobin.utils.logger import StageLogger

CUTOFF_EXPONENTS = {"critical": 13.0 / 60.0, "h_bounded": 0.1}
WEAK_FIELD = 1e-3
START_NODES = 16


@dataclass
class BallTrialBound:
    """
    Upper bounds from one trial state.

    Attributes:
        value: Rayleigh quotient of the continuum trial state.
        discrete: Rayleigh quotient of its samples on the problem grid, an
            upper bound of the discrete ground energy.
        m: Fourier mode of the trial state.
        quadrature_error: Last change under quadrature refinement.
    """

    value: float
    discrete: float
    m: int
    quadrature_error: float
    flags: list[str] = field(default_factory=list)
    meta: dict[str, Any] = field(default_factory=dict)

    def __float__(self) -> float:
        return self.discrete


def radial_wavenumber(gamma: float) -> float:
    """k with k coth(k) - 1 = gamma."""
    return brentq(lambda k: k / np.tanh(k) - 1.0 - gamma, gamma, gamma + 2.0, xtol=1e-14)


def radial_profile(r: np.ndarray, k: float) -> tuple[np.ndarray, np.ndarray]:
    """sinh(k r) / (r sinh k) and its derivative, without overflow."""
    grow = np.exp(k * (r - 1.0))
    decay = np.exp(-k * (r + 1.0))
    norm = 1.0 - np.exp(-2.0 * k)
    value = (grow - decay) / (r * norm)
    slope = (k * (grow + decay) * r - (grow - decay)) / (r**2 * norm)
    return value, slope


class _RadialPart:
    def __init__(self, k: float, width: float):
        self.k = k
        self.width = width

    def __call__(self, r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        chi, dchi = cutoff((1.0 - r) / self.width)
        R, dR = radial_profile(r, self.k)
        return chi * R, chi * dR - dchi / self.width * R

    def moments(self, n: int) -> dict[str, float]:
        H = self.width
        layer = min(4.0 / self.k, 0.25 * H)
        r, w = composite_rule([1.0 - H, 1.0 - 0.5 * H, 1.0 - layer, 1.0], n)
        v, dv = self(r)
        return {
            "kinetic": float(np.sum(w * dv**2 * r**2)),
            "r0": float(np.sum(w * v**2)),
            "r2": float(np.sum(w * v**2 * r**2)),
            "r4": float(np.sum(w * v**2 * r**4)),
        }


class _MontgomeryPart:
    def __init__(self, h: float, b: float, zeta0: float, width: float):
        profile = montgomery_ground(zeta0)
        self.spline = CubicSpline(profile.grid, profile.profile, extrapolate=False)
        self.slope = self.spline.derivative()
        self.scale = (h / b) ** (1.0 / 3.0) if b > 0.0 else np.inf
        self.width = width

    def __call__(self, theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        offset = theta - 0.5 * np.pi
        s = offset / self.scale
        f = np.nan_to_num(self.spline(s))
        df = np.nan_to_num(self.slope(s)) / self.scale
        chi, dchi = cutoff(offset / self.width)
        return chi * f, dchi / self.width * f + chi * df

    def moments(self, n: int) -> dict[str, float]:
        c, H = 0.5 * np.pi, self.width
        inner = min(4.0 * self.scale, 0.25 * H)
        breaks = [c - H, c - 0.5 * H, c - inner, c, c + inner, c + 0.5 * H, c + H]
        theta, w = composite_rule(breaks, n)
        v, dv = self(theta)
        s = np.sin(theta)
        return {
            "s": float(np.sum(w * v**2 * s)),
            "grad": float(np.sum(w * dv**2 * s)),
            "inv": float(np.sum(w * v**2 / s)),
            "zero": float(np.sum(w * v**2)),
            "s3": float(np.sum(w * v**2 * s**3)),
        }


def _polar_moments(m: int, b: float, n_theta: int) -> tuple[dict[str, float], np.ndarray]:
    mode = solve_tridiagonal(polar_pair(m, b, n_theta), k=1).vector(0)
    theta, mass, stiffness = theta_operator(n_theta)
    step = np.pi / n_theta
    s = np.sin(theta)
    moments = {
        "s": float(np.sum(mode**2 * mass)),
        "grad": float(mode @ (stiffness @ mode)),
        "inv": float(np.sum(mode**2 / s) * step),
        "zero": float(np.sum(mode**2) * step),
        "s3": float(np.sum(mode**2 * s**2 * mass)),
    }
    return moments, mode


def _quotient(problem: BallProblem, m: int, radial: dict, polar: dict) -> float:
    h, b = problem.h, problem.b
    kinetic = h**2 * (radial["kinetic"] * polar["s"] + radial["r0"] * polar["grad"])
    if problem.regime == "critical":
        potential = (
            h**2 * m**2 * radial["r0"] * polar["inv"]
            - h * m * b * radial["r2"] * polar["s"]
            + 0.25 * b**2 * radial["r4"] * polar["s3"]
        )
    else:
        potential = h**2 * (
            m**2 * radial["r0"] * polar["inv"]
            - m * b * radial["r2"] * polar["zero"]
            + 0.25 * b**2 * radial["r4"] * polar["s"]
        )
    boundary = h**problem.boundary_exponent * polar["s"]
    return (kinetic + potential - boundary) / (radial["r2"] * polar["s"])


def _discrete_quotient(problem: BallProblem, m: int, radial, polar_samples) -> float:
    form = problem.radial_form()
    r = problem.radius[form.free_nodes]
    vector = np.outer(radial(r)[0], polar_samples).ravel()
    pair = mode_pair(problem, m)
    return float(vector @ (pair.stiffness @ vector)) / float(vector @ (pair.mass @ vector))


def ball_trial_upper_bound(
    h: float,
    b: float,
    regime: str = "critical",
    problem: Optional[BallProblem] = None,
    max_nodes: Optional[int] = None,
    rtol: Optional[float] = None,
) -> BallTrialBound:
    """
    Rayleigh quotient of the localized trial state of the ball.

    Args:
        h: Semiclassical parameter.
        b: Field strength.
        regime: ``"critical"`` or ``"h_bounded"``.
        problem: Grid for the discrete quotient (defaults to BallProblem(h, b, regime)).
        max_nodes: Largest Gauss-Legendre order per panel (settings default).
        rtol: Relative change accepted between refinements (settings default).

    Raises:
        QuadratureError: The continuum quotient did not settle under refinement.
    """
    from magrobin.fixtures import FixtureStore

    settings = get_settings()
    max_nodes = max_nodes or settings.max_quadrature_nodes
    rtol = rtol or settings.quadrature_rtol
    problem = problem or BallProblem(h, b, regime)
    stage = StageLogger("ball_trial")
    stage.start("Evaluating ball trial state", h=h, b=b, regime=regime)

    flags = []
    if b < WEAK_FIELD:
        flags.append("weak_field")
        stage.warning("field below the Montgomery scaling range", b=b, threshold=WEAK_FIELD)

    width = h ** CUTOFF_EXPONENTS[regime]
    radial = _RadialPart(radial_wavenumber(problem.robin_parameter), width)

    if regime == "critical":
        zeta0 = FixtureStore().value("zeta0")
        m = int(round(critical_center(h, b, zeta0)))
        polar = _MontgomeryPart(h, b, zeta0, width)
        polar_moments = polar.moments
        polar_samples = polar(problem.theta)[0]
    else:
        m = e_of_b(b).m_star
        fine, _ = _polar_moments(m, b, LAMBDA_THETA_CELLS)
        _, polar_samples = _polar_moments(m, b, problem.n_theta)

        def polar_moments(n: int) -> dict[str, float]:
            return fine

    history = []
    previous = None
    n = START_NODES
    while n <= max_nodes:
        value = _quotient(problem, m, radial.moments(n), polar_moments(n))
        history.append({"nodes": n, "value": value})
        stage.detail("quadrature", nodes=n, value=value)
        if previous is not None and abs(value - previous) <= rtol * abs(value):
            break
        previous = value
        n *= 2
    else:
        raise QuadratureError(
            "ball trial quadrature did not converge",
            {"history": history, "rtol": rtol, "max_nodes": max_nodes},
        )

    discrete = _discrete_quotient(problem, m, radial, polar_samples)
    meta = {
        "problem": problem.describe(),
        "cutoff_width": width,
        "wavenumber": radial.k,
        "history": history,
    }
    stage.success("Ball trial bound", value=value, discrete=discrete, m=m)
    return BallTrialBound(
        value=value,
        discrete=discrete,
        m=m,
        quadrature_error=abs(value - previous),
        flags=flags,
        meta=meta,
    )
