"""
Model oscillators: Montgomery, de Gennes and the shifted harmonic family.
"""

from dataclasses import dataclass, field
from typing import Any, NamedTuple, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from magrobin.model1d.forms import WeightedForm1D, transverse_ground
from magrobin.utils.errors import MinimizationAmbiguous
from magrobin.utils.logger import StageLogger, get_logger

logger = get_logger(__name__)

POTENTIAL_MARGIN = 10.0
MONTGOMERY_HALF_WIDTH = 8.0
MONTGOMERY_NODES = 16000
MONTGOMERY_SCAN = (-4.0, 1.0, 0.1)
DEGENNES_STEP = 0.0025
DEGENNES_LENGTH = 20.0
DEGENNES_SCAN = (0.0, 3.0, 0.1)
GOLDEN_TOL = 1e-8


@dataclass
class ModeProfile:
    """Ground energy and normalized positive profile of a 1D oscillator."""

    value: float
    grid: np.ndarray
    profile: np.ndarray
    meta: dict[str, Any] = field(default_factory=dict)


class MontgomeryMinimum(NamedTuple):
    nu0: float
    zeta0: float


class DeGennesMinimum(NamedTuple):
    theta0: float
    xi_min: float


@dataclass
class OscillatorLevel:
    """Ground energy of the shifted harmonic family."""

    value: float
    degenerate_well: bool = False
    well_center: Optional[float] = None
    meta: dict[str, Any] = field(default_factory=dict)

    def __float__(self) -> float:
        return self.value


def montgomery_estimate(zeta: float) -> float:
    """Crude upper estimate of the Montgomery ground energy."""
    return zeta * zeta + np.sqrt(2.0 * abs(zeta)) + 1.0


def montgomery_half_width(zeta: float, half_width: float) -> float:
    """Smallest half-width >= ``half_width`` clearing the potential margin."""
    target = np.sqrt(montgomery_estimate(zeta) + POTENTIAL_MARGIN)
    needed = float(np.sqrt(2.0 * max(target - zeta, 0.0)))
    return max(half_width, needed)


def _centered_form(potential, half_width: float, n: int) -> WeightedForm1D:
    grid = np.linspace(0.0, 2.0 * half_width, n + 1)
    return WeightedForm1D(
        grid,
        1.0,
        potential(grid - half_width),
        boundary_coeff=0.0,
        right_condition="dirichlet",
        left_condition="dirichlet",
    )


def montgomery_ground(
    zeta: float,
    half_width: float = MONTGOMERY_HALF_WIDTH,
    n: int = MONTGOMERY_NODES,
) -> ModeProfile:
    """
    Ground state of ``-d^2/ds^2 + (zeta + s^2/2)^2`` on [-L, L], Dirichlet ends.

    L is enlarged until the potential at the ends exceeds the energy
    estimate by ``POTENTIAL_MARGIN``; ``n`` is the number of intervals.
    """
    width = montgomery_half_width(zeta, half_width)
    if width > half_width:
        logger.debug(f"montgomery half-width enlarged from {half_width:g} to {width:g}")
    form = _centered_form(lambda s: (zeta + 0.5 * s * s) ** 2, width, n)
    mode = transverse_ground(form)
    return ModeProfile(
        value=mode.mu,
        grid=form.grid - width,
        profile=mode.f,
        meta={"zeta": zeta, "half_width": width, "intervals": n, **mode.meta},
    )


def montgomery_lambda(
    zeta: float,
    half_width: float = MONTGOMERY_HALF_WIDTH,
    n: int = MONTGOMERY_NODES,
) -> float:
    """Ground eigenvalue lambda(zeta) of the Montgomery model."""
    return montgomery_ground(zeta, half_width, n).value


def _scan_minimum(func, start: float, stop: float, step: float, name: str):
    points = np.round(np.arange(start, stop + 0.5 * step, step), 12)
    values = np.array([func(p) for p in points])
    table = [{"x": float(p), "value": float(v)} for p, v in zip(points, values)]

    i = int(np.argmin(values))
    slopes = np.sign(np.diff(values))
    turns = np.count_nonzero(np.diff(slopes) != 0)
    if i in (0, points.size - 1) or turns > 1:
        raise MinimizationAmbiguous(
            f"{name}: scan minimum is not bracketed by a unimodal profile",
            {"scan": table, "argmin": float(points[i])},
        )
    return (float(points[i - 1]), float(points[i]), float(points[i + 1])), table


def montgomery_min(
    half_width: float = MONTGOMERY_HALF_WIDTH,
    n: int = MONTGOMERY_NODES,
) -> MontgomeryMinimum:
    """
    Minimum nu0 = lambda(zeta0) of the Montgomery ground energy over zeta.

    A coarse scan on [-4, 1] brackets the minimum; golden-section search
    refines it to 1e-8.

    Raises:
        MinimizationAmbiguous: The scan is not unimodal, or the minimum
            violates zeta0 < 0 < nu0.
    """
    stage = StageLogger("montgomery")
    stage.start("scan", half_width=half_width, n=n)

    func = lambda z: montgomery_lambda(z, half_width, n)  # noqa: E731
    bracket, table = _scan_minimum(func, *MONTGOMERY_SCAN, name="montgomery")
    result = minimize_scalar(func, bracket=bracket, method="golden", tol=GOLDEN_TOL)
    nu0, zeta0 = float(result.fun), float(result.x)

    if not (zeta0 < 0.0 and nu0 > 0.0):
        raise MinimizationAmbiguous(
            "montgomery minimum outside zeta0 < 0 < nu0",
            {"nu0": nu0, "zeta0": zeta0, "scan": table},
        )
    stage.success("minimum", nu0=nu0, zeta0=zeta0, evaluations=int(result.nfev))
    return MontgomeryMinimum(nu0, zeta0)


def harmonic_ground(
    h: float,
    m: float,
    xi: float,
    eta: float,
    half_width: float = 12.0,
    n: int = 4800,
) -> OscillatorLevel:
    """
    Ground energy of ``(-i h d/ds - m)^2 + (xi + m + eta s)^2`` on the line.

    The phase e^(i m s / h) and the translation s -> s - (xi + m)/eta turn
    the operator into ``-h^2 d^2/ds^2 + eta^2 s^2``, and s = (h/|eta|)^(1/2) x
    into ``h|eta| (-d^2/dx^2 + x^2)``. Only the last form is discretized,
    on [-half_width, half_width] in x with ``n`` intervals.

    With eta = 0 the spectrum is [0, inf) and 0 is returned with
    ``degenerate_well`` set.
    """
    if eta == 0.0:
        return OscillatorLevel(0.0, degenerate_well=True, meta={"h": h})

    form = _centered_form(lambda x: x * x, half_width, n)
    unit = transverse_ground(form).mu
    return OscillatorLevel(
        value=h * abs(eta) * unit,
        well_center=-(xi + m) / eta,
        meta={"h": h, "unit_ground": unit, "half_width": half_width, "intervals": n},
    )


def degennes_lambda(
    xi: float, step: float = DEGENNES_STEP, length: float = DEGENNES_LENGTH
) -> float:
    """Ground energy of ``-d^2/dt^2 + (t - xi)^2`` on (0, T), Neumann at 0."""
    form = WeightedForm1D.uniform(
        length,
        step,
        weight=1.0,
        potential=lambda t: (t - xi) ** 2,
        boundary_coeff=0.0,
        right_condition="dirichlet",
    )
    return transverse_ground(form).mu


def degennes_theta0(
    step: float = DEGENNES_STEP, length: float = DEGENNES_LENGTH
) -> DeGennesMinimum:
    """
    de Gennes constant Theta0 and its minimizer xi.

    Raises:
        MinimizationAmbiguous: Scan on [0, 3] is not unimodal or the minimum
            lies outside (1/2, 1).
    """
    stage = StageLogger("degennes")
    stage.start("scan", step=step, length=length)

    func = lambda xi: degennes_lambda(xi, step, length)  # noqa: E731
    bracket, table = _scan_minimum(func, *DEGENNES_SCAN, name="degennes")
    result = minimize_scalar(func, bracket=bracket, method="golden", tol=GOLDEN_TOL)
    theta0, xi_min = float(result.fun), float(result.x)

    if not 0.5 < theta0 < 1.0:
        raise MinimizationAmbiguous(
            "de Gennes minimum outside (1/2, 1)",
            {"theta0": theta0, "xi_min": xi_min, "scan": table},
        )
    stage.success("minimum", theta0=theta0, xi_min=xi_min)
    return DeGennesMinimum(theta0, xi_min)
