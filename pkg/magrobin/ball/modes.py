"""
Fourier-mode spectra of the ball and of the polar effective problem.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Iterable, Iterator, Literal, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from magrobin.ball.problem import BallProblem, theta_operator, zero_field_reference
from magrobin.config.settings import get_settings
from magrobin.eigsolve import (
    Spectrum,
    SymmetricOperatorPair,
    lower_bound_shift,
    solve_dense,
    solve_sparse,
    solve_tridiagonal,
)
from magrobin.model1d import WeightedForm1D
from magrobin.utils.errors import GridError, WindowExhausted
from magrobin.utils.logger import StageLogger, format_fields, get_logger

logger = get_logger(__name__)

LAMBDA_THETA_CELLS = 1024
GROUND_MARGIN = 10.0
E_MARGIN = 1.0
TREND_MODES = 3
START_HALF_WIDTH = 2


@dataclass
class ModeCurve:
    """Eigenvalues of one Fourier mode along a parameter axis."""

    m: int
    parameter: np.ndarray
    values: np.ndarray
    axis: Literal["b", "h"] = "b"

    def rows(self) -> Iterator[dict[str, float]]:
        for p, v in zip(self.parameter, self.values):
            yield {"b_or_h": float(p), "m": self.m, "lambda": float(v)}


@dataclass
class WindowMinimum:
    """
    Minimum over Fourier modes found by an adaptive window.

    Unpacks as ``(value, m_star)``.
    """

    value: float
    m_star: int
    modes: dict[int, float]
    meta: dict[str, Any] = field(default_factory=dict)

    def __iter__(self):
        return iter((self.value, self.m_star))

    def table(self) -> list[dict[str, float]]:
        return [{"m": m, "value": v} for m, v in sorted(self.modes.items())]


@lru_cache(maxsize=8)
def _mode_blocks(problem: BallProblem):
    radial = problem.radial_form()
    pair = radial.operator_pair()
    free = radial.free_nodes
    unit_mass = WeightedForm1D(problem.tau, 1.0, 0.0).lumped_mass()[free]
    r_mass = pair.mass.diagonal()
    _, t_mass, t_stiff = theta_operator(problem.n_theta)

    kinetic = problem.radial_scale * sp.kron(pair.stiffness, sp.diags(t_mass)) + (
        problem.h**2 * sp.kron(sp.diags(unit_mass), t_stiff)
    )
    mass = sp.kron(sp.diags(r_mass), sp.diags(t_mass))
    nodal = np.outer(r_mass, t_mass)
    return kinetic.tocsr(), mass.tocsr(), nodal, problem.radius[free]


def mode_pair(problem: BallProblem, m: int) -> SymmetricOperatorPair:
    """
    Stiffness and mass of the mode ``m`` on the (r, theta) grid.

    Unknowns are ordered radius-major; both matrices are divided by the decay
    length, which leaves the eigenvalues unchanged.

    Raises:
        GridError: The mode potential is not finite on the grid.
    """
    kinetic, mass, nodal, r = _mode_blocks(problem)
    # nodal already carries the r^2 sin(theta) measure
    potential = problem.potential(r[:, None], problem.theta[None, :], m)
    if not np.all(np.isfinite(potential)):
        raise GridError(
            "mode potential is not finite on the polar grid",
            {"m": m, "n_theta": problem.n_theta},
        )
    stiffness = kinetic + sp.diags((nodal * potential).ravel())
    grid = {**problem.describe(), "m": int(m), "unknowns": int(mass.shape[0])}
    return SymmetricOperatorPair(stiffness.tocsr(), mass, grid)


def ball_mode_spectrum(
    problem: BallProblem,
    m: int,
    k: int = 1,
    solver: Literal["sparse", "dense"] = "sparse",
    seed: int = 0,
) -> Spectrum:
    """
    Lowest ``k`` eigenvalues of the Fourier mode ``m``.

    The shift-invert shift sits just below the zero-field reference, which
    bounds every mode from below.
    """
    pair = mode_pair(problem, m)
    if solver == "dense":
        spectrum = solve_dense(pair, k)
    else:
        shift = lower_bound_shift(np.array([zero_field_reference(problem)]))
        spectrum = solve_sparse(pair, k, shift, seed=seed)
    spectrum.meta.update({"m": int(m), "regime": problem.regime})
    return spectrum


def _side_closed(outward: Sequence[float], margin: float) -> tuple[bool, str]:
    """Whether values leaving the minimum rise by ``margin`` or steadily."""
    if len(outward) < 2:
        return False, "open"
    if outward[-1] >= outward[0] + margin:
        return True, "margin"
    if len(outward) > TREND_MODES and np.all(np.diff(outward) > 0.0):
        return True, "trend"
    return False, "open"


def scan_window(
    evaluate: Callable[[int], float],
    center: int,
    margin: float,
    cap: Optional[int] = None,
    name: str = "window",
) -> WindowMinimum:
    """
    Minimize ``evaluate`` over integer modes by a doubling window.

    The window [center - w, center + w] doubles until, on both sides of the
    minimum, the end value exceeds the minimum by ``margin`` or the values rise
    monotonically over more than ``TREND_MODES`` modes.

    Raises:
        WindowExhausted: More than ``cap`` modes would be evaluated.
    """
    cap = cap or get_settings().max_window_modes
    stage = StageLogger(name)
    values: dict[int, float] = {}
    width = START_HALF_WIDTH
    while True:
        lo, hi = center - width, center + width
        needed = [m for m in range(lo, hi + 1) if m not in values]
        if len(values) + len(needed) > cap:
            raise WindowExhausted(
                f"{name}: mode window exceeded {cap} modes",
                {
                    "center": center,
                    "margin": margin,
                    "scan": [{"m": m, "value": v} for m, v in sorted(values.items())],
                },
            )
        for m in needed:
            values[m] = float(evaluate(m))
            stage.detail("mode", m=m, value=values[m])

        modes = np.arange(lo, hi + 1)
        table = np.array([values[m] for m in modes])
        i = int(np.argmin(table))
        left, how_left = _side_closed(table[: i + 1][::-1], margin)
        right, how_right = _side_closed(table[i:], margin)
        if left and right:
            break
        width *= 2

    if "trend" in (how_left, how_right):
        stage.warning(
            "window closed by monotone rise, not by margin",
            left=how_left,
            right=how_right,
            margin=margin,
        )
    meta = {
        "window": [int(lo), int(hi)],
        "center": int(center),
        "margin": margin,
        "closed_by": [how_left, how_right],
        "evaluations": len(values),
    }
    stage.success("Window minimum", m_star=int(modes[i]), value=float(table[i]), lo=lo, hi=hi)
    return WindowMinimum(float(table[i]), int(modes[i]), dict(values), meta)


def ball_ground(problem: BallProblem, seed: int = 0) -> WindowMinimum:
    """
    Ground energy of the ball, minimized over Fourier modes.

    The window starts at ``problem.center_mode()`` and closes with a margin
    of 10 h (unpacks as ``(energy, m_star)``).
    """
    center = problem.center_mode()
    logger.info(
        "ball ground | "
        + format_fields(h=problem.h, b=problem.b, regime=problem.regime, center=center)
    )
    result = scan_window(
        lambda m: ball_mode_spectrum(problem, m, 1, seed=seed).ground,
        center,
        GROUND_MARGIN * problem.h,
        name="ball",
    )
    result.meta.update(
        {"problem": problem.describe(), "zero_field": zero_field_reference(problem)}
    )
    return result


def polar_pair(m: int, b: float, n_theta: int = LAMBDA_THETA_CELLS) -> SymmetricOperatorPair:
    """Tridiagonal pair of int (|f'|^2 + (m / sin - b/2)^2 |f|^2) sin on n_theta cells."""
    if n_theta < 64:
        raise GridError("lambda_m needs at least 64 polar cells", {"n_theta": n_theta})
    theta, mass, stiffness = theta_operator(n_theta)
    potential = (m / np.sin(theta) - 0.5 * b) ** 2
    diag = stiffness.diagonal() + potential * mass
    if not np.all(np.isfinite(diag)):
        raise GridError("polar potential is not finite", {"m": m, "b": b})
    return SymmetricOperatorPair.from_tridiagonal(
        diag,
        stiffness.diagonal(1),
        mass,
        grid={"n_theta": n_theta, "m": int(m), "b": float(b)},
    )


def lambda_m(m: int, b: float, n_theta: int = LAMBDA_THETA_CELLS) -> float:
    """Ground eigenvalue lambda_m(b) of the polar effective form."""
    return solve_tridiagonal(polar_pair(m, b, n_theta), k=1).ground


def e_of_b(b: float, n_theta: int = LAMBDA_THETA_CELLS) -> WindowMinimum:
    """inf over m of lambda_m(b); unpacks as ``(value, m_star)``."""
    return scan_window(
        lambda m: lambda_m(m, b, n_theta),
        int(round(0.5 * b)),
        E_MARGIN,
        name="e_of_b",
    )


def auto_mode_window(b_values: Iterable[float]) -> list[int]:
    """Modes 0 .. ceil(max b / 2) + 2, which hold the minimizer of every lambda_m(b)."""
    top = int(np.ceil(0.5 * max(b_values))) + 2
    return list(range(0, top + 1))


def mode_curves(
    b_values: Sequence[float],
    m_window: Sequence[int],
    n_theta: int = LAMBDA_THETA_CELLS,
) -> list[ModeCurve]:
    """lambda_m(b) along ``b_values`` for every m in ``m_window``."""
    b_values = np.asarray(b_values, dtype=float)
    curves = []
    for m in m_window:
        values = np.array([lambda_m(m, b, n_theta) for b in b_values])
        curves.append(ModeCurve(int(m), b_values, values, "b"))
    return curves
