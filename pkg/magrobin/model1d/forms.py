"""
Weighted one-dimensional quadratic forms and their ground states.

The form

    u -> int w |u'|^2 dt + int V |u|^2 w dt - beta |u(0)|^2

is discretized with piecewise-linear elements on the given grid. The mass
matrix is lumped (nodal trapezoid weights) by default, which keeps every
solve on the LAPACK tridiagonal path; ``mass="consistent"`` gives the exact
Galerkin mass.
"""

from dataclasses import dataclass, field
from typing import Any, Literal, Optional

import numpy as np
from scipy.integrate import trapezoid

from magrobin.eigsolve import Spectrum, SymmetricOperatorPair, solve_tridiagonal
from magrobin.utils.errors import DimensionError, InvalidWeight, SolverError

MIN_INTERVALS = 16
# relative size of rounding noise tolerated in the tails of a ground vector
SIGN_NOISE = 1e-8


@dataclass(frozen=True)
class WeightedForm1D:
    """
    Quadratic form on a grid ``0 = t_0 < ... < t_N = T``.

    Attributes:
        grid: Nodes, strictly increasing, N >= 16 intervals.
        weight: w(t_i) > 0.
        potential: V(t_i).
        boundary_coeff: beta in the boundary term ``-beta |u(0)|^2``.
        right_condition: ``"dirichlet"`` or ``"free"`` at t_N.
        left_condition: ``"robin"`` (natural, with the beta term) or
            ``"dirichlet"`` at t_0.
        mass: ``"lumped"`` or ``"consistent"``.
    """

    grid: np.ndarray
    weight: np.ndarray
    potential: np.ndarray
    boundary_coeff: float = 0.0
    right_condition: Literal["dirichlet", "free"] = "dirichlet"
    left_condition: Literal["robin", "dirichlet"] = "robin"
    mass: Literal["lumped", "consistent"] = "lumped"

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        weight = np.broadcast_to(np.asarray(self.weight, dtype=float), grid.shape).copy()
        potential = np.broadcast_to(
            np.asarray(self.potential, dtype=float), grid.shape
        ).copy()
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "weight", weight)
        object.__setattr__(self, "potential", potential)

        if grid.ndim != 1 or grid.size < MIN_INTERVALS + 1:
            raise DimensionError(
                f"grid needs at least {MIN_INTERVALS} intervals",
                {"nodes": int(grid.size)},
            )
        if np.any(np.diff(grid) <= 0.0):
            raise DimensionError("grid must be strictly increasing")
        if self.right_condition not in ("dirichlet", "free"):
            raise DimensionError(f"unknown right condition {self.right_condition!r}")
        if self.left_condition not in ("robin", "dirichlet"):
            raise DimensionError(f"unknown left condition {self.left_condition!r}")

        bad = np.flatnonzero(~(weight > 0.0))
        if bad.size:
            raise InvalidWeight(
                "weight must be strictly positive on the grid",
                {"t": float(grid[bad[0]]), "weight": float(weight[bad[0]])},
            )
        if not np.all(np.isfinite(potential)):
            raise DimensionError("potential samples must be finite")

    @classmethod
    def uniform(
        cls,
        length: float,
        step: float,
        weight=1.0,
        potential=0.0,
        **kwargs,
    ) -> "WeightedForm1D":
        """Form on a uniform grid of ``length`` with spacing close to ``step``.

        ``weight`` and ``potential`` may be callables of t or constants.
        """
        # round first so that length / step just above an integer is not bumped
        intervals = max(MIN_INTERVALS, int(np.ceil(round(length / step, 9))))
        grid = np.linspace(0.0, length, intervals + 1)
        w = weight(grid) if callable(weight) else weight
        v = potential(grid) if callable(potential) else potential
        return cls(grid, w, v, **kwargs)

    @property
    def free_nodes(self) -> np.ndarray:
        """Indices of nodes that carry unknowns."""
        start = 1 if self.left_condition == "dirichlet" else 0
        stop = self.grid.size - 1 if self.right_condition == "dirichlet" else self.grid.size
        return np.arange(start, stop)

    def lumped_mass(self) -> np.ndarray:
        """Nodal trapezoid weights of the measure w dt on the full grid."""
        lengths = np.diff(self.grid)
        nodal = np.zeros(self.grid.size)
        nodal[:-1] += 0.5 * lengths
        nodal[1:] += 0.5 * lengths
        return nodal * self.weight

    def operator_pair(self) -> SymmetricOperatorPair:
        """Stiffness and mass restricted to the free nodes."""
        t, w, v = self.grid, self.weight, self.potential
        lengths = np.diff(t)
        w_mid = 0.5 * (w[:-1] + w[1:])
        v_mid = 0.5 * (v[:-1] + v[1:])

        stiff_el = w_mid / lengths
        diag = np.zeros(t.size)
        diag[:-1] += stiff_el
        diag[1:] += stiff_el
        off = -stiff_el.copy()

        if self.mass == "lumped":
            mass_diag = self.lumped_mass()
            mass_off = None
            diag += v * mass_diag
        else:
            mass_el = w_mid * lengths / 6.0
            mass_diag = np.zeros(t.size)
            mass_diag[:-1] += 2.0 * mass_el
            mass_diag[1:] += 2.0 * mass_el
            mass_off = mass_el.copy()
            pot_el = v_mid * mass_el
            diag[:-1] += 2.0 * pot_el
            diag[1:] += 2.0 * pot_el
            off += pot_el

        if self.left_condition == "robin":
            diag[0] -= self.boundary_coeff

        free = self.free_nodes
        lo, hi = free[0], free[-1]
        grid_meta = {
            "nodes": int(t.size),
            "length": float(t[-1] - t[0]),
            "min_step": float(lengths.min()),
            "mass": self.mass,
        }
        return SymmetricOperatorPair.from_tridiagonal(
            diag[lo : hi + 1],
            off[lo:hi],
            mass_diag[lo : hi + 1],
            None if mass_off is None else mass_off[lo:hi],
            grid=grid_meta,
        )

    def embed(self, values: np.ndarray) -> np.ndarray:
        """Extend free-node values to the full grid with zeros at Dirichlet ends."""
        full = np.zeros(self.grid.size, dtype=np.asarray(values).dtype)
        full[self.free_nodes] = values
        return full

    def integrate(self, values: np.ndarray) -> float:
        """Trapezoid integral of ``values * w`` over the grid."""
        return float(trapezoid(values * self.weight, self.grid))


@dataclass
class TransverseMode:
    """
    Ground state of a weighted form.

    Attributes:
        mu: Ground eigenvalue.
        f: Eigenfunction on the full grid, positive at free nodes and
            normalized in the discrete weighted norm.
        h: Semiclassical parameter the form was built for (None if unscaled).
        grid: Grid nodes.
        derivative_estimates: Optional tangential derivative samples.
        meta: Solver metadata.
    """

    mu: float
    f: np.ndarray
    h: Optional[float]
    grid: np.ndarray
    derivative_estimates: Optional[np.ndarray] = None
    meta: dict[str, Any] = field(default_factory=dict)


def form_spectrum(form: WeightedForm1D, k: int = 1) -> Spectrum:
    """Lowest ``k`` eigenpairs of a weighted form."""
    return solve_tridiagonal(form.operator_pair(), k=k)


def transverse_ground(form: WeightedForm1D, h: Optional[float] = None) -> TransverseMode:
    """
    Ground eigenvalue and positive normalized eigenfunction of ``form``.

    The sign is fixed by the first entry above the rounding noise; tail
    entries within the noise are clipped to the smallest positive float.

    Raises:
        InvalidWeight: Raised by the form on non-positive weight.
        SolverError: Propagated from the eigensolver, or the returned vector
            changes sign and so is not a ground state.
    """
    spectrum = form_spectrum(form, k=1)
    values = spectrum.vector(0)
    noise = SIGN_NOISE * np.abs(values).max()
    leading = np.flatnonzero(np.abs(values) > noise)
    if values[leading[0]] < 0.0:
        values = -values
    negative = np.flatnonzero(values < -noise)
    if negative.size:
        raise SolverError(
            "eigenvector changes sign; not a ground state",
            {
                "mu": spectrum.ground,
                "first_negative": int(negative[0]),
                "min_value": float(values.min()),
                "max_value": float(values.max()),
            },
        )
    flipped = int(np.count_nonzero(values <= 0.0))
    values = np.maximum(values, np.finfo(float).tiny)
    f = form.embed(values)

    meta = dict(spectrum.meta)
    meta["sign_fixed_nodes"] = flipped
    meta["residual"] = spectrum.max_residual
    return TransverseMode(mu=spectrum.ground, f=f, h=h, grid=form.grid, meta=meta)
