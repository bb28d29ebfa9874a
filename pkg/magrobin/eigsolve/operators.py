"""
Discrete operator pairs and computed spectra.

A ``SymmetricOperatorPair`` is the Ritz-Galerkin image (A, M) of a quadratic
form: ``A`` is the stiffness matrix of the form and ``M`` the mass matrix of
the norm it is minimized against.
"""

from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np
import scipy.sparse as sp

from magrobin.utils.errors import AssemblyError, DimensionError, InvalidMass

ASYMMETRY_TOL = 1e-12


def _as_csr(matrix) -> sp.csr_matrix:
    if sp.issparse(matrix):
        return sp.csr_matrix(matrix, dtype=float)
    return sp.csr_matrix(np.asarray(matrix, dtype=float))


def relative_asymmetry(matrix: sp.spmatrix) -> float:
    """max|A - A^T| / max|A|, zero for the zero matrix."""
    scale = abs(matrix).max() if matrix.nnz else 0.0
    if scale == 0.0:
        return 0.0
    diff = matrix - matrix.T
    return float(abs(diff).max() / scale) if diff.nnz else 0.0


def bandwidth(matrix: sp.spmatrix) -> int:
    coo = matrix.tocoo()
    mask = coo.data != 0.0
    if not mask.any():
        return 0
    return int(np.abs(coo.row[mask] - coo.col[mask]).max())


@dataclass(frozen=True)
class SymmetricOperatorPair:
    """
    Real symmetric generalized eigenproblem ``A x = lambda M x``.

    Attributes:
        stiffness: Symmetric sparse matrix A.
        mass: Symmetric positive-definite sparse matrix M.
        grid: Free-form grid descriptor copied into every ``Spectrum.meta``.
    """

    stiffness: sp.csr_matrix
    mass: sp.csr_matrix
    grid: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        stiffness = _as_csr(self.stiffness)
        mass = _as_csr(self.mass)
        object.__setattr__(self, "stiffness", stiffness)
        object.__setattr__(self, "mass", mass)

        if stiffness.shape[0] != stiffness.shape[1] or stiffness.shape != mass.shape:
            raise DimensionError(
                "stiffness and mass must be square and of equal size",
                {"stiffness": stiffness.shape, "mass": mass.shape},
            )
        if stiffness.shape[0] == 0:
            raise DimensionError("empty operator pair", {"n": 0})

        asym = relative_asymmetry(stiffness)
        if asym > ASYMMETRY_TOL:
            raise AssemblyError("stiffness is not symmetric", {"asymmetry": asym})
        asym = relative_asymmetry(mass)
        if asym > ASYMMETRY_TOL:
            raise AssemblyError("mass is not symmetric", {"asymmetry": asym})

        diag = mass.diagonal()
        bad = np.flatnonzero(~(diag > 0.0))
        if bad.size:
            raise InvalidMass(
                "mass matrix has non-positive diagonal entries",
                {"first_index": int(bad[0]), "value": float(diag[bad[0]]), "count": int(bad.size)},
            )

    @property
    def n(self) -> int:
        return self.stiffness.shape[0]

    @property
    def bandwidth(self) -> int:
        return max(bandwidth(self.stiffness), bandwidth(self.mass))

    @property
    def has_diagonal_mass(self) -> bool:
        return bandwidth(self.mass) == 0

    def shifted(self, c: float) -> "SymmetricOperatorPair":
        """Pair (A + c M, M), whose eigenvalues are those of (A, M) plus c."""
        return SymmetricOperatorPair(
            (self.stiffness + c * self.mass).tocsr(),
            self.mass,
            {**self.grid, "added_shift": float(c)},
        )

    @classmethod
    def from_tridiagonal(
        cls,
        diag: np.ndarray,
        offdiag: np.ndarray,
        mass_diag: np.ndarray,
        mass_offdiag: Optional[np.ndarray] = None,
        grid: Optional[dict[str, Any]] = None,
    ) -> "SymmetricOperatorPair":
        """Build a pair from its diagonals (off-diagonals have length n - 1)."""
        stiffness = sp.diags([offdiag, diag, offdiag], [-1, 0, 1], format="csr")
        if mass_offdiag is None:
            mass = sp.diags(mass_diag, 0, format="csr")
        else:
            mass = sp.diags([mass_offdiag, mass_diag, mass_offdiag], [-1, 0, 1], format="csr")
        return cls(stiffness, mass, dict(grid or {}))


def lower_bound_shift(values: np.ndarray, margin: float = 1e-6) -> float:
    """
    Shift strictly below ``min(values)`` for a shift-invert solve.

    ``values`` are pointwise lower bounds of the form (e.g. a completed-square
    potential); the margin scales with their magnitude.
    """
    lowest = float(np.min(values))
    return lowest - margin * (1.0 + abs(lowest))


@dataclass
class Spectrum:
    """
    Computed low-lying eigenpairs.

    Attributes:
        eigenvalues: Ascending eigenvalues.
        eigenvectors: Optional ``(n, k)`` array, columns mass-orthonormal.
        residuals: ``||A v - lam M v|| / ||M v||`` of each pair, each at most
            ``meta["tolerance"]``.
        meta: Solver name, iteration counts, shift, tolerances, backward
            errors and grid.
    """

    eigenvalues: np.ndarray
    eigenvectors: Optional[np.ndarray] = None
    residuals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.eigenvalues = np.asarray(self.eigenvalues, dtype=float)
        self.residuals = np.asarray(self.residuals, dtype=float)

    def __len__(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def ground(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def max_residual(self) -> float:
        return float(self.residuals.max()) if self.residuals.size else 0.0

    def vector(self, index: int = 0) -> np.ndarray:
        if self.eigenvectors is None:
            raise DimensionError("spectrum was computed without eigenvectors")
        return self.eigenvectors[:, index]

    def to_dict(self) -> dict[str, Any]:
        return {
            "eigenvalues": self.eigenvalues.tolist(),
            "residuals": self.residuals.tolist(),
            "meta": {k: v for k, v in self.meta.items() if k != "iteration_log"},
        }
