"""magrobin - Eigensolver Module"""

from magrobin.eigsolve.operators import (
    Spectrum,
    SymmetricOperatorPair,
    lower_bound_shift,
)
from magrobin.eigsolve.solvers import (
    backward_residuals,
    residual_floor,
    residual_norms,
    solve_dense,
    solve_sparse,
    solve_tridiagonal,
)

__all__ = [
    "SymmetricOperatorPair",
    "Spectrum",
    "lower_bound_shift",
    "backward_residuals",
    "residual_norms",
    "residual_floor",
    "solve_tridiagonal",
    "solve_sparse",
    "solve_dense",
]
