"""
Generalized symmetric eigensolvers.

Three paths share one residual contract:

* ``solve_tridiagonal``: Sturm-sequence bisection plus inverse iteration for
  forms of bandwidth one (LAPACK ``stebz``/``stein`` after diagonal scaling
  when the mass is lumped).
* ``solve_sparse``: ARPACK Lanczos in shift-invert mode around a shift.
* ``solve_dense``: LAPACK full decomposition, the oracle for small problems.

Residuals are ``||A x - lam M x|| / ||M x||``. A pair is accepted when its
residual is at most ``max(tol, floor)``, where the floor

    64 eps (||A|| + |lam| ||M||) ||x|| / ||M x|| * sqrt(cond(diag M))

is the rounding level of the residual in double precision (infinity norms for
the matrices). ``meta["tolerance"]`` records the largest accepted bound,
``meta["requested_tolerance"]`` the caller's value and ``meta["residual_floor"]``
the largest floor; normwise backward errors go to ``meta["backward_errors"]``.
"""

from typing import Any, Optional

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh, splu

from magrobin.config.settings import get_settings
from magrobin.eigsolve.operators import Spectrum, SymmetricOperatorPair
from magrobin.utils.errors import DimensionError, ShiftSingular, SolverError
from magrobin.utils.logger import format_fields, get_logger

logger = get_logger(__name__)

ROUNDING_FACTOR = 64.0


def _matrix_norm(matrix: sp.spmatrix) -> float:
    return float(abs(matrix).sum(axis=1).max())


def residual_norms(
    pair: SymmetricOperatorPair, values: np.ndarray, vectors: np.ndarray
) -> np.ndarray:
    """Relative residual ``||A x - lam M x|| / ||M x||`` of each column."""
    values = np.asarray(values, dtype=float)
    mass_x = pair.mass @ vectors
    residual = pair.stiffness @ vectors - mass_x * values[None, :]
    scale = np.linalg.norm(mass_x, axis=0)
    return np.linalg.norm(residual, axis=0) / np.where(scale > 0.0, scale, 1.0)


def residual_floor(
    pair: SymmetricOperatorPair, values: np.ndarray, vectors: np.ndarray
) -> np.ndarray:
    """Double-precision rounding level of :func:`residual_norms`."""
    values = np.asarray(values, dtype=float)
    diag = pair.mass.diagonal()
    spread = np.sqrt(diag.max() / diag.min())
    scale = np.linalg.norm(pair.mass @ vectors, axis=0)
    ratio = np.linalg.norm(vectors, axis=0) / np.where(scale > 0.0, scale, 1.0)
    norms = _matrix_norm(pair.stiffness) + np.abs(values) * _matrix_norm(pair.mass)
    return ROUNDING_FACTOR * np.finfo(float).eps * norms * ratio * spread


def backward_residuals(
    pair: SymmetricOperatorPair, values: np.ndarray, vectors: np.ndarray
) -> np.ndarray:
    """Normwise backward error of each eigenpair (columns of ``vectors``)."""
    values = np.asarray(values, dtype=float)
    norm_a = _matrix_norm(pair.stiffness)
    norm_m = _matrix_norm(pair.mass)
    residual = pair.stiffness @ vectors - (pair.mass @ vectors) * values[None, :]
    scale = (norm_a + np.abs(values) * norm_m) * np.linalg.norm(vectors, axis=0)
    scale = np.where(scale > 0.0, scale, 1.0)
    return np.linalg.norm(residual, axis=0) / scale


def _accepted(pair, values, vectors, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Residuals and the per-pair bounds they must meet."""
    floor = residual_floor(pair, values, vectors)
    return residual_norms(pair, values, vectors), np.maximum(tol, floor)


def _checked_residuals(
    pair: SymmetricOperatorPair,
    values: np.ndarray,
    vectors: np.ndarray,
    tol: float,
    context: str,
    details: Optional[dict[str, Any]] = None,
) -> tuple[np.ndarray, dict[str, Any]]:
    """
    Residuals of the final pairs and their accuracy metadata.

    Raises:
        SolverError: A residual exceeds its bound; carries the achieved values.
    """
    residuals, bounds = _accepted(pair, values, vectors, tol)
    if np.any(residuals > bounds):
        raise SolverError(
            f"{context} residuals exceed tolerance",
            {
                **(details or {}),
                "residuals": residuals.tolist(),
                "bounds": bounds.tolist(),
                "tol": tol,
            },
        )
    meta = {
        "tolerance": float(bounds.max()),
        "requested_tolerance": float(tol),
        "residual_floor": float(residual_floor(pair, values, vectors).max()),
        "backward_errors": backward_residuals(pair, values, vectors).tolist(),
    }
    return residuals, meta


def _normalize_signs(vectors: np.ndarray) -> np.ndarray:
    """Make the entry of largest modulus of each column positive."""
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0.0] = 1.0
    return vectors * signs[None, :]


def _check_count(pair: SymmetricOperatorPair, k: int) -> None:
    if k < 1 or k > pair.n:
        raise DimensionError(
            f"requested {k} eigenpairs of a problem of size {pair.n}",
            {"k": k, "n": pair.n},
        )


def _tridiagonal_parts(pair: SymmetricOperatorPair):
    if pair.bandwidth > 1:
        raise DimensionError(
            "solve_tridiagonal needs bandwidth <= 1",
            {"bandwidth": pair.bandwidth},
        )
    a = pair.stiffness.diagonal(0)
    e = pair.stiffness.diagonal(1) if pair.n > 1 else np.zeros(0)
    m = pair.mass.diagonal(0)
    f = pair.mass.diagonal(1) if pair.n > 1 else np.zeros(0)
    return a, e, m, f


def _sturm_count(a, e, m, f, lam: np.ndarray) -> np.ndarray:
    """Number of eigenvalues below each entry of ``lam`` (LDL^T inertia)."""
    tiny = np.finfo(float).tiny ** 0.5
    pivot = a[0] - lam * m[0]
    pivot = np.where(pivot == 0.0, -tiny, pivot)
    count = (pivot < 0.0).astype(int)
    for i in range(1, a.size):
        coupling = e[i - 1] - lam * f[i - 1]
        pivot = (a[i] - lam * m[i]) - coupling * coupling / pivot
        pivot = np.where(pivot == 0.0, -tiny, pivot)
        count += pivot < 0.0
    return count


def _bisect(a, e, m, f, k: int, rtol: float = 4e-16) -> np.ndarray:
    """Bisection for the k smallest eigenvalues of the banded pencil."""
    spread = max(np.abs(a).max() + 2.0 * np.abs(e).max(initial=0.0), 1.0)
    lo = -spread / m.min()
    while _sturm_count(a, e, m, f, np.array([lo]))[0] > 0:
        lo *= 2.0
    hi = spread / m.min()
    while _sturm_count(a, e, m, f, np.array([hi]))[0] < k:
        hi *= 2.0

    index = np.arange(k)
    lower = np.full(k, lo)
    upper = np.full(k, hi)
    for _ in range(200):
        mid = 0.5 * (lower + upper)
        counts = _sturm_count(a, e, m, f, mid)
        below = counts <= index
        lower = np.where(below, mid, lower)
        upper = np.where(below, upper, mid)
        if np.all(upper - lower <= rtol * np.maximum(np.abs(mid), 1.0)):
            break
    return 0.5 * (lower + upper)


def _banded(diag, off) -> np.ndarray:
    ab = np.zeros((3, diag.size))
    ab[0, 1:] = off
    ab[1] = diag
    ab[2, :-1] = off
    return ab


def _inverse_iteration(
    pair: SymmetricOperatorPair,
    values: np.ndarray,
    vectors: Optional[np.ndarray],
    tol: float,
    max_iter: int,
    seed: int,
):
    """Refine eigenpairs of a tridiagonal pencil by shifted inverse iteration."""
    a, e, m, f = _tridiagonal_parts(pair)
    n, k = a.size, values.size
    rng = np.random.default_rng(seed)
    if vectors is None:
        vectors = rng.standard_normal((n, k))
    vectors = vectors.copy()
    log: list[dict] = []
    iterations = np.zeros(k, dtype=int)

    for j in range(k):
        lam = values[j]
        # keep the shifted matrix off the exact singularity
        nudge = 64.0 * np.finfo(float).eps * max(abs(lam), 1.0)
        shifted = _banded(a - (lam - nudge) * m, e - (lam - nudge) * f)
        x = vectors[:, j]
        residual = np.inf
        for it in range(1, max_iter + 1):
            y = sla.solve_banded((1, 1), shifted, pair.mass @ x, check_finite=False)
            for i in range(j):
                prev = vectors[:, i]
                y -= (prev @ (pair.mass @ y)) * prev
            y /= np.sqrt(y @ (pair.mass @ y))
            x = y
            lam = float(x @ (pair.stiffness @ x))
            res, bound = _accepted(pair, np.array([lam]), x[:, None], tol)
            residual, bound = float(res[0]), float(bound[0])
            if residual <= bound:
                break
        iterations[j] = it
        log.append({"index": j, "iterations": it, "residual": residual})
        if residual > bound:
            raise SolverError(
                "inverse iteration did not converge",
                {
                    "index": j,
                    "residual": residual,
                    "bound": bound,
                    "tol": tol,
                    "iteration_log": log,
                },
            )
        values[j] = lam
        vectors[:, j] = x
    return values, vectors, iterations, log


def solve_tridiagonal(
    pair: SymmetricOperatorPair,
    k: int = 1,
    which: str = "smallest",
    seed: int = 0,
    tol: Optional[float] = None,
) -> Spectrum:
    """
    Smallest ``k`` eigenpairs of a pencil with bandwidth at most one.

    With a diagonal mass the pencil is scaled to standard form and handed to
    LAPACK bisection with inverse-iteration eigenvectors. A tridiagonal mass
    goes through a Sturm count of ``A - lam M`` and shifted inverse iteration.

    Args:
        pair: Tridiagonal operator pair.
        k: Number of eigenpairs.
        which: Only ``"smallest"`` is supported.
        seed: Seed of the inverse-iteration start vectors.
        tol: Residual tolerance (settings default), raised to the rounding floor.

    Returns:
        Spectrum with mass-orthonormal eigenvectors.

    Raises:
        DimensionError: k > n or bandwidth above one.
        SolverError: Inverse iteration failed to reach ``tol``.
    """
    if which != "smallest":
        raise DimensionError("solve_tridiagonal only computes the smallest eigenpairs")
    _check_count(pair, k)
    settings = get_settings()
    tol = tol or settings.residual_tol
    a, e, m, f = _tridiagonal_parts(pair)

    if pair.has_diagonal_mass:
        d = 1.0 / np.sqrt(m)
        if pair.n == 1:
            values = np.array([a[0] * d[0] ** 2])
            vectors = d[:, None].copy()
        else:
            values, v = sla.eigh_tridiagonal(
                a * d * d,
                e * d[:-1] * d[1:],
                select="i",
                select_range=(0, k - 1),
                lapack_driver="stebz",
                check_finite=False,
            )
            vectors = d[:, None] * v
        method = "lapack_stebz"
        iterations = np.zeros(k, dtype=int)
        residuals, bounds = _accepted(pair, values, vectors, tol)
        if np.any(residuals > bounds):
            values, vectors, iterations, _ = _inverse_iteration(
                pair, values, vectors, tol, settings.max_inverse_iterations, seed
            )
            method = "lapack_stebz+inverse_iteration"
    else:
        values = _bisect(a, e, m, f, k)
        values, vectors, iterations, _ = _inverse_iteration(
            pair, values, None, tol, settings.max_inverse_iterations, seed
        )
        method = "sturm_bisection+inverse_iteration"

    order = np.argsort(values, kind="stable")
    values = np.asarray(values)[order]
    vectors = _normalize_signs(vectors[:, order])
    residuals, accuracy = _checked_residuals(pair, values, vectors, tol, "tridiagonal")
    meta = {
        "solver": "tridiagonal",
        "method": method,
        "iterations": iterations[order].tolist(),
        **accuracy,
        "shift": None,
        "grid": pair.grid,
    }
    logger.debug(
        "tridiagonal solve | "
        + format_fields(n=pair.n, k=k, ground=float(values[0]), residual=float(residuals.max()))
    )
    return Spectrum(values, vectors, residuals, meta)


def _above_shift(values: np.ndarray, vectors: np.ndarray, shift: float, k: int):
    """Lowest ``k`` pairs with eigenvalue at or above ``shift``, ascending."""
    order = np.argsort(values, kind="stable")
    values, vectors = values[order], vectors[:, order]
    keep = np.flatnonzero(values >= shift)[:k]
    return values[keep], vectors[:, keep], int(np.count_nonzero(values < shift))


def solve_sparse(
    pair: SymmetricOperatorPair,
    k: int,
    shift: float,
    seed: int = 0,
    tol: Optional[float] = None,
    return_vectors: bool = True,
) -> Spectrum:
    """
    Lowest ``k`` eigenpairs at or above ``shift`` by shift-invert Lanczos.

    ARPACK returns the eigenvalues nearest to the shift; any below it are
    dropped and the request widened until ``k`` remain. With ``shift`` below
    the spectrum these are the ``k`` smallest.

    Args:
        pair: Operator pair.
        k: Number of eigenpairs.
        shift: Real shift, not an eigenvalue.
        seed: Seed of the deterministic Lanczos start vector.
        tol: Residual tolerance (settings default), raised to the rounding floor.
        return_vectors: Keep eigenvectors in the returned spectrum.

    Raises:
        ShiftSingular: ``A - shift M`` cannot be factorized.
        SolverError: ARPACK did not converge, fewer than ``k`` eigenvalues lie
            above the shift, or residuals exceed their bound.
    """
    _check_count(pair, k)
    settings = get_settings()
    tol = tol or settings.residual_tol

    if k >= pair.n - 1:
        if pair.n <= settings.dense_oracle_limit:
            return _dense_above_shift(pair, k, shift, tol)
        raise DimensionError(
            "shift-invert Lanczos needs k < n - 1", {"k": k, "n": pair.n}
        )

    shifted = (pair.stiffness - shift * pair.mass).tocsc()
    try:
        lu = splu(shifted)
    except RuntimeError as exc:
        raise ShiftSingular(
            f"A - {shift:g} M is singular; perturb the shift",
            {"shift": float(shift), "reason": str(exc)},
        ) from exc

    diag_u = lu.U.diagonal()
    if not np.all(np.isfinite(diag_u)) or np.min(np.abs(diag_u)) == 0.0:
        raise ShiftSingular(
            f"A - {shift:g} M has a zero pivot; perturb the shift", {"shift": float(shift)}
        )

    op_inv = LinearOperator(shifted.shape, matvec=lu.solve, dtype=float)
    v0 = np.random.default_rng(seed).standard_normal(pair.n)
    requested = k
    while True:
        try:
            values, vectors = eigsh(
                pair.stiffness,
                k=requested,
                M=pair.mass,
                sigma=shift,
                which="LM",
                OPinv=op_inv,
                v0=v0,
                tol=0.0,
                maxiter=settings.arpack_maxiter,
            )
        except ArpackNoConvergence as exc:
            raise SolverError(
                "ARPACK shift-invert did not converge",
                {
                    "shift": float(shift),
                    "k": requested,
                    "converged": int(len(exc.eigenvalues)),
                    "maxiter": settings.arpack_maxiter,
                },
            ) from exc
        values, vectors, below = _above_shift(values, vectors, shift, k)
        if values.size == k:
            break
        if requested + (k - values.size) >= pair.n - 1:
            raise SolverError(
                f"fewer than {k} eigenvalues found above the shift",
                {"shift": float(shift), "k": k, "below_shift": below},
            )
        requested += k - values.size

    vectors = _normalize_signs(vectors)
    residuals, accuracy = _checked_residuals(
        pair, values, vectors, tol, "shift-invert", {"shift": float(shift)}
    )
    meta = {
        "solver": "sparse",
        "method": "arpack_shift_invert",
        "shift": float(shift),
        "below_shift": below,
        **accuracy,
        "seed": seed,
        "grid": pair.grid,
    }
    logger.debug(
        "sparse solve | "
        + format_fields(n=pair.n, k=k, shift=float(shift), ground=float(values[0]))
    )
    return Spectrum(values, vectors if return_vectors else None, residuals, meta)


def _dense_above_shift(
    pair: SymmetricOperatorPair, k: int, shift: float, tol: float
) -> Spectrum:
    full = solve_dense(pair, pair.n, tol=tol)
    values, vectors, below = _above_shift(full.eigenvalues, full.eigenvectors, shift, k)
    if values.size < k:
        raise SolverError(
            f"fewer than {k} eigenvalues found above the shift",
            {"shift": float(shift), "k": k, "below_shift": below},
        )
    residuals, accuracy = _checked_residuals(pair, values, vectors, tol, "dense")
    meta = {**full.meta, **accuracy, "shift": float(shift), "below_shift": below}
    return Spectrum(values, vectors, residuals, meta)


def solve_dense(
    pair: SymmetricOperatorPair,
    k: int,
    tol: Optional[float] = None,
) -> Spectrum:
    """
    Smallest ``k`` eigenpairs from a dense LAPACK decomposition.

    Raises:
        DimensionError: The problem exceeds the dense oracle size limit.
    """
    _check_count(pair, k)
    settings = get_settings()
    if pair.n > settings.dense_oracle_limit:
        raise DimensionError(
            "problem too large for the dense oracle",
            {"n": pair.n, "limit": settings.dense_oracle_limit},
        )
    tol = tol or settings.residual_tol
    values, vectors = sla.eigh(
        pair.stiffness.toarray(),
        pair.mass.toarray(),
        subset_by_index=[0, k - 1],
    )
    vectors = _normalize_signs(vectors)
    residuals, accuracy = _checked_residuals(pair, values, vectors, tol, "dense")
    meta = {
        "solver": "dense",
        "method": "lapack_generalized_eigh",
        "shift": None,
        **accuracy,
        "grid": pair.grid,
    }
    return Spectrum(values, vectors, residuals, meta)
