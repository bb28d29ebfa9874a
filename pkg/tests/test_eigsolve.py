import numpy as np
import pytest
import scipy.sparse as sp
from numpy.testing import assert_allclose

from magrobin.config.settings import reset_settings
from magrobin.eigsolve import (
    SymmetricOperatorPair,
    backward_residuals,
    lower_bound_shift,
    residual_norms,
    solve_dense,
    solve_sparse,
    solve_tridiagonal,
)
from magrobin.utils.errors import AssemblyError, DimensionError, InvalidMass


def dirichlet_pair(n: int, length: float = np.pi) -> tuple[SymmetricOperatorPair, float]:
    """Lumped P1 pair of -u'' on (0, length) with n interior nodes."""
    step = length / (n + 1)
    pair = SymmetricOperatorPair.from_tridiagonal(
        np.full(n, 2.0 / step), np.full(n - 1, -1.0 / step), np.full(n, step)
    )
    return pair, step


def exact_levels(k: int, step: float, length: float = np.pi) -> np.ndarray:
    j = np.arange(1, k + 1)
    return 4.0 / step**2 * np.sin(j * np.pi * step / (2.0 * length)) ** 2


def test_tridiagonal_matches_closed_form() -> None:
    pair, step = dirichlet_pair(400)
    spectrum = solve_tridiagonal(pair, k=4)
    assert_allclose(spectrum.eigenvalues, exact_levels(4, step), rtol=1e-11)
    assert spectrum.max_residual < 1e-9


def test_solvers_agree() -> None:
    pair, step = dirichlet_pair(300)
    tri = solve_tridiagonal(pair, k=3)
    sparse = solve_sparse(pair, 3, shift=-1.0, seed=3)
    dense = solve_dense(pair, 3)
    assert_allclose(sparse.eigenvalues, tri.eigenvalues, rtol=1e-10)
    assert_allclose(dense.eigenvalues, tri.eigenvalues, rtol=1e-10)


def test_dirichlet_error_is_second_order() -> None:
    pair, step = dirichlet_pair(199)
    values = solve_tridiagonal(pair, k=3).eigenvalues
    k = np.arange(1, 4)
    relative = (k**2 - values) / k**2
    assert_allclose(relative, k**2 * step**2 / 12.0, rtol=1e-2)


def test_eigenvectors_are_mass_orthonormal() -> None:
    pair, _ = dirichlet_pair(120)
    spectrum = solve_sparse(pair, 4, shift=-0.5)
    V = spectrum.eigenvectors
    gram = V.T @ (pair.mass @ V)
    assert_allclose(gram, np.eye(4), atol=1e-10)
    residuals = backward_residuals(pair, spectrum.eigenvalues, V)
    assert np.max(residuals) < 1e-9


def test_sparse_solve_is_deterministic_for_a_seed() -> None:
    pair, _ = dirichlet_pair(500)
    first = solve_sparse(pair, 5, shift=-1.0, seed=11)
    second = solve_sparse(pair, 5, shift=-1.0, seed=11)
    assert np.array_equal(first.eigenvalues, second.eigenvalues)


def test_shifted_pair_moves_the_spectrum() -> None:
    pair, _ = dirichlet_pair(100)
    base = solve_tridiagonal(pair, k=2).eigenvalues
    moved = solve_tridiagonal(pair.shifted(-3.5), k=2).eigenvalues
    assert_allclose(moved, base - 3.5, rtol=1e-12)


def test_lower_bound_shift_is_strictly_below() -> None:
    values = np.array([-2.0, 0.5, 3.0])
    assert lower_bound_shift(values) < -2.0
    assert lower_bound_shift(np.zeros(3)) < 0.0


def test_pair_rejects_asymmetric_stiffness() -> None:
    A = sp.csr_matrix(np.array([[2.0, -1.0], [-0.5, 2.0]]))
    with pytest.raises(AssemblyError):
        SymmetricOperatorPair(A, sp.identity(2))


def test_pair_rejects_non_positive_mass() -> None:
    with pytest.raises(InvalidMass) as info:
        SymmetricOperatorPair(sp.identity(3), sp.diags([1.0, 0.0, 1.0]))
    assert info.value.details["first_index"] == 1


def test_pair_rejects_mismatched_shapes() -> None:
    with pytest.raises(DimensionError):
        SymmetricOperatorPair(sp.identity(3), sp.identity(4))


def test_dense_oracle_respects_size_limit(monkeypatch) -> None:
    monkeypatch.setenv("MAGROBIN_DENSE_LIMIT", "16")
    reset_settings()
    pair, _ = dirichlet_pair(40)
    with pytest.raises(DimensionError):
        solve_dense(pair, 2)


def test_vector_access_without_vectors() -> None:
    pair, _ = dirichlet_pair(80)
    spectrum = solve_sparse(pair, 2, shift=-1.0, return_vectors=False)
    with pytest.raises(DimensionError):
        spectrum.vector(0)


def test_identity_pair():
    pair = SymmetricOperatorPair(sp.identity(20, format="csr"), sp.identity(20, format="csr"))
    assert solve_tridiagonal(pair, k=1).ground == 1.0


def test_harmonic_oscillator_levels():
    n, half_width = 4800, 12.0
    step = 2 * half_width / n
    s = np.linspace(-half_width, half_width, n + 1)[1:-1]
    pair = SymmetricOperatorPair.from_tridiagonal(
        2.0 / step + s**2 * step, np.full(s.size - 1, -1.0 / step), np.full(s.size, step)
    )
    assert_allclose(solve_tridiagonal(pair, k=2).eigenvalues, [1.0, 3.0], rtol=1e-5)


def test_square_dirichlet_laplacian_by_shift_invert():
    n = 199
    step = 1.0 / (n + 1)
    T = sp.diags([-1.0, 2.0, -1.0], [-1, 0, 1], shape=(n, n)) / step**2
    eye = sp.identity(n)
    pair = SymmetricOperatorPair(
        (sp.kron(T, eye) + sp.kron(eye, T)).tocsr(), sp.identity(n * n, format="csr")
    )
    spectrum = solve_sparse(pair, 2, shift=0.0)
    assert_allclose(spectrum.eigenvalues, [2 * np.pi**2, 5 * np.pi**2], rtol=1e-3)


def test_residuals_are_relative_to_the_mass_image():
    pair, step = dirichlet_pair(1999, length=1.0)
    spectrum = solve_tridiagonal(pair, k=3)
    meta = spectrum.meta

    assert_allclose(spectrum.eigenvalues, np.pi**2 * np.array([1.0, 4.0, 9.0]), rtol=1e-5)
    assert_allclose(
        spectrum.residuals,
        residual_norms(pair, spectrum.eigenvalues, spectrum.eigenvectors),
        rtol=1e-12,
    )
    assert np.all(spectrum.residuals <= meta["tolerance"])
    assert meta["requested_tolerance"] == 1e-10
    assert meta["tolerance"] >= meta["requested_tolerance"]
    assert len(meta["backward_errors"]) == 3


@pytest.mark.parametrize("solver", ["sparse", "dense"])
def test_every_path_records_its_accepted_tolerance(solver):
    pair, _ = dirichlet_pair(150)
    if solver == "sparse":
        spectrum = solve_sparse(pair, 3, shift=-1.0)
    else:
        spectrum = solve_dense(pair, 3)
    assert np.all(spectrum.residuals <= spectrum.meta["tolerance"])
    assert spectrum.meta["residual_floor"] > 0.0


def test_shift_invert_returns_levels_above_the_shift():
    pair, step = dirichlet_pair(300)
    spectrum = solve_sparse(pair, 2, shift=5.5)
    assert_allclose(spectrum.eigenvalues, exact_levels(4, step)[2:], rtol=1e-10)
    assert np.all(spectrum.eigenvalues >= 5.5)
    assert spectrum.meta["below_shift"] >= 1
