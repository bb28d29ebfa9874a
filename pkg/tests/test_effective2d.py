import numpy as np
import pytest

from magrobin.effective2d import (
    CallbackPotential,
    UniformField,
    assemble_coefficients,
    boundary_normal_field,
    build_chart,
    check_potential,
    effective_spectrum,
    variational_upper_bound,
    with_quadratic_well,
    write_chart_dump,
)
from magrobin.geometry import PlaneSurface, Sphere
from magrobin.utils.errors import CollarTooDeep, DimensionError, PotentialInconsistent

ORIGIN = (0.0, 0.0, 0.0)


def plane_chart(field, h=0.05, n=41, n_t=401, extent=0.6):
    return build_chart(PlaneSurface(), ORIGIN, extent, UniformField(field), h, n=n, n_t=n_t)


def test_zero_field_plane_is_scaled_dirichlet_laplacian():
    h, n, extent = 0.05, 41, 0.6
    chart = plane_chart((0.0, 0.0, 0.0), h=h, n=n, extent=extent)
    coeffs = assemble_coefficients(chart)
    spectrum = effective_spectrum(coeffs, chart, k=1)

    side = 2.0 * extent
    step = side / (n - 1)
    laplacian = 2.0 * 4.0 / step**2 * np.sin(np.pi * step / (2.0 * side)) ** 2
    mu = coeffs.mu[0, 0]
    assert spectrum.ground - mu == pytest.approx(h**2 * laplacian, rel=1e-6)
    np.testing.assert_allclose(coeffs.mu, mu, rtol=0, atol=1e-14)


def test_flat_transverse_energy_is_minus_one():
    chart = plane_chart((0.0, 0.0, 1.0), h=0.05)
    coeffs = assemble_coefficients(chart)
    assert coeffs.mu[0, 0] == pytest.approx(-1.0, abs=1e-3)
    assert coeffs.meta["transverse_solves"] == 1
    assert coeffs.symmetry_defect() == 0.0


def test_spectrum_is_gauge_invariant():
    chart = plane_chart((0.0, 0.0, 1.0), h=0.05, n=31, n_t=201)
    a, b, c, d = 0.7, -0.4, 1.3, 0.25

    def grad_psi(y):
        return np.stack(
            [2 * a * y[..., 0] + b * y[..., 1] + d, b * y[..., 0] + 2 * c * y[..., 1]],
            axis=-1,
        )

    shifted = chart.gauge_shifted(grad_psi)
    base = effective_spectrum(assemble_coefficients(chart), chart, k=3, seed=1)
    moved = effective_spectrum(assemble_coefficients(shifted), shifted, k=3, seed=1)
    np.testing.assert_allclose(moved.eigenvalues, base.eigenvalues, rtol=1e-8)


def test_dense_and_sparse_solvers_agree():
    chart = plane_chart((0.0, 0.0, 1.0), h=0.05, n=21, n_t=101)
    coeffs = assemble_coefficients(chart)
    sparse = effective_spectrum(coeffs, chart, k=2, solver="sparse")
    dense = effective_spectrum(coeffs, chart, k=2, solver="dense")
    np.testing.assert_allclose(sparse.eigenvalues, dense.eigenvalues, rtol=1e-9)


@pytest.mark.slow
def test_synthetic_well_has_harmonic_gaps():
    h = 0.01
    chart = plane_chart((0.0, 0.0, 1.0), h=h, n=201, n_t=33)
    coeffs = with_quadratic_well(assemble_coefficients(chart), chart, (1.0, 4.0))
    spectrum = effective_spectrum(coeffs, chart, k=3)
    gaps = np.diff(spectrum.eigenvalues)
    np.testing.assert_allclose(gaps, 2 * h**2 * (1 - 1.25 * h), rtol=0.1)


def test_plane_trial_bound_sits_above_landau_level():
    h = 0.01
    bound = variational_upper_bound(PlaneSurface(), UniformField((0.0, 0.0, 1.0)), ORIGIN, h)
    assert -1.0 + h - 1e-9 <= bound.value <= -1.0 + 3.0 * h
    assert bound.quadrature_error >= 0.0


def test_chart_dump_has_one_row_per_collar_node(tmp_path):
    chart = plane_chart((0.0, 0.0, 1.0), n=5, n_t=17)
    path = write_chart_dump(chart, tmp_path / "chart_dump.txt")
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "y1 y2 t g11 g12 g22 A1 A2"
    assert len(lines) == 1 + 5 * 5 * 17


def test_chart_rejects_deep_collar():
    with pytest.raises(CollarTooDeep):
        build_chart(Sphere(1.0), (0.0, 0.0, 1.0), 0.3, UniformField((0, 0, 1)), 0.05, delta=0.6)


def test_chart_rejects_off_surface_center():
    with pytest.raises(DimensionError):
        build_chart(PlaneSurface(), (0.0, 0.0, 0.5), 0.3, UniformField((0, 0, 1)), 0.05)


def sphere_cap_chart(h=0.1, n=21, n_t=101):
    field = UniformField((0.0, 0.0, 1.0))
    return build_chart(Sphere(1.0), (0.0, 0.0, 1.0), 0.3, field, h, n=n, n_t=n_t)


def test_curved_spectrum_is_invariant_under_random_quadratic_gauge():
    chart = sphere_cap_chart()
    a, b, c, d, e = np.random.default_rng(11).normal(size=5)

    def grad_psi(y):
        y1, y2 = y[..., 0], y[..., 1]
        return np.stack([2 * a * y1 + b * y2 + d, b * y1 + 2 * c * y2 + e], axis=-1)

    shifted = chart.gauge_shifted(grad_psi)
    assert shifted.meta["gauge_shifted"] is True
    base = effective_spectrum(assemble_coefficients(chart), chart, k=2, seed=3)
    moved = effective_spectrum(assemble_coefficients(shifted), shifted, k=2, seed=3)
    np.testing.assert_allclose(moved.eigenvalues, base.eigenvalues, rtol=1e-8)
    np.testing.assert_allclose(
        boundary_normal_field(shifted), boundary_normal_field(chart), atol=1e-9
    )


def test_boundary_normal_field_matches_the_uniform_field():
    flat = boundary_normal_field(plane_chart((0.0, 0.0, 2.0), n=21, n_t=101))
    np.testing.assert_allclose(flat, 2.0, rtol=1e-10)

    chart = sphere_cap_chart()
    bn = boundary_normal_field(chart)
    inner = (slice(2, -2), slice(2, -2))
    np.testing.assert_allclose(bn[inner], chart.normal[..., 2][inner], atol=1e-6)


def test_check_potential_rejects_a_mismatched_field():
    points = np.array([[0.1, 0.2, 0.3], [-0.4, 0.5, 1.0]])
    assert check_potential(UniformField((0.3, -1.0, 2.0)), points) <= 1e-8

    def potential(x):
        return np.stack([-x[..., 1], np.zeros(x.shape[:-1]), np.zeros(x.shape[:-1])], axis=-1)

    def doubled(x):
        return np.broadcast_to(np.array([0.0, 0.0, 2.0]), x.shape)

    assert check_potential(CallbackPotential(potential, lambda x: doubled(x) / 2), points) <= 1e-8
    with pytest.raises(PotentialInconsistent) as info:
        check_potential(CallbackPotential(potential, doubled), points)
    assert info.value.details["mismatch"] == pytest.approx(0.5)
