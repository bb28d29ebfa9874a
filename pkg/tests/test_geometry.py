import numpy as np
import pytest

from magrobin.geometry import (
    CallbackSurface,
    Chart,
    Ellipsoid,
    PlaneSurface,
    Sphere,
    TabulatedSurface,
    c0,
    c_star_bound,
    curvature_at,
    curvature_at_point,
    effective_energy,
    harmonic_constant,
    normal_field,
    localization_potential,
    predict_eigenvalues,
    surface_from_spec,
    weingarten_defect,
)
from magrobin.utils.errors import AssumptionViolated, DimensionError

Z_FIELD = np.array([0.0, 0.0, 1.0])


def test_sphere_mean_curvature():
    sphere = Sphere(2.0)
    y = np.array([[0.4, 1.0], [1.3, 4.0], [2.5, 0.2]])
    data = curvature_at(sphere, y)
    np.testing.assert_allclose(data.kappa, 0.5, rtol=1e-12)
    np.testing.assert_allclose(data.gauss, 0.25, rtol=1e-12)
    np.testing.assert_allclose(np.linalg.norm(data.point, axis=-1), 2.0, rtol=1e-12)
    # outward normal
    np.testing.assert_allclose(data.n, data.point / 2.0, atol=1e-12)


def test_weingarten_relation_on_ellipsoid():
    surface = Ellipsoid(1.0, 1.1, 1.3)
    rng = np.random.default_rng(7)
    y = np.column_stack([rng.uniform(0.2, 2.9, 20), rng.uniform(0.0, 2 * np.pi, 20)])
    assert np.max(weingarten_defect(curvature_at(surface, y))) < 1e-10


def test_ellipsoid_curvature_matches_closed_form():
    surface = Ellipsoid(1.0, 1.1, 1.3)
    for y in ([0.5, 0.3], [1.2, 2.0], [2.2, 5.1]):
        data = curvature_at(surface, np.array(y))
        assert float(data.kappa) == pytest.approx(
            surface.mean_curvature_exact(data.point), rel=1e-10
        )


def test_ellipsoid_pole_curvature():
    a, b, c = 1.0, 1.1, 3.0
    surface = Ellipsoid(a, b, c)
    data = curvature_at_point(surface, np.array([0.0, 0.0, c]))
    assert float(data.kappa) == pytest.approx(c * (1 / a**2 + 1 / b**2) / 2, rel=1e-9)


def test_curvature_does_not_depend_on_chart():
    surface = Ellipsoid(1.0, 1.1, 1.3)
    x = surface.point(np.array([1.1, 0.8]), 0)
    first = curvature_at(surface, surface.chart_point(x, 0), 0)
    second = curvature_at(surface, surface.chart_point(x, 1), 1)
    assert float(first.kappa) == pytest.approx(float(second.kappa), rel=1e-10)
    assert float(first.gauss) == pytest.approx(float(second.gauss), rel=1e-10)
    np.testing.assert_allclose(first.n, second.n, atol=1e-12)


def test_sphere_with_uniform_field_is_degenerate():
    energy = effective_energy(Sphere(1.0), Z_FIELD, gamma=1.0, sigma=1.0)
    assert energy.degenerate
    assert "normal_field_vanishes" in energy.reasons
    assert energy.value == pytest.approx(-2.0, abs=1e-8)


def test_prolate_minimum_sits_at_the_tips():
    surface = Ellipsoid(1.0, 1.1, 3.0)
    energy = effective_energy(surface, Z_FIELD, gamma=1.0, sigma=1.0)
    kappa_tip = 3.0 * (1.0 + 1.0 / 1.21) / 2.0
    assert not energy.degenerate
    assert energy.value == pytest.approx(1.0 - 2.0 * kappa_tip, rel=1e-6)
    assert abs(energy.minimizer[2]) == pytest.approx(3.0, rel=1e-6)
    assert c0(surface, Z_FIELD) > 0.0


def test_harmonic_constant_needs_isolated_minimum():
    with pytest.raises(AssumptionViolated):
        c0(Ellipsoid(1.0, 1.1, 1.3), Z_FIELD)


def test_prediction_regimes(montgomery):
    nu0, _ = montgomery
    gamma = 10.0

    ball = predict_eigenvalues(Sphere(1.0), Z_FIELD, gamma, 1.0, nu0=nu0)
    assert ball.regime == "ball-critical"
    assert ball.value == pytest.approx(-(gamma**2) - 2 * gamma + nu0 * gamma ** (2 / 3))

    prolate = Ellipsoid(1.0, 1.1, 3.0)
    harmonic = predict_eigenvalues(prolate, Z_FIELD, gamma, 1.0, n=2)
    assert harmonic.regime == "harmonic"
    assert "c1_fit_only" in harmonic.flags
    assert any(term.fit_only and term.value is None for term in harmonic.terms)

    curvature = predict_eigenvalues(prolate, Z_FIELD, gamma, 0.5)
    assert curvature.regime == "curvature-dominated"
    assert curvature.extra["max_kappa"] == pytest.approx(3.0 * (1 + 1 / 1.21) / 2, rel=1e-6)

    field = predict_eigenvalues(prolate, Z_FIELD, gamma, 1.5)
    assert field.regime == "field-dominated"
    assert field.extra["min_bn"] == pytest.approx(0.0, abs=1e-8)


def test_surface_from_spec():
    assert isinstance(surface_from_spec("sphere", (2.0,)), Sphere)
    assert isinstance(surface_from_spec("plane", ()), PlaneSurface)
    with pytest.raises(DimensionError):
        surface_from_spec("torus", (1.0, 0.5))
    with pytest.raises(DimensionError):
        Ellipsoid(1.0, -1.0, 1.0)


@pytest.mark.parametrize(
    "x, expected",
    [
        ((0.999, 0.0, 0.0), -1.0 - 2 * 0.01),
        ((0.0, 0.0, 0.995), -1.0 - 0.01),
        ((0.3, 0.2, 0.1), 0.0),
    ],
    ids=["equator", "pole", "interior"],
)
def test_localization_potential_on_the_unit_sphere(x, expected):
    value = localization_potential(Sphere(1.0), Z_FIELD, 0.01, 1.0, np.array(x))
    assert value == pytest.approx(expected, abs=1e-9)


def sphere_phi(y, chart=0):
    t, p = y[..., 0], y[..., 1]
    return np.stack([np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)], axis=-1)


def write_sphere_grid(path, n1=47, n2=61):
    theta = np.linspace(0.4, 2.7, n1)
    phi = np.linspace(0.0, 3.0, n2)
    mesh = np.stack(np.meshgrid(theta, phi, indexing="ij"), axis=-1)
    rows = np.concatenate([mesh, sphere_phi(mesh)], axis=-1).reshape(-1, 5)
    with path.open("w", encoding="utf-8") as handle:
        handle.write(f"{n1} {n2}\n")
        np.savetxt(handle, rows)
    return path


def test_tabulated_sphere_matches_analytic_curvature(tmp_path):
    surface = surface_from_spec("file", (str(write_sphere_grid(tmp_path / "sphere.txt")),))
    assert isinstance(surface, TabulatedSurface)

    y = np.array([[1.2, 1.5], [0.9, 2.0], [2.1, 0.8]])
    tabulated = curvature_at(surface, y)
    exact = curvature_at(Sphere(1.0), y)
    np.testing.assert_allclose(tabulated.point, exact.point, atol=1e-7)
    np.testing.assert_allclose(tabulated.n, exact.n, atol=1e-5)
    np.testing.assert_allclose(tabulated.kappa, exact.kappa, atol=5e-4)
    np.testing.assert_allclose(tabulated.gauss, exact.gauss, atol=5e-4)


def test_tabulated_grid_file_must_match_its_header(tmp_path):
    path = tmp_path / "short.txt"
    path.write_text("3 3\n0 0 0 0 1\n0 1 0 1 1\n", encoding="utf-8")
    with pytest.raises(DimensionError):
        TabulatedSurface.from_file(path)
    with pytest.raises(DimensionError):
        TabulatedSurface(np.arange(3.0), np.arange(4.0), np.zeros((4, 3, 3)))


def test_callback_sphere_uses_finite_differences():
    chart = Chart("polar", ((0.0, np.pi), (0.0, 2.0 * np.pi)), (False, True))
    surface = CallbackSurface(sphere_phi, [chart], closed=True)
    y = np.array([[0.7, 0.3], [1.6, 4.2]])
    data = curvature_at(surface, y)
    np.testing.assert_allclose(data.kappa, 1.0, atol=1e-6)
    np.testing.assert_allclose(data.gauss, 1.0, atol=1e-6)
    np.testing.assert_allclose(data.n, data.point, atol=1e-8)


def test_c_star_bound_is_the_largest_gauss_curvature():
    assert c_star_bound(Sphere(2.0)) == pytest.approx(0.25, rel=1e-8)
    # Gauss curvature c^2 / (a b)^2 at the tips of the long axis
    assert c_star_bound(Ellipsoid(1.0, 1.1, 3.0)) == pytest.approx(9.0 / 1.21, rel=1e-6)


def test_effective_energy_does_not_depend_on_chart():
    # long axis along y keeps both tips regular in both charts
    surface = Ellipsoid(1.0, 3.0, 1.1)
    field = np.array([0.0, 1.0, 0.0])
    first = effective_energy(surface, field, gamma=1.0, sigma=1.0, charts=[0])
    second = effective_energy(surface, field, gamma=1.0, sigma=1.0, charts=[1])

    kappa_tip = 3.0 * (1.0 + 1.0 / 1.21) / 2.0
    assert first.value == pytest.approx(1.0 - 2.0 * kappa_tip, rel=1e-6)
    assert second.value == pytest.approx(first.value, rel=1e-6)
    assert abs(second.bn) == pytest.approx(abs(first.bn), rel=1e-6)
    assert second.kappa == pytest.approx(first.kappa, rel=1e-6)
    assert harmonic_constant(second.hessian, abs(second.bn)) == pytest.approx(
        harmonic_constant(first.hessian, abs(first.bn)), rel=1e-4
    )

    x = surface.point(np.array([1.0, 2.2]), 0)
    through = [curvature_at(surface, surface.chart_point(x, i), i) for i in (0, 1)]
    bn = [float(normal_field(field, d)) for d in through]
    assert bn[1] == pytest.approx(bn[0], rel=1e-10)
