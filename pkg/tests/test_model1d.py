import numpy as np
import pytest
from scipy.integrate import trapezoid

from magrobin.model1d import (
    WeightedForm1D,
    degennes_lambda,
    degennes_theta0,
    flat_robin_discrete,
    form_spectrum,
    harmonic_ground,
    montgomery_ground,
    montgomery_lambda,
    robin_transverse_expansion,
    transverse_ground,
)
from magrobin.eigsolve import Spectrum
from magrobin.model1d import forms
from magrobin.utils.errors import DimensionError, InvalidWeight, SolverError

H_LIST = [0.05, 0.04, 0.03, 0.02, 0.01]


def test_flat_robin_matches_closed_form():
    step = 0.0625
    form = WeightedForm1D.uniform(20.0, step, boundary_coeff=1.0)
    mode = transverse_ground(form)
    assert mode.mu == pytest.approx(flat_robin_discrete(step), rel=1e-9)
    assert mode.mu == pytest.approx(-1.0, abs=2e-3)


def test_ground_mode_is_positive_and_normalized():
    form = WeightedForm1D.uniform(12.0, 0.01, boundary_coeff=1.0)
    mode = transverse_ground(form)
    assert np.all(mode.f[:-1] > 0.0)
    assert mode.f[-1] == 0.0
    assert form.integrate(mode.f**2) == pytest.approx(1.0, rel=1e-3)


def _pick_level(index: int, sign: float = 1.0):
    def spectrum(form, k=1):
        full = forms.solve_tridiagonal(form.operator_pair(), k=index + 1)
        vector = sign * full.eigenvectors[:, index : index + 1]
        return Spectrum(full.eigenvalues[index:], vector, full.residuals[index:])

    return spectrum


def test_ground_sign_is_fixed_by_the_leading_entry(monkeypatch):
    form = WeightedForm1D.uniform(12.0, 0.02, boundary_coeff=1.0)
    reference = transverse_ground(form)
    monkeypatch.setattr(forms, "form_spectrum", _pick_level(0, sign=-1.0))
    flipped = transverse_ground(form)
    np.testing.assert_allclose(flipped.f, reference.f, rtol=1e-12)


def test_sign_changing_vector_is_not_a_ground_state(monkeypatch):
    form = WeightedForm1D.uniform(np.pi, 0.01, left_condition="dirichlet")
    monkeypatch.setattr(forms, "form_spectrum", _pick_level(1))
    with pytest.raises(SolverError) as info:
        transverse_ground(form)
    assert info.value.details["min_value"] < 0.0 < info.value.details["max_value"]


def test_consistent_mass_decreases_under_refinement():
    values = []
    for n in (16, 32, 64, 128):
        form = WeightedForm1D(
            np.linspace(0.0, np.pi, n + 1),
            1.0,
            0.0,
            left_condition="dirichlet",
            mass="consistent",
        )
        values.append(form_spectrum(form, k=1).ground)
    assert all(b < a for a, b in zip(values, values[1:]))
    assert min(values) >= 1.0


@pytest.mark.parametrize("kappa", [-0.5, 0.0, 0.5])
def test_robin_expansion_coefficients(kappa):
    report = robin_transverse_expansion(kappa, 0.0, 1.0, H_LIST, rho=0.4)
    assert report.exponents == [0.0, 1.0, 2.0]
    assert report.coefficient(0.0) == pytest.approx(-1.0, abs=1e-4)
    tolerance = 0.02 * max(2.0 * abs(kappa), 1.0)
    assert report.coefficient(1.0) == pytest.approx(-2.0 * kappa, abs=tolerance)
    assert report.diagnostics["expected"] == {"leading": -1.0, "subleading": -2.0 * kappa}
    assert len(report.diagnostics["samples"]) == len(H_LIST)


def test_robin_expansion_with_weak_field_scaling():
    report = robin_transverse_expansion(0.3, 0.0, 1.5, H_LIST, rho=0.1)
    leading, subleading = report.exponents[:2]
    assert leading == pytest.approx(2.0 - 2.0 / 1.5)
    assert subleading == pytest.approx(2.0 - 1.0 / 1.5)
    assert report.coefficient(leading) == pytest.approx(-1.0, abs=5e-3)


def test_robin_weight_sign_change_names_h():
    with pytest.raises(InvalidWeight) as info:
        robin_transverse_expansion(50.0, 0.0, 1.0, [0.5, 0.4, 0.3], rho=0.4)
    assert info.value.details["h"] == 0.5


def test_form_rejects_non_positive_weight():
    grid = np.linspace(0.0, 1.0, 33)
    with pytest.raises(InvalidWeight):
        WeightedForm1D(grid, 1.0 - 2.0 * grid, 0.0)


def test_form_rejects_coarse_grid():
    with pytest.raises(DimensionError):
        WeightedForm1D(np.linspace(0.0, 1.0, 8), 1.0, 0.0)


def test_montgomery_minimum(montgomery):
    nu0, zeta0 = montgomery
    assert nu0 == pytest.approx(0.5698, rel=1e-3)
    assert zeta0 == pytest.approx(-0.7598, rel=1e-3)
    assert montgomery_lambda(zeta0 - 0.1) > nu0
    assert montgomery_lambda(zeta0 + 0.1) > nu0


def test_montgomery_ground_profile():
    mode = montgomery_ground(-0.76, n=4000)
    assert mode.value == montgomery_lambda(-0.76, n=4000)
    assert mode.value == pytest.approx(0.5698, rel=1e-3)
    assert mode.grid[0] == pytest.approx(-mode.grid[-1])
    assert np.all(mode.profile >= 0.0)
    assert mode.profile[0] == mode.profile[-1] == 0.0
    assert trapezoid(mode.profile**2, mode.grid) == pytest.approx(1.0, rel=1e-6)
    # even potential, even ground state
    np.testing.assert_allclose(mode.profile, mode.profile[::-1], atol=1e-6)


def test_degennes_constant():
    theta0, xi_min = degennes_theta0()
    assert theta0 == pytest.approx(0.5901, rel=1e-3)
    assert xi_min == pytest.approx(np.sqrt(theta0), rel=1e-3)
    assert degennes_lambda(0.0) == pytest.approx(1.0, rel=1e-4)


@pytest.mark.parametrize(
    "h, m, xi, eta",
    [(0.1, 0.0, 0.0, 1.0), (0.01, 0.7, -0.2, 2.5), (0.05, -1.0, 3.0, -0.4)],
)
def test_harmonic_ground_is_h_eta(h, m, xi, eta):
    level = harmonic_ground(h, m, xi, eta)
    assert level.value == pytest.approx(abs(eta) * h, rel=1e-5)
    assert level.well_center == pytest.approx(-(xi + m) / eta)
    assert not level.degenerate_well


def test_harmonic_without_gradient_is_degenerate():
    level = harmonic_ground(0.1, 0.5, 0.0, 0.0)
    assert level.degenerate_well
    assert level.value == 0.0
