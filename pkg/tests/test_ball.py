import numpy as np
import pytest
import scipy.sparse as sp

from magrobin.ball import (
    BallProblem,
    auto_mode_window,
    ball_ground,
    ball_mode_spectrum,
    ball_trial_upper_bound,
    diamagnetic_bounds,
    e_of_b,
    lambda_m,
    mode_curves,
    mode_pair,
    verify_regime,
    zero_field_reference,
)
from magrobin.utils.errors import GridError
from magrobin.utils.validators import ValidationError

COARSE = {"n_theta": 64, "radial_step": 0.1}


def coarse_problem(b: float, h: float = 0.1) -> BallProblem:
    return BallProblem(h, b, "critical", **COARSE)


def test_ground_lies_between_diamagnetic_bounds():
    problem = coarse_problem(1.0)
    lower, upper = diamagnetic_bounds(problem)
    ground = ball_ground(problem)
    assert lower <= ground.value <= upper
    assert upper - lower == pytest.approx(0.25)


def test_zero_field_ground_is_the_radial_reference():
    problem = coarse_problem(0.0)
    energy, m_star = ball_ground(problem)
    assert m_star == 0
    assert energy == pytest.approx(zero_field_reference(problem), rel=1e-8)


@pytest.mark.parametrize("regime, m", [("critical", 3), ("h_bounded", 1)])
def test_mode_potential_enters_with_the_volume_measure(regime, m):
    problem = BallProblem(0.02, 1.0, regime, n_theta=32)
    pair = mode_pair(problem, m)
    # zero field and m = 0 leave only the kinetic part on the same grid
    kinetic = mode_pair(BallProblem(0.02, 0.0, regime, n_theta=32), 0).stiffness

    r = problem.radius[problem.radial_form().free_nodes]
    potential = problem.potential(r[:, None], problem.theta[None, :], m).ravel()
    added = (pair.stiffness - kinetic).tocsr()
    scale = np.abs(kinetic.diagonal()).max()

    np.testing.assert_allclose(
        added.diagonal(), potential * pair.mass.diagonal(), rtol=1e-9, atol=1e-12 * scale
    )
    assert np.abs(added - sp.diags(added.diagonal())).max() <= 1e-12 * scale


def test_dense_and_sparse_mode_solves_agree():
    problem = coarse_problem(1.0)
    sparse = ball_mode_spectrum(problem, 2, k=2, solver="sparse")
    dense = ball_mode_spectrum(problem, 2, k=2, solver="dense")
    np.testing.assert_allclose(sparse.eigenvalues, dense.eigenvalues, rtol=1e-9)


def test_trial_state_bounds_its_mode_from_above():
    problem = coarse_problem(1.0)
    bound = ball_trial_upper_bound(problem.h, problem.b, "critical", problem=problem)
    mode_ground = ball_mode_spectrum(problem, bound.m).ground
    assert bound.discrete >= mode_ground - 1e-12
    assert float(bound) == bound.discrete


@pytest.mark.parametrize("b", [0.0, 1.0, 6.0])
def test_lambda_zero_is_constant_potential(b):
    assert lambda_m(0, b) == pytest.approx(b * b / 4.0, abs=1e-10)


def test_lambda_is_even_in_m_without_field():
    for m in (1, 2, 5):
        assert lambda_m(m, 0.0) == pytest.approx(lambda_m(-m, 0.0), rel=1e-12)


def test_mode_curves_cover_the_window():
    b_values = [0.0, 2.0, 4.0]
    window = auto_mode_window(b_values)
    assert window == [0, 1, 2, 3, 4]
    curves = mode_curves(b_values, window, n_theta=128)
    assert [c.m for c in curves] == window
    rows = list(curves[0].rows())
    assert rows[1] == {"b_or_h": 2.0, "m": 0, "lambda": pytest.approx(1.0, abs=1e-10)}


@pytest.mark.slow
def test_e_of_b_is_non_negative_and_not_monotone():
    b_values = np.arange(0.0, 12.01, 0.5)
    values = np.array([e_of_b(b).value for b in b_values])
    assert np.all(values >= -1e-12)
    assert np.any(np.diff(values) < 0.0)


@pytest.mark.parametrize(
    "kwargs, error",
    [
        ({"h": 2.0, "b": 1.0}, ValidationError),
        ({"h": 0.1, "b": -1.0}, ValidationError),
        ({"h": 0.1, "b": 1.0, "regime": "weak"}, ValidationError),
        ({"h": 0.1, "b": 1.0, "n_theta": 8}, GridError),
        ({"h": 0.1, "b": 1.0, "radial_step": 0.8}, GridError),
    ],
)
def test_problem_validation(kwargs, error):
    with pytest.raises(error):
        BallProblem(**kwargs)


def test_polar_grid_needs_enough_cells():
    with pytest.raises(GridError):
        lambda_m(1, 1.0, n_theta=32)


def test_verify_requires_decreasing_h():
    with pytest.raises(ValidationError):
        verify_regime("critical", 1.0, [0.05, 0.1, 0.02, 0.01])
