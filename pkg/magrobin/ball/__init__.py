"""magrobin - Unit Ball Module"""

from magrobin.ball.modes import (
    ModeCurve,
    WindowMinimum,
    auto_mode_window,
    ball_ground,
    ball_mode_spectrum,
    e_of_b,
    lambda_m,
    mode_curves,
    mode_pair,
    polar_pair,
    scan_window,
)
from magrobin.ball.problem import BallProblem, Regime, theta_operator, zero_field_reference
from magrobin.ball.regimes import diamagnetic_bounds, expected_coefficients, verify_regime
from magrobin.ball.trial import BallTrialBound, ball_trial_upper_bound

__all__ = [
    "BallProblem",
    "Regime",
    "theta_operator",
    "zero_field_reference",
    "ModeCurve",
    "WindowMinimum",
    "mode_pair",
    "ball_mode_spectrum",
    "scan_window",
    "ball_ground",
    "polar_pair",
    "lambda_m",
    "e_of_b",
    "auto_mode_window",
    "mode_curves",
    "diamagnetic_bounds",
    "expected_coefficients",
    "verify_regime",
    "BallTrialBound",
    "ball_trial_upper_bound",
]
