import math

import pytest

from magrobin.asymfit import fit_expansion, richardson
from magrobin.utils.errors import ExtrapolationUnsafe, FitConditioning


def polynomial_samples(hs, coefficients, exponents):
    return [(h, sum(c * h**p for c, p in zip(coefficients, exponents))) for h in hs]


def test_fit_recovers_exact_expansion():
    exponents = [0.0, 0.5, 1.0]
    samples = polynomial_samples([0.1, 0.05, 0.02, 0.01, 0.005], [-1.0, 2.0, 0.7], exponents)
    report = fit_expansion(samples, exponents)
    assert report.coefficient(0.0) == pytest.approx(-1.0, abs=1e-9)
    assert report.coefficient(0.5) == pytest.approx(2.0, abs=1e-8)
    assert report.coefficient(1.0) == pytest.approx(0.7, abs=1e-7)
    assert report.residual < 1e-10


def test_fit_does_not_depend_on_sample_order():
    exponents = [1.0, 2.0]
    samples = polynomial_samples([0.2, 0.1, 0.05, 0.025], [-1.0, 3.0], exponents)
    forward = fit_expansion(samples, exponents)
    backward = fit_expansion(list(reversed(samples)), list(reversed(exponents)))
    assert forward.coefficients == backward.coefficients
    assert forward.samples == sorted(samples)


def test_fit_predicts_at_new_points():
    exponents = [0.0, 2.0]
    report = fit_expansion(polynomial_samples([0.3, 0.2, 0.1], [1.0, -4.0], exponents), exponents)
    assert report.predict(0.5) == pytest.approx(0.0, abs=1e-10)


@pytest.mark.parametrize(
    "samples, exponents",
    [
        ([(0.1, 1.0), (0.05, 1.1)], [0.0, 1.0]),
        ([(0.1, 1.0), (0.05, 1.1), (0.02, 1.2)], [1.0, 1.0]),
        ([(0.1, 1.0), (0.1, 1.0), (0.1, 1.0)], [0.0, 1.0]),
    ],
    ids=["too-few-samples", "duplicate-exponents", "rank-deficient"],
)
def test_fit_rejects_bad_designs(samples, exponents):
    with pytest.raises(FitConditioning):
        fit_expansion(samples, exponents)


def test_unknown_exponent_lookup():
    exponents = [0.0, 1.0]
    report = fit_expansion(polynomial_samples([0.3, 0.2, 0.1], [1.0, 1.0], exponents), exponents)
    with pytest.raises(KeyError):
        report.coefficient(1.5)


def test_richardson_second_order_limit():
    values = [1.0 + 1.0 / n**2 for n in (10, 20, 40)]
    result = richardson(values, order=2.0, ratio=2.0)
    assert result.limit == pytest.approx(1.0, abs=1e-12)
    assert result.observed_order == pytest.approx(2.0, abs=1e-9)


def test_richardson_constant_values():
    result = richardson([3.0, 3.0, 3.0])
    assert result.limit == 3.0
    assert math.isnan(result.observed_order)


def test_richardson_needs_three_values():
    with pytest.raises(ExtrapolationUnsafe) as info:
        richardson([1.0, 1.1])
    assert info.value.finest == 1.1


def test_richardson_rejects_oscillation():
    with pytest.raises(ExtrapolationUnsafe) as info:
        richardson([1.0, 1.2, 1.1, 1.3])
    assert info.value.finest == 1.3
