"""
Weighted Robin transverse operator and its two-term expansion.

On the rescaled normal variable tau = t / h^(1/sigma) the operator lives on
(0, delta) with delta = h^(rho - 1/sigma), weight

    w(tau) = 1 - 2 kappa h^(1/sigma) tau - C* h^(2/sigma) tau^2,

Robin coefficient one at tau = 0 and a Dirichlet condition at delta. Its
ground energy times h^(2 - 2/sigma) is the first eigenvalue of the
unscaled transverse operator.
"""

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from magrobin.asymfit import FitReport, fit_expansion
from magrobin.model1d.forms import WeightedForm1D, transverse_ground
from magrobin.utils.errors import InvalidWeight
from magrobin.utils.logger import StageLogger

DEFAULT_STEP = 2e-3


@dataclass
class RobinSample:
    h: float
    eigenvalue: float
    rescaled: float
    depth: float
    nodes: int
    meta: dict[str, Any] = field(default_factory=dict)


def robin_weight(kappa: float, c_star: float, sigma: float, h: float):
    """Weight of the rescaled transverse form as a callable of tau."""
    a = 2.0 * kappa * h ** (1.0 / sigma)
    b = c_star * h ** (2.0 / sigma)
    return lambda tau: 1.0 - a * tau - b * tau * tau


def robin_transverse_form(
    kappa: float,
    c_star: float,
    sigma: float,
    h: float,
    rho: float,
    step: float = DEFAULT_STEP,
) -> WeightedForm1D:
    """
    Rescaled transverse form for one value of h.

    Raises:
        InvalidWeight: The weight changes sign inside (0, delta); the
            offending h is attached.
    """
    depth = h ** (rho - 1.0 / sigma)
    try:
        return WeightedForm1D.uniform(
            depth,
            step,
            weight=robin_weight(kappa, c_star, sigma, h),
            potential=0.0,
            boundary_coeff=1.0,
            right_condition="dirichlet",
        )
    except InvalidWeight as exc:
        raise InvalidWeight(
            f"transverse weight changes sign for h={h:g}",
            {**exc.details, "h": h, "depth": depth, "kappa": kappa, "c_star": c_star},
        ) from exc


def robin_samples(
    kappa: float,
    c_star: float,
    sigma: float,
    h_list: Sequence[float],
    rho: float,
    step: float = DEFAULT_STEP,
) -> list[RobinSample]:
    """Transverse eigenvalues for every h, in the order given."""
    samples = []
    for h in h_list:
        form = robin_transverse_form(kappa, c_star, sigma, h, rho, step)
        mode = transverse_ground(form, h=h)
        scale = h ** (2.0 - 2.0 / sigma)
        samples.append(
            RobinSample(
                h=float(h),
                eigenvalue=scale * mode.mu,
                rescaled=mode.mu,
                depth=float(form.grid[-1]),
                nodes=int(form.grid.size),
                meta={"residual": mode.meta.get("residual")},
            )
        )
    return samples


def robin_transverse_expansion(
    kappa: float,
    c_star: float,
    sigma: float,
    h_list: Sequence[float],
    rho: float = 0.4,
    step: float = DEFAULT_STEP,
) -> FitReport:
    """
    Fit the first transverse eigenvalue against {h^(2-2/s), h^(2-1/s), h^2}.

    The leading coefficient is expected at -1 and the second at -2 kappa.
    For sigma = 1 the basis is {1, h, h^2}.

    Args:
        kappa: Mean curvature at the boundary point.
        c_star: Coefficient of the quadratic weight correction, >= 0.
        sigma: Scaling exponent in (0, 2).
        h_list: Semiclassical parameters.
        rho: Collar exponent in (0, 1/2).
        step: Grid spacing in tau.

    Returns:
        FitReport; ``diagnostics`` holds the per-h samples and expectations.

    Raises:
        InvalidWeight: Weight sign change for some h.
        FitConditioning: Propagated from the fit.
    """
    stage = StageLogger("robin1d")
    stage.start("transverse sweep", kappa=kappa, c_star=c_star, sigma=sigma, rho=rho)

    samples = robin_samples(kappa, c_star, sigma, h_list, rho, step)
    exponents = [2.0 - 2.0 / sigma, 2.0 - 1.0 / sigma, 2.0]
    report = fit_expansion([(s.h, s.eigenvalue) for s in samples], exponents)
    report.diagnostics.update(
        {
            "kappa": kappa,
            "c_star": c_star,
            "sigma": sigma,
            "rho": rho,
            "step": step,
            "expected": {"leading": -1.0, "subleading": -2.0 * kappa},
            "samples": [
                {
                    "h": s.h,
                    "eigenvalue": s.eigenvalue,
                    "rescaled": s.rescaled,
                    "depth": s.depth,
                    "nodes": s.nodes,
                }
                for s in samples
            ],
        }
    )
    stage.success(
        "transverse fit",
        leading=report.coefficients[0],
        subleading=report.coefficients[1],
        residual=report.residual,
    )
    return report


def flat_robin_discrete(step: float) -> float:
    """Exact lumped-P1 ground energy of the flat half-line Robin form."""
    return -2.0 * (np.sqrt(1.0 + step * step) - 1.0) / (step * step)
