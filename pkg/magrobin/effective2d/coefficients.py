"""
Coefficients of the effective boundary operator.

For every chart node y' the transverse form

    f -> int |f'|^2 w dtau - w(0) |f(0)|^2,   w = |g(y', h tau)|^(1/2),

is solved for its ground state (mu, f) and the tangential coefficients are
tau-averages against f^2 w:

    alpha_kl = <g^kl>,  beta_kl = <g^kl a_l>,  gamma_kl = <g^kl a_k a_l>,

with a = A0 - A the depth variation of the potential, and

    rho = sum_kl d_l int g^kl f d_k f w dtau.
"""

from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np
from scipy.integrate import trapezoid

from magrobin.effective2d.chart import ChartData
from magrobin.model1d import WeightedForm1D, transverse_ground
from magrobin.utils.errors import SpectralError
from magrobin.utils.logger import StageLogger


@dataclass
class EffectiveCoefficients:
    """
    Coefficient fields on the chart grid.

    Attributes:
        alpha: ``(n1, n2, 2, 2)``, symmetric positive definite.
        beta: ``(n1, n2, 2, 2)``.
        gamma: ``(n1, n2, 2, 2)``, symmetric.
        mu: Transverse ground energy ``(n1, n2)``.
        rho: ``(n1, n2)``.
        h: Semiclassical parameter.
    """

    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    mu: np.ndarray
    rho: np.ndarray
    h: float
    meta: dict[str, Any] = field(default_factory=dict)

    @property
    def beta_hat(self) -> np.ndarray:
        return self.beta.sum(axis=-1)

    @property
    def gamma_total(self) -> np.ndarray:
        return self.gamma.sum(axis=(-1, -2))

    @property
    def potential(self) -> np.ndarray:
        """Scalar part ``gamma + mu - h^2 rho``."""
        return self.gamma_total + self.mu - self.h**2 * self.rho

    def form_lower_bound(self) -> np.ndarray:
        """Pointwise bound ``potential - beta_hat^T alpha^-1 beta_hat`` of the form."""
        bh = self.beta_hat
        solved = np.linalg.solve(self.alpha, bh[..., None])[..., 0]
        return self.potential - np.einsum("...k,...k->...", bh, solved)

    def sup_norms(self) -> dict[str, float]:
        return {
            "alpha": float(np.abs(self.alpha).max()),
            "beta": float(np.abs(self.beta).max()),
            "gamma": float(np.abs(self.gamma).max()),
            "rho": float(np.abs(self.rho).max()),
        }

    def symmetry_defect(self) -> float:
        defect = 0.0
        for name in ("alpha", "gamma"):
            value = getattr(self, name)
            defect = max(defect, float(np.abs(value - np.swapaxes(value, -1, -2)).max()))
        return defect


def _transverse_modes(chart: ChartData, stage: StageLogger):
    n1, n2 = chart.shape
    mu = np.empty((n1, n2))
    modes = np.empty((n1, n2, chart.tau.size))
    cache: dict[bytes, tuple[float, np.ndarray]] = {}
    for i in range(n1):
        for j in range(n2):
            weight = chart.sqrt_g[i, j]
            key = weight.tobytes()
            if key not in cache:
                form = WeightedForm1D(chart.tau, weight, 0.0, boundary_coeff=float(weight[0]))
                try:
                    mode = transverse_ground(form, chart.h)
                except SpectralError as exc:
                    exc.details["y"] = [float(chart.y1[i]), float(chart.y2[j])]
                    raise
                cache[key] = (mode.mu, mode.f)
            mu[i, j], modes[i, j] = cache[key]
        stage.detail("transverse modes", row=i + 1, rows=n1, solves=len(cache))
    return mu, modes, len(cache)


def assemble_coefficients(chart: ChartData) -> EffectiveCoefficients:
    """
    Transverse ground states and tangential coefficients of a chart.

    Nodes with bit-identical collar weights share one transverse solve.

    Raises:
        SolverError: A transverse solve failed; ``details["y"]`` holds the
            chart node.
        InvalidWeight: The collar weight is not positive at some node.
    """
    stage = StageLogger("coefficients")
    n1, n2 = chart.shape
    stage.start("Assembling effective coefficients", h=chart.h, n1=n1, n2=n2)

    mu, f, solves = _transverse_modes(chart, stage)
    tau = chart.tau
    density = f**2 * chart.sqrt_g
    gap = chart.A0[:, :, None, :] - chart.A

    def average(values: np.ndarray) -> np.ndarray:
        extra = values.ndim - density.ndim
        return trapezoid(density.reshape(density.shape + (1,) * extra) * values, tau, axis=2)

    alpha = average(chart.g_inv)
    beta = average(chart.g_inv * gap[:, :, :, None, :])
    gamma = average(chart.g_inv * gap[..., :, None] * gap[..., None, :])

    h1, h2 = chart.spacing
    df = (np.gradient(f, h1, axis=0), np.gradient(f, h2, axis=1))
    flux = np.empty(chart.shape + (2, 2))
    for k in range(2):
        for l in range(2):
            flux[..., k, l] = trapezoid(
                chart.g_inv[..., k, l] * f * df[k] * chart.sqrt_g, tau, axis=2
            )
    rho = np.zeros(chart.shape)
    for l, step in enumerate((h1, h2)):
        rho += np.gradient(flux[..., :, l].sum(axis=-1), step, axis=l)

    coeffs = EffectiveCoefficients(
        alpha=0.5 * (alpha + np.swapaxes(alpha, -1, -2)),
        beta=beta,
        gamma=0.5 * (gamma + np.swapaxes(gamma, -1, -2)),
        mu=mu,
        rho=rho,
        h=chart.h,
        meta={"transverse_solves": solves, "tau_max": float(tau[-1]), "n_t": int(tau.size)},
    )
    stage.success("Coefficients assembled", solves=solves, **coeffs.sup_norms())
    return coeffs


def with_quadratic_well(
    coeffs: EffectiveCoefficients, chart: ChartData, weights: tuple[float, float]
) -> EffectiveCoefficients:
    """
    Coefficients with mu replaced by ``mu(0) + h (w1 y1^2 + w2 y2^2) / 2``.

    ``y`` is measured from the chart centre, where ``mu(0)`` is taken; the well
    has harmonic constant c0 = sqrt(w1 w2) / 2 in a unit normal field.
    """
    i, j = (s // 2 for s in chart.shape)
    offset = chart.mesh - chart.mesh[i, j]
    y1, y2 = offset[..., 0], offset[..., 1]
    w1, w2 = weights
    mu = coeffs.mu[i, j] + 0.5 * coeffs.h * (w1 * y1**2 + w2 * y2**2)
    meta = {**coeffs.meta, "well": [float(w1), float(w2)]}
    return replace(coeffs, mu=mu, meta=meta)
