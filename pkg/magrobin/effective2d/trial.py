"""
Rayleigh quotient of the localized boundary trial state.

Around x0 the chart is reparametrized so that G(0) = Id and the trial state

    u(y, t) = chi(y1/H) chi(y2/H) chi(t/H) f(t / h^(1/sigma)) phi(y1) exp(i w(y)/h),

with H = h^rho, f(s) = sqrt(2) exp(-s), the Landau profile
phi(y1) = exp(-|b3| y1^2 / (2h)) of the normal field b3 at x0 and the
quadratic gauge w of the boundary potential, is inserted in

    q_h(u) = int |g|^(1/2) (|(-ih d_y - A)u|_g^2 + |h d_t u|^2)
             - h^(2 - 1/sigma) int_{t=0} |u|^2 |G|^(1/2)

written in collar coordinates with the normal gauge. The quotient is an
upper bound of the ground energy up to the reported quadrature error.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Optional, Sequence

import numpy as np

from magrobin.config.settings import get_settings
from magrobin.effective2d.chart import MagneticPotential
from magrobin.geometry.curvature import curvature_at, forms_from_derivatives
from magrobin.geometry.localization import project_to_surface
from magrobin.geometry.surfaces import ParamSurface, ReparametrizedSurface
from magrobin.utils.errors import QuadratureError
from magrobin.utils.logger import StageLogger

GAUGE_NODES = 8
SLOPE_STEP = 1e-4
START_NODES = 16


@dataclass
class TrialBound:
    """Upper bound from a trial state and the size of its last quadrature update."""

    value: float
    quadrature_error: float
    nodes: int
    meta: dict[str, Any] = field(default_factory=dict)

    def __float__(self) -> float:
        return self.value


@lru_cache(maxsize=16)
def cached_leggauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


def composite_rule(breaks: Sequence[float], n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre rule with ``n`` nodes on each panel between ``breaks``."""
    x, w = cached_leggauss(n)
    nodes, weights = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        nodes.append(0.5 * (b - a) * x + 0.5 * (a + b))
        weights.append(0.5 * (b - a) * w)
    return np.concatenate(nodes), np.concatenate(weights)


def _bump(x: np.ndarray) -> np.ndarray:
    safe = np.where(x > 0.0, x, 1.0)
    return np.where(x > 0.0, np.exp(-1.0 / safe), 0.0)


def cutoff(s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Smooth cutoff equal to 1 on [-1/2, 1/2] and 0 outside (-1, 1), and its derivative."""
    s = np.asarray(s, dtype=float)
    x = np.clip(2.0 * np.abs(s) - 1.0, 0.0, 1.0)
    p, q = _bump(1.0 - x), _bump(x)
    total = p + q
    value = p / total
    dp = np.where(x < 1.0, p / np.maximum((1.0 - x) ** 2, 1e-300), 0.0)
    dq = np.where(x > 0.0, q / np.maximum(x**2, 1e-300), 0.0)
    dvalue_dx = -(dp * q + p * dq) / total**2
    return value, dvalue_dx * 2.0 * np.sign(s)


def _boundary_potential(surface: ParamSurface, A: MagneticPotential, z: np.ndarray) -> np.ndarray:
    d = surface.derivatives(z)
    pot = A.potential(d.phi)
    return np.stack(
        [np.einsum("...c,...c->...", d.d1, pot), np.einsum("...c,...c->...", d.d2, pot)],
        axis=-1,
    )


def _potential_jet(surface: ParamSurface, A: MagneticPotential) -> tuple[np.ndarray, np.ndarray]:
    """Boundary potential at 0 and its Jacobian ``a[i, j] = d_j A_i`` (4th order)."""
    s = SLOPE_STEP
    value = _boundary_potential(surface, A, np.zeros(2))
    jac = np.empty((2, 2))
    for j in range(2):
        e = np.zeros(2)
        e[j] = s
        diff = (
            -_boundary_potential(surface, A, 2 * e)
            + 8 * _boundary_potential(surface, A, e)
            - 8 * _boundary_potential(surface, A, -e)
            + _boundary_potential(surface, A, -2 * e)
        ) / (12 * s)
        jac[:, j] = diff
    return value, jac


def _local_surface(surface: ParamSurface, x0: np.ndarray) -> ReparametrizedSurface:
    projection = project_to_surface(surface, x0)
    data = curvature_at(surface, projection.y, projection.chart)
    eigvals, eigvecs = np.linalg.eigh(data.G)
    matrix = eigvecs @ np.diag(eigvals**-0.5) @ eigvecs.T
    return ReparametrizedSurface(surface, projection.chart, projection.y, matrix)


class _TrialState:
    def __init__(self, local, A, h, sigma, rho_exp):
        self.local = local
        self.A = A
        self.h = h
        self.sigma = sigma
        self.width = h**rho_exp
        self.depth = h ** (1.0 / sigma)
        self.robin = h ** (2.0 - 1.0 / sigma)
        self.a0, self.jac = _potential_jet(local, A)
        # normal field in coordinates with G(0) = Id
        self.b3 = float(self.jac[1, 0] - self.jac[0, 1])

    def gauge_gradient(self, z1, z2) -> np.ndarray:
        a = self.jac
        return np.stack(
            np.broadcast_arrays(
                self.a0[0] + a[0, 0] * z1 + a[0, 1] * z2,
                self.a0[1] + a[0, 1] * z1 + a[1, 1] * z2,
            ),
            axis=-1,
        )

    def tangential_profile(self, z1):
        chi, dchi = cutoff(z1 / self.width)
        phi = np.exp(-abs(self.b3) * z1**2 / (2.0 * self.h))
        dphi = -abs(self.b3) * z1 / self.h * phi
        return chi * phi, dchi / self.width * phi + chi * dphi

    def normal_profile(self, t):
        chi, dchi = cutoff(t / self.width)
        f = np.sqrt(2.0) * np.exp(-t / self.depth)
        return chi * f, dchi / self.width * f - chi * f / self.depth

    def evaluate(self, n: int) -> float:
        H = self.width
        y_nodes, y_weights = composite_rule([-H, -0.5 * H, 0.5 * H, H], n)
        layer = min(4.0 * self.depth, 0.25 * H)
        t_nodes, t_weights = composite_rule([0.0, layer, 0.5 * H, H], n)
        g_nodes, g_weights = cached_leggauss(GAUGE_NODES)

        X, dX = self.tangential_profile(y_nodes)
        Y, dY = cutoff(y_nodes / H)
        dY = dY / H
        T, dT = self.normal_profile(t_nodes)
        trace = float(self.normal_profile(np.zeros(1))[0][0])

        s = 0.5 * t_nodes[:, None] * (1.0 + g_nodes[None, :])
        s_weights = 0.5 * t_nodes[:, None] * g_weights[None, :]

        numerator = 0.0
        norm = 0.0
        boundary = 0.0
        h = self.h
        for i, z1 in enumerate(y_nodes):
            z = np.stack([np.full_like(y_nodes, z1), y_nodes], axis=-1)
            data = forms_from_derivatives(self.local.derivatives(z))
            pot = self.A.potential(data.point)
            a_bnd = np.einsum("jkc,jc->jk", data.tangents, pot)

            n_vec = data.n
            collar = data.point[:, None, None, :] - s[None, :, :, None] * n_vec[:, None, None, :]
            field_s = self.A.field(collar)
            edges_s = (
                data.tangents[:, None, None, :, :]
                - s[None, :, :, None, None] * data.normal_derivatives[:, None, None, :, :]
            )
            flux = np.einsum(
                "jsgc,jsgkc->jsgk",
                field_s,
                np.cross(-n_vec[:, None, None, None, :], edges_s),
            )
            potential = a_bnd[:, None, :] + np.einsum("jsgk,sg->jsk", flux, s_weights)

            edges = (
                data.tangents[:, None, :, :]
                - t_nodes[None, :, None, None] * data.normal_derivatives[:, None, :, :]
            )
            g = np.einsum("jskc,jslc->jskl", edges, edges)
            det = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] ** 2
            sqrt_g = np.sqrt(det)
            g_inv = np.empty_like(g)
            g_inv[..., 0, 0] = g[..., 1, 1] / det
            g_inv[..., 1, 1] = g[..., 0, 0] / det
            g_inv[..., 0, 1] = g_inv[..., 1, 0] = -g[..., 0, 1] / det

            v = X[i] * Y[:, None] * T[None, :]
            grad = np.stack(
                np.broadcast_arrays(
                    dX[i] * Y[:, None] * T[None, :], X[i] * dY[:, None] * T[None, :]
                ),
                axis=-1,
            )
            dv_t = X[i] * Y[:, None] * dT[None, :]
            c = self.gauge_gradient(z1, y_nodes)[:, None, :] - potential

            density = sqrt_g * (
                h**2 * np.einsum("jsk,jskl,jsl->js", grad, g_inv, grad)
                + np.einsum("jsk,jskl,jsl->js", c, g_inv, c) * v**2
                + h**2 * dv_t**2
            )
            weights = y_weights[i] * y_weights[:, None] * t_weights[None, :]
            numerator += float(np.sum(weights * density))
            norm += float(np.sum(weights * sqrt_g * v**2))
            boundary += float(
                y_weights[i] * np.sum(y_weights * (X[i] * Y * trace) ** 2 * data.area)
            )

        value = (numerator - self.robin * boundary) / norm
        return value


def variational_upper_bound(
    surface: ParamSurface,
    A: MagneticPotential,
    x0: Sequence[float],
    h: float,
    sigma: float = 1.0,
    rho_exp: float = 0.4,
    max_nodes: Optional[int] = None,
    rtol: Optional[float] = None,
) -> TrialBound:
    """
    Rayleigh quotient of the localized trial state at the boundary point x0.

    Args:
        surface: Boundary surface.
        A: Vector potential (its field is used for the normal gauge).
        x0: Boundary point where the state is localized.
        h: Semiclassical parameter.
        sigma: Robin scaling exponent in (0, 2).
        rho_exp: Localization exponent in (0, 1/2).
        max_nodes: Largest Gauss-Legendre order per panel (settings default).
        rtol: Relative change accepted between refinements (settings default).

    Raises:
        QuadratureError: The quotient did not settle under refinement.
    """
    settings = get_settings()
    max_nodes = max_nodes or settings.max_quadrature_nodes
    rtol = rtol or settings.quadrature_rtol
    stage = StageLogger("trial")
    stage.start("Evaluating trial state", h=h, sigma=sigma, rho=rho_exp)

    local = _local_surface(surface, np.asarray(x0, dtype=float))
    state = _TrialState(local, A, h, sigma, rho_exp)

    history = []
    previous = None
    n = START_NODES
    while n <= max_nodes:
        value = state.evaluate(n)
        history.append({"nodes": n, "value": value})
        stage.detail("quadrature", nodes=n, value=value)
        if previous is not None:
            change = abs(value - previous)
            if change <= rtol * max(abs(value), np.finfo(float).tiny):
                meta = {
                    "x0": np.asarray(x0, dtype=float).tolist(),
                    "normal_field": state.b3,
                    "width": state.width,
                    "history": history,
                }
                stage.success("Trial bound", value=value, nodes=n)
                return TrialBound(value=value, quadrature_error=change, nodes=n, meta=meta)
        previous = value
        n *= 2

    raise QuadratureError(
        "trial-state quadrature did not converge",
        {"history": history, "rtol": rtol, "max_nodes": max_nodes},
    )
