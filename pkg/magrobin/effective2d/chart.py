"""
Boundary charts with a gauge-normalized vector potential.

A chart of the boundary surface is thickened into a collar

    Phi~(y', t) = Phi(y') - t n(y'),   0 <= t <= h tau_max,

whose tangential metric is g = G - 2tK + t^2 L (g_33 = 1, g_3k = 0). The
pulled-back potential is put in the normal gauge (A~_3 = 0) by integrating
the magnetic 2-form along the normal:

    A^_k(y', t) = A~_k(y', 0) + int_0^t B(Phi~) . (d_t Phi~ x d_k Phi~) ds.
"""

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Iterator, Optional, Protocol, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid

from magrobin.geometry.curvature import forms_from_derivatives
from magrobin.geometry.localization import project_to_surface
from magrobin.geometry.surfaces import ParamSurface
from magrobin.utils.errors import CollarTooDeep, DimensionError, PotentialInconsistent
from magrobin.utils.logger import format_fields, get_logger

logger = get_logger(__name__)

TAU_CAP = 20.0
FOCAL_FRACTION = 0.5
DEFAULT_DEPTH = 0.3
CURL_TOL = 1e-8
CURL_STEP = 1e-3
ON_SURFACE_TOL = 1e-8
DUMP_COLUMNS = ("y1", "y2", "t", "g11", "g12", "g22", "A1", "A2")


class MagneticPotential(Protocol):
    def potential(self, points: np.ndarray) -> np.ndarray: ...

    def field(self, points: np.ndarray) -> np.ndarray: ...


class UniformField:
    """Constant field B with the symmetric potential A = (B x x) / 2."""

    def __init__(self, b: Sequence[float]):
        self.b = np.asarray(b, dtype=float)
        if self.b.shape != (3,):
            raise DimensionError("uniform field needs three components", {"b": self.b})

    def potential(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        return 0.5 * np.cross(np.broadcast_to(self.b, points.shape), points)

    def field(self, points: np.ndarray) -> np.ndarray:
        return np.broadcast_to(self.b, np.shape(points)).copy()


class CallbackPotential:
    """Potential and field given as callables on point arrays ``(..., 3)``."""

    def __init__(
        self,
        potential: Callable[[np.ndarray], np.ndarray],
        field: Callable[[np.ndarray], np.ndarray],
    ):
        self._potential = potential
        self._field = field

    def potential(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(self._potential(np.asarray(points, dtype=float)), dtype=float)

    def field(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(self._field(np.asarray(points, dtype=float)), dtype=float)


def _curl(potential: MagneticPotential, points: np.ndarray, step: float) -> np.ndarray:
    """Fourth-order central-difference curl at ``points`` of shape (n, 3)."""
    jac = np.empty(points.shape + (3,))
    for axis in range(3):
        e = np.zeros(3)
        e[axis] = step
        jac[..., axis] = (
            -potential.potential(points + 2 * e)
            + 8 * potential.potential(points + e)
            - 8 * potential.potential(points - e)
            + potential.potential(points - 2 * e)
        ) / (12 * step)
    # jac[..., i, j] = d_j A_i
    return np.stack(
        [
            jac[..., 2, 1] - jac[..., 1, 2],
            jac[..., 0, 2] - jac[..., 2, 0],
            jac[..., 1, 0] - jac[..., 0, 1],
        ],
        axis=-1,
    )


def check_potential(potential: MagneticPotential, points: np.ndarray) -> float:
    """
    Largest curl mismatch of ``potential`` at ``points``.

    Raises:
        PotentialInconsistent: |curl A - B| exceeds 1e-8 (relative to max(1, |B|)).
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    curl = _curl(potential, points, CURL_STEP)
    expected = potential.field(points)
    scale = np.maximum(1.0, np.linalg.norm(expected, axis=-1))
    mismatch = np.linalg.norm(curl - expected, axis=-1) / scale
    worst = int(np.argmax(mismatch))
    if mismatch[worst] > CURL_TOL:
        raise PotentialInconsistent(
            "curl of the vector potential does not match the field",
            {
                "point": points[worst],
                "curl": curl[worst],
                "field": expected[worst],
                "mismatch": float(mismatch[worst]),
            },
        )
    return float(mismatch.max())


@dataclass
class ChartData:
    """
    Sampled collar of a boundary chart.

    Node arrays are indexed ``[i, j]`` over the chart axes ``y1[i], y2[j]``
    and ``[i, j, s]`` over the transverse grid ``tau[s]`` (t = h tau).

    Attributes:
        y1, y2: Chart axes, uniform.
        tau: Scaled transverse grid on [0, tau_max].
        h: Semiclassical parameter.
        delta: Collar depth.
        g: Tangential metric ``(n1, n2, nt, 2, 2)``.
        g_inv: Its inverse.
        sqrt_g: ``|g|^(1/2)``.
        A: Normal-gauge tangential potential ``(n1, n2, nt, 2)``.
        A0: Boundary potential ``A[:, :, 0]``.
        kappa: Mean curvature on the chart grid.
        normal: Outward normal on the chart grid.
        points: Boundary points on the chart grid.
        meta: Construction parameters.
    """

    y1: np.ndarray
    y2: np.ndarray
    tau: np.ndarray
    h: float
    delta: float
    g: np.ndarray
    g_inv: np.ndarray
    sqrt_g: np.ndarray
    A: np.ndarray
    A0: np.ndarray
    kappa: np.ndarray
    normal: np.ndarray
    points: np.ndarray
    meta: dict[str, Any] = field(default_factory=dict)

    @property
    def shape(self) -> tuple[int, int]:
        return self.y1.size, self.y2.size

    @property
    def spacing(self) -> tuple[float, float]:
        return float(self.y1[1] - self.y1[0]), float(self.y2[1] - self.y2[0])

    @property
    def t(self) -> np.ndarray:
        return self.h * self.tau

    @property
    def mesh(self) -> np.ndarray:
        y1, y2 = np.meshgrid(self.y1, self.y2, indexing="ij")
        return np.stack([y1, y2], axis=-1)

    def gauge_shifted(self, grad_psi: Callable[[np.ndarray], np.ndarray]) -> "ChartData":
        """
        Chart after the tangential gauge change A -> A + grad psi.

        ``grad_psi`` maps chart points ``(..., 2)`` to ``(d_1 psi, d_2 psi)``;
        the normal gauge is preserved because psi does not depend on t.
        """
        shift = np.asarray(grad_psi(self.mesh), dtype=float)
        A = self.A + shift[:, :, None, :]
        meta = {**self.meta, "gauge_shifted": True}
        return replace(self, A=A, A0=A[:, :, 0, :].copy(), meta=meta)

    def rows(self) -> Iterator[tuple[float, ...]]:
        """Dump rows ``(y1, y2, t, g11, g12, g22, A1, A2)``, one per collar node."""
        t = self.t
        for i, a in enumerate(self.y1):
            for j, b in enumerate(self.y2):
                for s, depth in enumerate(t):
                    g = self.g[i, j, s]
                    pot = self.A[i, j, s]
                    yield (
                        float(a),
                        float(b),
                        float(depth),
                        float(g[0, 0]),
                        float(g[0, 1]),
                        float(g[1, 1]),
                        float(pot[0]),
                        float(pot[1]),
                    )


def write_chart_dump(chart: ChartData, path: Path | str) -> Path:
    """Write ``chart.rows()`` as a space-separated table with a header line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, delimiter=" ", lineterminator="\n")
        writer.writerow(DUMP_COLUMNS)
        for row in chart.rows():
            writer.writerow([f"{value:.12g}" for value in row])
    return path


def principal_bound(kappa: np.ndarray, gauss: np.ndarray) -> float:
    """Largest principal curvature modulus on a sample."""
    disc = np.sqrt(np.maximum(kappa**2 - gauss, 0.0))
    return float(np.max(np.abs(kappa) + disc))


def build_chart(
    surface: ParamSurface,
    center: Sequence[float],
    extent: float | Sequence[float],
    A: MagneticPotential,
    h: float,
    delta: Optional[float] = None,
    n: int | Sequence[int] = 41,
    n_t: int = 401,
) -> ChartData:
    """
    Sample the collar of the chart around a boundary point.

    Args:
        surface: Boundary surface.
        center: Boundary point x0; its best chart is used.
        extent: Chart half-widths around the chart coordinates of x0.
        A: Vector potential with ``curl A = B``.
        h: Semiclassical parameter.
        delta: Collar depth; default ``min(0.3 / max|k|, 0.3)`` with k the
            principal curvatures on the chart.
        n: Nodes per chart axis (boundary nodes included).
        n_t: Transverse nodes on ``[0, min(delta/h, 20)]``.

    Raises:
        CollarTooDeep: ``delta * max|k| >= 1/2`` or the collar Jacobian
            degenerates.
        PotentialInconsistent: ``curl A`` does not match ``B``.
        DegenerateChart: The chart is singular on the sampled patch.
    """
    n1, n2 = (n, n) if np.isscalar(n) else tuple(int(v) for v in n)
    e1, e2 = (extent, extent) if np.isscalar(extent) else tuple(float(v) for v in extent)
    if min(n1, n2) < 5 or n_t < 17:
        raise DimensionError("chart grid too coarse", {"n": (n1, n2), "n_t": n_t})

    projection = project_to_surface(surface, np.asarray(center, dtype=float))
    if projection.distance > ON_SURFACE_TOL * max(1.0, surface.diameter):
        raise DimensionError(
            "chart center is not on the surface",
            {"center": center, "distance": projection.distance},
        )
    chart, yc = projection.chart, projection.y

    y1 = yc[0] + np.linspace(-e1, e1, n1)
    y2 = yc[1] + np.linspace(-e2, e2, n2)
    mesh = np.stack(np.meshgrid(y1, y2, indexing="ij"), axis=-1)
    data = forms_from_derivatives(surface.derivatives(mesh, chart))

    k_max = principal_bound(data.kappa, data.gauss)
    if delta is None:
        delta = min(DEFAULT_DEPTH / k_max, DEFAULT_DEPTH) if k_max > 0.0 else DEFAULT_DEPTH
    if delta * k_max >= FOCAL_FRACTION:
        raise CollarTooDeep(
            "collar depth reaches the focal distance",
            {"delta": delta, "max_principal_curvature": k_max},
        )

    tau_max = min(delta / h, TAU_CAP)
    tau = np.linspace(0.0, tau_max, n_t)
    t = h * tau

    G, K, L = data.G, data.K, data.L
    g = (
        G[:, :, None]
        - 2.0 * t[:, None, None] * K[:, :, None]
        + (t**2)[:, None, None] * L[:, :, None]
    )
    det = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] * g[..., 1, 0]
    if not np.all(det > 0.0):
        raise CollarTooDeep("collar Jacobian vanishes inside the collar", {"delta": delta})
    g_inv = np.empty_like(g)
    g_inv[..., 0, 0] = g[..., 1, 1] / det
    g_inv[..., 1, 1] = g[..., 0, 0] / det
    g_inv[..., 0, 1] = g_inv[..., 1, 0] = -g[..., 0, 1] / det
    sqrt_g = np.sqrt(det)

    check_points = np.concatenate(
        [
            data.point[[0, -1, 0, -1, n1 // 2], [0, 0, -1, -1, n2 // 2]],
            data.point[[n1 // 2], [n2 // 2]] - 0.5 * delta * data.n[[n1 // 2], [n2 // 2]],
        ]
    )
    mismatch = check_potential(A, check_points)

    potential = np.empty((n1, n2, n_t, 2))
    normal_gauge = np.empty((n1, n2, n_t))
    for i in range(n1):
        point = data.point[i]
        nrm = data.n[i]
        collar = point[:, None, :] - t[None, :, None] * nrm[:, None, :]
        edges = (
            data.tangents[i][:, None, :, :]
            - t[None, :, None, None] * data.normal_derivatives[i][:, None, :, :]
        )
        pot = A.potential(collar)
        b = A.field(collar)
        tangential0 = np.einsum("jkc,jc->jk", edges[:, 0], pot[:, 0])
        flux = np.einsum("jsc,jskc->jsk", b, np.cross(-nrm[:, None, None, :], edges))
        potential[i] = tangential0[:, None, :] + cumulative_trapezoid(flux, t, axis=1, initial=0.0)
        normal_gauge[i] = cumulative_trapezoid(
            -np.einsum("jc,jsc->js", nrm, pot), t, axis=1, initial=0.0
        )

    meta = {
        "surface": type(surface).__name__,
        "chart": chart,
        "chart_name": surface.charts[chart].name,
        "center": np.asarray(projection.point).tolist(),
        "center_y": np.asarray(yc).tolist(),
        "extent": [e1, e2],
        "n": [n1, n2],
        "n_t": n_t,
        "tau_max": tau_max,
        "max_principal_curvature": k_max,
        "curl_mismatch": mismatch,
        "normal_gauge_max": float(np.abs(normal_gauge).max()),
    }
    logger.debug(
        "chart built | "
        + format_fields(h=h, delta=delta, n1=n1, n2=n2, n_t=n_t, tau_max=tau_max, k_max=k_max)
    )
    return ChartData(
        y1=y1,
        y2=y2,
        tau=tau,
        h=float(h),
        delta=float(delta),
        g=g,
        g_inv=g_inv,
        sqrt_g=sqrt_g,
        A=potential,
        A0=potential[:, :, 0, :].copy(),
        kappa=data.kappa,
        normal=data.n,
        points=data.point,
        meta=meta,
    )
