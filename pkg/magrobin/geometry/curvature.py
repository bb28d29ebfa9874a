"""
Fundamental forms and mean curvature.

With the outward unit normal n the forms are

    G_ij = <Phi_i, Phi_j>,  K_ij = <Phi_i, n_j>,  L_ij = <n_i, n_j>,

and the mean curvature is kappa = tr(G^-1 K) / 2, which equals 1 on the
unit sphere.
"""

from dataclasses import dataclass

import numpy as np

from magrobin.geometry.surfaces import Derivatives, ParamSurface
from magrobin.utils.errors import DegenerateChart

RANK_TOL = 1e-10


@dataclass
class CurvatureData:
    """Fundamental forms, curvatures and normal at chart points.

    Arrays carry the leading shape of the evaluated chart points.
    """

    G: np.ndarray
    K: np.ndarray
    L: np.ndarray
    kappa: np.ndarray
    gauss: np.ndarray
    n: np.ndarray
    point: np.ndarray
    tangents: np.ndarray
    normal_derivatives: np.ndarray
    area: np.ndarray


def _dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.einsum("...i,...i->...", a, b)


def forms_from_derivatives(d: Derivatives, strict: bool = True) -> CurvatureData:
    """
    Fundamental forms from chart derivatives.

    Args:
        d: Phi and its derivatives.
        strict: Raise on rank-deficient points; otherwise their curvature
            entries become NaN.

    Raises:
        DegenerateChart: dPhi has rank below two at some point (strict only).
    """
    cross = np.cross(d.d1, d.d2)
    area = np.linalg.norm(cross, axis=-1)
    scale = np.linalg.norm(d.d1, axis=-1) * np.linalg.norm(d.d2, axis=-1)
    degenerate = ~(area > RANK_TOL * scale)
    if strict and np.any(degenerate):
        raise DegenerateChart(
            "chart differential has rank below two",
            {"points": int(np.count_nonzero(degenerate)), "min_area": float(area.min())},
        )
    safe_area = np.where(degenerate, np.nan, area)
    n = cross / safe_area[..., None]

    dn_raw = (
        np.cross(d.d11, d.d2) + np.cross(d.d1, d.d12),
        np.cross(d.d12, d.d2) + np.cross(d.d1, d.d22),
    )
    dn = tuple(
        (v - _dot(n, v)[..., None] * n) / safe_area[..., None] for v in dn_raw
    )

    tangents = (d.d1, d.d2)
    shape = area.shape + (2, 2)
    G = np.empty(shape)
    K = np.empty(shape)
    L = np.empty(shape)
    for i in range(2):
        for j in range(2):
            G[..., i, j] = _dot(tangents[i], tangents[j])
            K[..., i, j] = _dot(tangents[i], dn[j])
            L[..., i, j] = _dot(dn[i], dn[j])
    K = 0.5 * (K + np.swapaxes(K, -1, -2))

    det_g = G[..., 0, 0] * G[..., 1, 1] - G[..., 0, 1] ** 2
    g_inv = np.empty(shape)
    g_inv[..., 0, 0] = G[..., 1, 1] / det_g
    g_inv[..., 1, 1] = G[..., 0, 0] / det_g
    g_inv[..., 0, 1] = g_inv[..., 1, 0] = -G[..., 0, 1] / det_g
    shape_op = g_inv @ K
    kappa = 0.5 * (shape_op[..., 0, 0] + shape_op[..., 1, 1])
    gauss = shape_op[..., 0, 0] * shape_op[..., 1, 1] - shape_op[..., 0, 1] * shape_op[..., 1, 0]

    return CurvatureData(
        G=G,
        K=K,
        L=L,
        kappa=kappa,
        gauss=gauss,
        n=n,
        point=d.phi,
        tangents=np.stack(tangents, axis=-2),
        normal_derivatives=np.stack(dn, axis=-2),
        area=area,
    )


def curvature_at(surface: ParamSurface, y, chart: int = 0) -> CurvatureData:
    """
    Fundamental forms, mean curvature and normal at chart point(s) ``y``.

    Raises:
        DegenerateChart: dPhi has rank below two.
    """
    return forms_from_derivatives(surface.derivatives(np.asarray(y, dtype=float), chart))


def curvature_fields(surface: ParamSurface, y, chart: int = 0) -> CurvatureData:
    """Like ``curvature_at`` but marks degenerate points with NaN."""
    return forms_from_derivatives(
        surface.derivatives(np.asarray(y, dtype=float), chart), strict=False
    )


def weingarten_defect(data: CurvatureData) -> np.ndarray:
    """max |L - K G^-1 K| per point."""
    rhs = data.K @ np.linalg.inv(data.G) @ data.K
    return np.abs(data.L - rhs).max(axis=(-1, -2))


def curvature_at_point(surface: ParamSurface, x: np.ndarray) -> CurvatureData:
    """Curvature data at a surface point, evaluated in its best chart."""
    chart, y = surface.locate(x)
    return curvature_at(surface, y, chart)
