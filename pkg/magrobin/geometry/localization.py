"""Closest-point projection and the localization potential near the boundary."""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from magrobin.geometry.curvature import curvature_at
from magrobin.geometry.energy import FieldLike, normal_field
from magrobin.geometry.surfaces import ParamSurface
from magrobin.utils.errors import DegenerateChart, ProjectionFailed

ORTHOGONALITY_TOL = 1e-8


@dataclass
class Projection:
    point: np.ndarray
    chart: int
    y: np.ndarray
    distance: float


def project_to_surface(surface: ParamSurface, x: np.ndarray) -> Projection:
    """
    Closest point p(x) on the surface by Gauss-Newton in the best chart.

    Raises:
        ProjectionFailed: The iteration did not converge to a point where
            x - p(x) is normal to the surface.
    """
    x = np.asarray(x, dtype=float)
    chart, y0 = surface.locate(x)

    def residual(y):
        return surface.point(y, chart) - x

    def jacobian(y):
        d = surface.derivatives(y, chart)
        return np.stack([d.d1, d.d2], axis=-1)

    result = least_squares(
        residual, y0, jac=jacobian, method="lm", xtol=1e-14, ftol=1e-14, gtol=1e-14
    )
    if result.status <= 0:
        raise ProjectionFailed(
            "closest-point iteration failed", {"x": x, "message": result.message}
        )

    y = surface.charts[chart].wrap(result.x)
    d = surface.derivatives(y, chart)
    offset = x - d.phi
    distance = float(np.linalg.norm(offset))
    for tangent in (d.d1, d.d2):
        if abs(offset @ tangent) > ORTHOGONALITY_TOL * (1.0 + distance) * np.linalg.norm(tangent):
            raise ProjectionFailed(
                "projection residual is not normal to the surface",
                {"x": x, "point": d.phi, "distance": distance},
            )
    return Projection(point=d.phi, chart=chart, y=y, distance=distance)


def localization_potential(
    surface: ParamSurface,
    B: FieldLike,
    h: float,
    sigma: float,
    x: np.ndarray,
    c_tilde: float = 0.0,
) -> float:
    """
    Localization potential U_h at an interior point x.

    Zero when dist(x, boundary) >= h^(2/5); otherwise

        -h^(2 - 2/sigma) + |B.n(p)| h - 2 kappa(p) h^(2 - 1/sigma) - c_tilde h^(6/5)

    at the projection p = p(x). With c_tilde = 0 the value is diagnostic;
    a supplied c_tilde makes it the lower-bound potential.

    Raises:
        ProjectionFailed: Projection did not converge.
    """
    projection = project_to_surface(surface, x)
    if projection.distance >= h**0.4:
        return 0.0
    try:
        data = curvature_at(surface, projection.y, projection.chart)
    except DegenerateChart as exc:
        raise ProjectionFailed("projection landed on a chart singularity", exc.details) from exc
    bn = abs(float(normal_field(B, data)))
    return float(
        -(h ** (2.0 - 2.0 / sigma))
        + bn * h
        - 2.0 * float(data.kappa) * h ** (2.0 - 1.0 / sigma)
        - c_tilde * h**1.2
    )
