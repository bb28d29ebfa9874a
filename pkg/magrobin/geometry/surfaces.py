"""
Parametric surfaces.

Every surface evaluates ``Phi`` and its first and second chart derivatives
on arrays of chart points of shape ``(..., 2)``. Closed analytic surfaces
carry two charts of spherical type whose polar axes are orthogonal, so
every point is a regular point of at least one chart.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
from scipy.interpolate import RectBivariateSpline

from magrobin.utils.errors import DimensionError

# cyclic permutation moving the polar axis from z to x
_AXIS_X = np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])


class Derivatives(NamedTuple):
    """Phi and its chart derivatives, each of shape ``(..., 3)``."""

    phi: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    d11: np.ndarray
    d12: np.ndarray
    d22: np.ndarray


@dataclass(frozen=True)
class Chart:
    """Chart metadata: coordinate bounds and periodicity."""

    name: str
    bounds: tuple[tuple[float, float], tuple[float, float]]
    periodic: tuple[bool, bool] = (False, False)

    def sample(self, n1: int, n2: int) -> np.ndarray:
        """Cell-centered (non periodic) or left-aligned (periodic) sample grid."""
        axes = []
        for (lo, hi), periodic, n in zip(self.bounds, self.periodic, (n1, n2)):
            step = (hi - lo) / n
            offset = 0.0 if periodic else 0.5 * step
            axes.append(lo + offset + step * np.arange(n))
        y1, y2 = np.meshgrid(axes[0], axes[1], indexing="ij")
        return np.stack([y1, y2], axis=-1)

    def wrap(self, y: np.ndarray) -> np.ndarray:
        y = np.array(y, dtype=float)
        for axis, ((lo, hi), periodic) in enumerate(zip(self.bounds, self.periodic)):
            if periodic:
                y[..., axis] = lo + np.mod(y[..., axis] - lo, hi - lo)
        return y


class ParamSurface:
    """Base class of parametric surfaces with outward normals."""

    charts: Sequence[Chart] = ()
    closed: bool = False

    def derivatives(self, y: np.ndarray, chart: int = 0) -> Derivatives:
        raise NotImplementedError

    def point(self, y: np.ndarray, chart: int = 0) -> np.ndarray:
        return self.derivatives(y, chart).phi

    @property
    def center(self) -> np.ndarray:
        return np.zeros(3)

    @property
    def diameter(self) -> float:
        """Bounding-box diagonal of a coarse sample."""
        pts = self.point(self.charts[0].sample(64, 128), 0).reshape(-1, 3)
        return float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))

    def chart_quality(self, y: np.ndarray, chart: int) -> np.ndarray:
        """Area element |Phi_1 x Phi_2| relative to |Phi_1||Phi_2|."""
        d = self.derivatives(y, chart)
        cross = np.linalg.norm(np.cross(d.d1, d.d2), axis=-1)
        scale = np.linalg.norm(d.d1, axis=-1) * np.linalg.norm(d.d2, axis=-1)
        return cross / np.maximum(scale, np.finfo(float).tiny)

    def locate(self, x: np.ndarray) -> tuple[int, np.ndarray]:
        """Chart and chart point of the sample nearest to ``x``, best chart first."""
        x = np.asarray(x, dtype=float)
        best = None
        for index, chart in enumerate(self.charts):
            grid = chart.sample(64, 128)
            pts = self.point(grid, index)
            dist = np.linalg.norm(pts - x, axis=-1)
            flat = np.unravel_index(np.argmin(dist), dist.shape)
            y = grid[flat]
            score = (round(float(dist[flat]), 6), -float(self.chart_quality(y, index)))
            if best is None or score < best[0]:
                best = (score, index, y)
        return best[1], np.array(best[2])


class Ellipsoid(ParamSurface):
    """
    Ellipsoid ``x = c + diag(a, b, c) R s(theta, phi)`` with the unit-sphere
    parametrization ``s = (sin t cos p, sin t sin p, cos t)``.

    Chart 0 has its poles on the z axis, chart 1 on the x axis.
    """

    closed = True

    def __init__(self, a: float, b: float, c: float, center: Optional[Sequence[float]] = None):
        if min(a, b, c) <= 0.0:
            raise DimensionError("ellipsoid semi-axes must be positive", {"axes": (a, b, c)})
        self.axes = np.array([a, b, c], dtype=float)
        self._center = np.zeros(3) if center is None else np.asarray(center, dtype=float)
        self.rotations = (np.eye(3), _AXIS_X)
        bounds = ((0.0, np.pi), (0.0, 2.0 * np.pi))
        self.charts = (
            Chart("polar-z", bounds, (False, True)),
            Chart("polar-x", bounds, (False, True)),
        )

    @property
    def center(self) -> np.ndarray:
        return self._center

    @property
    def diameter(self) -> float:
        return float(2.0 * self.axes.max())

    def _linear(self, chart: int) -> np.ndarray:
        return self.axes[:, None] * self.rotations[chart]

    def derivatives(self, y: np.ndarray, chart: int = 0) -> Derivatives:
        y = np.asarray(y, dtype=float)
        t, p = y[..., 0], y[..., 1]
        st, ct, sp_, cp = np.sin(t), np.cos(t), np.sin(p), np.cos(p)
        zero = np.zeros_like(t)

        s = np.stack([st * cp, st * sp_, ct], axis=-1)
        s_t = np.stack([ct * cp, ct * sp_, -st], axis=-1)
        s_p = np.stack([-st * sp_, st * cp, zero], axis=-1)
        s_tp = np.stack([-ct * sp_, ct * cp, zero], axis=-1)
        s_pp = np.stack([-st * cp, -st * sp_, zero], axis=-1)

        lin = self._linear(chart)
        apply = lambda v: v @ lin.T  # noqa: E731
        return Derivatives(
            self._center + apply(s),
            apply(s_t),
            apply(s_p),
            apply(-s),
            apply(s_tp),
            apply(s_pp),
        )

    def chart_point(self, x: np.ndarray, chart: int) -> np.ndarray:
        """Chart coordinates of the radial projection of ``x``."""
        lin = self._linear(chart)
        s = np.linalg.solve(lin, np.asarray(x, dtype=float) - self._center)
        s = s / np.linalg.norm(s)
        theta = np.arccos(np.clip(s[2], -1.0, 1.0))
        phi = np.mod(np.arctan2(s[1], s[0]), 2.0 * np.pi)
        return np.array([theta, phi])

    def locate(self, x: np.ndarray) -> tuple[int, np.ndarray]:
        candidates = [self.chart_point(x, i) for i in range(len(self.charts))]
        chart = int(np.argmax([np.sin(y[0]) for y in candidates]))
        return chart, candidates[chart]

    def mean_curvature_exact(self, x: np.ndarray) -> float:
        """Closed-form mean curvature at a point of an axis-aligned ellipsoid."""
        a2 = self.axes**2
        q = np.asarray(x, dtype=float) - self._center
        s = np.sum(q**2 / a2**2)
        return float((a2.sum() - q @ q) / (2.0 * np.prod(a2) * s**1.5))


class Sphere(Ellipsoid):
    """Sphere of radius ``r``."""

    def __init__(self, r: float = 1.0, center: Optional[Sequence[float]] = None):
        super().__init__(r, r, r, center)
        self.radius = float(r)


class PlaneSurface(ParamSurface):
    """Flat patch ``Phi(y) = (y1, y2, 0)`` with normal e3."""

    closed = False

    def __init__(self, half_width: float = 1.0):
        w = float(half_width)
        self.charts = (Chart("plane", ((-w, w), (-w, w))),)

    @property
    def diameter(self) -> float:
        (lo, hi), _ = self.charts[0].bounds
        return float(np.sqrt(2.0) * (hi - lo))

    def derivatives(self, y: np.ndarray, chart: int = 0) -> Derivatives:
        y = np.asarray(y, dtype=float)
        zero = np.zeros(y.shape[:-1])
        one = np.ones(y.shape[:-1])
        vec = lambda a, b, c: np.stack([a, b, c], axis=-1)  # noqa: E731
        z = vec(zero, zero, zero)
        return Derivatives(
            vec(y[..., 0], y[..., 1], zero),
            vec(one, zero, zero),
            vec(zero, one, zero),
            z,
            z,
            z,
        )

    def locate(self, x: np.ndarray) -> tuple[int, np.ndarray]:
        return 0, np.asarray(x, dtype=float)[:2].copy()


class CallbackSurface(ParamSurface):
    """
    Surface given by a callable ``phi(y, chart) -> (..., 3)``.

    Derivatives are central finite differences.
    """

    def __init__(
        self,
        phi: Callable[[np.ndarray, int], np.ndarray],
        charts: Sequence[Chart],
        closed: bool = False,
        center: Optional[Sequence[float]] = None,
        step: float = 1e-4,
    ):
        self._phi = phi
        self.charts = tuple(charts)
        self.closed = closed
        self._center = np.zeros(3) if center is None else np.asarray(center, dtype=float)
        self.step = step

    @property
    def center(self) -> np.ndarray:
        return self._center

    def derivatives(self, y: np.ndarray, chart: int = 0) -> Derivatives:
        y = np.asarray(y, dtype=float)
        h = self.step
        e1 = np.array([h, 0.0])
        e2 = np.array([0.0, h])
        f = lambda z: np.asarray(self._phi(z, chart), dtype=float)  # noqa: E731
        f0 = f(y)
        fp1, fm1, fp2, fm2 = f(y + e1), f(y - e1), f(y + e2), f(y - e2)
        d1 = (fp1 - fm1) / (2.0 * h)
        d2 = (fp2 - fm2) / (2.0 * h)
        d11 = (fp1 - 2.0 * f0 + fm1) / h**2
        d22 = (fp2 - 2.0 * f0 + fm2) / h**2
        d12 = (f(y + e1 + e2) - f(y + e1 - e2) - f(y - e1 + e2) + f(y - e1 - e2)) / (4.0 * h * h)
        return Derivatives(f0, d1, d2, d11, d12, d22)


class TabulatedSurface(ParamSurface):
    """
    Single-chart surface interpolated from tabulated samples.

    The grid file starts with a header line ``n1 n2`` followed by
    ``n1 * n2`` rows ``y1 y2 x y z`` with y2 varying fastest.
    """

    def __init__(self, y1: np.ndarray, y2: np.ndarray, points: np.ndarray, center=None):
        self.y1 = np.asarray(y1, dtype=float)
        self.y2 = np.asarray(y2, dtype=float)
        points = np.asarray(points, dtype=float)
        if points.shape != (self.y1.size, self.y2.size, 3):
            raise DimensionError(
                "tabulated points must have shape (n1, n2, 3)", {"shape": points.shape}
            )
        self.splines = [
            RectBivariateSpline(self.y1, self.y2, points[..., i], kx=5, ky=5)
            for i in range(3)
        ]
        self._center = (
            points.reshape(-1, 3).mean(axis=0) if center is None else np.asarray(center)
        )
        self.charts = (
            Chart(
                "tabulated",
                ((float(self.y1[0]), float(self.y1[-1])), (float(self.y2[0]), float(self.y2[-1]))),
            ),
        )

    @classmethod
    def from_file(cls, path: Path | str) -> "TabulatedSurface":
        path = Path(path)
        with path.open("r", encoding="utf-8") as handle:
            header = handle.readline().split()
            if len(header) != 2:
                raise DimensionError("grid file header must be 'n1 n2'", {"path": str(path)})
            n1, n2 = int(header[0]), int(header[1])
            rows = np.loadtxt(handle, ndmin=2)
        if rows.shape != (n1 * n2, 5):
            raise DimensionError(
                "grid file rows must be 'y1 y2 x y z'",
                {"expected": (n1 * n2, 5), "found": rows.shape},
            )
        rows = rows.reshape(n1, n2, 5)
        return cls(rows[:, 0, 0], rows[0, :, 1], rows[..., 2:])

    @property
    def center(self) -> np.ndarray:
        return self._center

    def derivatives(self, y: np.ndarray, chart: int = 0) -> Derivatives:
        y = np.asarray(y, dtype=float)
        a, b = y[..., 0], y[..., 1]

        def ev(dx: int, dy: int) -> np.ndarray:
            return np.stack([s.ev(a, b, dx=dx, dy=dy) for s in self.splines], axis=-1)

        return Derivatives(ev(0, 0), ev(1, 0), ev(0, 1), ev(2, 0), ev(1, 1), ev(0, 2))


class ReparametrizedSurface(ParamSurface):
    """
    Affine chart change ``y = origin + matrix @ z`` of one chart of ``base``.
    """

    def __init__(
        self,
        base: ParamSurface,
        chart: int,
        origin: np.ndarray,
        matrix: np.ndarray,
        bounds: tuple[tuple[float, float], tuple[float, float]] = ((-1.0, 1.0), (-1.0, 1.0)),
    ):
        self.base = base
        self.base_chart = chart
        self.origin = np.asarray(origin, dtype=float)
        self.matrix = np.asarray(matrix, dtype=float)
        self.closed = False
        self.charts = (Chart("affine", bounds),)

    @property
    def center(self) -> np.ndarray:
        return self.base.center

    @property
    def diameter(self) -> float:
        return self.base.diameter

    def to_base(self, z: np.ndarray) -> np.ndarray:
        return self.origin + np.asarray(z, dtype=float) @ self.matrix.T

    def from_base(self, y: np.ndarray) -> np.ndarray:
        return np.linalg.solve(self.matrix, (np.asarray(y, dtype=float) - self.origin).T).T

    def derivatives(self, z: np.ndarray, chart: int = 0) -> Derivatives:
        d = self.base.derivatives(self.to_base(z), self.base_chart)
        a = self.matrix
        first = (d.d1, d.d2)
        second = ((d.d11, d.d12), (d.d12, d.d22))

        def tangent(col: int) -> np.ndarray:
            return a[0, col] * first[0] + a[1, col] * first[1]

        def hess(c1: int, c2: int) -> np.ndarray:
            total = 0.0
            for i in range(2):
                for j in range(2):
                    total = total + a[i, c1] * a[j, c2] * second[i][j]
            return total

        return Derivatives(d.phi, tangent(0), tangent(1), hess(0, 0), hess(0, 1), hess(1, 1))

    def locate(self, x: np.ndarray) -> tuple[int, np.ndarray]:
        _, y = self.base.locate(x)
        return 0, self.from_base(y)


def surface_from_spec(kind: str, args: tuple) -> ParamSurface:
    """Surface for a validated ``(kind, args)`` specification."""
    if kind == "sphere":
        return Sphere(*args)
    if kind == "ellipsoid":
        return Ellipsoid(*args)
    if kind == "plane":
        return PlaneSurface()
    if kind == "file":
        return TabulatedSurface.from_file(args[0])
    raise DimensionError(f"unknown surface kind {kind!r}")
