"""
Discrete effective boundary operator.

The sesquilinear form

    sum_kl alpha_kl (P_k v) conj(P_l v) + 2 Re sum_k beta^_k (P_k v) conj(v)
        + (gamma + mu - h^2 rho) |v|^2,      P_k = -i h d_k - A0_k,

is discretized on the chart grid with Dirichlet conditions on the chart
boundary. Every cell contributes at each of its four corners, where P_k is
the magnetic difference along the cell edge leaving that corner:

    (P v)_p = -(i h / dy) (exp(-i theta_pq) v_q - v_p),
    theta_pq = (y_q - y_p) (A0(p) + A0(q)) / (2 h).

The corner form is gauge covariant: multiplying v by exp(i psi/h) and shifting
the edge phases by the increments of psi leaves it unchanged. The Hermitian
matrix H = X + iY is solved as the real symmetric system [[X, -Y], [Y, X]],
whose eigenvalues are those of H, each twice.
"""

from typing import Literal

import numpy as np
import scipy.sparse as sp

from magrobin.effective2d.chart import ChartData
from magrobin.effective2d.coefficients import EffectiveCoefficients
from magrobin.eigsolve import (
    Spectrum,
    SymmetricOperatorPair,
    lower_bound_shift,
    solve_dense,
    solve_sparse,
)
from magrobin.utils.errors import AssemblyError, DimensionError, SolverError
from magrobin.utils.logger import format_fields, get_logger

logger = get_logger(__name__)

HERMITIAN_TOL = 1e-12
CLUSTER_RTOL = 1e-9
RANK_RTOL = 1e-6


def _corners(n1: int, n2: int):
    """Corner node, edge neighbours and edge orientation of every cell corner."""
    ci, cj = np.meshgrid(np.arange(n1 - 1), np.arange(n2 - 1), indexing="ij")
    ci, cj = ci.ravel(), cj.ravel()
    parts = []
    for di in (0, 1):
        for dj in (0, 1):
            pi, pj = ci + di, cj + dj
            parts.append(
                (
                    pi,
                    pj,
                    (ci + 1 - di, pj, np.full(pi.size, 1 - 2 * di)),
                    (pi, cj + 1 - dj, np.full(pi.size, 1 - 2 * dj)),
                )
            )
    pi = np.concatenate([p[0] for p in parts])
    pj = np.concatenate([p[1] for p in parts])
    edges = []
    for axis in (2, 3):
        qi = np.concatenate([p[axis][0] for p in parts])
        qj = np.concatenate([p[axis][1] for p in parts])
        sign = np.concatenate([p[axis][2] for p in parts])
        edges.append((qi, qj, sign))
    return pi, pj, edges


def _interior_index(n1: int, n2: int) -> np.ndarray:
    index = -np.ones((n1, n2), dtype=int)
    index[1:-1, 1:-1] = np.arange((n1 - 2) * (n2 - 2)).reshape(n1 - 2, n2 - 2)
    return index


def _sparse(rows, cols, values, shape) -> sp.csr_matrix:
    keep = cols >= 0
    return sp.csr_matrix((values[keep], (rows[keep], cols[keep])), shape=shape)


def effective_matrix(
    coeffs: EffectiveCoefficients, chart: ChartData
) -> tuple[sp.csr_matrix, float]:
    """
    Hermitian matrix of the effective form on the interior nodes.

    Returns:
        ``(H, cell_area)``; the mass matrix is ``cell_area`` times identity.

    Raises:
        DimensionError: Coefficients and chart grids differ.
    """
    n1, n2 = chart.shape
    if coeffs.mu.shape != (n1, n2):
        raise DimensionError(
            "coefficients and chart live on different grids",
            {"coefficients": coeffs.mu.shape, "chart": (n1, n2)},
        )
    if min(n1, n2) < 3:
        raise DimensionError("chart has no interior nodes", {"n": (n1, n2)})

    h = chart.h
    spacing = chart.spacing
    axes = (chart.y1, chart.y2)
    index = _interior_index(n1, n2)
    size = (n1 - 2) * (n2 - 2)

    pi, pj, edges = _corners(n1, n2)
    count = pi.size
    rows = np.arange(count)
    p_col = index[pi, pj]
    shape = (count, size)

    select = _sparse(rows, p_col, np.ones(count), shape)
    diffs = []
    for axis, (qi, qj, sign) in enumerate(edges):
        step = sign * spacing[axis]
        mean = 0.5 * (chart.A0[pi, pj, axis] + chart.A0[qi, qj, axis])
        theta = step * mean / h
        scale = -1j * h / step
        q_part = _sparse(rows, index[qi, qj], scale * np.exp(-1j * theta), shape)
        p_part = _sparse(rows, p_col, -scale * np.ones(count, dtype=complex), shape)
        diffs.append((q_part + p_part).tocsr())

    weight = 0.25 * spacing[0] * spacing[1]
    alpha = coeffs.alpha[pi, pj]
    beta_hat = coeffs.beta_hat[pi, pj]
    scalar = coeffs.potential[pi, pj]

    H = select.T @ sp.diags(weight * scalar) @ select
    for k in range(2):
        for l in range(2):
            H = H + diffs[l].conj().T @ sp.diags(weight * alpha[:, k, l]) @ diffs[k]
        mixed = select.T @ sp.diags(weight * beta_hat[:, k]) @ diffs[k]
        H = H + mixed + mixed.conj().T
    H = sp.csr_matrix(H)

    scale = abs(H).max()
    defect = abs(H - H.conj().T).max() / scale if scale > 0 else 0.0
    if defect > HERMITIAN_TOL:
        raise AssemblyError("effective form is not Hermitian", {"asymmetry": float(defect)})
    return H, 4.0 * weight


def doubled_pair(H: sp.spmatrix, cell_area: float, grid: dict) -> SymmetricOperatorPair:
    """Real symmetric pair of ``H`` acting on ``(Re v, Im v)``."""
    real, imag = sp.csr_matrix(H.real), sp.csr_matrix(H.imag)
    stiffness = sp.bmat([[real, -imag], [imag, real]], format="csr")
    mass = sp.identity(stiffness.shape[0], format="csr") * cell_area
    return SymmetricOperatorPair(stiffness, mass, grid)


def _fold(spectrum: Spectrum, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, list[int]]:
    """Eigenpairs of H from the doubled spectrum, multiplicity by complex rank."""
    values = spectrum.eigenvalues
    vectors = spectrum.eigenvectors
    complex_vectors = vectors[:n] + 1j * vectors[n:]

    folded, basis, residuals, multiplicity = [], [], [], []
    start = 0
    while start < values.size:
        stop = start + 1
        while stop < values.size and abs(values[stop] - values[start]) <= CLUSTER_RTOL * max(
            1.0, abs(values[start])
        ):
            stop += 1
        block = complex_vectors[:, start:stop]
        u, s, _ = np.linalg.svd(block, full_matrices=False)
        rank = int(np.count_nonzero(s > RANK_RTOL * s[0]))
        value = float(values[start:stop].mean())
        res = float(spectrum.residuals[start:stop].max())
        for column in range(rank):
            folded.append(value)
            basis.append(u[:, column])
            residuals.append(res)
        multiplicity.append(rank)
        start = stop
    return np.array(folded), np.stack(basis, axis=1), np.array(residuals), multiplicity


def effective_spectrum(
    coeffs: EffectiveCoefficients,
    chart: ChartData,
    k: int = 1,
    solver: Literal["sparse", "dense"] = "sparse",
    seed: int = 0,
) -> Spectrum:
    """
    Lowest ``k`` eigenvalues of the effective operator on the chart.

    The shift-invert shift is the corner-wise completed-square bound
    ``min(gamma + mu - h^2 rho - beta^T alpha^-1 beta)``, which lies below the
    discrete spectrum.

    Raises:
        AssemblyError: The assembled form is not Hermitian.
        SolverError: Fewer than ``k`` distinct eigenpairs were resolved.
    """
    H, cell_area = effective_matrix(coeffs, chart)
    n = H.shape[0]
    grid = {
        "n1": chart.shape[0],
        "n2": chart.shape[1],
        "spacing": list(chart.spacing),
        "h": chart.h,
        "doubled": True,
    }
    pair = doubled_pair(H, cell_area, grid)
    bound = coeffs.form_lower_bound()[1:-1, 1:-1]
    shift = lower_bound_shift(bound)

    requested = 2 * k + 2
    for _ in range(2):
        requested = min(requested, pair.n - 2)
        if solver == "dense":
            raw = solve_dense(pair, requested)
        else:
            raw = solve_sparse(pair, requested, shift, seed=seed)
        values, vectors, residuals, multiplicity = _fold(raw, n)
        if values.size >= k:
            break
        requested *= 2
    else:
        raise SolverError(
            "doubled system did not resolve enough eigenpairs",
            {"k": k, "resolved": int(values.size), "requested": requested},
        )

    meta = dict(raw.meta)
    meta.update(
        {
            "shift": float(shift),
            "requested_doubled": requested,
            "multiplicities": multiplicity,
            "interior_nodes": n,
        }
    )
    logger.debug(
        "effective spectrum | "
        + format_fields(h=chart.h, n=n, k=k, ground=float(values[0]), shift=float(shift))
    )
    return Spectrum(values[:k], vectors[:, :k], residuals[:k], meta)


def _diff4(values: np.ndarray, step: float, axis: int) -> np.ndarray:
    """Fourth-order central differences, second order in the two edge layers."""
    out = np.gradient(values, step, axis=axis, edge_order=2)
    v = np.moveaxis(values, axis, 0)
    o = np.moveaxis(out, axis, 0)
    if v.shape[0] >= 5:
        o[2:-2] = (v[:-4] - 8.0 * v[1:-3] + 8.0 * v[3:-1] - v[4:]) / (12.0 * step)
    return out


def boundary_normal_field(chart: ChartData) -> np.ndarray:
    """B . n on the chart grid, ``(d_1 A0_2 - d_2 A0_1) / |G|^(1/2)``."""
    h1, h2 = chart.spacing
    curl = _diff4(chart.A0[..., 1], h1, 0) - _diff4(chart.A0[..., 0], h2, 1)
    return curl / chart.sqrt_g[:, :, 0]
