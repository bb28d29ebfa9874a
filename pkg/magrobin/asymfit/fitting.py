"""
Least-squares fitting of asymptotic expansions ``value ~ sum c_i h**p_i``.
"""

from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from magrobin.utils.errors import FitConditioning
from magrobin.utils.logger import format_fields, get_logger

logger = get_logger(__name__)

MAX_CONDITION = 1e12
EXPONENT_MATCH = 1e-12


@dataclass
class FitReport:
    """
    Fitted asymptotic expansion.

    Attributes:
        exponents: Strictly increasing powers of h.
        coefficients: Fitted coefficient per exponent.
        residual: Max relative residual over the samples.
        condition: Condition number of the column-scaled design matrix.
        samples: (h, value) pairs, sorted by h.
        diagnostics: Caller supplied context (grids, expectations, flags).
    """

    exponents: list[float]
    coefficients: list[float]
    residual: float
    condition: float
    samples: list[tuple[float, float]]
    diagnostics: dict[str, Any] = field(default_factory=dict)

    def coefficient(self, exponent: float) -> float:
        """Coefficient of ``h**exponent``."""
        for p, c in zip(self.exponents, self.coefficients):
            if abs(p - exponent) <= EXPONENT_MATCH * max(1.0, abs(exponent)):
                return c
        raise KeyError(f"exponent {exponent} not in fit basis {self.exponents}")

    def predict(self, h: float | np.ndarray) -> float | np.ndarray:
        h = np.asarray(h, dtype=float)
        total = sum(c * h**p for p, c in zip(self.exponents, self.coefficients))
        return float(total) if total.ndim == 0 else total

    def to_dict(self) -> dict[str, Any]:
        return {
            "exponents": list(self.exponents),
            "coefficients": list(self.coefficients),
            "residual": self.residual,
            "condition": self.condition,
            "samples": [list(s) for s in self.samples],
            "diagnostics": self.diagnostics,
        }


def fit_expansion(
    samples: Iterable[tuple[float, float]],
    exponents: Sequence[float],
    max_condition: float = MAX_CONDITION,
) -> FitReport:
    """
    Fit ``value ~ sum c_i h**p_i`` by column-scaled least squares.

    Samples are sorted by h first, so the result does not depend on the
    order in which they are given.

    Args:
        samples: (h, value) pairs with h > 0.
        exponents: Powers of h; sorted internally, duplicates rejected.
        max_condition: Largest accepted condition number.

    Returns:
        FitReport with coefficients aligned to the sorted exponents.

    Raises:
        FitConditioning: Too few samples, duplicate exponents, rank deficient
            or ill-conditioned design matrix.
    """
    pairs = sorted((float(h), float(v)) for h, v in samples)
    powers = sorted(float(p) for p in exponents)

    if len(set(powers)) != len(powers):
        raise FitConditioning("exponents must be distinct", {"exponents": powers})
    if len(pairs) < len(powers) + 1:
        raise FitConditioning(
            f"need at least {len(powers) + 1} samples for {len(powers)} exponents",
            {"samples": len(pairs), "exponents": powers},
        )

    h = np.array([p[0] for p in pairs])
    y = np.array([p[1] for p in pairs])
    if np.any(h <= 0.0) or not np.all(np.isfinite(y)):
        raise FitConditioning("samples need h > 0 and finite values", {"h": h, "values": y})

    design = h[:, None] ** np.array(powers)[None, :]
    scale = np.abs(design).max(axis=0)
    scaled = design / scale[None, :]
    solution, _, rank, singular = np.linalg.lstsq(scaled, y, rcond=None)
    condition = float(singular[0] / singular[-1]) if singular[-1] > 0 else float("inf")

    if rank < len(powers) or condition > max_condition:
        raise FitConditioning(
            "design matrix is rank deficient or ill-conditioned",
            {"rank": int(rank), "condition": condition, "exponents": powers},
        )

    coefficients = solution / scale
    fitted = design @ coefficients
    floor = max(np.abs(y).max() * np.finfo(float).eps, np.finfo(float).tiny)
    residual = float(np.max(np.abs(fitted - y) / np.maximum(np.abs(y), floor)))

    report = FitReport(
        exponents=powers,
        coefficients=[float(c) for c in coefficients],
        residual=residual,
        condition=condition,
        samples=pairs,
    )
    logger.debug(
        "fit | "
        + format_fields(n=len(pairs), condition=condition, residual=residual)
        + f" coefficients={report.coefficients}"
    )
    return report
