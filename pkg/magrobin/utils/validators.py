"""
Input Validation Utilities for magrobin

Validation of user supplied parameters (h lists, field strengths, ranges,
surface specifications) with detailed error messages and sanitization.
"""

import re
from dataclasses import dataclass
from typing import Any, Optional, Sequence

import numpy as np


class ValidationError(Exception):
    """Custom exception for validation errors."""

    def __init__(self, field: str, message: str, value: Optional[Any] = None):
        self.field = field
        self.message = message
        self.value = value
        super().__init__(f"{field}: {message}")

    def to_dict(self) -> dict:
        return {
            "type": "ValidationError",
            "field": self.field,
            "message": self.message,
            "value": None if self.value is None else str(self.value),
        }


@dataclass
class ValidationResult:
    """Result of a validation check."""

    is_valid: bool
    value: Any
    error: Optional[str] = None

    def unwrap(self, field: str) -> Any:
        """Return the value or raise ValidationError for ``field``."""
        if not self.is_valid:
            raise ValidationError(field, self.error or "invalid value", self.value)
        return self.value


def parse_float_list(text: str) -> list[float]:
    """Parse ``"0.04,0.02, 0.01"`` into floats. Raises ValueError."""
    items = [item for item in re.split(r"[,\s]+", text.strip()) if item]
    return [float(item) for item in items]


def validate_h_list(
    values: Sequence[float] | str, min_count: int = 2, max_h: float = 1.0
) -> ValidationResult:
    """
    Validate a list of semiclassical parameters.

    The list must hold at least ``min_count`` distinct values in (0, max_h].
    It is returned sorted in decreasing order.

    Args:
        values: Values or comma separated text.
        min_count: Minimum number of values.
        max_h: Largest admissible value.

    Returns:
        ValidationResult with the sorted list or error message.
    """
    if isinstance(values, str):
        try:
            values = parse_float_list(values)
        except ValueError:
            return ValidationResult(False, values, "h list must be comma separated numbers")

    values = [float(v) for v in values]
    if len(values) < min_count:
        return ValidationResult(
            False, values, f"at least {min_count} values of h are required"
        )
    if any(not np.isfinite(v) or v <= 0.0 or v > max_h for v in values):
        return ValidationResult(False, values, f"every h must lie in (0, {max_h}]")
    if len(set(values)) != len(values):
        return ValidationResult(False, values, "h values must be distinct")

    return ValidationResult(True, sorted(values, reverse=True))


def validate_range(
    value: float,
    min_val: Optional[float] = None,
    max_val: Optional[float] = None,
    open_min: bool = False,
    open_max: bool = False,
) -> ValidationResult:
    """
    Validate that a number lies in a (half) open or closed interval.

    Args:
        value: Number to validate.
        min_val: Lower bound or None.
        max_val: Upper bound or None.
        open_min: Exclude the lower bound.
        open_max: Exclude the upper bound.

    Returns:
        ValidationResult with the value or error message.
    """
    try:
        value = float(value)
    except (TypeError, ValueError):
        return ValidationResult(False, value, "Value must be a number")

    if not np.isfinite(value):
        return ValidationResult(False, value, "Value must be finite")

    if min_val is not None:
        if value < min_val or (open_min and value == min_val):
            bracket = ">" if open_min else ">="
            return ValidationResult(False, value, f"Value must be {bracket} {min_val}")

    if max_val is not None:
        if value > max_val or (open_max and value == max_val):
            bracket = "<" if open_max else "<="
            return ValidationResult(False, value, f"Value must be {bracket} {max_val}")

    return ValidationResult(True, value)


def validate_step_range(text: str, max_points: int = 100_000) -> ValidationResult:
    """
    Validate a ``start:stop:step`` range such as ``0:12:0.1``.

    Both ends are included when ``stop`` is on the step lattice.

    Returns:
        ValidationResult with a list of floats or error message.
    """
    if not text:
        return ValidationResult(False, "", "Range is required")

    parts = text.strip().split(":")
    if len(parts) != 3:
        return ValidationResult(False, text, "Range must look like start:stop:step")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        return ValidationResult(False, text, "Range bounds must be numbers")

    if step <= 0.0 or stop < start:
        return ValidationResult(False, text, "Range needs step > 0 and stop >= start")

    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    if count > max_points:
        return ValidationResult(False, text, f"Range has more than {max_points} points")

    values = [round(start + i * step, 12) for i in range(count)]
    return ValidationResult(True, values)


_SURFACE_PATTERN = re.compile(r"^\s*(sphere|ellipsoid|plane|file)\s*\{(.*)\}\s*$", re.I)


def validate_surface_spec(spec: str) -> ValidationResult:
    """
    Validate a surface specification.

    Accepted forms are ``sphere{r}``, ``ellipsoid{a,b,c}``, ``plane{}`` and
    ``file{path}`` for tabulated chart samples.

    Returns:
        ValidationResult with a ``(kind, args)`` tuple or error message.
    """
    if not spec:
        return ValidationResult(False, "", "Surface specification is required")

    match = _SURFACE_PATTERN.match(spec)
    if not match:
        return ValidationResult(
            False, spec, "Surface must be sphere{r}, ellipsoid{a,b,c}, plane{} or file{path}"
        )

    kind = match.group(1).lower()
    body = match.group(2).strip()

    if kind == "file":
        if not body:
            return ValidationResult(False, spec, "file{} needs a path")
        return ValidationResult(True, (kind, (body,)))

    try:
        args = tuple(parse_float_list(body)) if body else ()
    except ValueError:
        return ValidationResult(False, spec, "Surface parameters must be numbers")

    expected = {"sphere": (0, 1), "ellipsoid": (3, 3), "plane": (0, 0)}[kind]
    if not expected[0] <= len(args) <= expected[1]:
        return ValidationResult(False, spec, f"{kind} takes {expected[1]} parameter(s)")
    if any(a <= 0.0 for a in args):
        return ValidationResult(False, spec, "Surface lengths must be positive")

    if kind == "sphere" and not args:
        args = (1.0,)
    return ValidationResult(True, (kind, args))


def validate_vector(text: str | Sequence[float], dim: int = 3) -> ValidationResult:
    """Validate a vector given as text ``"0,0,1"`` or a sequence."""
    try:
        values = parse_float_list(text) if isinstance(text, str) else [float(v) for v in text]
    except (TypeError, ValueError):
        return ValidationResult(False, text, "Vector components must be numbers")
    if len(values) != dim:
        return ValidationResult(False, text, f"Vector must have {dim} components")
    if not all(np.isfinite(values)):
        return ValidationResult(False, text, "Vector components must be finite")
    return ValidationResult(True, tuple(values))
