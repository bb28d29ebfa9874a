"""magrobin - Utilities Module"""

from magrobin.utils.errors import SpectralError
from magrobin.utils.logger import StageLogger, format_fields, get_logger, setup_logging
from magrobin.utils.validators import (
    ValidationError,
    ValidationResult,
    validate_h_list,
    validate_range,
    validate_step_range,
    validate_surface_spec,
    validate_vector,
)

__all__ = [
    "setup_logging",
    "get_logger",
    "format_fields",
    "StageLogger",
    "SpectralError",
    "ValidationError",
    "ValidationResult",
    "validate_h_list",
    "validate_range",
    "validate_step_range",
    "validate_surface_spec",
    "validate_vector",
]
