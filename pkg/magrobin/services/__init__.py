"""magrobin - Services Module"""

from magrobin.services.commands import (
    COMMAND_PARAMS,
    CommandParams,
    build_params,
    parse_config_text,
    read_config_file,
)
from magrobin.services.run_service import ResultRecord, RunService
from magrobin.services.sweep_service import SweepResult, SweepService, parse_grid

__all__ = [
    "COMMAND_PARAMS",
    "CommandParams",
    "build_params",
    "parse_config_text",
    "read_config_file",
    "RunService",
    "ResultRecord",
    "SweepService",
    "SweepResult",
    "parse_grid",
]
