"""
Parameter sweeps over a grid of command configurations.

Every cell is an independent run in its own ``cell_NNN`` directory. Cells
run in a bounded process pool; the aggregate ``sweep.csv`` and ``sweep.json``
are written once, after every cell has settled, in grid order.
"""

import itertools
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from magrobin.config.settings import get_settings
from magrobin.services.commands import build_params
from magrobin.services.run_service import (
    EXIT_OK,
    EXIT_SPECTRAL,
    RunService,
)
from magrobin.services.writers import (
    COMPUTED,
    DERIVED,
    INPUT,
    PRINTED,
    Column,
    Table,
    write_csv,
    write_json,
)
from magrobin.utils.logger import StageLogger, get_logger
from magrobin.utils.validators import ValidationError

logger = get_logger(__name__)


@dataclass
class SweepCell:
    index: int
    values: dict[str, str]
    params: dict[str, Any]

    @property
    def directory(self) -> str:
        return f"cell_{self.index:03d}"


@dataclass
class SweepResult:
    """Per-cell outcomes in grid order."""

    command: str
    keys: list[str]
    cells: list[dict[str, Any]] = field(default_factory=list)

    @property
    def failed(self) -> int:
        return sum(1 for cell in self.cells if not cell["success"])

    @property
    def exit_code(self) -> int:
        if self.cells and self.failed == len(self.cells):
            return EXIT_SPECTRAL
        return EXIT_OK


def parse_grid(items: list[str]) -> dict[str, list[str]]:
    """
    Parse ``key=v1,v2,...`` items into an ordered grid.

    Raises:
        ValidationError: Malformed item, repeated key or empty value list.
    """
    grid: dict[str, list[str]] = {}
    for item in items:
        if "=" not in item:
            raise ValidationError("grid", "expected key=v1,v2,...", item)
        key, text = (part.strip() for part in item.split("=", 1))
        key = key.replace("-", "_")
        values = [v.strip() for v in text.split(",") if v.strip()]
        if not key or not values:
            raise ValidationError("grid", "empty key or value list", item)
        if key in grid:
            raise ValidationError("grid", f"repeated key {key!r}", item)
        grid[key] = values
    return grid


def expand_grid(command: str, base: dict[str, Any], grid: dict[str, list[str]]) -> list[SweepCell]:
    """
    Cartesian product of the grid, first key slowest, validated cell by cell.

    Raises:
        ValidationError: Empty grid or an invalid cell.
    """
    if not grid:
        raise ValidationError("grid", "sweep needs at least one key=values item")
    keys = list(grid)
    cells = []
    for index, combo in enumerate(itertools.product(*(grid[k] for k in keys))):
        values = dict(zip(keys, combo))
        params = {**base, **values}
        try:
            build_params(command, params)
        except ValidationError as e:
            raise ValidationError(e.field, f"cell {index}: {e.message}", e.value) from e
        cells.append(SweepCell(index, values, params))
    return cells


def _summary_provenance(key: str) -> str:
    if key.startswith("fixture_"):
        return DERIVED
    if key == "expected":
        return PRINTED
    return COMPUTED


def _run_cell(command: str, cell: SweepCell, output: str, seed: int) -> dict[str, Any]:
    """Worker entry point; runs in a child process when workers > 1."""
    record = RunService(Path(output) / cell.directory).run(command, cell.params, seed)
    scalars = {
        key: value
        for key, value in record.summary.items()
        if isinstance(value, (int, float, bool)) and not isinstance(value, bool)
    }
    return {
        "index": cell.index,
        "values": cell.values,
        "directory": cell.directory,
        "success": record.success,
        "exit_code": record.exit_code,
        "summary": scalars,
        "error": record.error,
        "wall_time": record.wall_time,
    }


class SweepService:
    """Runs a command over a parameter grid and aggregates the cells."""

    def __init__(self, output: Path, workers: Optional[int] = None):
        self.output = Path(output)
        self.workers = workers or get_settings().workers

    def run(
        self,
        command: str,
        base: dict[str, Any],
        grid: dict[str, list[str]],
        seed: int = 0,
    ) -> SweepResult:
        """
        Execute every grid cell and write the aggregate.

        Raises:
            ValidationError: Empty grid or invalid cell (before any compute).
        """
        cells = expand_grid(command, base, grid)
        stage = StageLogger(f"sweep.{command}")
        stage.start("Starting sweep", cells=len(cells), workers=self.workers)

        outcomes: dict[int, dict[str, Any]] = {}
        if self.workers == 1:
            for cell in cells:
                outcomes[cell.index] = _run_cell(command, cell, str(self.output), seed)
                stage.progress("cell settled", len(outcomes), len(cells), index=cell.index)
        else:
            with ProcessPoolExecutor(max_workers=self.workers) as ex:
                fut2cell = {
                    ex.submit(_run_cell, command, cell, str(self.output), seed): cell
                    for cell in cells
                }
                for fut in as_completed(fut2cell):
                    cell = fut2cell[fut]
                    try:
                        outcomes[cell.index] = fut.result()
                    except Exception as e:
                        stage.warning("worker failed", index=cell.index, error=repr(e))
                        outcomes[cell.index] = {
                            "index": cell.index,
                            "values": cell.values,
                            "directory": cell.directory,
                            "success": False,
                            "exit_code": EXIT_SPECTRAL,
                            "summary": {},
                            "error": {"type": type(e).__name__, "message": str(e)},
                            "wall_time": 0.0,
                        }
                    stage.progress("cell settled", len(outcomes), len(cells), index=cell.index)

        result = SweepResult(command, list(grid), [outcomes[i] for i in sorted(outcomes)])
        self.save(result)
        if result.failed:
            stage.warning("cells failed", failed=result.failed, total=len(cells))
        stage.success("Sweep completed", cells=len(cells), failed=result.failed)
        return result

    def save(self, result: SweepResult) -> None:
        """Aggregate ``sweep.csv`` (one row per cell) and ``sweep.json``."""
        summary_keys = sorted({key for cell in result.cells for key in cell["summary"]})
        source = f"{result.command}.summary"
        columns = [Column("index", "1", "sweep", INPUT)]
        columns += [Column(key, "1", "sweep", INPUT) for key in result.keys]
        columns += [
            Column("success", "-", "sweep"),
            Column("exit_code", "1", "sweep"),
            Column("directory", "-", "sweep", INPUT),
        ]
        columns += [Column(key, "1", source, _summary_provenance(key)) for key in summary_keys]
        aggregate = Table("sweep", columns)
        for cell in result.cells:
            aggregate.add(
                index=cell["index"],
                success=cell["success"],
                exit_code=cell["exit_code"],
                directory=cell["directory"],
                **cell["values"],
                **cell["summary"],
            )
        write_csv(self.output / "sweep.csv", aggregate)
        write_json(
            self.output / "sweep.json",
            {
                "command": result.command,
                "keys": result.keys,
                "schema": aggregate.schema(),
                "cells": result.cells,
            },
        )
