"""
Derived constants and the oracles that produce them.

The fixture file is versioned JSON:

    {"version": 2, "built": "<iso date>",
     "fixtures": {"nu0": {"value": ..., "oracle": "...", "meta": {...}}, ...}}

Every scalar oracle runs on three nested grids and is Richardson
extrapolated; its meta records the grids, the raw values, the assumed and
observed orders and the date.

Keys missing from the file are computed by their oracle on first use and kept
in memory for the rest of the process. The file itself is only written by
``build_fixtures``.
"""

import json
import math
from datetime import date, datetime
from pathlib import Path
from typing import Any, Callable, Iterable, Optional

from magrobin.config.settings import get_settings
from magrobin.utils.errors import SpectralError
from magrobin.utils.logger import StageLogger, get_logger
from magrobin.utils.validators import ValidationError

logger = get_logger(__name__)

FIXTURE_VERSION = 2
EXTRAPOLATION_ORDER = 2.0
MONTGOMERY_HALF_WIDTH = 14.0
MONTGOMERY_INTERVALS = (2000, 4000, 8000)
DEGENNES_STEPS = (0.01, 0.005, 0.0025)
POLAR_ORACLE_CELLS = (1024, 2048, 4096)

Entry = dict[str, Any]


def _nested(values: list[float], grids: Iterable, grid_label: str) -> tuple[float, dict]:
    """Richardson limit of values on nested grids, with its oracle metadata."""
    from magrobin.asymfit import richardson
    from magrobin.utils.errors import ExtrapolationUnsafe

    try:
        extrapolated = richardson(values, order=EXTRAPOLATION_ORDER, ratio=2.0)
        value, observed = extrapolated.limit, extrapolated.observed_order
    except ExtrapolationUnsafe as exc:
        logger.warning(f"oracle sequence not monotone, keeping the finest value: {values}")
        value, observed = exc.finest, None
    meta = {
        grid_label: list(grids),
        "values": values,
        "order": EXTRAPOLATION_ORDER,
        "observed_order": observed if observed is not None and math.isfinite(observed) else None,
        "extrapolated": observed is not None,
        "date": date.today().isoformat(),
    }
    return value, meta


def _montgomery() -> dict[str, Entry]:
    from magrobin.model1d import montgomery_min

    minima = [montgomery_min(MONTGOMERY_HALF_WIDTH, n) for n in MONTGOMERY_INTERVALS]
    oracle = (
        f"montgomery_min on [-{MONTGOMERY_HALF_WIDTH:g}, {MONTGOMERY_HALF_WIDTH:g}], "
        f"golden section, Richardson order {EXTRAPOLATION_ORDER:g}"
    )
    nu0, nu0_meta = _nested([m.nu0 for m in minima], MONTGOMERY_INTERVALS, "intervals")
    zeta0, zeta0_meta = _nested([m.zeta0 for m in minima], MONTGOMERY_INTERVALS, "intervals")
    return {
        "nu0": {"value": nu0, "oracle": oracle, "meta": nu0_meta},
        "zeta0": {"value": zeta0, "oracle": oracle, "meta": zeta0_meta},
    }


def _degennes() -> dict[str, Entry]:
    from magrobin.model1d import degennes_theta0

    minima = [degennes_theta0(step) for step in DEGENNES_STEPS]
    oracle = (
        "degennes_theta0 (scan on [0, 3], golden section), "
        f"Richardson order {EXTRAPOLATION_ORDER:g}"
    )
    theta0, theta0_meta = _nested([m.theta0 for m in minima], DEGENNES_STEPS, "steps")
    xi_min, xi_meta = _nested([m.xi_min for m in minima], DEGENNES_STEPS, "steps")
    return {
        "theta0": {"value": theta0, "oracle": oracle, "meta": theta0_meta},
        "xi_min": {"value": xi_min, "oracle": oracle, "meta": xi_meta},
    }


def _montgomery_at(zeta: float, key: str) -> Callable[[], dict[str, Entry]]:
    def oracle() -> dict[str, Entry]:
        from magrobin.model1d import montgomery_lambda

        values = [
            montgomery_lambda(zeta, MONTGOMERY_HALF_WIDTH, n) for n in MONTGOMERY_INTERVALS
        ]
        value, meta = _nested(values, MONTGOMERY_INTERVALS, "intervals")
        return {
            key: {
                "value": value,
                "oracle": f"montgomery_lambda({zeta:g}) on nested grids, Richardson",
                "meta": meta,
            }
        }

    return oracle


def _lambda_1_b2() -> dict[str, Entry]:
    from magrobin.ball import lambda_m

    values = [lambda_m(1, 2.0, n) for n in POLAR_ORACLE_CELLS]
    value, meta = _nested(values, POLAR_ORACLE_CELLS, "cells")
    return {
        "lambda_1_b2": {
            "value": value,
            "oracle": "lambda_m(1, 2) on nested polar grids, Richardson order 2",
            "meta": meta,
        }
    }


def _e_b2() -> dict[str, Entry]:
    from magrobin.ball import e_of_b

    minima = [e_of_b(2.0, n) for n in POLAR_ORACLE_CELLS]
    value, meta = _nested([m.value for m in minima], POLAR_ORACLE_CELLS, "cells")
    meta["m_star"] = [m.m_star for m in minima]
    return {
        "e_b2": {
            "value": value,
            "oracle": "e_of_b(2) adaptive mode window on nested polar grids, Richardson",
            "meta": meta,
        }
    }


ORACLES: dict[str, Callable[[], dict[str, Entry]]] = {
    "nu0": _montgomery,
    "zeta0": _montgomery,
    "theta0": _degennes,
    "xi_min": _degennes,
    "montgomery_lambda_0": _montgomery_at(0.0, "montgomery_lambda_0"),
    "montgomery_lambda_minus_half": _montgomery_at(-0.5, "montgomery_lambda_minus_half"),
    "lambda_1_b2": _lambda_1_b2,
    "e_b2": _e_b2,
}


class FixtureStore:
    """
    Read access to the derived constants.

    Entries computed on demand are shared by every store of the process.
    """

    _computed: dict[str, Entry] = {}

    def __init__(self, path: Optional[Path] = None):
        self.path = Path(path) if path is not None else get_settings().fixtures_file
        self._file = self._load()

    def _load(self) -> dict[str, Entry]:
        if not self.path.exists():
            return {}
        try:
            data = json.loads(self.path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            logger.warning(f"ignoring unreadable fixture file {self.path}: {exc}")
            return {}
        if data.get("version") != FIXTURE_VERSION:
            logger.warning(
                f"ignoring fixture file {self.path} with version {data.get('version')}"
            )
            return {}
        return dict(data.get("fixtures", {}))

    @staticmethod
    def keys() -> list[str]:
        return list(ORACLES)

    def entry(self, key: str) -> Entry:
        """Value with its oracle description; computed when missing."""
        if key not in ORACLES:
            raise ValidationError("fixture", f"unknown key, expected one of {self.keys()}", key)
        if key in self._file:
            return self._file[key]
        if key not in self._computed:
            logger.info(f"fixture {key} not in {self.path.name}, computing")
            try:
                self._computed.update(ORACLES[key]())
            except SpectralError as exc:
                exc.details["fixture"] = key
                raise
        return self._computed[key]

    def value(self, key: str) -> float:
        return float(self.entry(key)["value"])

    @classmethod
    def clear(cls) -> None:
        """Forget entries computed in this process."""
        cls._computed.clear()


def build_fixtures(path: Optional[Path] = None, keys: Optional[Iterable[str]] = None) -> dict:
    """
    Run the oracles and write the fixture file.

    Args:
        path: Target file (settings default).
        keys: Subset of keys to build (all by default).

    Returns:
        The written document.
    """
    path = Path(path) if path is not None else get_settings().fixtures_file
    wanted = list(keys) if keys is not None else FixtureStore.keys()
    unknown = [key for key in wanted if key not in ORACLES]
    if unknown:
        raise ValidationError("fixture", f"unknown keys, expected {FixtureStore.keys()}", unknown)

    stage = StageLogger("fixtures")
    stage.start("Building fixtures", keys=len(wanted))
    fixtures: dict[str, Entry] = {}
    for done, key in enumerate(wanted, start=1):
        if key not in fixtures:
            fixtures.update(ORACLES[key]())
        stage.progress(f"fixture {key}", done, len(wanted), value=fixtures[key]["value"])

    document = {
        "version": FIXTURE_VERSION,
        "built": datetime.now().isoformat(timespec="seconds"),
        "fixtures": {key: fixtures[key] for key in wanted},
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(document, indent=2) + "\n", encoding="utf-8")
    stage.success("Fixtures written", path=str(path))
    return document
