"""
Run configurations: one parameter model per command and the flat
``key = value`` configuration file format.
"""

from pathlib import Path
from typing import Annotated, Any, Literal, Optional

import pydantic
from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, field_validator

from magrobin.utils.validators import (
    ValidationError,
    validate_h_list,
    validate_step_range,
    validate_surface_spec,
    validate_vector,
)


def _checked(result) -> Any:
    if not result.is_valid:
        raise ValueError(result.error)
    return result.value


def _step_range(v: Any) -> Any:
    return _checked(validate_step_range(v)) if isinstance(v, str) else v


def _h_list(v: Any) -> Any:
    return _checked(validate_h_list(v))


def _surface(v: Any) -> Any:
    if isinstance(v, str):
        _checked(validate_surface_spec(v))
    return v


def _vector(v: Any) -> Any:
    if isinstance(v, (str, list, tuple)):
        return _checked(validate_vector(v))
    return v


StepRange = Annotated[list[float], BeforeValidator(_step_range)]
HList = Annotated[list[float], BeforeValidator(_h_list)]
SurfaceSpec = Annotated[str, BeforeValidator(_surface)]
Vector3 = Annotated[tuple[float, float, float], BeforeValidator(_vector)]


class CommandParams(BaseModel):
    """Base of the per-command parameter models."""

    model_config = ConfigDict(extra="forbid")


class MontgomeryParams(CommandParams):
    """Montgomery minimum nu0, zeta0 and optional lambda(zeta) samples."""

    half_width: float = Field(8.0, gt=0.0, description="Half-width L of [-L, L]")
    n: int = Field(16000, ge=100, le=10_000_000, description="Grid intervals")
    zeta_range: Optional[StepRange] = Field(
        None, description="start:stop:step samples of lambda(zeta)"
    )


class DeGennesParams(CommandParams):
    """de Gennes constant Theta0 and optional lambda(xi) samples."""

    step: float = Field(0.0025, gt=0.0, le=0.1, description="Grid spacing")
    length: float = Field(20.0, gt=1.0, description="Interval length T")
    xi_range: Optional[StepRange] = Field(
        None, description="start:stop:step samples of lambda(xi)"
    )


class Robin1DParams(CommandParams):
    """Transverse Robin eigenvalue expansion in h."""

    kappa: float = Field(..., ge=-50.0, le=50.0, description="Mean curvature")
    c_star: float = Field(0.0, ge=0.0, description="Quadratic weight coefficient")
    sigma: float = Field(1.0, gt=0.0, lt=2.0, description="Robin scaling exponent")
    h_list: HList = Field(..., description="Semiclassical parameters")
    rho: float = Field(0.4, gt=0.0, lt=0.5, description="Collar exponent")
    step: float = Field(2e-3, gt=0.0, le=0.1, description="Grid spacing in tau")


class HarmonicParams(CommandParams):
    """Ground energy of the shifted harmonic oscillator."""

    h: float = Field(..., gt=0.0, le=1.0, description="Semiclassical parameter")
    m: float = Field(0.0, description="Momentum shift")
    xi: float = Field(0.0, description="Well offset")
    eta: float = Field(1.0, description="Field gradient")


class SurfaceScanParams(CommandParams):
    """Effective boundary energy and eigenvalue prediction on a surface."""

    surface: SurfaceSpec = Field(
        "sphere{1}", description="sphere{r}, ellipsoid{a,b,c}, plane{} or file{path}"
    )
    field: Vector3 = Field((0.0, 0.0, 1.0), description="Uniform field B")
    gamma: float = Field(10.0, gt=0.0, description="Robin parameter")
    sigma: float = Field(1.0, gt=0.0, lt=2.0, description="Field exponent")
    n: int = Field(1, ge=1, le=50, description="Level index of the prediction")


class Effective2DParams(CommandParams):
    """Low spectrum of the effective boundary operator on one chart."""

    surface: SurfaceSpec = Field("plane{}", description="Boundary surface")
    center: Vector3 = Field((0.0, 0.0, 0.0), description="Boundary point")
    field: Vector3 = Field((0.0, 0.0, 1.0), description="Uniform field B")
    extent: float = Field(0.6, gt=0.0, description="Chart half-width")
    h: float = Field(0.01, gt=0.0, lt=1.0, description="Semiclassical parameter")
    n: int = Field(41, ge=5, le=801, description="Chart nodes per direction")
    n_t: int = Field(401, ge=17, le=20001, description="Collar nodes")
    delta: Optional[float] = Field(None, gt=0.0, description="Collar depth")
    k: int = Field(3, ge=1, le=50, description="Number of eigenvalues")
    solver: Literal["sparse", "dense"] = Field("sparse", description="Eigensolver")
    well: Optional[tuple[float, float]] = Field(
        None, description="Weights w1,w2 of a synthetic quadratic well"
    )
    dump: bool = Field(False, description="Write the chart dump")
    trial: bool = Field(False, description="Evaluate the trial-state upper bound")

    @field_validator("well", mode="before")
    @classmethod
    def parse_well(cls, v):
        if isinstance(v, str):
            return _checked(validate_vector(v, dim=2))
        return v


class BallParams(CommandParams):
    """Ground energy of the unit ball, minimized over Fourier modes."""

    h: float = Field(..., gt=0.0, lt=1.0, description="Semiclassical parameter")
    b: float = Field(..., ge=0.0, description="Field strength")
    regime: Literal["critical", "h_bounded"] = Field("critical", description="Scaling")
    rho: Optional[float] = Field(None, gt=0.0, lt=1.0, description="Truncation exponent")
    n_theta: int = Field(256, ge=16, le=8192, description="Polar cells")
    radial_step: float = Field(
        0.04, gt=0.0, le=0.5, description="Radial step in decay lengths"
    )
    trial: bool = Field(True, description="Evaluate the trial-state upper bound")


class SphereModesParams(CommandParams):
    """Curves lambda_m(b) of the polar effective problem and e(b)."""

    b_range: StepRange = Field(..., description="start:stop:step field strengths")
    m_window: str = Field("auto", description="'auto', 'lo:hi' or a comma list")
    n_theta: int = Field(1024, ge=64, le=65536, description="Polar cells")

    @field_validator("b_range")
    @classmethod
    def non_negative(cls, v):
        if min(v) < 0.0:
            raise ValueError("field strengths must be non-negative")
        return v

    @field_validator("m_window")
    @classmethod
    def check_window(cls, v):
        mode_window(v, [0.0])
        return v


class VerifyParams(CommandParams):
    """Asymptotic fit of the ball ground energy in one regime."""

    regime: Literal["critical", "h_bounded"] = Field("critical", description="Scaling")
    b: float = Field(1.0, ge=0.0, description="Field strength")
    h_list: HList = Field(..., description="Semiclassical parameters")
    rho: Optional[float] = Field(None, gt=0.0, lt=1.0, description="Truncation exponent")
    n_theta: int = Field(256, ge=16, le=8192, description="Polar cells")
    radial_step: float = Field(
        0.04, gt=0.0, le=0.5, description="Radial step in decay lengths"
    )


class FixturesBuildParams(CommandParams):
    """Regenerate the derived-constant fixture file."""

    keys: Optional[list[str]] = Field(None, description="Subset of fixture keys")
    path: Optional[Path] = Field(None, description="Target fixture file")

    @field_validator("keys", mode="before")
    @classmethod
    def split_keys(cls, v):
        if isinstance(v, str):
            return [k.strip() for k in v.split(",") if k.strip()]
        return v


COMMAND_PARAMS: dict[str, type[CommandParams]] = {
    "montgomery": MontgomeryParams,
    "degennes": DeGennesParams,
    "robin1d": Robin1DParams,
    "harmonic": HarmonicParams,
    "surface-scan": SurfaceScanParams,
    "effective2d": Effective2DParams,
    "ball": BallParams,
    "sphere-modes": SphereModesParams,
    "verify": VerifyParams,
    "fixtures-build": FixturesBuildParams,
}

# extra flag spellings accepted on the command line
FLAG_ALIASES = {"h_list": ("--h",), "field": ("--B",)}


def mode_window(text: str, b_values: list[float]) -> list[int]:
    """Fourier modes of an ``m_window`` value."""
    from magrobin.ball import auto_mode_window

    text = text.strip()
    if text == "auto":
        return auto_mode_window(b_values)
    try:
        if ":" in text:
            lo, hi = (int(p) for p in text.split(":"))
            modes = list(range(lo, hi + 1))
        else:
            modes = [int(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise ValueError("m_window must be 'auto', 'lo:hi' or integers") from exc
    if not modes:
        raise ValueError("m_window is empty")
    return modes


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    """
    Parse flat ``key = value`` lines; ``#`` starts a comment.

    Raises:
        ValidationError: Malformed line or repeated key.
    """
    values: dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError("config", f"{source}:{number}: expected key = value", raw)
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if not key:
            raise ValidationError("config", f"{source}:{number}: empty key", raw)
        if key in values:
            raise ValidationError("config", f"{source}:{number}: repeated key {key!r}", raw)
        values[key] = value
    return values


def read_config_file(path: Path) -> dict[str, str]:
    path = Path(path)
    if not path.is_file():
        raise ValidationError("config", "file not found", str(path))
    return parse_config_text(path.read_text(encoding="utf-8"), path.name)


def build_params(command: str, raw: dict[str, Any]) -> CommandParams:
    """
    Validate the parameters of ``command``.

    Raises:
        ValidationError: Unknown command, unknown key or invalid value.
    """
    if command not in COMMAND_PARAMS:
        raise ValidationError(
            "command", f"unknown command, expected one of {list(COMMAND_PARAMS)}", command
        )
    model = COMMAND_PARAMS[command]
    try:
        return model.model_validate(raw)
    except ValidationError:
        raise
    except pydantic.ValidationError as exc:
        first = exc.errors()[0]
        name = ".".join(str(p) for p in first.get("loc", ())) or command
        message = first.get("msg", "invalid value")
        raise ValidationError(name, message, first.get("input")) from exc
