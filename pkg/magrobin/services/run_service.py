"""
Run Orchestration Service for magrobin

Dispatches one validated command to the compute module that owns it and
persists the outcome: ``result.json`` with the full record, one CSV per
result table and, for fitting commands, ``fit_report.json``.
"""

from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np

from magrobin import __version__
from magrobin.services.commands import (
    BallParams,
    CommandParams,
    DeGennesParams,
    Effective2DParams,
    FixturesBuildParams,
    HarmonicParams,
    MontgomeryParams,
    Robin1DParams,
    SphereModesParams,
    SurfaceScanParams,
    VerifyParams,
    build_params,
    mode_window,
)
from magrobin.services.writers import (
    COMPUTED,
    DERIVED,
    INPUT,
    PRINTED,
    Table,
    table,
    write_json,
    write_tables,
)
from magrobin.utils.errors import SpectralError
from magrobin.utils.logger import StageLogger, get_logger
from magrobin.utils.validators import ValidationError, validate_surface_spec

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SPECTRAL = 3


@dataclass
class RunOutput:
    """What a runner hands back to the service."""

    tables: list[Table]
    summary: dict[str, Any]
    fixtures: list[str] = field(default_factory=list)
    files: list[str] = field(default_factory=list)


@dataclass
class ResultRecord:
    """Container for one command run."""

    command: str
    success: bool
    config: dict[str, Any]
    tables: list[Table] = field(default_factory=list)
    summary: dict[str, Any] = field(default_factory=dict)
    fixtures: dict[str, Any] = field(default_factory=dict)
    files: list[str] = field(default_factory=list)
    error: Optional[dict[str, Any]] = None
    exit_code: int = EXIT_OK
    wall_time: float = 0.0
    version: str = __version__
    timestamp: datetime = field(default_factory=datetime.now)

    def to_dict(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "success": self.success,
            "exit_code": self.exit_code,
            "config": self.config,
            "results": {t.name: {**t.schema(), "data": t.rows} for t in self.tables},
            "summary": self.summary,
            "fixtures": self.fixtures,
            "files": self.files,
            "error": self.error,
            "wall_time": self.wall_time,
            "version": self.version,
            "timestamp": self.timestamp.isoformat(timespec="seconds"),
        }


def _surface(spec: str):
    from magrobin.geometry import surface_from_spec

    return surface_from_spec(*validate_surface_spec(spec).unwrap("surface"))


def _fit_table(
    name: str,
    report,
    expected: Optional[list[float]] = None,
    expected_provenance: str = PRINTED,
) -> Table:
    out = table(
        name,
        "asymfit.fit_expansion",
        "exponent",
        "coefficient",
        ("expected", "1", expected_provenance),
        inputs=("exponent",),
    )
    for i, (p, c) in enumerate(zip(report.exponents, report.coefficients)):
        out.add(
            exponent=p,
            coefficient=c,
            expected=expected[i] if expected and i < len(expected) else None,
        )
    return out


def run_montgomery(params: MontgomeryParams, seed: int, output: Path) -> RunOutput:
    from magrobin.fixtures import FixtureStore
    from magrobin.model1d import montgomery_lambda, montgomery_min

    nu0, zeta0 = montgomery_min(params.half_width, params.n)
    fixture = FixtureStore().value("nu0")
    minimum = table("montgomery", "model1d.montgomery_min", "nu0", "zeta0")
    minimum.add(nu0=nu0, zeta0=zeta0)
    tables = [minimum]
    if params.zeta_range:
        curve = table(
            "montgomery_lambda",
            "model1d.montgomery_lambda",
            "zeta",
            "lambda",
            inputs=("zeta",),
        )
        for zeta in params.zeta_range:
            value = montgomery_lambda(zeta, params.half_width, params.n)
            curve.add(zeta=zeta, **{"lambda": value})
        tables.append(curve)
    summary = {
        "nu0": nu0,
        "zeta0": zeta0,
        "fixture_nu0": fixture,
        "fixture_relative_difference": abs(nu0 - fixture) / fixture,
    }
    return RunOutput(tables, summary, fixtures=["nu0"])


def run_degennes(params: DeGennesParams, seed: int, output: Path) -> RunOutput:
    from magrobin.fixtures import FixtureStore
    from magrobin.model1d import degennes_lambda, degennes_theta0

    theta0, xi_min = degennes_theta0(params.step, params.length)
    fixture = FixtureStore().value("theta0")
    minimum = table("degennes", "model1d.degennes_theta0", "theta0", "xi_min")
    minimum.add(theta0=theta0, xi_min=xi_min)
    tables = [minimum]
    if params.xi_range:
        curve = table(
            "degennes_lambda", "model1d.degennes_lambda", "xi", "lambda", inputs=("xi",)
        )
        for xi in params.xi_range:
            curve.add(xi=xi, **{"lambda": degennes_lambda(xi, params.step, params.length)})
        tables.append(curve)
    summary = {
        "theta0": theta0,
        "xi_min": xi_min,
        "fixture_theta0": fixture,
        "fixture_relative_difference": abs(theta0 - fixture) / fixture,
    }
    return RunOutput(tables, summary, fixtures=["theta0"])


def run_robin1d(params: Robin1DParams, seed: int, output: Path) -> RunOutput:
    from magrobin.model1d import robin_transverse_expansion

    report = robin_transverse_expansion(
        params.kappa, params.c_star, params.sigma, params.h_list, params.rho, params.step
    )
    samples = table(
        "robin_samples",
        "model1d.robin_transverse_expansion",
        "h",
        "eigenvalue",
        "rescaled",
        ("depth", "h"),
        "nodes",
        inputs=("h",),
    )
    samples.extend(report.diagnostics["samples"])
    fit = _fit_table("robin_fit", report, [-1.0, -2.0 * params.kappa])
    write_json(output / "fit_report.json", report)
    summary = {
        "leading": report.coefficients[0],
        "subleading": report.coefficients[1],
        "residual": report.residual,
        "condition": report.condition,
    }
    return RunOutput([samples, fit], summary, files=["fit_report.json"])


def run_harmonic(params: HarmonicParams, seed: int, output: Path) -> RunOutput:
    from magrobin.model1d import harmonic_ground

    level = harmonic_ground(params.h, params.m, params.xi, params.eta)
    out = table(
        "harmonic",
        "model1d.harmonic_ground",
        "h",
        "m",
        "xi",
        "eta",
        "lambda",
        ("expected", "1", PRINTED),
        inputs=("h", "m", "xi", "eta"),
    )
    expected = abs(params.eta) * params.h
    out.add(
        h=params.h,
        m=params.m,
        xi=params.xi,
        eta=params.eta,
        expected=expected,
        **{"lambda": level.value},
    )
    summary = {
        "lambda": level.value,
        "expected": expected,
        "degenerate_well": level.degenerate_well,
        "well_center": level.well_center,
    }
    return RunOutput([out], summary)


def run_surface_scan(params: SurfaceScanParams, seed: int, output: Path) -> RunOutput:
    from magrobin.geometry import effective_energy, predict_eigenvalues

    surface = _surface(params.surface)
    field_vector = np.asarray(params.field, dtype=float)
    energy = effective_energy(surface, field_vector, params.gamma, params.sigma)
    prediction = predict_eigenvalues(surface, field_vector, params.gamma, params.sigma, params.n)

    minimum = table(
        "effective_energy",
        "geometry.effective_energy",
        "value",
        "x",
        "y",
        "z",
        "bn",
        "kappa",
        ("degenerate", "-"),
    )
    x, y, z = energy.minimizer
    minimum.add(
        value=energy.value,
        x=x,
        y=y,
        z=z,
        bn=energy.bn,
        kappa=energy.kappa,
        degenerate=energy.degenerate,
    )
    terms = table(
        "prediction_terms",
        "geometry.predict_eigenvalues",
        ("label", "-", PRINTED),
        ("value", "1", PRINTED),
        ("source", "-", PRINTED),
        ("fit_only", "-", PRINTED),
    )
    terms.extend(t.__dict__ for t in prediction.terms)

    summary = {"energy": energy.to_dict(), "prediction": prediction.to_dict()}
    fixtures = ["nu0"] if prediction.regime == "ball-critical" else []
    return RunOutput([minimum, terms], summary, fixtures=fixtures)


def run_effective2d(params: Effective2DParams, seed: int, output: Path) -> RunOutput:
    from magrobin.effective2d import (
        UniformField,
        assemble_coefficients,
        boundary_normal_field,
        build_chart,
        effective_spectrum,
        variational_upper_bound,
        with_quadratic_well,
        write_chart_dump,
    )

    surface = _surface(params.surface)
    potential = UniformField(params.field)
    chart = build_chart(
        surface,
        params.center,
        params.extent,
        potential,
        params.h,
        params.delta,
        params.n,
        params.n_t,
    )
    coeffs = assemble_coefficients(chart)
    if params.well is not None:
        coeffs = with_quadratic_well(coeffs, chart, params.well)
    spectrum = effective_spectrum(coeffs, chart, params.k, params.solver, seed)

    levels = table(
        "effective_spectrum",
        "effective2d.effective_spectrum",
        "n",
        ("mu", "1"),
        "residual",
        "gap",
        inputs=("n",),
    )
    values = spectrum.eigenvalues
    for n, (mu, res) in enumerate(zip(values, spectrum.residuals), start=1):
        gap = float(values[n] - mu) if n < values.size else None
        levels.add(n=n, mu=mu, residual=res, gap=gap)

    files = []
    if params.dump:
        write_chart_dump(chart, output / "chart_dump.txt")
        files.append("chart_dump.txt")

    bn = boundary_normal_field(chart)
    summary = {
        "ground": spectrum.ground,
        "max_residual": spectrum.max_residual,
        "coefficient_norms": coeffs.sup_norms(),
        "symmetry_defect": coeffs.symmetry_defect(),
        "normal_field_center": float(bn[bn.shape[0] // 2, bn.shape[1] // 2]),
        "chart": {
            "delta": chart.delta,
            "shape": list(chart.shape),
            "spacing": list(chart.spacing),
        },
        "solver": spectrum.to_dict()["meta"],
    }
    if params.trial and params.well is None:
        bound = variational_upper_bound(surface, potential, params.center, params.h)
        summary["trial_upper_bound"] = bound.value
        summary["trial_quadrature_error"] = bound.quadrature_error
    return RunOutput([levels], summary, files=files)


def run_ball(params: BallParams, seed: int, output: Path) -> RunOutput:
    from magrobin.ball import BallProblem, ball_ground, ball_trial_upper_bound, diamagnetic_bounds

    problem = BallProblem(
        params.h,
        params.b,
        params.regime,
        rho=params.rho,
        n_theta=params.n_theta,
        radial_step=params.radial_step,
    )
    ground = ball_ground(problem, seed=seed)
    lower, upper = diamagnetic_bounds(problem)

    modes = table("ball_modes", "ball.ball_mode_spectrum", "m", "value", inputs=("m",))
    modes.extend(ground.table())
    summary = {
        "energy": ground.value,
        "m_star": ground.m_star,
        "zero_field": lower,
        "diamagnetic_upper": upper,
        "window": ground.meta.get("window"),
        "problem": problem.describe(),
    }
    row = {"h": params.h, "b": params.b, "energy": ground.value, "m_star": ground.m_star}
    row.update(zero_field=lower, diamagnetic_upper=upper)
    if params.trial:
        bound = ball_trial_upper_bound(params.h, params.b, params.regime, problem=problem)
        row.update(trial=bound.value, trial_discrete=bound.discrete)
        summary.update(trial=bound.value, trial_discrete=bound.discrete, trial_flags=bound.flags)
    energy = table(
        "ball_ground",
        "ball.ball_ground",
        "h",
        "b",
        "energy",
        "m_star",
        "zero_field",
        "diamagnetic_upper",
        "trial",
        "trial_discrete",
        inputs=("h", "b"),
    )
    energy.add(**row)
    fixtures = ["zeta0"] if params.regime == "critical" and params.b > 0.0 else []
    return RunOutput([energy, modes], summary, fixtures=fixtures)


def run_sphere_modes(params: SphereModesParams, seed: int, output: Path) -> RunOutput:
    from magrobin.ball import e_of_b, mode_curves

    window = mode_window(params.m_window, params.b_range)
    curves = mode_curves(params.b_range, window, params.n_theta)
    rows = table(
        "mode_curves", "ball.mode_curves", "b_or_h", "m", "lambda", inputs=("b_or_h", "m")
    )
    for curve in curves:
        rows.extend(curve.rows())

    minima = table("e_of_b", "ball.e_of_b", "b", "e", "m_star", inputs=("b",))
    values = []
    for b in params.b_range:
        minimum = e_of_b(b, params.n_theta)
        values.append(minimum.value)
        minima.add(b=b, e=minimum.value, m_star=minimum.m_star)

    drops = [i for i in range(1, len(values)) if max(values[:i]) > values[i]]
    summary = {
        "modes": window,
        "e_min": min(values),
        "non_monotone": bool(drops),
        "first_drop_b": params.b_range[drops[0]] if drops else None,
    }
    return RunOutput([rows, minima], summary)


def run_verify(params: VerifyParams, seed: int, output: Path) -> RunOutput:
    from magrobin.ball import verify_regime

    options = {
        key: value
        for key, value in (
            ("rho", params.rho),
            ("n_theta", params.n_theta),
            ("radial_step", params.radial_step),
        )
        if value is not None
    }
    report = verify_regime(params.regime, params.b, params.h_list, seed, options)
    diagnostics = report.diagnostics
    write_json(output / "fit_report.json", report)

    runs = table(
        "verify_runs",
        "ball.ball_ground",
        "h",
        "energy",
        "m_star",
        "zero_field",
        "excess",
        inputs=("h",),
    )
    runs.extend(diagnostics["runs"])
    expected = diagnostics["expected"]["coefficients"]
    # critical uses the nu0 fixture, h_bounded the computed e(b)
    provenance = DERIVED if params.regime == "critical" else COMPUTED
    coefficients = _fit_table("verify_fit", report, expected, provenance)
    summary = {
        "coefficients": report.coefficients,
        "exponents": report.exponents,
        "relative_errors": diagnostics["relative_errors"],
        "residual": report.residual,
        "expected": diagnostics["expected"],
    }
    if "three_halves_sign" in diagnostics:
        summary["three_halves_sign"] = diagnostics["three_halves_sign"]
    fixtures = ["nu0", "zeta0"] if params.regime == "critical" else []
    return RunOutput([runs, coefficients], summary, fixtures=fixtures, files=["fit_report.json"])


def run_fixtures_build(params: FixturesBuildParams, seed: int, output: Path) -> RunOutput:
    from magrobin.fixtures import build_fixtures

    document = build_fixtures(params.path, params.keys)
    rows = table(
        "fixtures",
        "fixtures.build_fixtures",
        ("key", "-", INPUT),
        ("value", "1", DERIVED),
        ("oracle", "-", DERIVED),
    )
    for key, entry in document["fixtures"].items():
        rows.add(key=key, value=entry["value"], oracle=entry["oracle"])
    return RunOutput([rows], {"built": document["built"], "version": document["version"]})


RUNNERS: dict[str, Callable[[Any, int, Path], RunOutput]] = {
    "montgomery": run_montgomery,
    "degennes": run_degennes,
    "robin1d": run_robin1d,
    "harmonic": run_harmonic,
    "surface-scan": run_surface_scan,
    "effective2d": run_effective2d,
    "ball": run_ball,
    "sphere-modes": run_sphere_modes,
    "verify": run_verify,
    "fixtures-build": run_fixtures_build,
}


class RunService:
    """
    Runs one command end to end.

    Validation, dispatch and persistence happen here; the runners only call
    module operations and shape their results into tables.
    """

    def __init__(self, output: Path, progress_callback: Optional[Callable[[str], None]] = None):
        self.output = Path(output)
        self.progress_callback = progress_callback

    def _update_progress(self, message: str):
        if self.progress_callback:
            self.progress_callback(message)

    def _fixture_entries(self, keys: list[str]) -> dict[str, Any]:
        from magrobin.fixtures import FixtureStore

        store = FixtureStore()
        return {key: store.entry(key) for key in keys}

    def run(
        self,
        command: str,
        params: CommandParams | dict[str, Any],
        seed: int = 0,
    ) -> ResultRecord:
        """
        Validate, execute and persist one command.

        Returns:
            ResultRecord with ``exit_code`` 0, 2 (validation) or 3 (solver).
        """
        start_time = datetime.now()
        stage = StageLogger(f"run.{command}")
        config: dict[str, Any] = {"command": command, "seed": seed}

        try:
            if not isinstance(params, CommandParams):
                params = build_params(command, params)
            config["parameters"] = params.model_dump(mode="json")
            stage.start("Running command", output=str(self.output), seed=seed)
            self._update_progress(f"{command}: computing")

            self.output.mkdir(parents=True, exist_ok=True)
            outcome = RUNNERS[command](params, seed, self.output)
            record = ResultRecord(
                command=command,
                success=True,
                config=config,
                tables=outcome.tables,
                summary=outcome.summary,
                fixtures=self._fixture_entries(outcome.fixtures),
                files=outcome.files,
            )
            stage.success("Command completed", tables=len(outcome.tables))
        except ValidationError as e:
            stage.error("Invalid parameters", e)
            record = ResultRecord(
                command, False, config, error=e.to_dict(), exit_code=EXIT_VALIDATION
            )
        except SpectralError as e:
            stage.error("Computation failed", e)
            record = ResultRecord(
                command, False, config, error=e.to_dict(), exit_code=EXIT_SPECTRAL
            )
        except Exception as e:
            stage.error("Unexpected failure", e)
            error = {"type": type(e).__name__, "message": str(e), "details": {}}
            record = ResultRecord(command, False, config, error=error, exit_code=EXIT_SPECTRAL)

        record.wall_time = (datetime.now() - start_time).total_seconds()
        self.save(record)
        self._update_progress(f"{command}: done")
        return record

    def save(self, record: ResultRecord) -> None:
        """Write ``result.json`` and the CSV tables of a record."""
        self.output.mkdir(parents=True, exist_ok=True)
        write_tables(self.output, record.tables)
        write_json(self.output / "result.json", record.to_dict())
