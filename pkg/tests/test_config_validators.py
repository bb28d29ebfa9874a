import pytest

from magrobin.config.settings import get_settings, reset_settings
from magrobin.utils.errors import InvalidWeight, SpectralError
from magrobin.utils.logger import format_fields
from magrobin.utils.validators import (
    ValidationError,
    validate_h_list,
    validate_range,
    validate_step_range,
    validate_surface_spec,
    validate_vector,
)


def test_settings_defaults():
    settings = get_settings()
    assert settings.workers == 1
    assert settings.dense_oracle_limit == 3000
    assert settings.fixtures_file.name == "derived.json"


def test_settings_read_environment(monkeypatch):
    monkeypatch.setenv("MAGROBIN_WORKERS", " 4 ")
    monkeypatch.setenv("MAGROBIN_LOG_LEVEL", "debug")
    reset_settings()
    settings = get_settings()
    assert settings.workers == 4
    assert settings.log_level == "DEBUG"


def test_h_list_is_sorted_descending():
    result = validate_h_list("0.01, 0.04,0.02")
    assert result.is_valid
    assert result.value == [0.04, 0.02, 0.01]


@pytest.mark.parametrize(
    "text", ["0.1", "0.1,0.1", "0.1,1.5", "0.1,-0.2", "0.1,abc"]
)
def test_h_list_rejects(text):
    result = validate_h_list(text)
    assert not result.is_valid
    with pytest.raises(ValidationError):
        result.unwrap("h_list")


def test_step_range_includes_stop():
    assert validate_step_range("0:1:0.25").value == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert not validate_step_range("1:0:0.1").is_valid
    assert not validate_step_range("0:1").is_valid


def test_range_bounds():
    assert validate_range(0.5, 0.0, 1.0).is_valid
    assert not validate_range(0.0, 0.0, 1.0, open_min=True).is_valid
    assert not validate_range("x").is_valid


@pytest.mark.parametrize(
    "spec, expected",
    [
        ("sphere{}", ("sphere", (1.0,))),
        ("Sphere{2}", ("sphere", (2.0,))),
        ("ellipsoid{1,1.1,1.3}", ("ellipsoid", (1.0, 1.1, 1.3))),
        ("plane{}", ("plane", ())),
        ("file{data/chart.txt}", ("file", ("data/chart.txt",))),
    ],
)
def test_surface_spec(spec, expected):
    assert validate_surface_spec(spec).value == expected


@pytest.mark.parametrize("spec", ["torus{1,2}", "ellipsoid{1,2}", "sphere{-1}", "file{}"])
def test_surface_spec_rejects(spec):
    assert not validate_surface_spec(spec).is_valid


def test_vector():
    assert validate_vector("0, 0,1").value == (0.0, 0.0, 1.0)
    assert not validate_vector("1,2").is_valid
    assert validate_vector([1, 4], dim=2).value == (1.0, 4.0)


def test_error_payloads():
    err = InvalidWeight("weight vanishes", {"h": 0.5})
    assert isinstance(err, SpectralError)
    assert err.to_dict() == {
        "type": "InvalidWeight",
        "message": "weight vanishes",
        "details": {"h": 0.5},
    }
    assert ValidationError("h", "too large", 2.0).to_dict()["value"] == "2.0"


def test_format_fields():
    assert format_fields(h=0.0123456789, m=3, name="ball") == "h=0.0123457 m=3 name=ball"
