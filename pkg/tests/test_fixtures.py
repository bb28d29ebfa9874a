import json
from datetime import date

import pytest

from magrobin.fixtures import FIXTURE_VERSION, FixtureStore, build_fixtures
from magrobin.fixtures.store import _nested
from magrobin.utils.validators import ValidationError


def test_build_then_read(tmp_path):
    path = tmp_path / "derived.json"
    document = build_fixtures(path, ["theta0"])
    assert document["version"] == FIXTURE_VERSION
    assert set(document["fixtures"]) == {"theta0"}

    stored = json.loads(path.read_text(encoding="utf-8"))
    assert stored["fixtures"]["theta0"]["value"] == pytest.approx(0.5901, rel=1e-3)
    assert "degennes_theta0" in stored["fixtures"]["theta0"]["oracle"]

    store = FixtureStore(path)
    assert store.value("theta0") == stored["fixtures"]["theta0"]["value"]


def test_oracle_records_its_nested_grids(tmp_path):
    document = build_fixtures(tmp_path / "derived.json", ["theta0"])
    meta = document["fixtures"]["theta0"]["meta"]
    assert meta["steps"] == [0.01, 0.005, 0.0025]
    assert len(meta["values"]) == 3
    assert meta["order"] == 2.0
    assert meta["extrapolated"] is True
    assert 1.5 < meta["observed_order"] < 2.5
    assert meta["date"] == date.today().isoformat()
    limit = document["fixtures"]["theta0"]["value"]
    assert abs(limit - meta["values"][-1]) < abs(meta["values"][-1] - meta["values"][-2])


def test_non_monotone_sequence_keeps_the_finest_value():
    value, meta = _nested([1.0, 1.5, 1.2], (10, 20, 40), "cells")
    assert value == 1.2
    assert meta["extrapolated"] is False
    assert meta["observed_order"] is None
    assert meta["cells"] == [10, 20, 40]


def test_unknown_key_is_rejected(tmp_path):
    with pytest.raises(ValidationError):
        FixtureStore(tmp_path / "missing.json").entry("theta1")
    with pytest.raises(ValidationError):
        build_fixtures(tmp_path / "derived.json", ["nu0", "bogus"])


def test_file_with_other_version_is_ignored(tmp_path):
    path = tmp_path / "derived.json"
    path.write_text(
        json.dumps(
            {"version": FIXTURE_VERSION + 1, "fixtures": {"montgomery_lambda_0": {"value": 123.0}}}
        ),
        encoding="utf-8",
    )
    value = FixtureStore(path).value("montgomery_lambda_0")
    assert value != 123.0
    assert 0.5 < value < 2.0


def test_file_values_take_precedence(tmp_path):
    path = tmp_path / "derived.json"
    path.write_text(
        json.dumps(
            {"version": FIXTURE_VERSION, "fixtures": {"e_b2": {"value": 0.25, "oracle": "test"}}}
        ),
        encoding="utf-8",
    )
    assert FixtureStore(path).entry("e_b2") == {"value": 0.25, "oracle": "test"}
