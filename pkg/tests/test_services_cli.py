import json

import pytest

from magrobin.main import main, parse_args
from magrobin.services import build_params, parse_config_text, parse_grid
from magrobin.services.commands import mode_window
from magrobin.services.sweep_service import expand_grid
from magrobin.services.writers import DERIVED, PRINTED, Column, table, write_csv
from magrobin.utils.validators import ValidationError


def read_json(path):
    return json.loads(path.read_text(encoding="utf-8"))


def test_config_text_parsing():
    text = "# ball run\nh = 0.05\nb=2   # field\n\nn-theta = 128\n"
    assert parse_config_text(text) == {"h": "0.05", "b": "2", "n_theta": "128"}


@pytest.mark.parametrize("text", ["h 0.05", " = 1", "h = 1\nh = 2"])
def test_config_text_errors(text):
    with pytest.raises(ValidationError) as info:
        parse_config_text(text, "run.cfg")
    assert info.value.field == "config"
    assert "run.cfg:" in info.value.message


def test_build_params_sorts_h_list():
    params = build_params("robin1d", {"kappa": "0.5", "h_list": "0.01,0.04,0.02"})
    assert params.h_list == [0.04, 0.02, 0.01]
    assert params.rho == 0.4


@pytest.mark.parametrize(
    "command, raw, field",
    [
        ("harmonic", {}, "h"),
        ("harmonic", {"h": "0.1", "colour": "red"}, "colour"),
        ("ball", {"h": "2", "b": "1"}, "h"),
        ("surface-scan", {"surface": "torus{1}"}, "surface"),
        ("nonsense", {}, "command"),
    ],
)
def test_build_params_errors(command, raw, field):
    with pytest.raises(ValidationError) as info:
        build_params(command, raw)
    assert info.value.field == field


def test_mode_window_forms():
    assert mode_window("2:5", [1.0]) == [2, 3, 4, 5]
    assert mode_window("0, 3,7", [1.0]) == [0, 3, 7]
    assert mode_window("auto", [0.0, 4.0]) == [0, 1, 2, 3, 4]
    with pytest.raises(ValueError):
        mode_window("x:y", [1.0])


def test_parse_args_aliases():
    args = parse_args(["robin1d", "--kappa", "0.5", "--h", "0.1,0.05"])
    assert args.h_list == "0.1,0.05"
    args = parse_args(["effective2d", "--B", "0,0,2", "--no-trial"])
    assert args.field == "0,0,2"
    assert args.trial is False


def test_harmonic_run_writes_tables(output_dir):
    assert main(["harmonic", "--h", "0.1", "--eta", "2", "--output", str(output_dir)]) == 0

    raw = (output_dir / "harmonic.csv").read_bytes()
    assert b"\r\n" not in raw
    header, row = raw.decode("utf-8").splitlines()
    assert header == (
        "h[1|input],m[1|input],xi[1|input],eta[1|input],"
        "lambda[1|computed],expected[1|printed]"
    )
    values = [float(v) for v in row.split(",")]
    assert values[4] == pytest.approx(0.2, rel=1e-5)
    assert values[5] == pytest.approx(0.2)

    record = read_json(output_dir / "result.json")
    assert record["success"] is True
    assert record["exit_code"] == 0
    assert record["config"]["parameters"]["eta"] == 2.0
    assert record["results"]["harmonic"]["file"] == "harmonic.csv"
    columns = {c["name"]: c for c in record["results"]["harmonic"]["columns"]}
    assert columns["lambda"]["provenance"] == "computed"
    assert columns["lambda"]["source"] == "model1d.harmonic_ground"
    assert columns["expected"]["header"] == "expected[1|printed]"


def test_every_csv_column_is_tagged_with_unit_and_provenance(tmp_path):
    data = table(
        "fit",
        "asymfit.fit_expansion",
        "h",
        ("depth", "h"),
        ("label", "-", PRINTED),
        ("nu0", "1", DERIVED),
        inputs=("h",),
    )
    data.add(h=0.1, depth=0.25, label="leading", nu0=0.5)
    lines = write_csv(tmp_path / "fit.csv", data).read_text(encoding="utf-8").splitlines()

    assert lines[0] == "h[1|input],depth[h|computed],label[-|printed],nu0[1|derived]"
    assert lines[1] == "0.1,0.25,leading,0.5"
    assert all(c["header"] in lines[0] for c in data.schema()["columns"])
    with pytest.raises(ValueError):
        Column("lambda", provenance="guessed")


def test_config_file_is_overridden_by_flags(tmp_path, output_dir):
    config = tmp_path / "run.cfg"
    config.write_text("h = 0.5\neta = 3\n", encoding="utf-8")
    argv = ["harmonic", "--config", str(config), "--h", "0.1", "--output", str(output_dir)]
    assert main(argv) == 0
    parameters = read_json(output_dir / "result.json")["config"]["parameters"]
    assert parameters["h"] == 0.1
    assert parameters["eta"] == 3.0


def test_invalid_parameters_exit_with_two(output_dir):
    assert main(["ball", "--h", "2", "--b", "1", "--output", str(output_dir)]) == 2
    record = read_json(output_dir / "result.json")
    assert record["error"]["type"] == "ValidationError"
    assert record["error"]["field"] == "h"


def test_solver_failure_exits_with_three(output_dir):
    argv = ["robin1d", "--kappa", "50", "--h-list", "0.5,0.4,0.3", "--output", str(output_dir)]
    assert main(argv) == 3
    record = read_json(output_dir / "result.json")
    assert record["error"]["type"] == "InvalidWeight"
    assert record["error"]["details"]["h"] == 0.5


def test_grid_parsing():
    assert parse_grid(["h=0.1,0.05", "eta = 1, 2"]) == {"h": ["0.1", "0.05"], "eta": ["1", "2"]}
    for items in (["h"], ["h="], ["h=1", "h=2"]):
        with pytest.raises(ValidationError):
            parse_grid(items)


def test_grid_cells_are_validated_up_front():
    cells = expand_grid("harmonic", {"eta": "1"}, {"h": ["0.1", "0.05"], "m": ["0", "1"]})
    assert [c.values for c in cells] == [
        {"h": "0.1", "m": "0"},
        {"h": "0.1", "m": "1"},
        {"h": "0.05", "m": "0"},
        {"h": "0.05", "m": "1"},
    ]
    assert cells[3].directory == "cell_003"
    with pytest.raises(ValidationError) as info:
        expand_grid("harmonic", {}, {"h": ["0.1", "5"]})
    assert "cell 1" in info.value.message


def test_sweep_is_deterministic_across_worker_counts(tmp_path):
    base = ["sweep", "harmonic", "--grid", "h=0.1,0.05", "--grid", "eta=1,2", "--set", "m=0.5"]
    serial, pooled = tmp_path / "serial", tmp_path / "pooled"
    assert main([*base, "--workers", "1", "--output", str(serial)]) == 0
    assert main([*base, "--workers", "2", "--output", str(pooled)]) == 0

    text = (serial / "sweep.csv").read_bytes()
    assert text == (pooled / "sweep.csv").read_bytes()
    lines = text.decode("utf-8").splitlines()
    assert lines[0].startswith(
        "index[1|input],h[1|input],eta[1|input],success[-|computed],"
        "exit_code[1|computed],directory[-|input]"
    )
    assert len(lines) == 5
    assert (serial / "cell_003" / "result.json").exists()


def test_sweep_without_grid_exits_with_two(output_dir):
    assert main(["sweep", "harmonic", "--set", "h=0.1", "--output", str(output_dir)]) == 2


def test_sweep_where_every_cell_fails_exits_with_three(output_dir):
    argv = [
        "sweep",
        "robin1d",
        "--set",
        "h_list=0.5,0.4,0.3",
        "--grid",
        "kappa=49,50",
        "--output",
        str(output_dir),
    ]
    assert main(argv) == 3
    summary = read_json(output_dir / "sweep.json")
    assert [cell["success"] for cell in summary["cells"]] == [False, False]
