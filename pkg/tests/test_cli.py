import json
import math

import numpy as np
import pytest

from qtraj import cli
from qtraj.errors import InvariantViolation
from qtraj.io import SERIES_COLUMNS, read_csv
from qtraj.info import LEDGER_COLUMNS


def write_config(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def run(tmp_path, data, *extra):
    out = tmp_path / "out"
    code = cli.main(["run", write_config(tmp_path, data), "--output-dir", str(out), *extra])
    return code, out


def test_channel_series(tmp_path):
    code, out = run(tmp_path, {"experiment": "channel", "initial_state": [1, 1], "steps": 30})
    assert code == 0
    header, rows = read_csv(out / "series.csv")
    assert tuple(header) == SERIES_COLUMNS
    t = rows[:, 0]
    np.testing.assert_allclose(rows[:, 3], 0.5 * math.cos(0.2) ** t, atol=1e-13)
    np.testing.assert_allclose(rows[:, 1] + rows[:, 7], 1.0, atol=1e-13)
    echo = json.loads((out / "config.echo.json").read_text())
    assert echo["experiment"] == "channel" and echo["steps"] == 30


def test_lindblad_close_to_channel(tmp_path, capsys):
    code, out = run(tmp_path, {"experiment": "lindblad", "epsilon": 0.05, "initial_state": [1, 1], "steps": 50})
    assert code == 0
    summary = capsys.readouterr().out
    dev = float(summary.split("max_deviation_from_oracle: ")[1].split()[0])
    assert dev < 0.05 ** 4 * 50  # O(eps^4 t)
    assert "trace_drift" in summary


def test_randomness_pump(tmp_path):
    code, out = run(tmp_path, {"experiment": "randomness-pump", "steps": 10})
    assert code == 0
    header, rows = read_csv(out / "ledger.csv")
    assert tuple(header) == LEDGER_COLUMNS
    assert rows.shape == (10, 5)
    np.testing.assert_array_equal(rows[:, 0], np.arange(1, 11))
    np.testing.assert_allclose(rows[:, 1], 1.0, atol=1e-12)
    np.testing.assert_allclose(rows[:, 2], 0.0, atol=1e-10)


def test_info_gain_cnot(tmp_path, capsys):
    out = tmp_path / "z"
    assert cli.main(["run", "preset:cnot-z-info", "--output-dir", str(out)]) == 0
    _, rows = read_csv(out / "ledger.csv")
    assert rows[0, 1] == pytest.approx(1.0, abs=1e-10)
    assert rows[0, 2] == pytest.approx(1.0, abs=1e-10)
    out = tmp_path / "x"
    assert cli.main(["run", "preset:cnot-x-info", "--output-dir", str(out)]) == 0
    _, rows = read_csv(out / "ledger.csv")
    assert rows[0, 2] == pytest.approx(0.0, abs=1e-10)
    assert rows[0, 4] == pytest.approx(1.0, abs=1e-10)


def test_trajectories_byte_identical(tmp_path):
    data = {"experiment": "trajectories", "unraveling": "jump", "initial_state": [1, 1],
            "steps": 40, "ensemble": 50, "seed": 42}
    a, b = tmp_path / "a", tmp_path / "b"
    path = write_config(tmp_path, data)
    assert cli.main(["run", path, "--output-dir", str(a)]) == 0
    assert cli.main(["run", path, "--output-dir", str(b)]) == 0
    for name in ("trajectories.json", "series.csv", "ledger.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    echo_a = json.loads((a / "config.echo.json").read_text())
    echo_b = json.loads((b / "config.echo.json").read_text())
    assert echo_a.pop("output_dir") != echo_b.pop("output_dir") and echo_a == echo_b
    doc = json.loads((a / "trajectories.json").read_text())
    assert doc["seed"] == 42 and doc["unraveling"] == "jump" and len(doc["trajectories"]) == 50
    c = tmp_path / "c"
    assert cli.main(["run", path, "--output-dir", str(c), "--seed", "43"]) == 0
    assert (c / "trajectories.json").read_bytes() != (a / "trajectories.json").read_bytes()


def test_ensemble_override(tmp_path):
    code, out = run(tmp_path, {"experiment": "trajectories", "unraveling": "diffusion",
                               "initial_state": [1, 1], "steps": 5, "ensemble": 3}, "--ensemble", "7")
    assert code == 0
    assert len(json.loads((out / "trajectories.json").read_text())["trajectories"]) == 7


def test_echo_round_trip(tmp_path):
    code, out = run(tmp_path, {"experiment": "channel", "epsilon": 0.2, "steps": 4})
    assert code == 0
    echo = out / "config.echo.json"
    again = tmp_path / "again"
    assert cli.main(["run", str(echo), "--output-dir", str(again)]) == 0
    assert (out / "series.csv").read_bytes() == (again / "series.csv").read_bytes()


def test_output_format(tmp_path):
    code, out = run(tmp_path, {"experiment": "channel", "initial_state": [0.6, 0.8], "steps": 3})
    raw = (out / "series.csv").read_bytes()
    assert b"\r" not in raw and raw.endswith(b"\n")
    row = raw.decode().splitlines()[2].split(",")
    assert float(row[3]) == pytest.approx(0.48 * math.cos(0.2), abs=1e-15)
    assert len(row[3].lstrip("-").replace(".", "").lstrip("0").split("e")[0]) >= 16


@pytest.mark.parametrize("data, fragment", [
    ({"experiment": "channel", "bogus": 1}, "bogus"),
    ({"experiment": "teleport"}, "experiment"),
    ({"experiment": "channel", "epsilon": -1}, "epsilon"),
    ({"experiment": "channel", "steps": 2.5}, "steps"),
    ({"experiment": "channel", "probe_axis": [1, 1, 0]}, "probe_axis"),
    ({"experiment": "trajectories", "unraveling": "jump", "interaction": "cnot", "epsilon": 3.14159}, "jump"),
    ({"experiment": "trajectories", "initial_state": "maximally-mixed"}, "initial_state"),
])
def test_bad_config_exit_2(tmp_path, capsys, data, fragment):
    code, out = run(tmp_path, data)
    assert code == 2
    assert fragment in capsys.readouterr().err
    assert not out.exists()


def test_bad_json_reports_position(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "experiment": "channel",\n  "steps": \n}')
    assert cli.main(["validate", str(path)]) == 2
    err = capsys.readouterr().err
    assert "line 4" in err and "column" in err


def test_missing_file(tmp_path, capsys):
    assert cli.main(["validate", str(tmp_path / "nope.json")]) == 2


def test_invariant_exit_3(tmp_path, monkeypatch, capsys):
    def boom(conf):
        raise InvariantViolation("positivity", "negative eigenvalue")
    monkeypatch.setattr(cli, "run_experiment", boom)
    code, _ = run(tmp_path, {"experiment": "channel"})
    assert code == 3
    assert "positivity" in capsys.readouterr().err


def test_validate_and_presets(tmp_path, capsys):
    assert cli.main(["validate", write_config(tmp_path, {"experiment": "lindblad"})]) == 0
    assert "ok: lindblad" in capsys.readouterr().out
    assert cli.main(["presets", "list"]) == 0
    listed = capsys.readouterr().out
    for name in cli.PRESETS:
        assert name in listed
        assert cli.main(["validate", f"preset:{name}"]) == 0
    capsys.readouterr()
    assert cli.main(["presets", "show", "jump"]) == 0
    shown = json.loads(capsys.readouterr().out)
    assert shown["ensemble"] == 20000 and shown["unraveling"] == "jump"
    assert cli.main(["presets", "show", "nope"]) == 2
    assert cli.main(["validate", "preset:nope"]) == 2
