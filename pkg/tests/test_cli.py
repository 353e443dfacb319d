import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from latmult.cli import main
from latmult.config import ConfigError, from_mapping, normalize, parse_config, serialize
from latmult.lattice import GridFunction


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_kernel_command_matches_closed_form(tmp_path, capsys):
    code, out, _ = run(["kernel", "--set", "symbol=riesz:j=1", "--set", "box=16", "--out", str(tmp_path)], capsys)
    assert code == 0
    K = GridFunction.from_csv((tmp_path / "kernel.csv").read_text())
    n = np.arange(-16, 17)
    assert np.abs(K.values - (-1j / (np.pi * (2 * n + 1)))).max() <= 1e-9
    meta = json.loads((tmp_path / "kernel.json").read_text())
    for key in ("config", "seed", "version", "wall_clock_seconds"):
        assert key in meta


def test_hormander_command_on_translation_symbol(tmp_path, capsys):
    # the kernel of exp:k=3 is delta_3; every shift |s| <= S < 3/2 picks up two unit entries
    code, _, _ = run(["verify-hormander", "--set", "symbol=exp:k=3", "--set", "S=1", "--set", "R=16",
                      "--out", str(tmp_path), "--quiet"], capsys)
    assert code == 0
    rep = json.loads((tmp_path / "hormander.json").read_text())["result"]
    assert rep["hormander"]["coarse"] == pytest.approx(2.0) and rep["hormander"]["fine"] == pytest.approx(2.0)


def test_norm_command_is_deterministic(tmp_path, capsys):
    args = ["norm", "--set", "symbol=riesz:j=1", "--set", "box=8", "--set", "trials=3", "--seed", "5", "--quiet"]
    assert run(args + ["--out", str(tmp_path / "a")], capsys)[0] == 0
    assert run(args + ["--out", str(tmp_path / "b")], capsys)[0] == 0
    a = json.loads((tmp_path / "a" / "norm.json").read_text())["result"]
    b = json.loads((tmp_path / "b" / "norm.json").read_text())["result"]
    assert a["estimate"]["lower_bound"] == b["estimate"]["lower_bound"]
    assert (tmp_path / "a" / "witness.csv").read_text() == (tmp_path / "b" / "witness.csv").read_text()


def test_randomized_command_needs_seed(tmp_path, capsys):
    code, _, err = run(["norm", "--set", "symbol=riesz:j=1", "--out", str(tmp_path)], capsys)
    assert code == 2 and json.loads(err)["field"] == "seed"


def test_unknown_key_is_named(tmp_path, capsys):
    code, _, err = run(["kernel", "--set", "symbol=riesz:j=1", "--set", "boxx=3", "--out", str(tmp_path)], capsys)
    doc = json.loads(err)
    assert code == 2 and doc["field"] == "boxx" and "boxx" in doc["message"]


def test_invalid_json_reports_position(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"command": "kernel",\n "symbol": }')
    code, _, err = run(["--config", str(cfg)], capsys)
    assert code == 2 and "line 2" in json.loads(err)["message"]


def test_nonconvergence_exit_code(tmp_path, capsys):
    code, _, err = run(["kernel", "--set", "symbol=imagpow:t=0.5", "--set", "box=4", "--set", "tol=1e-14",
                        "--out", str(tmp_path)], capsys)
    assert code == 3 and json.loads(err)["error"] == "nonconvergence"


def test_wave_and_strichartz_commands(tmp_path, capsys):
    code, _, _ = run(["wave", "--set", "f=delta", "--set", "times=[0, 1]", "--set", "box=4",
                      "--out", str(tmp_path / "w"), "--quiet"], capsys)
    assert code == 0 and (tmp_path / "w" / "wave_t1.csv").exists()
    code, _, _ = run(["strichartz", "--seed", "1", "--set", "p=1.5", "--set", "q=3", "--set", "box=4",
                      "--set", "trials=3", "--out", str(tmp_path / "s"), "--quiet"], capsys)
    rep = json.loads((tmp_path / "s" / "strichartz.json").read_text())
    assert code == 0 and rep["seed"] == 1 and rep["result"]["max_ratio"] > 0


def test_config_file_round_trip(tmp_path, capsys):
    cfg = parse_config(json.dumps({"command": "verify-weak", "symbol": "negpower:r=1", "d": 2, "grid": 128}))
    path = tmp_path / "cfg.json"
    path.write_text(serialize(cfg))
    code, _, _ = run(["--config", str(path), "--out", str(tmp_path / "o"), "--quiet"], capsys)
    assert code == 0
    embedded = json.loads((tmp_path / "o" / "weak.json").read_text())["config"]
    assert embedded["grid"] == 128 and embedded["symbol"] == "negpower:r=1"


configs = st.fixed_dictionaries(
    {"command": st.sampled_from(["kernel", "verify-mikhlin", "norm"]), "symbol": st.just("riesz:j=1")},
    optional={
        "box": st.integers(0, 100),
        "tol": st.floats(1e-14, 1e-2),
        "seed": st.integers(0, 2**64 - 1),
        "p": st.one_of(st.floats(1, 10), st.just("inf")),
        "trials": st.integers(1, 50),
        "accept_nonconverged": st.booleans(),
        "times": st.lists(st.floats(0, 10), min_size=1, max_size=4),
    },
)


@given(configs)
def test_config_serialization_round_trip(data):
    if data["command"] == "norm":
        data.setdefault("seed", 0)
    cfg = from_mapping(data)
    again = parse_config(serialize(cfg))
    assert again == cfg
    assert normalize(json.loads(serialize(cfg))) == cfg.to_dict()


@pytest.mark.parametrize(
    "bad,field",
    [
        ({"command": "kernel"}, "symbol"),
        ({"command": "nope"}, "command"),
        ({"command": "kernel", "symbol": "riesz:j=1", "d": 4}, "d"),
        ({"command": "kernel", "symbol": "riesz:j=1", "tol": -1}, "tol"),
        ({"command": "kernel", "symbol": "riesz:j=1", "box": "big"}, "box"),
        ({"command": "wave", "f": "random"}, "seed"),
        ({"symbol": "riesz:j=1"}, "command"),
    ],
)
def test_config_errors_name_the_field(bad, field):
    with pytest.raises(ConfigError) as exc:
        from_mapping(bad)
    assert exc.value.field == field


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "latmult", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "latmult" in res.stdout
    res = subprocess.run([sys.executable, "-m", "latmult", "kernel", "--set", "boxx=1"], capture_output=True, text=True)
    assert res.returncode == 2
