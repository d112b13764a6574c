import json
from pathlib import Path

import pytest

from geomlaw.cli import run
from geomlaw.config import load_config, validate_config, validate_dict

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

BASE = {
    "name": "t",
    "seed": 1,
    "density": {"kind": "uniform_box", "lo": [0, 0], "hi": [1, 1]},
    "model": {"kind": "mst"},
    "functional": {"name": "weighted_length", "phi": {"kind": "power", "alpha": 1}},
    "n_grid": [50, 200],
    "replicates": 3,
}


def write(tmp_path, spec, name="c.json"):
    path = tmp_path / name
    path.write_text(json.dumps(spec, indent=2))
    return path


def with_(**changes):
    spec = json.loads(json.dumps(BASE))
    spec.update(changes)
    return spec


def test_shipped_configs_validate():
    for path in CONFIGS.glob("*.json"):
        report = validate_config(path)
        assert report.ok == (not path.name.startswith("bad_")), path.name


def test_voronoi_power_rejected_with_line(capsys):
    code = run(["validate", str(CONFIGS / "bad_voronoi_power.json")])
    out = capsys.readouterr().out
    assert code == 2
    assert "phi(inf) = 0" in out and out.startswith("line 5:")


def test_voronoi_in_three_dimensions_rejected(tmp_path):
    spec = with_(density={"kind": "uniform_box", "lo": [0, 0, 0], "hi": [1, 1, 1]},
                 model={"kind": "voronoi"},
                 functional={"name": "weighted_length",
                             "phi": {"kind": "power", "alpha": 1, "at_infinity": 0}})
    report = validate_config(write(tmp_path, spec))
    assert not report.ok and "d = 2" in report.messages[0]


def test_valid_config_echo(tmp_path, capsys):
    assert run(["validate", str(write(tmp_path, BASE))]) == 0
    out = capsys.readouterr().out
    assert out.startswith("ok\n")
    echo = json.loads(out[3:])
    assert validate_dict(echo).ok


def test_malformed_json_position(tmp_path):
    path = tmp_path / "m.json"
    path.write_text('{\n  "name": "x",\n  "seed": ,\n}')
    report = validate_config(path)
    assert not report.ok and report.messages[0].startswith("line 3 column")


def test_schema_errors_are_located(tmp_path):
    spec = with_(functional={"name": "mystery"})
    report = validate_config(write(tmp_path, spec))
    assert not report.ok
    assert report.messages[0].startswith("line ") and "functional/name" in report.messages[0]
    assert not validate_dict(with_(n_grid=[200, 50])).ok
    assert not validate_dict(with_(replicates=1)).ok


def test_unknown_subcommand_and_flag():
    with pytest.raises(SystemExit) as exc:
        run(["frobnicate"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        run(["converge", "--config", "x.json", "--bogus"])
    assert exc.value.code == 2


def test_missing_config_file_is_config_error(tmp_path):
    assert run(["converge", "--config", str(tmp_path / "none.json")]) == 2


def test_sample_and_graph_passthrough(tmp_path):
    cfg = write(tmp_path, BASE)
    assert run(["sample", "--config", str(cfg), "--n", "30", "--out", str(tmp_path)]) == 0
    pts = tmp_path / "t_sample.csv"
    assert len(pts.read_text().splitlines()) == 30
    out = tmp_path / "edges.csv"
    assert run(["graph", "--kind", "mst", "--in", str(pts), "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 29
    assert run(["graph", "--kind", "knn", "--k", "2", "--directed", "--in", str(pts),
                "--out", str(tmp_path / "g.json")]) == 0
    doc = json.loads((tmp_path / "g.json").read_text())
    assert doc["directed"] and len(doc["edges"]) == 60
    assert run(["sample", "--tau", "2", "--side", "3", "--origin", "--out", str(tmp_path)]) == 0


def test_converge_deterministic_and_seed_precedence(tmp_path, monkeypatch):
    cfg = write(tmp_path, BASE)
    a, b, c, d = (tmp_path / x for x in "abcd")
    assert run(["converge", "--config", str(cfg), "--out", str(a)]) == 0
    assert run(["converge", "--config", str(cfg), "--out", str(b), "--threads", "3"]) == 0
    table = "t_converge.csv"
    assert (a / table).read_bytes() == (b / table).read_bytes()
    monkeypatch.setenv("GEOMLAW_SEED", "99")
    assert run(["converge", "--config", str(cfg), "--out", str(c)]) == 0
    assert (a / table).read_bytes() != (c / table).read_bytes()
    assert run(["converge", "--config", str(cfg), "--out", str(d), "--seed", "1"]) == 0
    assert (a / table).read_bytes() == (d / table).read_bytes()
    summary = json.loads((c / "t_converge.summary.json").read_text())
    assert summary["config"]["seed"] == 99


def test_echo_round_trip(tmp_path):
    cfg = write(tmp_path, with_(limit={"source": "fixed", "value": 0.7}))
    assert run(["converge", "--config", str(cfg), "--out", str(tmp_path / "a")]) == 0
    echo = json.loads((tmp_path / "a" / "t_converge.summary.json").read_text())["config"]
    again = write(tmp_path, echo, "echo.json")
    assert run(["converge", "--config", str(again), "--out", str(tmp_path / "b")]) == 0
    assert ((tmp_path / "a" / "t_converge.csv").read_bytes()
            == (tmp_path / "b" / "t_converge.csv").read_bytes())


def test_json_format(tmp_path):
    cfg = write(tmp_path, BASE)
    assert run(["converge", "--config", str(cfg), "--out", str(tmp_path), "--format", "json"]) == 0
    rows = json.loads((tmp_path / "t_converge.json").read_text())
    assert [r["n"] for r in rows] == [50, 200]


def test_other_commands(tmp_path):
    couple = write(tmp_path, with_(model={"kind": "points"}, functional={"name": "constant"},
                                   coupling={"K": 1.0}, replicates=20), "couple.json")
    assert run(["couple", "--config", str(couple), "--out", str(tmp_path)]) == 0
    pack = write(tmp_path, with_(density={"kind": "uniform_box", "lo": [0], "hi": [1]},
                                 model={"kind": "rsa"}, functional={"name": "packed"}), "pack.json")
    assert run(["pack", "--config", str(pack), "--out", str(tmp_path)]) == 0
    assert (tmp_path / "t_pack.csv").read_text().startswith("n,mean,stderr,replicates\n")
    boolean = write(tmp_path, with_(model={"kind": "boolean",
                                           "radius": {"kind": "constant", "params": [0.3]}},
                                    functional={"name": "clumps"}), "b.json")
    assert run(["boolean", "--config", str(boolean), "--out", str(tmp_path)]) == 0
    stats = json.loads((tmp_path / "t_boolean.summary.json").read_text())["stats"]
    assert sum(int(k) * v for k, v in stats["U_k"].items()) == 200
    assert run(["functional", "--config", str(boolean), "--n", "100"]) == 0
    lim = write(tmp_path, with_(model={"kind": "knn", "k": 1}, functional={"name": "components"},
                                probe={"replicates": 10},
                                limit={"source": "rhs_integral", "outer_samples": 2,
                                       "inner_replicates": 5}), "lim.json")
    assert run(["limit", "--config", str(lim), "--out", str(tmp_path)]) == 0


def test_unstabilized_limit_exits_3(tmp_path):
    cfg = write(tmp_path, with_(probe={"radii": [0.01, 0.02], "replicates": 4},
                                limit={"source": "rhs_integral", "outer_samples": 1,
                                       "inner_replicates": 4}))
    assert run(["limit", "--config", str(cfg), "--out", str(tmp_path)]) == 3


def test_load_config_defaults():
    cfg = load_config(CONFIGS / "voronoi_uniform.json")
    assert cfg.dim == 2 and cfg.phi.value_at_infinity == 0
