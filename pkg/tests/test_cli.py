import json

import pytest

from fracheat.cli import ConfigError, config_digest, load_config, main, resolve_config, resolved_dict

MINIMAL = {
    "dimension": 1,
    "alpha": 1.5,
    "potential": [{"weight": 1.0, "center": 0.0, "sharpness": 1.0}],
}


def write_config(tmp_path, extra=None, name="run.json"):
    cfg = dict(MINIMAL)
    if extra:
        cfg.update(extra)
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def test_minimal_config_fills_defaults(tmp_path):
    cfg = load_config(write_config(tmp_path))
    assert cfg.alpha == 1.5
    assert cfg.grid.points_per_axis == 256 and cfg.grid.half_extent == 16.0
    assert cfg.t_list == (0.02, 0.05, 0.1, 0.2)
    assert cfg.mc.n_paths == 200_000 and cfg.mc.seed == 0
    assert cfg.n_max == 5 and cfg.gamma is None
    assert cfg.formats == ("csv", "json")


def test_unknown_keys_are_rejected(tmp_path):
    with pytest.raises(ConfigError):
        load_config(write_config(tmp_path, {"alpha_decay": 2}))
    with pytest.raises(ConfigError):
        load_config(write_config(tmp_path, {"mc": {"paths": 100}}))
    with pytest.raises(ConfigError):
        load_config(write_config(tmp_path, {"grid": {"points": 64}}))


def test_config_validation_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(write_config(tmp_path, {"alpha": 2.5}))
    with pytest.raises(ConfigError):
        load_config(write_config(tmp_path, {"t_list": []}))
    with pytest.raises(ConfigError):
        load_config(write_config(tmp_path, {"t_list": [0.1, -0.2]}))
    with pytest.raises(ConfigError):
        load_config(write_config(tmp_path, {"validate": {"n_max": 7}}))
    with pytest.raises(ConfigError):
        load_config(write_config(tmp_path, {"validate": {"gamma": 1.4}}))
    with pytest.raises(ConfigError):
        load_config(write_config(tmp_path, {"output": {"format": "xml"}}))
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.json"))
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(str(bad))


def test_unknown_key_exit_code(tmp_path, capsys):
    code = main(["coeffs", "--config", write_config(tmp_path, {"bogus": 1})])
    assert code == 2
    assert "config error" in capsys.readouterr().err


def test_coeffs_prints_exact_weights(tmp_path, capsys):
    out_dir = tmp_path / "out"
    code = main(
        [
            "coeffs",
            "--config",
            write_config(tmp_path),
            "--weights",
            "--out",
            str(out_dir),
        ]
    )
    assert code == 0
    text = capsys.readouterr().out
    assert "A(1,(1,)) = 1/6" in text
    assert "A(2,(2,)) = 1/12" in text
    assert "A(2,(1, 1)) = 1/60" in text
    assert "A(0,(0,)) = 1/2" in text
    doc = json.loads((out_dir / "coeffs.json").read_text())
    assert "C4" in doc["entries"] and "C(2,2)" in doc["entries"]
    assert {"n": 1, "composition": [1], "value": "1/6"} in doc["weights"]
    assert (out_dir / "coeffs.csv").read_text().startswith("label,value,route,grid")


def test_mc_runs_and_seed_override_changes_digest(tmp_path, capsys):
    config = write_config(tmp_path, {"mc": {"n_paths": 2000}, "t_list": [0.1]})
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(["mc", "--config", config, "--out", str(out_a), "--format", "json"]) == 0
    assert main(["mc", "--config", config, "--out", str(out_b), "--seed", "9", "--format", "json"]) == 0
    doc_a = json.loads((out_a / "mc.json").read_text())
    doc_b = json.loads((out_b / "mc.json").read_text())
    assert doc_a["estimates"][0]["estimate_digest"] != doc_b["estimates"][0]["estimate_digest"]
    assert doc_a["estimates"][0]["mean"] != doc_b["estimates"][0]["mean"]
    assert not (out_a / "mc.csv").exists()  # json-only format requested


def test_validate_subcommand_passes(tmp_path, capsys):
    config = write_config(
        tmp_path,
        {"mc": {"n_paths": 50_000}, "t_list": [0.05, 0.1], "validate": {"gamma": 0.5}},
    )
    out_dir = tmp_path / "val"
    code = main(["validate", "--config", config, "--out", str(out_dir)])
    assert code == 0
    text = capsys.readouterr().out
    assert "PASS" in text and "FAIL" not in text
    assert "0 failed" in text
    doc = json.loads((out_dir / "validate.json").read_text())
    assert all(c["passed"] is True for c in doc["checks"])
    assert all(isinstance(r["ok"], bool) for r in doc["positivity"])
    header, *rows = (out_dir / "validate.csv").read_text().strip().splitlines()
    assert header == "kind,name,passed,value,margin"
    assert len(rows) == len(doc["checks"]) + len(doc["positivity"])


def test_report_subcommand_writes_files(tmp_path, capsys):
    config = write_config(
        tmp_path,
        {"mc": {"n_paths": 100_000}, "t_list": [0.1, 0.2, 0.4, 1.1]},
    )
    out_dir = tmp_path / "rep"
    code = main(["report", "--config", config, "--out", str(out_dir)])
    assert code == 0
    doc = json.loads((out_dir / "report.json").read_text())
    assert len(doc["rows"]) == 4
    csv_lines = (out_dir / "report.csv").read_text().strip().splitlines()
    assert len(csv_lines) == 5
    assert "order fit" in capsys.readouterr().out


def test_sampler_selftest_quick(capsys):
    assert main(["sampler-selftest", "--quick"]) == 0
    text = capsys.readouterr().out
    assert "0 failed" in text


def test_resolved_dict_round_trips(tmp_path):
    config = write_config(
        tmp_path,
        {
            "grid": {"points_per_axis": 128, "half_extent": 12.0},
            "t_list": [0.3, 0.1],
            "mc": {"n_paths": 5000, "proposal": {"sigma": 2.5}},
            "validate": {"n_max": 3, "gamma": 0.4},
            "output": {"format": "csv"},
        },
    )
    cfg = load_config(config)
    again = resolve_config(resolved_dict(cfg))
    assert config_digest(again) == config_digest(cfg)
    assert again.t_list == cfg.t_list == (0.1, 0.3)
    assert again.mc == cfg.mc


def test_config_digest_ignores_output_routing(tmp_path):
    plain = load_config(write_config(tmp_path, {}, name="plain.json"))
    routed = load_config(
        write_config(
            tmp_path,
            {"output": {"directory": "elsewhere", "format": "json"}},
            name="routed.json",
        )
    )
    assert config_digest(routed) == config_digest(plain)


def test_overflowing_run_exits_one(tmp_path, capsys):
    config = write_config(
        tmp_path,
        {
            "alpha": 2.0,
            "potential": [{"weight": -800.0, "center": 0.0, "sharpness": 1.0}],
            "t_list": [50.0],
            "mc": {"n_paths": 1000, "m_steps": 8},
        },
    )
    code = main(["mc", "--config", config])
    assert code == 1
    assert "non-finite" in capsys.readouterr().err


def test_no_arguments_is_a_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2
