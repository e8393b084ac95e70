"""Command-line surface: parsing, configuration layering, and exit codes."""

import json
import re

import pytest

from vertmass.cli import (
    RunConfig,
    UsageError,
    assemble_config,
    build_parser,
    exponent_config_for,
    main,
    parse_weights,
    read_config_file,
    validate_config,
)

CHECK_LINE = re.compile(r"^[a-z0-9_]+=\S+ measured=\S+ budget=\S+ status=(pass|fail)$")


def test_parse_weights_forms():
    assert parse_weights("12") == [12]
    assert parse_weights("12:18") == [12, 14, 16, 18]
    assert parse_weights("12:24:4") == [12, 16, 20, 24]
    assert parse_weights("12,16,20") == [12, 16, 20]
    assert parse_weights("12:14,30") == [12, 14, 30]
    assert parse_weights("") == []


def test_parse_weights_rejects_garbage():
    for bad in ("twelve", "12:", "12:20:0", "12;14", "12:20:two"):
        with pytest.raises(UsageError):
            parse_weights(bad)
    # a reversed range is empty, not an error
    assert parse_weights("12:10") == []


def test_config_file_layering(tmp_path):
    path = tmp_path / "run.conf"
    path.write_text("# comment line\nK = 30\ntheta=0.9\nalpha = 2.5\n\n")
    parser = build_parser()
    ns = parser.parse_args(["variance", "--config", str(path), "--K", "50"])
    cfg = assemble_config(ns)
    assert cfg.big_k == 50.0  # flag beats file
    assert cfg.alpha == 2.5  # file beats default
    assert cfg.theta == 0.9
    assert cfg.bump == "symmetric"  # untouched default


def test_config_file_unknown_key(tmp_path):
    path = tmp_path / "run.conf"
    path.write_text("K=30\nwidth=4\n")
    with pytest.raises(UsageError, match=r"run\.conf:2: unknown key"):
        read_config_file(str(path))


def test_config_file_missing(tmp_path):
    rc = main(["variance", "--config", str(tmp_path / "absent.conf")])
    assert rc == 2


def test_validate_config_bounds():
    good = RunConfig()
    validate_config(good)
    import dataclasses

    for field, value in [
        ("big_k", -1.0),
        ("theta", 1.5),
        ("alpha", 1.0),
        ("threads", 0),
        ("tolerance_scale", 0.0),
        ("contour_height", -3.0),
        ("trunc", 0),
    ]:
        with pytest.raises(UsageError):
            validate_config(dataclasses.replace(good, **{field: value}))


def test_exponent_derivation_tracks_theta():
    cfg = exponent_config_for(0.9)
    assert cfg.theta == pytest.approx(0.9)
    cfg95 = exponent_config_for(0.95)
    assert cfg95.delta > 0.5 * (1 - 0.95 + cfg95.eps)
    assert cfg95.theta + cfg95.eta - cfg95.delta > 1.0
    with pytest.raises(ValueError):
        exponent_config_for(0.8)


def test_unknown_subcommand_exits_two():
    with pytest.raises(SystemExit) as err:
        main(["inspect"])
    assert err.value.code == 2


def test_unknown_suite_exits_two():
    with pytest.raises(SystemExit) as err:
        main(["verify", "bessel"])
    assert err.value.code == 2


def test_theta_without_admissible_exponents_exits_two(capsys, cache_dir):
    rc = main(["variance", "--theta", "0.8", "--K", "20", "--cache-dir", cache_dir])
    assert rc == 2
    assert "usage error" in capsys.readouterr().err


def test_eigenforms_build_and_cache_flow(tmp_path, capsys):
    cache = str(tmp_path / "cache")
    rc = main(["eigenforms", "--weights", "12", "--cache-dir", cache, "--trunc", "300"])
    assert rc == 0
    assert "eigenforms k=12 dim=1 built" in capsys.readouterr().out
    rc = main(["eigenforms", "--weights", "12", "--cache-dir", cache, "--trunc", "300"])
    assert rc == 0
    assert "eigenforms k=12 dim=1 cached" in capsys.readouterr().out


def test_eigenforms_empty_range(capsys):
    rc = main(["eigenforms", "--weights", ""])
    assert rc == 0
    assert "nothing to build" in capsys.readouterr().out


def test_eigenforms_odd_weight_exits_two(capsys):
    rc = main(["eigenforms", "--weights", "13"])
    assert rc == 2


def test_verify_kloosterman_output_shape(capsys):
    rc = main(["verify", "kloosterman"])
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    summary = lines[-1]
    assert re.match(r"^suite=kloosterman checks=\d+ failures=0$", summary)
    for line in lines[:-1]:
        assert CHECK_LINE.match(line), line
        assert line.endswith("status=pass")


def test_verify_honors_tolerance_scale(capsys):
    rc = main(["verify", "stationary", "--tolerance-scale", "1e-30"])
    assert rc == 1
    out = capsys.readouterr().out
    assert "status=fail" in out


def test_variance_missing_cache_lists_remedy(tmp_path, capsys):
    rc = main(["variance", "--K", "40", "--cache-dir", str(tmp_path / "empty")])
    assert rc == 1
    err = capsys.readouterr().err
    assert "missing eigen-data" in err
    assert "vertmass eigenforms --weights" in err


def test_mass_csv_to_stdout(capsys, cache_dir):
    rc = main(["mass", "--weights", "12", "--cache-dir", cache_dir])
    assert rc == 0
    out = capsys.readouterr().out
    header, row = out.strip().splitlines()
    assert header.startswith("k,form_index,psi_id,mu,")
    assert row.startswith("12,0,symmetric_a2,")


def test_mass_outfile_deterministic(tmp_path, capsys, cache_dir):
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    assert main(["mass", "--weights", "12,16", "--cache-dir", cache_dir, "--out", str(out1)]) == 0
    assert main(["mass", "--weights", "12,16", "--cache-dir", cache_dir, "--out", str(out2)]) == 0
    capsys.readouterr()
    assert out1.read_bytes() == out2.read_bytes()
    assert len(out1.read_text().strip().splitlines()) == 3


def test_mass_odd_weight_exits_two():
    assert main(["mass", "--weights", "15"]) == 2


def test_variance_writes_report_and_ratios(tmp_path, capsys, cache_dir):
    out = tmp_path / "var.json"
    rc = main(["variance", "--K", "20", "--cache-dir", cache_dir, "--out", str(out)])
    assert rc == 0
    stdout = capsys.readouterr().out
    for name in ("t1=", "t2=", "t3=", "t4=", "diag_error_first_form="):
        assert name in stdout
    payload = json.loads(out.read_text())
    assert payload["window"]["bigK"] == 20.0
    ratios = (tmp_path / "var_ratios.csv").read_text().strip().splitlines()
    assert ratios[0] == "name,value"
    assert len(ratios) == 6


def test_census_reports_counts(capsys, cache_dir):
    rc = main(["census", "--K", "20", "--cache-dir", cache_dir, "--threshold", "1e9"])
    assert rc == 0
    out = capsys.readouterr().out.strip()
    m = re.match(r"^census total=(\d+) exceeders=(\d+) threshold=\S+ fraction=\S+$", out)
    assert m
    assert int(m.group(2)) == 0
    assert int(m.group(1)) > 0
