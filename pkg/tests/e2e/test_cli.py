import json

import pytest

from QLame.cli import EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_NO_SOLUTION, EXIT_NUMERICAL, EXIT_OK, main


def test_verify_free_case_writes_report(tmp_path, capsys):
    out = tmp_path / "report.json"
    assert main(["verify", "--m", "0", "--out", str(out)]) == EXIT_OK
    report = json.loads(out.read_text())
    assert report["summary"]["overall"] is True
    assert report["summary"]["failed"] == 0
    assert report["config"]["m_list"] == [0]
    assert "checks passed" in capsys.readouterr().out


def test_verify_reports_failures():
    assert main(["verify", "--m", "0", "--tol-validation", "1e-300"]) == EXIT_CHECK_FAILED


def test_invalid_tau_is_a_config_error(capsys):
    assert main(["verify", "--m", "0", "--tau-im", "-1"]) == EXIT_CONFIG
    assert "configuration error" in capsys.readouterr().err


def test_bad_m_list_is_a_config_error():
    assert main(["verify", "--m", "one"]) == EXIT_CONFIG


def test_usage_error_exits_with_two():
    with pytest.raises(SystemExit) as exc_info:
        main(["verify", "--seed"])
    assert exc_info.value.code == 2


def test_flags_override_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("m = 0\nseed = 2\ntol.eigen = 1e-7\n")
    out = tmp_path / "report.json"
    assert main(["verify", "--config", str(cfg), "--seed", "9", "--out", str(out)]) == EXIT_OK
    config = json.loads(out.read_text())["config"]
    assert config["seed"] == 9
    assert config["tolerances"]["eigen"] == 1e-7


def test_bethe_prints_json(capsys):
    assert main(["bethe", "--m", "0", "--c", "0.3"]) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert data["c"] == [0.3, 0.0]
    assert data["points"]["0"][0]["residual"] == 0.0


def test_bethe_without_solutions_has_its_own_exit_code(capsys):
    assert main(["bethe", "--m", "1", "--c", "0.3", "--starts", "0"]) == EXIT_NO_SOLUTION
    captured = capsys.readouterr()
    assert json.loads(captured.out)["points"] == {"1": []}
    assert "no Bethe solution" in captured.err
    assert EXIT_NO_SOLUTION not in (EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_NUMERICAL)


def test_curve_files_are_reproducible(tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    for out in (first, second):
        assert main(["curve", "--m", "0", "--count", "20", "--out", str(out)]) == EXIT_OK
    fit = json.loads((first / "curve_m0_fit.json").read_text())
    assert len(fit["coeffs"]) == 2
    assert fit["coeffs"][0][0] == pytest.approx(-4.0, abs=1e-8)
    for name in ("curve_m0_samples.csv", "curve_m0_fit.json"):
        assert (first / name).read_bytes() == (second / name).read_bytes()
    assert len((first / "curve_m0_samples.csv").read_text().splitlines()) == 21


def test_curve_with_too_few_samples():
    assert main(["curve", "--m", "0", "--count", "2"]) == EXIT_NUMERICAL


@pytest.mark.slow
def test_verify_one_root(tmp_path):
    out = tmp_path / "report.json"
    assert main(["verify", "--m", "1", "--out", str(out)]) == EXIT_OK


@pytest.mark.slow
def test_bethe_two_roots(capsys):
    assert main(["bethe", "--m", "2", "--c", "0.25"]) == EXIT_OK
    points = json.loads(capsys.readouterr().out)["points"]["2"]
    assert points
    assert all(p["residual"] < 1e-10 for p in points)
