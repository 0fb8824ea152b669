"""Tests for the hawkes-nphc command line."""

import json

import numpy as np
import pytest
from loguru import logger

from hawkes_nphc.io import read_manifest, read_matrix_csv, write_matrix_csv, write_vector_csv
from hawkes_nphc.main import build_parser, main

CUSTOM = ["--preset", "custom", "--d", "3", "--shape", "exponential", "--alpha", "0.2",
          "--horizon", "500", "--h", "5", "--seed", "7"]
SOLVER = ["--max-iters", "300"]


@pytest.fixture(autouse=True)
def reset_logging():
    yield
    logger.remove()
    logger.disable("hawkes_nphc")


def exit_code(argv) -> int:
    with pytest.raises(SystemExit) as info:
        main(argv)
    return info.value.code


def last_json_line(text: str) -> dict:
    return json.loads(text.strip().splitlines()[-1])


def test_parser_requires_command():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


def test_eval_identical(tmp_path, capsys):
    """Scoring the truth against itself gives RelErr 0 and MRankCorr 1."""
    G = np.array([[0.1, 0.2], [0.4, 0.3]])
    write_matrix_csv(G, tmp_path / "G.csv")
    main(["eval", "--truth", str(tmp_path / "G.csv"), "--estimate", str(tmp_path / "G.csv")])
    record = json.loads(capsys.readouterr().out)
    assert record["rel_err"] == 0.0
    assert record["mean_rank_corr"] == pytest.approx(1.0)
    assert record["runtime_seconds"] >= 0.0


def test_eval_single_node(tmp_path, capsys):
    """Rank correlation is null for d = 1."""
    write_matrix_csv([[1.0]], tmp_path / "G.csv")
    write_matrix_csv([[0.9]], tmp_path / "G_hat.csv")
    main(["eval", "--truth", str(tmp_path / "G.csv"), "--estimate", str(tmp_path / "G_hat.csv")])
    record = json.loads(capsys.readouterr().out)
    assert record["rel_err"] == pytest.approx(0.1)
    assert record["mean_rank_corr"] is None


def test_eval_errors(tmp_path, capsys):
    """Shape mismatch exits 2, a missing file exits 4, both with a JSON record."""
    write_matrix_csv(np.eye(2), tmp_path / "A.csv")
    write_matrix_csv(np.eye(3), tmp_path / "B.csv")
    assert exit_code(["eval", "--truth", str(tmp_path / "A.csv"),
                      "--estimate", str(tmp_path / "B.csv")]) == 2
    assert last_json_line(capsys.readouterr().err)["error"] == "ShapeMismatch"

    assert exit_code(["eval", "--truth", str(tmp_path / "A.csv"),
                      "--estimate", str(tmp_path / "missing.csv")]) == 4
    assert last_json_line(capsys.readouterr().err)["error"] == "DataIOError"


def test_invalid_config_exits_2(tmp_path, capsys):
    """Configuration problems are reported before any work."""
    assert exit_code(["simulate", "--preset", "rect10", "--d", "4",
                      "--output-dir", str(tmp_path)]) == 2
    assert last_json_line(capsys.readouterr().err)["error"] == "ConfigError"
    assert not (tmp_path / "events.csv").exists()


def test_config_file_and_environment(tmp_path, capsys, monkeypatch):
    """Values come from the config file and NPHC_ variables when flags are absent."""
    conf = tmp_path / "run.conf"
    conf.write_text("preset = custom\nd = 3\nshape = exponential\nalpha = 0.2\nhorizon = 100\n")
    monkeypatch.setenv("NPHC_H", "2")
    main(["simulate", "--config", str(conf), "--quiet", "--output-dir", str(tmp_path / "sim")])
    manifest = read_manifest(tmp_path / "sim" / "model.json")
    assert manifest["horizon_T"] == 100.0
    assert len(manifest["model"]["mu"]) == 3
    assert capsys.readouterr().out == ""


def test_fit_exact_scalar_cumulants(tmp_path, capsys):
    """d=1, g=0.5: Lambda=2, C=8, Kc=64 recovers G=0.5."""
    cum = tmp_path / "cum"
    cum.mkdir()
    write_vector_csv([2.0], cum / "Lambda.csv")
    write_matrix_csv([[8.0]], cum / "C.csv")
    write_matrix_csv([[64.0]], cum / "Kc.csv")
    main(["fit", "--cumulants-dir", str(cum), "--output-dir", str(tmp_path / "fit"),
          "--threshold", "0.1"])
    G_hat = read_matrix_csv(tmp_path / "fit" / "G_hat.csv")
    assert G_hat[0, 0] == pytest.approx(0.5, abs=1e-4)
    mu_hat = read_matrix_csv(tmp_path / "fit" / "mu_hat.csv")
    assert mu_hat.ravel()[0] == pytest.approx(1.0, abs=1e-4)
    fit = read_manifest(tmp_path / "fit" / "fit.json")
    assert fit["threshold"] == 0.1
    assert fit["solver"]["max_iters"] == 20000
    assert (tmp_path / "fit" / "G_hat_thresholded.csv").exists()
    assert (tmp_path / "fit" / "loss_trace.csv").read_text().startswith("iteration,loss\n")
    assert "SUMMARY" not in capsys.readouterr().out


def test_fit_degenerate_exits_3(tmp_path, capsys):
    """A silent node makes the fit impossible."""
    cum = tmp_path / "cum"
    cum.mkdir()
    write_vector_csv([1.0, 0.0], cum / "Lambda.csv")
    write_matrix_csv(np.diag([1.0, 0.0]), cum / "C.csv")
    write_matrix_csv(np.diag([1.0, 0.0]), cum / "Kc.csv")
    assert exit_code(["fit", "--cumulants-dir", str(cum), "--output-dir", str(tmp_path / "fit")]) == 3
    assert last_json_line(capsys.readouterr().err)["error"] == "DegenerateCumulants"


def test_cumulants_parse_error_exits_4(tmp_path, capsys):
    """A bad event line is reported with its number."""
    events = tmp_path / "events.csv"
    events.write_text("node_id,timestamp\n0,1.0\n0,oops\n")
    assert exit_code(["cumulants", "--events", str(events), "--h", "0.1",
                      "--output-dir", str(tmp_path / "cum")]) == 4
    record = last_json_line(capsys.readouterr().err)
    assert record["error"] == "ParseError"
    assert record["line"] == 3


def test_h_grid(tmp_path, capsys):
    """--h-grid writes one row per window."""
    events = tmp_path / "events.csv"
    rng = np.random.default_rng(0)
    lines = ["node_id,timestamp"] + [f"{i % 2},{float(t)!r}"
                                     for i, t in enumerate(np.sort(rng.uniform(0, 100, 200)))]
    events.write_text("\n".join(lines) + "\n")
    main(["cumulants", "--events", str(events), "--horizon", "100", "--h-grid", "1,2,5",
          "--output-dir", str(tmp_path / "grid")])
    rows = (tmp_path / "grid" / "h_grid.csv").read_text().splitlines()
    assert rows[0] == "H,frobenius_C,trace_C"
    assert [float(r.split(",")[0]) for r in rows[1:]] == [1.0, 2.0, 5.0]
    assert "plateau" in capsys.readouterr().out


def test_pipeline_matches_experiment(tmp_path, capsys):
    """simulate -> cumulants -> fit -> eval reproduces the experiment outputs bit for bit."""
    sim, cum, fit, exp = (tmp_path / name for name in ("sim", "cum", "fit", "exp"))
    main(["simulate", *CUSTOM, "--output-dir", str(sim)])
    horizon = read_manifest(sim / "model.json")["horizon_T"]
    main(["cumulants", "--events", str(sim / "events.csv"), "--horizon", repr(horizon),
          "--nodes", "3", "--h", "5", "--output-dir", str(cum)])
    main(["fit", "--cumulants-dir", str(cum), *SOLVER, "--seed", "7", "--output-dir", str(fit)])
    capsys.readouterr()
    main(["eval", "--truth", str(sim / "G.csv"), "--estimate", str(fit / "G_hat.csv")])
    scores = json.loads(capsys.readouterr().out)

    main(["experiment", *CUSTOM, *SOLVER, "--output-dir", str(exp)])
    out = capsys.readouterr().out
    assert "SUMMARY REPORT" in out
    run = exp / "seed_7"
    assert (run / "events.csv").read_bytes() == (sim / "events.csv").read_bytes()
    for name in ("Lambda.csv", "C.csv", "Kc.csv"):
        assert (run / name).read_bytes() == (cum / name).read_bytes()
    for name in ("G_hat.csv", "R_hat.csv", "mu_hat.csv", "loss_trace.csv"):
        assert (run / name).read_bytes() == (fit / name).read_bytes()

    summary = read_manifest(exp / "experiment.json")
    assert summary["runs"][0]["seed"] == 7
    assert summary["runs"][0]["rel_err"] == pytest.approx(scores["rel_err"])
    assert summary["runs"][0]["mean_rank_corr"] == pytest.approx(scores["mean_rank_corr"])
    assert (exp / "heatmap.txt").exists()


def test_experiment_is_reproducible(tmp_path, capsys):
    """Two runs with the same configuration write identical files."""
    for name in ("a", "b"):
        main(["experiment", *CUSTOM, *SOLVER, "--quiet", "--output-dir", str(tmp_path / name)])
    for name in ("experiment.json", "seed_7/G_hat.csv", "seed_7/model.json", "seed_7/fit.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_experiment_several_seeds(tmp_path, capsys):
    """Seeds run in order and the summary shows the medians."""
    main(["experiment", *CUSTOM, *SOLVER, "--n-seeds", "2", "--workers", "1",
          "--output-dir", str(tmp_path)])
    out = capsys.readouterr().out
    assert "Median RelErr" in out
    summary = read_manifest(tmp_path / "experiment.json")
    assert [r["seed"] for r in summary["runs"]] == [7, 8]


def test_cumulants_invalid_utf8_exits_4(tmp_path, capsys):
    """Undecodable input gives a JSON error record, not a traceback."""
    events = tmp_path / "events.csv"
    events.write_bytes(b"node_id,timestamp\n0,1.0\n\xff,2.0\n")
    assert exit_code(["cumulants", "--events", str(events), "--h", "0.1",
                      "--output-dir", str(tmp_path / "cum")]) == 4
    record = last_json_line(capsys.readouterr().err)
    assert record["error"] == "ParseError"
    assert record["line"] == 3


def test_h_grid_bad_boundary_mode_exits_2(tmp_path, capsys):
    """An unknown boundary mode from the config file is a configuration error."""
    events = tmp_path / "events.csv"
    events.write_text("node_id,timestamp\n0,1.0\n1,2.0\n0,3.0\n")
    conf = tmp_path / "run.conf"
    conf.write_text("boundary_mode = exact\n")
    assert exit_code(["cumulants", "--config", str(conf), "--events", str(events),
                      "--horizon", "100", "--h-grid", "5,10",
                      "--output-dir", str(tmp_path / "grid")]) == 2
    assert last_json_line(capsys.readouterr().err)["error"] == "ConfigError"
    assert not (tmp_path / "grid" / "h_grid.csv").exists()


def test_custom_window_only_needed_for_cumulants(tmp_path, capsys):
    """simulate runs a custom model without h; experiment still asks for it."""
    no_h = [arg for arg in CUSTOM if arg not in ("--h", "5")]
    main(["simulate", *no_h, "--quiet", "--output-dir", str(tmp_path / "sim")])
    assert (tmp_path / "sim" / "events.csv").exists()

    assert exit_code(["experiment", *no_h, *SOLVER, "--output-dir", str(tmp_path / "exp")]) == 2
    record = last_json_line(capsys.readouterr().err)
    assert record["error"] == "ConfigError"
    assert "window half-width" in record["message"]
    assert not (tmp_path / "exp").exists()
