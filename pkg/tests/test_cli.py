"""CLI subcommands: schemas, determinism, end-to-end smoke on every target."""

import csv
import json

import numpy as np
import pytest

from coupledhmc.cli import build_target, default_init_sampler, main


def read_output(path):
    """Parse a CSV artifact: (metadata dict, header, data rows)."""
    with open(path) as fh:
        first = fh.readline()
        assert first.startswith("# ")
        metadata = json.loads(first[2:])
        rows = list(csv.reader(fh))
    return metadata, rows[0], rows[1:]


# ---------------------------------------------------------------------------
# target resolution
# ---------------------------------------------------------------------------


def test_build_target_resolution():
    assert build_target("gaussian", dim=7).dim == 7
    assert build_target("gmm").dim == 2
    assert build_target("lgcp", dim=4).dim == 16
    with pytest.raises(ValueError):
        build_target("mystery")


def test_default_init_sampler_ranges(rng):
    gmm = build_target("gmm")
    x0, y0 = default_init_sampler(gmm)(rng)
    assert np.all((x0 >= 0) & (x0 <= 1)) and x0.shape == (2,)
    gauss = build_target("gaussian", dim=5)
    x0, y0 = default_init_sampler(gauss)(rng)
    assert x0.shape == (5,) and y0.shape == (5,)


# ---------------------------------------------------------------------------
# meet
# ---------------------------------------------------------------------------


MEET_HEADER = ["run", "target", "kernel", "coupling", "momentum", "eps", "L", "tau", "met"]


def test_meet_single_cell_schema(tmp_path):
    out = tmp_path / "meet.csv"
    rc = main([
        "meet", "--target", "gaussian", "--dim", "3", "--eps", "0.3",
        "--steps", "10", "--coupling", "maximal", "--runs", "1",
        "--max-iters", "200", "--seed", "5", "--out", str(out),
    ])
    assert rc == 0
    metadata, header, rows = read_output(out)
    assert header == MEET_HEADER
    assert len(rows) == 1
    assert metadata["seed"] == 5
    assert metadata["command"] == "meet"
    _, sum_header, sum_rows = read_output(tmp_path / "meet.summary.csv")
    assert sum_header[-3:] == ["tau_mean", "tau_std", "met_count"]
    assert len(sum_rows) == 1
    tau = int(rows[0][7])
    assert 1 <= tau <= 200


def test_meet_grid_and_unmet_sentinel(tmp_path):
    out = tmp_path / "grid.csv"
    rc = main([
        "meet", "--target", "gaussian", "--dim", "2", "--eps", "0.2,0.3",
        "--steps", "5", "--coupling", "maximal,w2", "--runs", "2",
        "--max-iters", "1", "--seed", "1", "--out", str(out),
    ])
    assert rc == 0
    _, _, rows = read_output(out)
    assert len(rows) == 2 * 2 * 2  # couplings x eps x runs
    for row in rows:
        if row[8] == "false":
            assert int(row[7]) == 1  # tau written as the cap


def test_meet_byte_identical_reruns(tmp_path):
    args = [
        "meet", "--target", "gmm", "--eps", "0.25", "--steps", "8",
        "--coupling", "w2", "--runs", "3", "--max-iters", "60", "--seed", "9",
    ]
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    # The embedded metadata contains the output path; normalize it away.
    a = out1.read_bytes().replace(str(out1).encode(), b"OUT")
    b = out2.read_bytes().replace(str(out2).encode(), b"OUT")
    assert a == b


def test_meet_json_format(tmp_path):
    out = tmp_path / "meet.json"
    rc = main([
        "meet", "--target", "gaussian", "--dim", "2", "--eps", "0.3",
        "--steps", "5", "--coupling", "maximal", "--runs", "2",
        "--max-iters", "100", "--seed", "2", "--out", str(out),
        "--format", "json",
    ])
    assert rc == 0
    payload = json.loads(out.read_text())
    assert payload["metadata"]["seed"] == 2
    assert len(payload["rows"]) == 2
    assert len(payload["summary"]) == 1


def test_meet_logistic_synthetic_smoke(tmp_path):
    out = tmp_path / "logistic.csv"
    rc = main([
        "meet", "--target", "logistic", "--eps", "0.01", "--steps", "5",
        "--coupling", "maximal", "--runs", "1", "--max-iters", "3",
        "--seed", "0", "--out", str(out),
    ])
    assert rc == 0
    _, _, rows = read_output(out)
    assert len(rows) == 1 and rows[0][1] == "logistic"


# ---------------------------------------------------------------------------
# estimate
# ---------------------------------------------------------------------------


def test_estimate_gaussian_schema_and_provenance(tmp_path):
    out = tmp_path / "est.json"
    rc = main([
        "estimate", "--target", "gaussian", "--dim", "2", "--eps", "0.3",
        "--steps", "10", "--coupling", "w2", "--runs", "20",
        "--prelim-runs", "20", "--max-iters", "500", "--seed", "3",
        "--k-rule", "median", "--m-mult", "5", "--out", str(out),
        "--format", "json",
    ])
    assert rc == 0
    payload = json.loads(out.read_text())
    assert payload["metadata"]["k_rule"] == "median"
    assert payload["metadata"]["m_mult"] == 5
    assert payload["m"] == 5 * payload["k"]
    assert len(payload["estimates"]) == 4  # first+second moments in 2D
    assert all(np.isfinite(payload["estimates"]))
    assert payload["expected_cost"] > 0
    assert payload["unmet_count"] == 0


def test_estimate_reports_error_when_chains_cannot_meet(tmp_path, capsys):
    out = tmp_path / "est.csv"
    rc = main([
        "estimate", "--target", "gaussian", "--dim", "2", "--eps", "0.3",
        "--steps", "10", "--coupling", "w2", "--runs", "4",
        "--prelim-runs", "4", "--max-iters", "1", "--seed", "3",
        "--out", str(out),
    ])
    assert rc == 1
    err = capsys.readouterr().err
    assert json.loads(err.strip().splitlines()[-1])["error"] == "too-few-met-runs"


def test_estimate_lgcp_synthetic_end_to_end(tmp_path):
    """Desk-scale Cox-process posterior (8x8 grid): the full pipeline must
    complete and report a finite positive relative inefficiency."""
    out = tmp_path / "lgcp.json"
    rc = main([
        "estimate", "--target", "lgcp", "--dim", "8", "--eps", "0.15",
        "--steps", "10", "--coupling", "w2", "--runs", "4",
        "--prelim-runs", "4", "--max-iters", "3000", "--seed", "4",
        "--reference-samples", "400", "--reference-burnin", "100",
        "--out", str(out), "--format", "json",
    ])
    assert rc == 0
    payload = json.loads(out.read_text())
    assert all(np.isfinite(payload["estimates"]))
    assert payload["relative_inefficiency"] is not None
    assert np.isfinite(payload["relative_inefficiency"])
    assert payload["relative_inefficiency"] > 0


# ---------------------------------------------------------------------------
# illustrate / toys
# ---------------------------------------------------------------------------


def test_illustrate_output(tmp_path, capsys):
    out = tmp_path / "fig.json"
    rc = main(["illustrate", "--seed", "0", "--out", str(out)])
    assert rc == 0
    payload = json.loads(out.read_text())
    assert payload["eps"] == 0.45  # subcommand-specific default
    exp = payload["expected_distance"]
    assert exp["w2"] < exp["maximal"]
    printed = capsys.readouterr().out
    assert "1.37" in printed and "1.97" in printed
    K = len(payload["weights_chain1"])
    assert K == 8
    assert np.asarray(payload["maximal_joint"]).shape == (K, K)


def test_toys_gmm_schema(tmp_path):
    out = tmp_path / "gmm.csv"
    rc = main([
        "toys", "gmm", "--runs", "4", "--max-iters", "15", "--seed", "0",
        "--out", str(out),
    ])
    assert rc == 0
    _, header, rows = read_output(out)
    assert header == ["method", "mode", "total_length", "i_tau"]
    assert len(rows) == 3 * 2 * 5  # methods x sweeps x grid points
    for row in rows:
        assert 0.0 <= float(row[3]) <= 1.0


def test_toys_banana_schema(tmp_path):
    out = tmp_path / "banana.csv"
    rc = main([
        "toys", "banana", "--runs", "3", "--max-iters", "40", "--seed", "0",
        "--out", str(out),
    ])
    assert rc == 0
    _, header, rows = read_output(out)
    assert header == ["method", "momentum", "tau_mean", "tau_std", "met_count"]
    assert len(rows) == 3 * 2  # methods x momentum modes
    for row in rows:
        assert float(row[2]) >= 1.0


def test_cli_invalid_configuration_exits_nonzero(tmp_path, capsys):
    rc = main([
        "meet", "--target", "gaussian", "--coupling", "w2",
        "--kernel", "metropolis", "--out", str(tmp_path / "x.csv"),
    ])
    assert rc == 1
    err = capsys.readouterr().err
    assert "error" in json.loads(err.strip().splitlines()[-1])
