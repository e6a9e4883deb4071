"""Target construction, gradients against finite differences, data loaders."""

import numpy as np
import pytest

from coupledhmc.targets import (
    LGCPConfig,
    LOG_2PI,
    LogisticRegressionData,
    build_lgcp_target,
    build_logistic_target,
    load_german_credit,
    load_point_pattern,
    make_builtin_target,
    synthetic_lgcp_counts,
    synthetic_logistic_data,
)

from conftest import assert_gradient_matches


# ---------------------------------------------------------------------------
# Built-in toys
# ---------------------------------------------------------------------------


def test_gaussian_values():
    t = make_builtin_target("gaussian", dim=2)
    assert t.potential(np.zeros(2)) == 0.0
    assert np.array_equal(t.gradient(np.zeros(2)), np.zeros(2))
    q = np.array([3.0, 4.0])
    assert t.potential(q) == pytest.approx(12.5, abs=1e-12)
    assert np.allclose(t.gradient(q), q, atol=1e-12)


def test_gaussian_quadratic_identity(rng):
    t = make_builtin_target("gaussian", dim=7)
    for _ in range(10):
        q = rng.standard_normal(7)
        assert abs(t.potential(q) - t.potential(np.zeros(7)) - 0.5 * q @ q) <= 1e-12


def test_banana_minimum():
    t = make_builtin_target("banana")
    q = np.array([1.0, 1.0])
    assert t.potential(q) == 0.0
    assert np.allclose(t.gradient(q), 0.0, atol=1e-12)


def test_gmm_potential_matches_direct_density():
    t = make_builtin_target("gmm")
    means = np.array([[-1.0, -1.0], [0.0, 0.0], [1.0, 1.0]])
    weights = np.array([0.25, 0.4, 0.35])
    sigma = 0.25
    for q in ([0.3, -0.2], [0.0, 0.0], [-1.2, 0.8]):
        q = np.asarray(q)
        dens = sum(
            w * np.exp(-0.5 * np.sum((q - m) ** 2) / sigma**2) / (2 * np.pi * sigma**2)
            for w, m in zip(weights, means)
        )
        assert t.potential(q) == pytest.approx(-np.log(dens), rel=1e-12)


@pytest.mark.parametrize("name,dim", [("gaussian", 3), ("gmm", None), ("banana", None)])
def test_builtin_gradients_match_finite_differences(name, dim, rng):
    t = make_builtin_target(name, dim=dim)
    points = [rng.uniform(-1.5, 1.5, t.dim) for _ in range(20)]
    assert_gradient_matches(t, points)


def test_make_builtin_target_rejects_bad_specs():
    with pytest.raises(ValueError):
        make_builtin_target("unknown")
    with pytest.raises(ValueError):
        make_builtin_target("gmm", dim=3)
    with pytest.raises(ValueError):
        make_builtin_target("banana", dim=5)
    with pytest.raises(ValueError):
        make_builtin_target("gaussian", dim=0)


# ---------------------------------------------------------------------------
# Logistic regression
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def logistic_data():
    return synthetic_logistic_data()


def test_logistic_dimension(logistic_data):
    target = build_logistic_target(logistic_data)
    assert target.dim == 302
    assert logistic_data.design.shape == (1000, 300)


def test_logistic_design_is_standardized(logistic_data):
    X = logistic_data.design
    assert np.max(np.abs(X.mean(axis=0))) <= 1e-8
    assert np.max(np.abs(X.std(axis=0, ddof=1) - 1.0)) <= 1e-8


def test_logistic_potential_all_zero_labels(logistic_data):
    """At theta = 0 (so s^2 = 1) with all labels 0 the likelihood term is
    exactly 1000 log 2 and the priors are the standard-normal constants."""
    data = LogisticRegressionData(
        design=logistic_data.design, labels=np.zeros(1000, dtype=int), rate=0.01
    )
    target = build_logistic_target(data)
    expected = (
        1000.0 * np.log(2.0)
        + 0.5 * LOG_2PI
        + 0.5 * 300 * LOG_2PI
        + 0.01
        - np.log(0.01)
    )
    assert target.potential(np.zeros(302)) == pytest.approx(expected, rel=1e-12)


def test_logistic_gradient_matches_finite_differences(logistic_data, rng):
    target = build_logistic_target(logistic_data)
    points = [0.1 * rng.standard_normal(302) for _ in range(5)]
    assert_gradient_matches(target, points)


def test_logistic_data_validation(logistic_data):
    with pytest.raises(ValueError):
        LogisticRegressionData(design=np.zeros((10, 300)), labels=np.zeros(10, dtype=int))
    with pytest.raises(ValueError):
        LogisticRegressionData(
            design=logistic_data.design, labels=np.full(1000, 2), rate=0.01
        )
    with pytest.raises(ValueError):
        LogisticRegressionData(
            design=logistic_data.design, labels=logistic_data.labels, rate=-1.0
        )


def test_load_german_credit_roundtrip(tmp_path, rng):
    raw = rng.integers(0, 5, size=(1000, 24)).astype(float)
    raw += rng.random((1000, 24))  # avoid constant columns
    labels = rng.integers(1, 3, size=1000)
    table = np.column_stack([raw, labels])
    path = tmp_path / "credit.data-numeric"
    np.savetxt(path, table, fmt="%.6f")
    data = load_german_credit(path)
    assert data.design.shape == (1000, 300)
    assert set(np.unique(data.labels)) <= {0, 1}
    assert np.array_equal(data.labels, (labels == 2).astype(int))
    assert np.max(np.abs(data.design.mean(axis=0))) <= 1e-8


def test_load_german_credit_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_german_credit(tmp_path / "missing.txt")
    bad = tmp_path / "bad.txt"
    np.savetxt(bad, np.zeros((10, 3)))
    with pytest.raises(ValueError):
        load_german_credit(bad)


# ---------------------------------------------------------------------------
# Log-Gaussian Cox process
# ---------------------------------------------------------------------------


def test_lgcp_defaults():
    cfg = LGCPConfig(n=4, counts=np.zeros((4, 4), dtype=int))
    assert cfg.s2 == pytest.approx(1.91)
    assert cfg.b == pytest.approx(1.0 / 33.0)
    assert cfg.mu == pytest.approx(np.log(126.0) - 1.91 / 2.0)
    assert cfg.cell_area == pytest.approx(1.0 / 16.0)


def test_lgcp_gradient_at_prior_mean():
    cfg = LGCPConfig(n=2, counts=np.zeros((2, 2), dtype=int))
    target = build_lgcp_target(cfg)
    x = np.full(4, cfg.mu)
    expected = cfg.cell_area * np.exp(cfg.mu) * np.ones(4)
    assert np.allclose(target.gradient(x), expected, atol=1e-10)


def test_lgcp_gradient_matches_finite_differences(rng):
    counts = rng.poisson(1.0, size=(4, 4))
    cfg = LGCPConfig(n=4, counts=counts)
    target = build_lgcp_target(cfg)
    assert target.dim == 16
    points = [cfg.mu + 0.5 * rng.standard_normal(16) for _ in range(20)]
    assert_gradient_matches(target, points)


def test_lgcp_config_validation():
    with pytest.raises(ValueError):
        LGCPConfig(n=2, counts=np.zeros((3, 3), dtype=int))
    with pytest.raises(ValueError):
        LGCPConfig(n=2, counts=np.full((2, 2), -1))
    with pytest.raises(ValueError):
        LGCPConfig(n=2, counts=np.zeros((2, 2)))  # float counts
    with pytest.raises(ValueError):
        LGCPConfig(n=2, counts=np.zeros((2, 2), dtype=int), s2=-1.0)


def test_synthetic_lgcp_counts_deterministic():
    a = synthetic_lgcp_counts(8, seed=3)
    b = synthetic_lgcp_counts(8, seed=3)
    assert np.array_equal(a, b)
    assert a.shape == (8, 8)
    assert np.all(a >= 0)


def test_load_point_pattern_binning(tmp_path):
    path = tmp_path / "points.csv"
    path.write_text("0.5,0.5\n")
    counts = load_point_pattern(path, 2)
    assert counts[1, 1] == 1 and counts.sum() == 1


def test_load_point_pattern_edge_and_empty(tmp_path):
    path = tmp_path / "edge.csv"
    path.write_text("1.0,1.0\n0.0,0.0\n\n")
    counts = load_point_pattern(path, 4)
    assert counts[3, 3] == 1 and counts[0, 0] == 1
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert load_point_pattern(empty, 3).sum() == 0


def test_load_point_pattern_total_count(tmp_path, rng):
    rows = rng.random((126, 2))
    path = tmp_path / "pines.csv"
    path.write_text("".join(f"{x},{y}\n" for x, y in rows))
    assert load_point_pattern(path, 16).sum() == 126


def test_load_point_pattern_errors(tmp_path):
    bad_range = tmp_path / "range.csv"
    bad_range.write_text("1.5,0.5\n")
    with pytest.raises(ValueError):
        load_point_pattern(bad_range, 4)
    malformed = tmp_path / "malformed.csv"
    malformed.write_text("0.5;0.5\n")
    with pytest.raises(ValueError):
        load_point_pattern(malformed, 4)
