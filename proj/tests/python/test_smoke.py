"""Smoke tests for the python bindings."""

import math

import numpy as np
import pytest

import qfcusum as qf


@pytest.fixture(scope="module")
def sample():
    spec = qf.ScenarioSpec()
    spec.n = 120
    spec.p = 10
    spec.s = 3
    spec.sigma_kind = qf.SigmaKind.Toeplitz
    spec.change_pattern = qf.ChangePattern.single_at(0.5, 1.5)
    spec.seed = 42
    return qf.generate(spec)


def test_dataset_from_numpy_roundtrip():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((20, 4))
    y = rng.standard_normal(20)
    data = qf.Dataset(y, x)
    assert data.n == 20
    assert data.p == 4
    np.testing.assert_array_equal(np.asarray(data.y), y)
    np.testing.assert_array_equal(np.asarray(data.x), x)


def test_dataset_validation():
    with pytest.raises(ValueError):
        qf.Dataset(np.zeros(3), np.zeros((2, 2)))


def test_csv_roundtrip(tmp_path, sample):
    path = tmp_path / "data.csv"
    qf.save_csv(sample.data, path)
    back = qf.load_csv(path, False)
    np.testing.assert_array_equal(np.asarray(back.y), np.asarray(sample.data.y))
    np.testing.assert_array_equal(np.asarray(back.x), np.asarray(sample.data.x))


def test_lasso_fit_and_kkt(sample):
    config = qf.LassoConfig()
    config.lambda_ = 0.5
    fit = qf.fit_interval_lasso(sample.data, qf.Interval(0, 60), config)
    assert fit.converged
    assert fit.objective > 0.0
    zero_lambda = qf.lambda_max(sample.data, qf.Interval(0, 60))
    config.lambda_ = zero_lambda
    assert not np.any(np.asarray(qf.fit_interval_lasso(sample.data, qf.Interval(0, 60), config).beta_hat))


def test_scan_determinism_and_identity(sample):
    config = qf.ScanConfig()
    config.sigma_xi = 1.0
    config.xi_seed = 7
    config.lambda_ = 0.5
    a = qf.scan(sample.data, config)
    b = qf.scan(sample.data, config)
    assert a.max_stat == b.max_stat
    assert list(a.grid) == list(b.grid)
    n = sample.data.n
    k = len(a.grid) // 2
    t = a.grid[k]
    weight = math.sqrt(t * (n - t) / n)
    assert a.t_n[k] == weight / (config.sigma_eps * config.sigma_xi) * a.s_n[k]


def test_localize_finds_the_break(sample):
    config = qf.ScanConfig()
    config.lambda_ = 0.5
    eta = qf.localize(sample.data, config)
    assert abs(eta - 60) <= 5


def test_critical_values_monotone():
    table = qf.simulate_critical_values(0.15, [0.10, 0.05, 0.01], 500, 5000, 7, 2)
    q = table.quantiles
    assert q[0.01] > q[0.05] > q[0.10] > 0
    again = qf.simulate_critical_values(0.15, [0.10, 0.05, 0.01], 500, 5000, 7, 1)
    assert again.digest == table.digest


def test_run_test_end_to_end(sample):
    table = qf.simulate_critical_values(0.15, [0.05], 500, 5000, 7, 2)
    outcome = qf.run_test(sample.data, 0.15, 0.05, table, 3)
    assert outcome.reject == (outcome.max_stat > outcome.critical_value)
    assert 0.0 <= outcome.p_value <= 1.0
    # This fixture has a strong planted change.
    assert outcome.reject


def test_experiment_harness_runs():
    spec = qf.ScenarioSpec()
    spec.n = 80
    spec.p = 6
    spec.s = 2
    plan = qf.ExperimentPlan()
    plan.scenarios = [spec]
    plan.reps = 4
    plan.master_seed = 5
    plan.mode = qf.ExperimentMode.Size
    table = qf.simulate_critical_values(0.15, [0.05], 500, 5000, 7, 2)
    report = qf.run_experiment(plan, table, 2)
    assert len(report.rows) == 1
    assert report.rows[0].reps_completed + report.rows[0].failures == 4
