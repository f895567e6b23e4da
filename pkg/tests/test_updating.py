"""Full-model objective, design sampling and the three updating loops."""

import numpy as np
import pytest

from femupdate.optimizers import Bounds, EvalBudget, GaConfig, SaConfig
from femupdate.scenario import ScenarioSpec, build_scenario
from femupdate.updating import (
    RsmConfig, compute_gamma_weights, full_objective, rsm_update, ga_update,
    sa_update, sample_design,
)
from femupdate.modal import ModalData


@pytest.fixture(scope="module")
def default_problem():
    return build_scenario(ScenarioSpec())


def small_rsm_config(**overrides):
    kw = dict(
        n_samples=40, max_iterations=3, initial_cycles=30, incremental_cycles=5,
        m_hidden=2, sampler_seed=5,
        ga=GaConfig(population_size=12, generations=15, seed=3),
    )
    kw.update(overrides)
    return RsmConfig(**kw)


# ---------------------------------------------------------------- objective


def test_objective_zero_at_ground_truth(default_problem):
    problem, truth = default_problem
    assert full_objective(problem, truth, EvalBudget()) < 1e-10


def test_objective_positive_for_initial_model(default_problem):
    problem, _ = default_problem
    c = full_objective(problem, problem.initial_parameters(), EvalBudget())
    assert c > 0.0


def test_objective_increments_budget_by_one(default_problem):
    problem, truth = default_problem
    budget = EvalBudget()
    for expected in (1, 2, 3):
        full_objective(problem, truth, budget)
        assert budget.calls == expected


def test_objective_infinite_on_solver_failure(default_problem):
    problem, truth = default_problem
    bad = truth.copy()
    bad[0] = np.nan
    # invalid moduli are rejected by assembly -> +inf sentinel, run continues
    assert full_objective(problem, bad, EvalBudget()) == np.inf


# ---------------------------------------------------------------- gamma


def test_gamma_zero_when_initial_matches_measured():
    shapes = np.eye(3)
    a = ModalData(frequencies=[1.0, 2.0, 3.0], mode_shapes=shapes,
                  coordinate_map=np.arange(3))
    np.testing.assert_array_equal(compute_gamma_weights(a, a), np.zeros(3))


def test_gamma_hand_value():
    shapes = np.ones((2, 1))
    init = ModalData(frequencies=[90.0], mode_shapes=shapes, coordinate_map=[0, 1])
    meas = ModalData(frequencies=[100.0], mode_shapes=shapes, coordinate_map=[0, 1])
    np.testing.assert_allclose(compute_gamma_weights(init, meas), [0.01])


def test_gamma_largest_for_largest_mismatch():
    shapes = np.eye(3)
    init = ModalData(frequencies=[95.0, 180.0, 310.0], mode_shapes=shapes,
                     coordinate_map=np.arange(3))
    meas = ModalData(frequencies=[100.0, 200.0, 300.0], mode_shapes=shapes,
                     coordinate_map=np.arange(3))
    g = compute_gamma_weights(init, meas)
    assert np.argmax(g) == 1  # 10% error beats 5% and 3.3%


# ---------------------------------------------------------------- sampling


def test_sample_design_single_point():
    b = Bounds(lower=np.array([1.0, -1.0]), upper=np.array([2.0, 1.0]))
    x = sample_design(b, 1, seed=0)
    assert x.shape == (1, 2)
    assert b.contains(x[0])


def test_sample_design_lhs_stratification():
    b = Bounds(lower=np.full(12, 6.0e10), upper=np.full(12, 8.0e10))
    n = 150
    X = sample_design(b, n, seed=1)
    assert X.shape == (n, 12)
    for j in range(12):
        strata = np.floor((X[:, j] - 6.0e10) / (2.0e10 / n)).astype(int)
        np.testing.assert_array_equal(np.sort(strata), np.arange(n))


def test_sample_design_deterministic():
    b = Bounds(lower=np.zeros(3), upper=np.ones(3))
    np.testing.assert_array_equal(sample_design(b, 20, seed=9),
                                  sample_design(b, 20, seed=9))
    assert not np.array_equal(sample_design(b, 20, seed=9),
                              sample_design(b, 20, seed=10))


def test_sample_design_uniform_mode():
    b = Bounds(lower=np.zeros(2), upper=np.ones(2))
    X = sample_design(b, 50, seed=2, method="uniform")
    assert X.shape == (50, 2)
    assert np.all((X >= 0.0) & (X <= 1.0))


# ---------------------------------------------------------------- RSM loop


def test_rsm_infinite_target_stops_after_one_iteration(default_problem):
    problem, _ = default_problem
    relaxed = build_scenario(ScenarioSpec(target_cost=np.inf))[0]
    cfg = small_rsm_config()
    report = rsm_update(relaxed, cfg)
    assert report.fe_evaluations == cfg.n_samples + 1
    assert report.target_reached
    assert len(report.history) == 1


def test_rsm_runs_all_iterations_with_zero_target(default_problem):
    problem, _ = default_problem
    cfg = small_rsm_config()
    report = rsm_update(problem, cfg)
    assert report.fe_evaluations == cfg.n_samples + cfg.max_iterations
    assert not report.target_reached


def test_rsm_replace_worst_keeps_design_size(default_problem):
    problem, _ = default_problem
    cfg = small_rsm_config()
    X0 = sample_design(problem.bounds, cfg.n_samples, cfg.sampler_seed)
    t0 = np.array([full_objective(problem, x, EvalBudget()) for x in X0])
    report = rsm_update(problem, cfg, initial_design=(X0, t0))
    X1, t1 = report.design
    assert X1.shape == X0.shape and t1.shape == t0.shape
    assert t1.max() <= t0.max()


def test_rsm_report_self_consistent(default_problem):
    problem, _ = default_problem
    report = rsm_update(problem, small_rsm_config())
    recomputed = full_objective(problem, report.updated_parameters, EvalBudget())
    assert recomputed == pytest.approx(report.final_cost, rel=1e-10)
    assert problem.bounds.contains(report.updated_parameters)
    assert report.surrogate is not None


def test_rsm_deterministic(default_problem):
    problem, _ = default_problem
    cfg = small_rsm_config()
    r1 = rsm_update(problem, cfg)
    r2 = rsm_update(problem, cfg)
    np.testing.assert_array_equal(r1.updated_parameters, r2.updated_parameters)
    assert r1.final_cost == r2.final_cost
    assert r1.fe_evaluations == r2.fe_evaluations


def test_rsm_rejects_design_shape_mismatch(default_problem):
    problem, _ = default_problem
    cfg = small_rsm_config()
    with pytest.raises(ValueError, match="design"):
        rsm_update(problem, cfg, initial_design=(np.zeros((3, 12)), np.zeros(3)))


# ---------------------------------------------------------------- GA / SA


def test_ga_update_counts_pop_times_generations(default_problem):
    problem, _ = default_problem
    cfg = GaConfig(population_size=10, generations=12, seed=8)
    report = ga_update(problem, cfg)
    assert report.fe_evaluations == 120
    assert report.final_cost <= report.initial_cost
    recomputed = full_objective(problem, report.updated_parameters, EvalBudget())
    assert recomputed == pytest.approx(report.final_cost, rel=1e-10)


def test_sa_update_run_segments_and_accounting(default_problem):
    problem, _ = default_problem
    cfg = SaConfig(n_runs=3, steps_per_temperature=6, min_temperature=0.05,
                   cooling_factor=0.5, seed=9)
    report = sa_update(problem, cfg)
    assert sorted(set(h.run for h in report.history)) == [0, 1, 2]
    # per run: 1 start eval + levels * steps; levels: 1.0 * 0.5^k > 0.05 -> 5
    assert report.fe_evaluations == 3 * (1 + 5 * 6)
    assert report.final_cost <= report.initial_cost


def test_report_errors_recomputable(default_problem):
    problem, _ = default_problem
    report = ga_update(problem, GaConfig(population_size=8, generations=10, seed=4))
    errors = 100.0 * (report.updated_hz - report.measured_hz) / report.measured_hz
    np.testing.assert_allclose(errors, report.updated_errors_pct, atol=1e-9)
    errors0 = 100.0 * (report.initial_hz - report.measured_hz) / report.measured_hz
    np.testing.assert_allclose(errors0, report.initial_errors_pct, atol=1e-9)
