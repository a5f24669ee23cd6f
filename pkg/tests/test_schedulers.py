import numpy as np
import pytest

from schedsim import model, oracle
from schedsim import schedulers as sch
from schedsim.entropy_solver import RowContext, solve_minimax_row
from schedsim.experiments import builtin_scenarios

from .conftest import random_single_instance, single_scheduler_state, symmetric_state


@pytest.fixture(scope="module")
def exp1():
    return builtin_scenarios()["exp1"].state()


def test_ps_single_scheduler_is_one_row_solve(rng):
    state = random_single_instance(rng, m=3)
    res = sch.schedule_ps(state)
    ctx = RowContext.from_state(state, model.uniform_allocation(1, 3), 0)
    row = solve_minimax_row(np.full(3, 1 / 3), ctx).x
    np.testing.assert_allclose(res.alloc[0], row, atol=1e-9)
    assert res.converged and res.cycles_used <= 2


@pytest.mark.parametrize("algorithm", sch.ALGORITHMS)
def test_symmetric_system_gives_uniform_rows(algorithm):
    state = symmetric_state(n=3, m=4)
    res = sch.schedule(state, algorithm)
    np.testing.assert_allclose(res.alloc, 0.25, atol=1e-6)
    ev = sch.evaluate(state, res.alloc, algorithm)
    np.testing.assert_allclose(ev.response_time, ev.response_time[0], rtol=1e-9)


def test_ps_matches_minimax_oracle(rng):
    for _ in range(5):
        state = random_single_instance(rng)
        res = sch.schedule_ps(state)
        _, best = oracle.oracle_minimax(state)
        assert model.response_time(state, res.alloc, 0) == pytest.approx(best, abs=1e-3)


def test_gs_matches_minsum_oracle(rng):
    for _ in range(5):
        state = random_single_instance(rng)
        res = sch.schedule_gs(state)
        _, best = oracle.oracle_minsum(state)
        assert model.completion_time(state, res.alloc, 0) == pytest.approx(best, abs=1e-3)


def test_bs_examples():
    res = sch.schedule_bs(single_scheduler_state([2.0, 2.0], 0.5))
    np.testing.assert_allclose(res.alloc, [[0.5, 0.5]])
    mu = [0.28, 0.22, 0.19, 0.23, 0.20, 0.26, 0.22, 0.23]
    res = sch.schedule_bs(single_scheduler_state(mu, 0.1))
    assert res.alloc[0, 0] == pytest.approx(0.28 / 1.83, rel=1e-12)


@pytest.mark.parametrize("algorithm", sch.ALGORITHMS)
def test_results_are_row_stochastic_and_stable(exp1, algorithm):
    res = sch.schedule(exp1, algorithm)
    model.validate_allocation(res.alloc, 7, 8)
    assert model.check_stability(exp1, res.alloc).ok
    assert res.converged


def test_bs_fixed_point_residual(exp1):
    res = sch.schedule_bs(exp1)
    for i in range(exp1.n):
        mu_ji = model.available_capacity(exp1, res.alloc, i)
        np.testing.assert_allclose(res.alloc[i], mu_ji / mu_ji.sum(), atol=1e-8)


def test_ps_sweeps_never_worsen_the_updated_scheduler(exp1):
    checks = []
    prev = model.uniform_allocation(exp1.n, exp1.m)

    def trace(i, alloc):
        nonlocal prev
        before = model.response_time(exp1, prev, i)
        checks.append(model.response_time(exp1, alloc, i) <= before + 1e-9)
        assert model.check_stability(exp1, alloc).ok
        prev = alloc

    sch.schedule_ps(exp1, trace=trace)
    assert checks and all(checks)


def test_ps_beats_bs_on_first_experiment(exp1):
    ps = sch.evaluate(exp1, sch.schedule_ps(exp1).alloc, "PS")
    bs = sch.evaluate(exp1, sch.schedule_bs(exp1).alloc, "BS")
    assert np.all(ps.response_time < bs.response_time)


def test_evaluate_objectives():
    state = single_scheduler_state([0.7], 0.2)
    ev = sch.evaluate(state, [[1.0]], "GS")
    assert ev.objective[0] == ev.response_time[0] == ev.completion_time[0]
    state = single_scheduler_state([0.7, 0.9], 0.2, delay=0.5)
    ev = sch.evaluate(state, [[0.5, 0.5]], "GS")
    np.testing.assert_array_equal(ev.objective, ev.completion_time)
    ev = sch.evaluate(state, [[0.5, 0.5]], "BS")
    np.testing.assert_array_equal(ev.objective, ev.response_time)


def test_deterministic(exp1):
    a = sch.schedule_ps(exp1)
    b = sch.schedule_ps(exp1)
    assert a.alloc.tobytes() == b.alloc.tobytes()
    assert a.diff_history == b.diff_history


def test_non_convergence_reported(exp1):
    res = sch.schedule_gs(exp1, max_cycle=1, eps=1e-12)
    assert not res.converged and res.cycles_used == 1


def test_unknown_algorithm(exp1):
    with pytest.raises(ValueError):
        sch.schedule(exp1, "XS")
