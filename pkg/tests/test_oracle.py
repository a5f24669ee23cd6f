import numpy as np
import pytest

from schedsim import model, oracle

from .conftest import random_single_instance, single_scheduler_state


def test_grid_spec_validation():
    with pytest.raises(ValueError):
        oracle.GridSpec(step=0.1)
    with pytest.raises(ValueError):
        oracle.GridSpec(max_dims=4)


def test_simplex_grid_points():
    g = oracle.simplex_grid(3, 0.01)
    assert g.shape == (101 * 102 // 2, 3)
    np.testing.assert_allclose(g.sum(axis=1), 1)


@pytest.mark.parametrize("fn", [oracle.oracle_minimax, oracle.oracle_minsum])
def test_symmetric_two_nodes(fn):
    row, _ = fn(single_scheduler_state([1.0, 1.0], 0.3, delay=0.5))
    np.testing.assert_allclose(row, [0.5, 0.5], atol=1e-8)


@pytest.mark.parametrize("fn", [oracle.oracle_minimax, oracle.oracle_minsum])
def test_single_node(fn):
    state = single_scheduler_state([1.0], 0.3)
    row, value = fn(state)
    np.testing.assert_array_equal(row, [1.0])
    assert value == pytest.approx(model.response_time(state, [[1.0]], 0))


def test_minimax_favours_faster_node():
    row, _ = oracle.oracle_minimax(single_scheduler_state([2.0, 1.0], 0.5, bandwidth=1e9, b=1e-9))
    assert row[0] > 0.5


def test_minimax_dominates_grid(rng):
    state = random_single_instance(rng, m=3)
    _, best = oracle.oracle_minimax(state, oracle.GridSpec(step=0.01))
    for row in oracle.simplex_grid(3, 0.01):
        try:
            assert best <= model.response_time(state, [row], 0)
        except model.UnstableQueueError:
            pass


def test_minsum_dominates_random_rows(rng):
    state = random_single_instance(rng)
    _, best = oracle.oracle_minsum(state)
    caps = model.row_caps(state.cluster.mu, state.lam[0])
    hits = 0
    while hits < 100:
        a = rng.uniform()
        row = np.array([a, 1 - a])
        if np.all(row <= caps):
            hits += 1
            assert best <= model.completion_time(state, [row], 0) + 1e-12


def test_refined_optimum_is_stationary_or_kink(rng):
    for _ in range(5):
        state = random_single_instance(rng)
        row, value = oracle.oracle_minimax(state)
        h = 1e-6
        left = model.response_time(state, [[row[0] - h, row[1] + h]], 0) if row[0] > h else np.inf
        right = model.response_time(state, [[row[0] + h, row[1] - h]], 0) if row[1] > h else np.inf
        assert left >= value - 1e-9 and right >= value - 1e-9


def test_rejects_oversized_instances():
    with pytest.raises(ValueError):
        oracle.oracle_minimax(single_scheduler_state([1.0] * 4, 0.3))
    cluster = model.ClusterSpec.uniform([1.0, 1.0], 2)
    two = model.SystemState.from_arrival_rates(cluster, [0.1, 0.1])
    with pytest.raises(ValueError):
        oracle.oracle_minsum(two)
