import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biomamba.errors import ContractViolation, InputError
from biomamba.harness.tasks import philox
from biomamba.pruning import (PruningState, apply_pruning, controller_tick,
                              measure_sparsity, prune_probability, threshold_step)
from biomamba.spiking import SynapticWeights, synaptic_current


def test_probability_examples():
    assert prune_probability(0.3, 0.3, 50.0) == 0.5
    assert prune_probability(1e-3, 5.0, 1e4) > 1.0 - 1e-12
    assert prune_probability(5.0, 0.1, 1e4) < 1e-12
    # literal orientation: beta = 2, |w| - theta = 1
    assert prune_probability(1.5, 0.5, 2.0, literal=True) == pytest.approx(
        1 / (1 + math.exp(-2)), abs=1e-12)
    assert 1 / (1 + math.exp(-2)) == pytest.approx(0.880797, abs=1e-6)


def test_zero_threshold_prunes_nothing():
    w = philox(41).uniform(0.1, 1.0, size=(20, 20))
    state = apply_pruning(w, PruningState.full(w.shape, theta=0.0, beta=1e3), philox(42))
    assert measure_sparsity(state) == 0.0


def test_pruned_synapse_stays_pruned():
    w = np.full((1, 3), 5.0)
    mask = np.array([[1.0, 0.0, 1.0]])
    w[mask == 0] = 0.0
    state = PruningState(mask, theta=10.0, beta=50.0)
    for seed in range(20):
        state = apply_pruning(w, state, philox(seed))
        assert state.mask[0, 1] == 0 and w[0, 1] == 0


def test_half_pruned_at_threshold():
    theta = 0.4
    w = np.where(philox(43).random((100, 100)) < 0.5, theta, -theta)
    state = apply_pruning(w, PruningState.full(w.shape, theta=theta), philox(44))
    assert abs(measure_sparsity(state) - 0.5) <= 0.02
    assert not w[state.mask == 0].any()


def test_pruning_is_seeded():
    w0 = philox(45).uniform(-1, 1, size=(30, 30))
    masks = []
    for _ in range(2):
        w = w0.copy()
        masks.append(apply_pruning(w, PruningState.full(w.shape, theta=0.5), philox(46)).mask)
    np.testing.assert_array_equal(*masks)


def test_sparsity_counts():
    assert measure_sparsity(PruningState(np.ones((2, 2)))) == 0.0
    assert measure_sparsity(PruningState(np.zeros((2, 2)))) == 1.0
    assert measure_sparsity(PruningState(np.array([[1.0, 1.0], [0.0, 1.0]]))) == 0.25
    with pytest.raises(InputError):
        measure_sparsity(PruningState(np.ones((0, 3))))


def test_threshold_examples():
    assert threshold_step(0.3, 0.8, 0.8, 0.01) == 0.3
    assert threshold_step(0.2, 0.5, 0.9, 0.01, 1.0) == pytest.approx(0.204, abs=1e-15)
    assert threshold_step(0.0, 0.95, 0.8, 0.01) == 0.0


def test_state_validation():
    with pytest.raises(ContractViolation):
        PruningState.full((2, 2), rho=1.0)
    with pytest.raises(ContractViolation):
        PruningState.full((2, 2), beta=0.0)
    with pytest.raises(ContractViolation):
        PruningState.full((2, 2), interval=0)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 2.0), st.floats(0.0, 1.0), st.floats(0.05, 0.95), st.floats(1e-4, 1.0))
def test_threshold_never_negative(theta, s, rho, gamma):
    assert threshold_step(theta, s, rho, gamma) >= 0.0


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31), st.floats(0.1, 0.9))
def test_sparsity_monotone_without_regrowth(seed, rho):
    rng = philox(seed)
    w = rng.uniform(-1, 1, size=(20, 20))
    state = PruningState.full(w.shape, rho=rho, gamma=0.05)
    prev = 0.0
    for _ in range(30):
        before = state.mask
        state = controller_tick(w, state, rng)
        assert not np.any((before == 0) & (state.mask > 0))
        s = measure_sparsity(state)
        assert s >= prev
        prev = s


def test_pruned_weights_carry_no_current():
    rng = philox(47)
    w = rng.uniform(-1, 1, size=(6, 5))
    state = apply_pruning(w, PruningState.full(w.shape, theta=0.5), rng)
    trace = rng.uniform(0, 2, size=5)
    only_pruned = np.where(state.mask == 0, 1.0, 0.0) * w
    assert not synaptic_current(SynapticWeights(only_pruned), trace).any()
