import numpy as np
import pytest

from biomamba.errors import ResourceError
from biomamba.harness.tasks import philox
from biomamba.harness.verify import random_problem
from biomamba.learning.loss import LossSpec
from biomamba.learning.network import BimNetwork
from biomamba.oracles import (MAX_TAPE, bptt_gradient, finite_difference_gradient,
                              record_tape, relative_error, tapes_identical)
from biomamba.spiking import LifConfig
from biomamba.ssm import logit


def scalar_problem(a=0.8, b=0.6, goal=0.3, inputs=(1.0, -0.5, 2.0, 0.25)):
    net = BimNetwork(1, 1, 1, 0, 1, spike_mode="bypass")
    net.ssm.block("base_a")[:] = logit(a)
    net.ssm.block("b0")[:] = b
    net.ssm.block("c0")[:] = 1.0
    net.dec_w[:] = 1.0
    targets = [np.array([np.nan])] * (len(inputs) - 1) + [np.array([goal])]
    return net, [np.array([u]) for u in inputs], targets


def test_scalar_closed_form():
    a, b, goal = 0.8, 0.6, 0.3
    net, inputs, targets = scalar_problem(a, b, goal)
    us = [u[0] for u in inputs]
    x = 0.0
    for u in us:
        x = a * x + b * u
    T = len(us)
    expected = (x - goal) * sum(a ** (T - 1 - k) * us[k] for k in range(T))
    g = bptt_gradient(net, inputs, targets, LossSpec("mse"))
    assert g[net.ssm.slice_of("b0").start] == pytest.approx(expected, rel=1e-13)


def test_exact_targets_give_zero_gradient():
    rng = philox(31)
    net = BimNetwork.create(2, 3, 2, 2, 3, rng, LifConfig(), "hard")
    inputs = [rng.normal(size=2) for _ in range(6)]
    targets = [c.out.copy() for c in record_tape(net, inputs, [-1] * 6, LossSpec()).caches]
    g = bptt_gradient(net, inputs, targets, LossSpec("mse"))
    assert not g.any()


def test_fd_constant_loss_is_zero():
    rng = philox(32)
    net = BimNetwork.create(2, 3, 2, 2, 3, rng, spike_mode="hard")
    net.dec_w[:] = 0.0
    fd = finite_difference_gradient(net, [rng.normal(size=2) for _ in range(5)], [-1] * 5,
                                    LossSpec())
    assert not fd.grad.any()


def test_pure_ssm_path_fd_matches_bptt():
    rng = philox(33)
    for _ in range(3):
        net, inputs, targets, loss = random_problem(rng, modes=("bypass",), max_len=12)
        fd = finite_difference_gradient(net, inputs, targets, loss)
        assert not fd.excluded.any()
        assert relative_error(bptt_gradient(net, inputs, targets, loss), fd.grad) <= 1e-6


def test_random_network_fd_matches_bptt():
    rng = philox(34)
    net, inputs, targets, loss = random_problem(rng, modes=("smooth",), max_len=16)
    inputs = (inputs * 16)[:16]
    targets = (targets * 16)[:16]
    fd = finite_difference_gradient(net, inputs, targets, loss)
    bptt = bptt_gradient(net, inputs, targets, loss)
    assert relative_error(bptt, fd.grad, fd.smooth) <= 1e-4


def test_central_difference_order():
    rng = philox(35)
    net, inputs, targets, loss = random_problem(rng, modes=("bypass",), max_len=10)
    bptt = bptt_gradient(net, inputs, targets, loss)
    errs = [np.max(np.abs(finite_difference_gradient(net, inputs, targets, loss, eps).grad - bptt))
            for eps in (2e-2, 1e-2)]
    # halving eps cuts the O(eps^2) truncation error by about four
    assert 3.0 < errs[0] / errs[1] < 5.0


def test_fd_flags_threshold_crossings():
    rng = philox(36)
    base = BimNetwork.create(1, 2, 1, 1, 2, rng, LifConfig(surrogate_slope=5.0), "hard", 3.0)
    inputs = [np.array([1.0])] * 4
    v_first = record_tape(base, inputs, [0] * 4, LossSpec()).caches[0].v1p[0]
    # Move the threshold onto the first encoder membrane value.
    net = BimNetwork(1, 2, 1, 1, 2, LifConfig(v_th=float(v_first), surrogate_slope=5.0), "hard",
                     base.theta.copy(), base.mask.copy())
    fd = finite_difference_gradient(net, inputs, [0] * 4, LossSpec(), epsilon=1e-5)
    assert fd.excluded.any() and fd.smooth.any()
    # decoder entries never touch a membrane
    assert not fd.excluded[net.sl_dec_b].any()


def test_tape_replay_is_bit_identical():
    rng = philox(37)
    net, inputs, targets, loss = random_problem(rng, modes=("hard",))
    tape = record_tape(net, inputs, targets, loss)
    assert len(tape) == len(inputs)
    assert tapes_identical(tape, tape.replay(net))
    other = net.copy()
    other.dec_b[:] += 1.0
    assert not tapes_identical(tape, tape.replay(other))


def test_tape_length_bound():
    net = BimNetwork.create(1, 1, 1, 1, 2, philox(38))
    with pytest.raises(ResourceError):
        bptt_gradient(net, [np.zeros(1)] * (MAX_TAPE + 1), [0] * (MAX_TAPE + 1), LossSpec())


def test_relative_error_definition():
    assert relative_error([1.0, 2.1], [1.0, 2.0]) == pytest.approx(0.05)
    assert relative_error([0.0], [0.0]) == 0.0
    assert relative_error([1.0, 5.0], [1.0, 2.0], where=[True, False]) == 0.0
