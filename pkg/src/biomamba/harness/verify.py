"""Verification suites shared by the ``verify`` command and the test suite."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..learning.hybrid import HybridRuleConfig
from ..learning.loss import LossSpec
from ..learning.network import BimNetwork
from ..learning.rtrl import rtrl_sequence_gradient
from ..learning.stdp import StdpConfig, StdpState, stdp_pairwise, stdp_trace_step
from ..oracles import bptt_gradient, finite_difference_gradient, relative_error
from ..pruning import PruningState, controller_tick, measure_sparsity
from ..spiking import LifConfig
from .probe import fit_window, probe_stdp_window
from .tasks import philox

SUITES = ("rtrl", "stdp", "pruning")

RTRL_TOL = 1e-8
FD_TOL = 1e-4
FD_EPS = 1e-5
STDP_TOL = 1e-9
WINDOW_TOL = 0.10
SPARSITY_TOL = 0.05
PROBE_GRID = (-40, -20, -10, -5, -2, -1, 1, 2, 5, 10, 20, 40)


@dataclass
class CheckResult:
    suite: str
    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{self.suite}\t{self.name}\t{status}\t{self.value:.3e}\t"
                f"{self.tolerance:.3e}\t{self.detail}")


TABLE_HEADER = "suite\tcheck\tstatus\tvalue\ttolerance\tdetail"


def random_problem(rng: np.random.Generator, modes=("hard", "smooth", "bypass"),
                   max_params: int = 200, max_len: int = 32):
    """A small random network, input sequence and targets."""
    while True:
        n_state = int(rng.integers(1, 9))
        n_in = int(rng.integers(1, 4))
        n_out = int(rng.integers(1, 5))
        n_post = int(rng.integers(1, 5))
        n_cls = int(rng.integers(2, 5))
        mode = modes[int(rng.integers(len(modes)))]
        lif = LifConfig(surrogate_slope=float(rng.uniform(1.0, 10.0)))
        net = BimNetwork.create(n_in, n_state, n_out, n_post, n_cls, rng, lif, mode,
                                readout_scale=3.0)
        if net.n_params <= max_params:
            break
    # Drive the encoder hard enough to cross threshold now and then.
    net.ssm.block("b0")[:] *= 4.0
    if not net.bypass and rng.random() < 0.5:
        net.mask[:] = (rng.random(net.mask.shape) < 0.7).astype(float)
        net.readout.w[net.mask == 0] = 0.0
    length = int(rng.integers(4, max_len + 1))
    inputs = [rng.normal(0.0, 2.0, n_in) for _ in range(length)]
    if rng.random() < 0.5:
        loss = LossSpec("cross_entropy")
        targets = [int(rng.integers(-1, n_cls)) for _ in range(length)]
    else:
        loss = LossSpec("mse")
        targets = [rng.normal(0.0, 1.0, n_cls) for _ in range(length)]
    return net, inputs, targets, loss


def check_rtrl_bptt(n_configs: int = 24, seed: int = 11) -> CheckResult:
    rng = philox(seed)
    worst, spikes = 0.0, 0
    for _ in range(n_configs):
        net, inputs, targets, loss = random_problem(rng)
        rtrl = rtrl_sequence_gradient(net, inputs, targets, loss)
        bptt = bptt_gradient(net, inputs, targets, loss)
        worst = max(worst, relative_error(rtrl, bptt))
    return CheckResult("rtrl", "rtrl_matches_bptt", worst <= RTRL_TOL, worst, RTRL_TOL,
                       f"{n_configs} configs")


def check_bptt_fd(n_configs: int = 12, seed: int = 12) -> CheckResult:
    rng = philox(seed)
    worst, used, excluded = 0.0, 0, 0
    for _ in range(n_configs):
        net, inputs, targets, loss = random_problem(rng, modes=("smooth", "bypass"),
                                                    max_len=16)
        fd = finite_difference_gradient(net, inputs, targets, loss, epsilon=FD_EPS)
        bptt = bptt_gradient(net, inputs, targets, loss)
        worst = max(worst, relative_error(bptt, fd.grad, fd.smooth))
        used += int(fd.smooth.sum())
        excluded += int(fd.excluded.sum())
    return CheckResult("rtrl", "bptt_matches_finite_differences", worst <= FD_TOL, worst,
                       FD_TOL, f"{n_configs} configs, {used} coords, {excluded} excluded")


def poisson_times(rng, rate_hz: float, duration_ms: float, dt: float) -> np.ndarray:
    steps = int(duration_ms / dt)
    raster = rng.random(steps) < rate_hz * dt / 1000.0
    return np.flatnonzero(raster) * dt


def omega_from_traces(pre_times, post_times, cfg: StdpConfig, dt: float,
                      duration_ms: float) -> float:
    steps = int(duration_ms / dt)
    pre_steps = set(np.round(np.asarray(pre_times) / dt).astype(int).tolist())
    post_steps = set(np.round(np.asarray(post_times) / dt).astype(int).tolist())
    state = StdpState.zeros(1, 1)
    for k in range(steps):
        state = stdp_trace_step(state, np.array([float(k in pre_steps)]),
                                np.array([float(k in post_steps)]), cfg, dt)
    return float(state.omega[0, 0])


def check_stdp_traces(n_pairs: int = 100, seed: int = 13) -> CheckResult:
    rng = philox(seed)
    cfg = StdpConfig(a_plus=0.01, a_minus=0.012, tau_plus=20.0, tau_minus=20.0)
    dt = 1.0
    worst = 0.0
    for _ in range(n_pairs):
        duration = float(rng.uniform(100.0, 2000.0))
        pre = poisson_times(rng, rng.uniform(1.0, 50.0), duration, dt)
        post = poisson_times(rng, rng.uniform(1.0, 50.0), duration, dt)
        online = omega_from_traces(pre, post, cfg, dt, duration)
        brute = stdp_pairwise(pre, post, cfg)
        worst = max(worst, abs(online - brute))
    return CheckResult("stdp", "trace_matches_pair_sum", worst <= STDP_TOL, worst, STDP_TOL,
                       f"{n_pairs} Poisson pairs")


def check_stdp_window(tau_plus: float = 20.0, tau_minus: float = 20.0) -> CheckResult:
    stdp = StdpConfig(a_plus=0.01, a_minus=0.012, tau_plus=tau_plus, tau_minus=tau_minus)
    hybrid = HybridRuleConfig(eta=1.0, lam=0.5, omega_scale=1.0)
    table = probe_stdp_window(stdp, hybrid, PROBE_GRID)
    fit = fit_window(table)
    err = max(abs(fit["tau_plus"] - tau_plus) / tau_plus,
              abs(fit["tau_minus"] - tau_minus) / tau_minus)
    signs_ok = all((dw > 0) if lag >= 0 else (dw < 0) for lag, dw in table)
    detail = (f"tau+={fit['tau_plus']:.4f} tau-={fit['tau_minus']:.4f} "
              f"signs={'ok' if signs_ok else 'wrong'}")
    return CheckResult("stdp", "window_decay_constants", err <= WINDOW_TOL and signs_ok,
                       err, WINDOW_TOL, detail)


def pruning_trajectory(rho: float, evaluations: int = 1000, seed: int = 14):
    """Sparsity after each controller evaluation on a static weight matrix."""
    rng = philox(seed, int(rho * 1000))
    weights = rng.uniform(-1.0, 1.0, size=(100, 100))
    state = PruningState.full(weights.shape, rho=rho)
    sparsity, regrew = [], False
    for _ in range(evaluations):
        before = state.mask
        state = controller_tick(weights, state, rng)
        regrew |= bool(np.any((before == 0) & (state.mask > 0)))
        regrew |= bool(np.any(weights[state.mask == 0] != 0))
        sparsity.append(measure_sparsity(state))
    return np.array(sparsity), regrew


def check_pruning(rhos=(0.5, 0.8, 0.9), evaluations: int = 1000) -> list[CheckResult]:
    out = []
    for rho in rhos:
        s, regrew = pruning_trajectory(rho, evaluations)
        inside = np.abs(s - rho) <= SPARSITY_TOL
        first = int(np.argmax(inside)) if inside.any() else evaluations
        stays = bool(inside[first:].all()) if inside.any() else False
        monotone = bool(np.all(np.diff(s) >= 0))
        ok = first < 500 and stays and monotone and not regrew
        dev = float(np.max(np.abs(s[first:] - rho))) if inside.any() else float("inf")
        out.append(CheckResult(
            "pruning", f"controller_rho_{rho}", ok, dev, SPARSITY_TOL,
            f"reached at eval {first + 1}, final {s[-1]:.4f}, monotone={monotone}, "
            f"regrowth={regrew}"))
    return out


def run_suite(name: str) -> list[CheckResult]:
    if name == "rtrl":
        return [check_rtrl_bptt(), check_bptt_fd()]
    if name == "stdp":
        return [check_stdp_traces(), check_stdp_window()]
    if name == "pruning":
        return check_pruning()
    raise ValueError(f"unknown suite {name!r}")
