"""Spike-timing-dependent term: window, brute-force pair sum, online traces.

Indexing follows the weight matrix: ``omega[i, j]`` pairs postsynaptic
neuron i with presynaptic neuron j, and the window argument is
``t_post - t_pre``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ContractViolation


@dataclass(frozen=True)
class StdpConfig:
    a_plus: float = 0.01
    a_minus: float = 0.012
    tau_plus: float = 20.0
    tau_minus: float = 20.0

    def __post_init__(self):
        if min(self.a_plus, self.a_minus, self.tau_plus, self.tau_minus) <= 0:
            raise ContractViolation("STDP amplitudes and time constants must be positive")


@dataclass
class StdpState:
    pre_trace: np.ndarray
    post_trace: np.ndarray
    omega: np.ndarray

    @classmethod
    def zeros(cls, n_post: int, n_pre: int) -> "StdpState":
        return cls(np.zeros(n_pre), np.zeros(n_post), np.zeros((n_post, n_pre)))

    def copy(self) -> "StdpState":
        return StdpState(self.pre_trace.copy(), self.post_trace.copy(), self.omega.copy())


def stdp_window(delta_t, cfg: StdpConfig):
    """``A+ exp(-dt/tau+)`` for dt >= 0, ``-A- exp(dt/tau-)`` otherwise."""
    d = np.asarray(delta_t, dtype=np.float64)
    pos = cfg.a_plus * np.exp(-np.maximum(d, 0.0) / cfg.tau_plus)
    neg = -cfg.a_minus * np.exp(np.minimum(d, 0.0) / cfg.tau_minus)
    out = np.where(d >= 0, pos, neg)
    return float(out) if out.ndim == 0 else out


def stdp_pairwise(pre_times, post_times, cfg: StdpConfig) -> float:
    """Sum of the window over every (post, pre) spike pair. O(F_pre F_post)."""
    pre = np.asarray(pre_times, dtype=np.float64)
    post = np.asarray(post_times, dtype=np.float64)
    if pre.size == 0 or post.size == 0:
        return 0.0
    return float(np.sum(stdp_window(post[:, None] - pre[None, :], cfg)))


def stdp_trace_step(state: StdpState, pre_spikes, post_spikes, cfg: StdpConfig,
                    dt: float) -> StdpState:
    """Advance the online traces by one step and accumulate omega.

    Order: decay, pair new spikes with the decayed traces of earlier spikes,
    add the same-step (zero-lag) pairing as potentiation, then increment the
    traces. This reproduces the pair sum exactly.
    """
    pre = np.asarray(pre_spikes, dtype=np.float64)
    post = np.asarray(post_spikes, dtype=np.float64)
    if pre.shape != state.pre_trace.shape or post.shape != state.post_trace.shape:
        raise ContractViolation("spike vectors do not match the trace sizes")
    pre_trace = state.pre_trace * math.exp(-dt / cfg.tau_plus)
    post_trace = state.post_trace * math.exp(-dt / cfg.tau_minus)
    omega = (state.omega
             + cfg.a_plus * np.outer(post, pre_trace)
             - cfg.a_minus * np.outer(post_trace, pre)
             + cfg.a_plus * np.outer(post, pre))
    return StdpState(pre_trace + pre, post_trace + post, omega)
