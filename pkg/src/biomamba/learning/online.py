"""One fully online training step of the composed network."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import NumericError
from .hybrid import HybridRuleConfig, hybrid_update
from .loss import LossSpec, is_correct, loss_and_grad
from .network import BimNetwork, forward, output_jacobians, propagate
from .rtrl import instantaneous_gradient
from .stdp import StdpConfig, StdpState, stdp_trace_step


@dataclass(frozen=True)
class OnlineConfig:
    loss: LossSpec = field(default_factory=LossSpec)
    stdp: StdpConfig | None = field(default_factory=StdpConfig)
    hybrid: HybridRuleConfig = field(default_factory=HybridRuleConfig)


@dataclass
class Traces:
    """Per-instance running quantities: state, eligibility and STDP traces."""

    z: np.ndarray
    e: np.ndarray
    stdp: StdpState | None

    @classmethod
    def fresh(cls, net: BimNetwork) -> "Traces":
        stdp = None if net.bypass else StdpState.zeros(net.n_post, net.n_out)
        return cls(net.zero_state(), net.zero_eligibility(), stdp)

    def reset_episode(self, net: BimNetwork) -> None:
        """Return the network state to rest; sensitivities restart at zero."""
        self.z = net.zero_state()
        self.e[:] = 0.0
        if self.stdp is not None:
            self.stdp = StdpState.zeros(net.n_post, net.n_out)

    def nbytes(self) -> int:
        total = self.z.nbytes + self.e.nbytes
        if self.stdp is not None:
            total += sum(a.nbytes for a in (self.stdp.pre_trace, self.stdp.post_trace,
                                            self.stdp.omega))
        return total


@dataclass
class StepMetrics:
    loss: float
    correct: bool | None
    spikes: int
    synops: int
    grad: np.ndarray = field(repr=False)
    omega: np.ndarray | None = field(default=None, repr=False)
    delta: np.ndarray | None = field(default=None, repr=False)
    pre: np.ndarray | None = field(default=None, repr=False)
    post: np.ndarray | None = field(default=None, repr=False)


def online_step(net: BimNetwork, traces: Traces, u, target,
                cfg: OnlineConfig) -> tuple[BimNetwork, Traces, StepMetrics]:
    """Forward, loss, eligibility update, STDP traces, mixed update.

    The STDP term only touches the plastic synapses between the two spiking
    layers; every other parameter receives the lambda-weighted gradient term.
    ``net`` and ``traces`` are updated in place and returned.
    """
    z_new, cache = forward(net, traces.z, u)
    loss, dl_do = loss_and_grad(cfg.loss, cache.out, target)
    if not np.isfinite(loss):
        raise NumericError(f"non-finite loss {loss}")

    e = propagate(net, cache, traces.e)
    do_dz, direct = output_jacobians(net, cache)
    grad = instantaneous_gradient(e, dl_do, do_dz, direct)

    omega = None
    spikes = synops = 0
    if not net.bypass:
        spikes = int(np.count_nonzero(cache.s1) + np.count_nonzero(cache.s2))
        synops = int(np.count_nonzero(net.mask * (cache.s1 > 0)[None, :]))
        if cfg.stdp is not None:
            traces.stdp = stdp_trace_step(traces.stdp, cache.s1, cache.s2, cfg.stdp, net.lif.dt)
            omega = traces.stdp.omega

    delta = hybrid_update(grad, 0.0, cfg.hybrid, mask=net.trainable_mask())
    if omega is not None:
        delta[net.sl_w] = hybrid_update(grad[net.sl_w].reshape(omega.shape), omega,
                                        cfg.hybrid, mask=net.mask).ravel()
        # Omega is consumed by every update; the divisor for elapsed steps is 1.
        traces.stdp.omega = np.zeros_like(omega)
    if not np.all(np.isfinite(delta)):
        raise NumericError("non-finite parameter update")
    net.theta += delta

    traces.z = z_new
    traces.e = e
    metrics = StepMetrics(loss=loss, correct=is_correct(cfg.loss, cache.out, target),
                          spikes=spikes, synops=synops, grad=grad, omega=omega, delta=delta,
                          pre=cache.s1, post=cache.s2)
    return net, traces, metrics
