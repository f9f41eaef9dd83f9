"""Reference gradients used only for verification.

``bptt_gradient`` runs the network forward while recording a tape and then
walks it backwards with hand-derived adjoints. It shares the forward pass
with the online learner but none of the sensitivity code, so agreement with
RTRL checks the forward-mode recursion and agreement with finite
differences checks the local derivatives.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ResourceError
from .learning.loss import LossSpec, loss_and_grad
from .learning.network import BimNetwork, StepCache, forward
from .learning.stdp import stdp_pairwise  # noqa: F401  (re-exported reference)
from .ssm import SsmParams

MAX_TAPE = 1000


@dataclass
class UnrolledTape:
    inputs: list
    targets: list
    caches: list[StepCache] = field(repr=False)
    losses: np.ndarray
    z0: np.ndarray = field(repr=False)
    loss_spec: LossSpec = field(default_factory=LossSpec)

    def __len__(self):
        return len(self.caches)

    def replay(self, net: BimNetwork) -> "UnrolledTape":
        return record_tape(net, self.inputs, self.targets, self.loss_spec, self.z0)


def record_tape(net: BimNetwork, inputs, targets, loss: LossSpec,
                z0: np.ndarray | None = None) -> UnrolledTape:
    inputs, targets = list(inputs), list(targets)
    if len(inputs) > MAX_TAPE:
        raise ResourceError(f"sequence of {len(inputs)} steps exceeds tape bound {MAX_TAPE}")
    z = net.zero_state() if z0 is None else np.array(z0, dtype=np.float64)
    start = z.copy()
    caches, losses = [], []
    for u, tgt in zip(inputs, targets):
        z, cache = forward(net, z, u)
        caches.append(cache)
        losses.append(loss_and_grad(loss, cache.out, tgt)[0])
    return UnrolledTape(inputs, targets, caches, np.array(losses), start, loss)


def tapes_identical(a: UnrolledTape, b: UnrolledTape) -> bool:
    if len(a) != len(b) or not np.array_equal(a.losses, b.losses):
        return False
    for ca, cb in zip(a.caches, b.caches):
        for name in ("x", "y", "out", "v1p", "s1", "v2p", "s2"):
            va, vb = getattr(ca, name), getattr(cb, name)
            if (va is None) != (vb is None):
                return False
            if va is not None and not np.array_equal(va, vb):
                return False
    return True


def bptt_gradient(net: BimNetwork, inputs, targets, loss: LossSpec,
                  z0: np.ndarray | None = None) -> np.ndarray:
    """Gradient of the summed per-step loss by reverse-mode through time."""
    tape = record_tape(net, inputs, targets, loss, z0)
    lif = net.lif
    g_ssm = SsmParams.zeros(net.n_state, net.n_in, net.n_out)
    g_w = np.zeros((net.n_post, net.n_out))
    g_dw = np.zeros_like(net.dec_w)
    g_db = np.zeros_like(net.dec_b)

    w_eff = net.readout.w * net.mask
    bar_x = np.zeros(net.n_state)
    bar_v1 = np.zeros(net.n_out)
    bar_r1 = np.zeros(net.n_out)
    bar_v2 = np.zeros(net.n_post)
    bar_r2 = np.zeros(net.n_post)

    for c, tgt in zip(reversed(tape.caches), reversed(tape.targets)):
        _, bar_o = loss_and_grad(loss, c.out, tgt)
        if net.bypass:
            g_dw += np.outer(bar_o, c.y)
            g_db += bar_o
            bar_y = net.dec_w.T @ bar_o
        else:
            g_dw += np.outer(bar_o, c.r2)
            g_db += bar_o
            bar_r2 = bar_r2 + net.dec_w.T @ bar_o

            # readout layer
            bar_s2 = bar_r2.copy()
            bar_r2 = lif.trace_decay * bar_r2
            bar_v2p = bar_v2 * (1.0 - c.s2)
            bar_s2 += bar_v2 * (lif.v_reset - c.v2p)
            bar_v2p += bar_s2 * c.g2
            bar_v2 = lif.leak * bar_v2p
            bar_i = lif.gain * bar_v2p
            g_w += np.outer(bar_i, c.r1) * net.mask
            bar_r1 = bar_r1 + w_eff.T @ bar_i

            # encoder layer
            bar_s1 = bar_r1.copy()
            bar_r1 = lif.trace_decay * bar_r1
            bar_v1p = bar_v1 * (1.0 - c.s1)
            bar_s1 += bar_v1 * (lif.v_reset - c.v1p)
            bar_v1p += bar_s1 * c.g1
            bar_v1 = lif.leak * bar_v1p
            bar_y = lif.gain * bar_v1p

        # y = C(u) x + D u
        bar_x = bar_x + c.c_eff.T @ bar_y
        g_ssm.block("c0")[:] += np.outer(bar_y, c.x)
        g_ssm.block("wc")[:] += bar_y.sum() * np.outer(c.x, c.u)
        g_ssm.block("d")[:] += np.outer(bar_y, c.u)

        # x = a(u) * x_prev + b0 u + (wb u) sum(u)
        x_prev = c.z_prev[net.sx]
        bar_h = bar_x * x_prev * c.a * (1.0 - c.a)
        g_ssm.block("base_a")[:] += bar_h
        g_ssm.block("gate_a")[:] += np.outer(bar_h, c.u)
        g_ssm.block("b0")[:] += np.outer(bar_x, c.u)
        g_ssm.block("wb")[:] += np.outer(bar_x * c.su, c.u)
        bar_x = c.a * bar_x

    grad = np.zeros(net.n_params)
    grad[net.sl_ssm] = g_ssm.theta
    grad[net.sl_w] = g_w.ravel()
    grad[net.sl_dec_w] = g_dw.ravel()
    grad[net.sl_dec_b] = g_db
    return grad


def sequence_loss(net: BimNetwork, inputs, targets, loss: LossSpec,
                  z0: np.ndarray | None = None) -> tuple[float, np.ndarray]:
    """Total loss and the threshold sign pattern of every membrane visited."""
    tape = record_tape(net, inputs, targets, loss, z0)
    if net.bypass:
        signs = np.zeros(0, dtype=bool)
    else:
        signs = np.concatenate([np.concatenate([c.v1p, c.v2p]) >= net.lif.v_th
                                for c in tape.caches])
    return float(tape.losses.sum()), signs


@dataclass
class FdResult:
    grad: np.ndarray
    excluded: np.ndarray

    @property
    def smooth(self) -> np.ndarray:
        return ~self.excluded


def finite_difference_gradient(net: BimNetwork, inputs, targets, loss: LossSpec,
                               epsilon: float = 1e-5, z0=None) -> FdResult:
    """Central differences on the smoothed-spike version of ``net``.

    A coordinate is excluded when the +eps and -eps runs cross the spike
    threshold at different places (the surrogate has a kink there).
    """
    mode = "bypass" if net.bypass else "smooth"
    work = BimNetwork(net.n_in, net.n_state, net.n_out, net.n_post, net.n_classes,
                      net.lif, mode, net.theta.copy(), net.mask.copy())
    inputs, targets = list(inputs), list(targets)
    grad = np.zeros(net.n_params)
    excluded = np.zeros(net.n_params, dtype=bool)
    base = work.theta.copy()
    for p in range(net.n_params):
        work.theta[p] = base[p] + epsilon
        lp, sp = sequence_loss(work, inputs, targets, loss, z0)
        work.theta[p] = base[p] - epsilon
        lm, sm = sequence_loss(work, inputs, targets, loss, z0)
        work.theta[p] = base[p]
        grad[p] = (lp - lm) / (2.0 * epsilon)
        excluded[p] = not np.array_equal(sp, sm)
    return FdResult(grad, excluded)


def relative_error(value: np.ndarray, reference: np.ndarray, where=None) -> float:
    """``max |value - reference| / max |reference|`` over selected coordinates."""
    value, reference = np.asarray(value), np.asarray(reference)
    if where is not None:
        value, reference = value[where], reference[where]
    scale = np.max(np.abs(reference)) if reference.size else 0.0
    err = np.max(np.abs(value - reference)) if value.size else 0.0
    return float(err / scale) if scale > 0 else float(err)

