"""The composed network and its per-step forward-mode sensitivities.

Signal chain for one step with input u:

    SSM:      x = a(u) * x_prev + B(u) u ;  y = C(u) x + D u
    encoder:  V1 = leak V1 + gain y          -> spikes s1, reset, trace r1
    synapses: i = (W * mask) r1
    readout:  V2 = leak V2 + gain i          -> spikes s2, reset, trace r2
    decoder:  o = Wd r2 + bd

The recurrent state is z = [x, V1, r1, V2, r2]. In ``bypass`` mode the two
spiking layers are removed, z = x and the decoder reads y directly.

``spike_mode``:
    hard    -- Heaviside spikes forward, surrogate derivative backward
    smooth  -- spikes replaced by ``smooth_spike`` whose derivative is the
               surrogate, so the graph is differentiable end to end
    bypass  -- no spiking layers
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import ssm as ssm_mod
from ..errors import ContractViolation
from ..spiking import (LifConfig, SynapticWeights, hard_spike, membrane_update,
                       reset, smooth_spike, surrogate_spike_grad)

SPIKE_MODES = ("hard", "smooth", "bypass")


@dataclass
class BimNetwork:
    n_in: int
    n_state: int
    n_out: int
    n_post: int
    n_classes: int
    lif: LifConfig = field(default_factory=LifConfig)
    spike_mode: str = "hard"
    theta: np.ndarray | None = field(default=None, repr=False)
    mask: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.spike_mode not in SPIKE_MODES:
            raise ContractViolation(f"unknown spike_mode {self.spike_mode!r}")
        if self.bypass:
            self.n_post = 0
        elif self.n_post < 1:
            raise ContractViolation("n_post must be >= 1 unless spike_mode is 'bypass'")
        if self.n_classes < 1:
            raise ContractViolation("n_classes must be >= 1")

        p_ssm = ssm_mod.param_count(self.n_state, self.n_in, self.n_out)
        p_w = self.n_post * self.n_out
        dec_in = self.n_out if self.bypass else self.n_post
        self.dec_in = dec_in
        self.sl_ssm = slice(0, p_ssm)
        self.sl_w = slice(p_ssm, p_ssm + p_w)
        self.sl_dec_w = slice(self.sl_w.stop, self.sl_w.stop + self.n_classes * dec_in)
        self.sl_dec_b = slice(self.sl_dec_w.stop, self.sl_dec_w.stop + self.n_classes)
        self.n_params = self.sl_dec_b.stop

        if self.theta is None:
            self.theta = np.zeros(self.n_params)
        if self.theta.shape != (self.n_params,):
            raise ContractViolation(
                f"theta has shape {self.theta.shape}, expected ({self.n_params},)")
        if self.mask is None:
            self.mask = np.ones((self.n_post, self.n_out))
        if self.mask.shape != (self.n_post, self.n_out):
            raise ContractViolation("mask shape must be (n_post, n_out)")

        self.ssm = ssm_mod.SsmParams(self.n_state, self.n_in, self.n_out, self.theta[self.sl_ssm])
        self.readout = SynapticWeights(self.theta[self.sl_w].reshape(self.n_post, self.n_out))
        self.dec_w = self.theta[self.sl_dec_w].reshape(self.n_classes, dec_in)
        self.dec_b = self.theta[self.sl_dec_b]

        n, m, p, q = self.n_state, self.n_in, self.n_out, self.n_post
        self.sx = slice(0, n)
        self.sv1 = slice(n, n + p * (not self.bypass))
        self.sr1 = slice(self.sv1.stop, self.sv1.stop + p * (not self.bypass))
        self.sv2 = slice(self.sr1.stop, self.sr1.stop + q)
        self.sr2 = slice(self.sv2.stop, self.sv2.stop + q)
        self.n_z = self.sr2.stop

        # Column indices of each parameter block inside the flat vector.
        def cols(name):
            sl = self.ssm.slice_of(name)
            return np.arange(sl.start, sl.stop).reshape(self.ssm._shapes[name])
        self._c_base = cols("base_a")
        self._c_gate = cols("gate_a")
        self._c_b0 = cols("b0")
        self._c_wb = cols("wb")
        self._c_c0 = cols("c0")
        self._c_wc = cols("wc")
        self._c_d = cols("d")
        self._c_w = np.arange(self.sl_w.start, self.sl_w.stop).reshape(q, p)
        self._c_decw = np.arange(self.sl_dec_w.start, self.sl_dec_w.stop).reshape(self.n_classes, dec_in)
        self._c_decb = np.arange(self.sl_dec_b.start, self.sl_dec_b.stop)
        self._rows_nm = np.repeat(np.arange(n)[:, None], m, axis=1)
        self._rows_pn = np.repeat(np.arange(p)[:, None], n, axis=1)
        self._rows_pm = np.repeat(np.arange(p)[:, None], m, axis=1)
        self._rows_qp = np.repeat(np.arange(q)[:, None], p, axis=1)

    @property
    def bypass(self) -> bool:
        return self.spike_mode == "bypass"

    @classmethod
    def create(cls, n_in: int, n_state: int, n_out: int, n_post: int, n_classes: int,
               rng: np.random.Generator, lif: LifConfig | None = None,
               spike_mode: str = "hard", readout_scale: float = 1.0) -> "BimNetwork":
        net = cls(n_in, n_state, n_out, n_post, n_classes, lif or LifConfig(), spike_mode)
        net.ssm.theta[:] = ssm_mod.SsmParams.init(n_state, n_in, n_out, rng).theta
        if not net.bypass:
            bound = readout_scale / np.sqrt(n_out)
            net.readout.w[:] = rng.uniform(-bound, bound, size=(net.n_post, n_out))
        bound = 1.0 / np.sqrt(net.dec_in)
        net.dec_w[:] = rng.uniform(-bound, bound, size=net.dec_w.shape)
        return net

    def copy(self) -> "BimNetwork":
        return BimNetwork(self.n_in, self.n_state, self.n_out, self.n_post, self.n_classes,
                          self.lif, self.spike_mode, self.theta.copy(), self.mask.copy())

    def zero_state(self) -> np.ndarray:
        z = np.zeros(self.n_z)
        z[self.sv1] = self.lif.v_reset
        z[self.sv2] = self.lif.v_reset
        return z

    def zero_eligibility(self) -> np.ndarray:
        return np.zeros((self.n_z, self.n_params))

    def trainable_mask(self) -> np.ndarray:
        """1 for every parameter that may change; pruned synapses are 0."""
        keep = np.ones(self.n_params)
        keep[self.sl_w] = self.mask.ravel()
        return keep

    def fire(self, v_pre: np.ndarray):
        """Return (spikes, post-reset potential, surrogate derivative)."""
        if self.spike_mode == "smooth":
            s = smooth_spike(v_pre, self.lif)
        else:
            s = hard_spike(v_pre, self.lif)
        g = surrogate_spike_grad(v_pre, self.lif)
        return s, reset(v_pre, s, self.lif), g


@dataclass
class StepCache:
    """Everything the sensitivity and adjoint passes need from one step."""

    u: np.ndarray
    su: float
    z_prev: np.ndarray
    a: np.ndarray
    x: np.ndarray
    c_eff: np.ndarray
    y: np.ndarray
    out: np.ndarray
    v1p: np.ndarray | None = None
    s1: np.ndarray | None = None
    g1: np.ndarray | None = None
    r1: np.ndarray | None = None
    w_eff: np.ndarray | None = None
    v2p: np.ndarray | None = None
    s2: np.ndarray | None = None
    g2: np.ndarray | None = None
    r2: np.ndarray | None = None


def forward(net: BimNetwork, z: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, StepCache]:
    """Advance the composed state by one step; returns (z_new, cache)."""
    mats = ssm_mod.selective_params(net.ssm, u)
    u = np.asarray(u, dtype=np.float64)
    x = mats.a_diag * z[net.sx] + mats.b @ u
    y = mats.c @ x + mats.d @ u
    z_new = np.empty_like(z)
    z_new[net.sx] = x
    cache = StepCache(u=u, su=float(u.sum()), z_prev=z, a=mats.a_diag, x=x,
                      c_eff=mats.c, y=y, out=None)
    if net.bypass:
        cache.out = net.dec_w @ y + net.dec_b
        return z_new, cache

    lif = net.lif
    v1p = membrane_update(z[net.sv1], y, lif)
    s1, v1, g1 = net.fire(v1p)
    r1 = z[net.sr1] * lif.trace_decay + s1
    w_eff = net.readout.w * net.mask
    v2p = membrane_update(z[net.sv2], w_eff @ r1, lif)
    s2, v2, g2 = net.fire(v2p)
    r2 = z[net.sr2] * lif.trace_decay + s2
    z_new[net.sv1] = v1
    z_new[net.sr1] = r1
    z_new[net.sv2] = v2
    z_new[net.sr2] = r2
    cache.v1p, cache.s1, cache.g1, cache.r1 = v1p, s1, g1, r1
    cache.w_eff = w_eff
    cache.v2p, cache.s2, cache.g2, cache.r2 = v2p, s2, g2, r2
    cache.out = net.dec_w @ r2 + net.dec_b
    return z_new, cache


def propagate(net: BimNetwork, cache: StepCache, e: np.ndarray,
              with_params: bool = True) -> np.ndarray:
    """Push sensitivities ``e = dz_prev/dtheta`` through one step.

    Returns ``J_state @ e + J_param`` (or ``J_state @ e`` when
    ``with_params`` is False), exploiting the block-triangular structure of
    the step instead of forming the dense state Jacobian.
    """
    lif = net.lif
    a, u = cache.a, cache.u
    out = np.empty_like(e)

    dx = a[:, None] * e[net.sx]
    if with_params:
        x_prev = cache.z_prev[net.sx]
        da = a * (1.0 - a) * x_prev
        n = net.n_state
        dx[np.arange(n), net._c_base] += da
        dx[net._rows_nm, net._c_gate] += da[:, None] * u[None, :]
        dx[net._rows_nm, net._c_b0] += u[None, :]
        dx[net._rows_nm, net._c_wb] += cache.su * u[None, :]
    out[net.sx] = dx

    dy = cache.c_eff @ dx
    if with_params:
        _add_output_direct(net, cache, dy)
    if net.bypass:
        return out

    dv1p = lif.leak * e[net.sv1] + lif.gain * dy
    rho1 = (1.0 - cache.s1) + (lif.v_reset - cache.v1p) * cache.g1
    out[net.sv1] = rho1[:, None] * dv1p
    dr1 = lif.trace_decay * e[net.sr1] + cache.g1[:, None] * dv1p
    out[net.sr1] = dr1

    di = cache.w_eff @ dr1
    if with_params:
        di[net._rows_qp, net._c_w] += net.mask * cache.r1[None, :]
    dv2p = lif.leak * e[net.sv2] + lif.gain * di
    rho2 = (1.0 - cache.s2) + (lif.v_reset - cache.v2p) * cache.g2
    out[net.sv2] = rho2[:, None] * dv2p
    out[net.sr2] = lif.trace_decay * e[net.sr2] + cache.g2[:, None] * dv2p
    return out


def _add_output_direct(net: BimNetwork, cache: StepCache, dy: np.ndarray) -> None:
    """Add dy/dtheta for C and D entries at fixed x (in place)."""
    x, u = cache.x, cache.u
    dy[net._rows_pn, net._c_c0] += x[None, :]
    dy[:, net._c_wc.ravel()] += np.outer(x, u).ravel()[None, :]
    dy[net._rows_pm, net._c_d] += u[None, :]


def jac_state(net: BimNetwork, cache: StepCache) -> np.ndarray:
    """Dense ``dz_t/dz_{t-1}`` (n_z x n_z); for checks and small networks."""
    probe = np.zeros((net.n_z, net.n_params))
    out = np.zeros((net.n_z, net.n_z))
    for k in range(net.n_z):
        probe[:] = 0.0
        probe[k, 0] = 1.0
        out[:, k] = propagate(net, cache, probe, with_params=False)[:, 0]
    return out


def jac_param(net: BimNetwork, cache: StepCache) -> np.ndarray:
    """Dense ``dz_t/dtheta`` at fixed z_{t-1} (n_z x P)."""
    return propagate(net, cache, net.zero_eligibility(), with_params=True)


def output_jacobians(net: BimNetwork, cache: StepCache) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(do/dz, direct do/dtheta)`` for the decoder output."""
    n_cls = net.n_classes
    do_dz = np.zeros((n_cls, net.n_z))
    direct = np.zeros((n_cls, net.n_params))
    if net.bypass:
        do_dz[:, net.sx] = net.dec_w @ cache.c_eff
        dy = np.zeros((net.n_out, net.n_params))
        _add_output_direct(net, cache, dy)
        direct += net.dec_w @ dy
        feat = cache.y
    else:
        do_dz[:, net.sr2] = net.dec_w
        feat = cache.r2
    rows = np.repeat(np.arange(n_cls)[:, None], net.dec_in, axis=1)
    direct[rows, net._c_decw] += feat[None, :]
    direct[np.arange(n_cls), net._c_decb] += 1.0
    return do_dz, direct
