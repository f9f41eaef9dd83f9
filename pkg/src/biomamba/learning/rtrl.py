"""Real-time recurrent learning: eligibility recursion and gradient readout.

An eligibility tensor is a plain ``(n_state, P)`` array whose column p holds
dx(t)/dtheta_p; it starts at zero.
"""
from __future__ import annotations

import numpy as np

from ..errors import ContractViolation, NumericError


def eligibility_step(e_prev: np.ndarray, jac_state, jac_param: np.ndarray) -> np.ndarray:
    """``e(t) = jac_state @ e(t-1) + jac_param``.

    ``jac_state`` may be a dense ``(n, n)`` matrix or a callable applying
    the state Jacobian to an ``(n, P)`` array, for structured Jacobians.
    """
    if e_prev.shape != jac_param.shape:
        raise ContractViolation(
            f"eligibility {e_prev.shape} and parameter Jacobian {jac_param.shape} differ")
    if callable(jac_state):
        carried = jac_state(e_prev)
    else:
        n = e_prev.shape[0]
        if jac_state.shape != (n, n):
            raise ContractViolation(f"state Jacobian must be ({n}, {n}), got {jac_state.shape}")
        if not np.all(np.isfinite(jac_state)):
            raise NumericError("non-finite state Jacobian")
        carried = jac_state @ e_prev
    if not np.all(np.isfinite(jac_param)):
        raise NumericError("non-finite parameter Jacobian")
    return carried + jac_param


def instantaneous_gradient(e: np.ndarray, dl_dy: np.ndarray, dy_dx: np.ndarray,
                           direct_terms: np.ndarray | None = None) -> np.ndarray:
    """Per-step loss gradient ``dl_dy @ (dy_dx @ e + direct_terms)``.

    Contracting ``dl_dy`` first keeps this O(n P) instead of O(n_out n P).
    """
    n_out = dl_dy.shape[0]
    if dy_dx.shape != (n_out, e.shape[0]):
        raise ContractViolation(
            f"output Jacobian must be ({n_out}, {e.shape[0]}), got {dy_dx.shape}")
    g = (dl_dy @ dy_dx) @ e
    if direct_terms is not None:
        if direct_terms.shape != (n_out, e.shape[1]):
            raise ContractViolation("direct terms must be (n_out, P)")
        g = g + dl_dy @ direct_terms
    return g



def rtrl_sequence_gradient(net, inputs, targets, loss, z0=None) -> np.ndarray:
    """Sum of per-step online gradients with the parameters held fixed."""
    from .loss import loss_and_grad
    from .network import forward, output_jacobians, propagate

    z = net.zero_state() if z0 is None else np.array(z0, dtype=np.float64)
    e = net.zero_eligibility()
    total = np.zeros(net.n_params)
    for u, tgt in zip(inputs, targets):
        z, cache = forward(net, z, u)
        e = propagate(net, cache, e)
        _, dl = loss_and_grad(loss, cache.out, tgt)
        do_dz, direct = output_jacobians(net, cache)
        total += instantaneous_gradient(e, dl, do_dz, direct)
    return total
