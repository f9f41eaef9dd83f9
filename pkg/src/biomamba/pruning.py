"""Stochastic magnitude pruning with a feedback-controlled threshold.

Each evaluation draws one Bernoulli per living synapse with probability
``sigmoid(beta * (theta - |w|))`` (small weights go first). The threshold
then moves by ``gamma * (rho - sparsity)`` per evaluation, clamped at 0.
Pruned synapses never regrow.

Setting ``eq9_literal=True`` uses ``sigmoid(beta * (|w| - theta))`` instead,
which removes large weights; kept only for comparison runs.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ContractViolation, InputError
from .ssm import sigmoid


@dataclass(frozen=True)
class PruningState:
    mask: np.ndarray
    theta: float = 0.0
    beta: float = 50.0
    gamma: float = 0.01
    rho: float = 0.8
    interval: int = 100
    eq9_literal: bool = False

    def __post_init__(self):
        if self.beta <= 0 or self.gamma <= 0:
            raise ContractViolation("beta and gamma must be positive")
        if not 0.0 < self.rho < 1.0:
            raise ContractViolation("rho must lie in (0, 1)")
        if self.interval < 1:
            raise ContractViolation("interval must be a positive integer")
        if self.theta < 0:
            raise ContractViolation("theta must be non-negative")

    @classmethod
    def full(cls, shape, **kw) -> "PruningState":
        return cls(np.ones(shape), **kw)


def prune_probability(w, theta: float, beta: float, literal: bool = False):
    gap = np.abs(w) - theta if literal else theta - np.abs(w)
    return sigmoid(beta * gap)


def apply_pruning(weights: np.ndarray, state: PruningState,
                  rng: np.random.Generator) -> PruningState:
    """One stochastic pruning pass.

    ``weights`` is zeroed in place at every newly pruned entry. One uniform
    draw is consumed per synapse (alive or not) so the stream position does
    not depend on the mask.
    """
    if weights.shape != state.mask.shape:
        raise ContractViolation("weights and mask shapes differ")
    p = prune_probability(weights, state.theta, state.beta, state.eq9_literal)
    draws = rng.random(weights.shape)
    mask = np.where((state.mask > 0) & (draws >= p), 1.0, 0.0)
    weights[mask == 0] = 0.0
    return replace(state, mask=mask)


def measure_sparsity(state: PruningState) -> float:
    if state.mask.size == 0:
        raise InputError("mask is empty")
    return float(np.count_nonzero(state.mask == 0) / state.mask.size)


def threshold_step(theta: float, sparsity: float, rho: float, gamma: float,
                   dt_ctrl: float = 1.0) -> float:
    return max(0.0, theta + dt_ctrl * gamma * (rho - sparsity))


def controller_tick(weights: np.ndarray, state: PruningState,
                    rng: np.random.Generator) -> PruningState:
    """Prune, measure, then move the threshold; one evaluation."""
    state = apply_pruning(weights, state, rng)
    theta = threshold_step(state.theta, measure_sparsity(state), state.rho, state.gamma)
    return replace(state, theta=theta)
