"""Per-step losses. Absent targets (class -1, or NaN rows) contribute nothing."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractViolation

LOSS_KINDS = ("cross_entropy", "mse")


@dataclass(frozen=True)
class LossSpec:
    kind: str = "cross_entropy"

    def __post_init__(self):
        if self.kind not in LOSS_KINDS:
            raise ContractViolation(f"unknown loss kind {self.kind!r}")


def has_target(target) -> bool:
    t = np.asarray(target)
    if t.ndim == 0:
        return int(t) >= 0
    return not np.any(np.isnan(t))


def loss_and_grad(spec: LossSpec, out: np.ndarray, target) -> tuple[float, np.ndarray]:
    """Loss value and its gradient w.r.t. the decoder output ``out``.

    cross_entropy: ``-log softmax(out)[target]`` with integer class target.
    mse: ``0.5 * sum((out - target)**2)``.
    """
    if not has_target(target):
        return 0.0, np.zeros_like(out)
    if spec.kind == "cross_entropy":
        k = int(target)
        shifted = out - out.max()
        logz = np.log(np.exp(shifted).sum())
        p = np.exp(shifted - logz)
        grad = p.copy()
        grad[k] -= 1.0
        return float(logz - shifted[k]), grad
    diff = out - np.asarray(target, dtype=np.float64)
    return float(0.5 * diff @ diff), diff


def is_correct(spec: LossSpec, out: np.ndarray, target) -> bool | None:
    """Classification hit; None when there is no target or for regression."""
    if spec.kind != "cross_entropy" or not has_target(target):
        return None
    return int(np.argmax(out)) == int(target)
