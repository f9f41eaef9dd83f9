"""Mixed update combining the loss gradient with the STDP term."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractViolation


@dataclass(frozen=True)
class HybridRuleConfig:
    eta: float = 0.01
    lam: float = 1.0
    omega_scale: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ContractViolation("lam must lie in [0, 1]")
        if self.eta < 0:
            raise ContractViolation("eta must be non-negative")


def hybrid_update(grad, omega, cfg: HybridRuleConfig, mask=None):
    """``eta * (lam * (-grad) + (1 - lam) * omega_scale * omega)``.

    The gradient enters with descent sign. At the endpoints the unused term
    is dropped entirely so that lam = 1 (or 0) is bit-identical to a pure
    gradient (or pure STDP) update. Entries with ``mask == 0`` get exactly 0.
    """
    grad = np.asarray(grad, dtype=np.float64)
    omega = np.asarray(omega, dtype=np.float64)
    if cfg.lam == 1.0:
        dw = cfg.eta * -grad
    elif cfg.lam == 0.0:
        dw = cfg.eta * (cfg.omega_scale * omega)
    else:
        dw = cfg.eta * (cfg.lam * -grad + (1.0 - cfg.lam) * cfg.omega_scale * omega)
    if mask is not None:
        dw = np.where(np.asarray(mask) > 0, dw, 0.0)
    return dw
