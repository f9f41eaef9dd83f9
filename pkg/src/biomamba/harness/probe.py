"""Measure the weight change produced by a single pre/post spike pairing."""
from __future__ import annotations

import numpy as np

from ..errors import ContractViolation
from ..learning.hybrid import HybridRuleConfig, hybrid_update
from ..learning.stdp import StdpConfig, StdpState, stdp_trace_step

LEAD_STEPS = 5


def probe_stdp_window(stdp: StdpConfig, hybrid: HybridRuleConfig, delta_grid,
                      dt: float = 1.0) -> list[tuple[float, float]]:
    """For each lag (post minus pre, ms) return ``(lag, total dw)``.

    One pre and one post neuron are forced to fire once each; the online
    rule runs every step with a zero gradient term. Lags are rounded to
    whole steps and the realized lag is reported.
    """
    if hybrid.lam >= 1.0:
        raise ContractViolation("the probe needs lam < 1 so the STDP term is active")
    table = []
    for lag in delta_grid:
        k = int(round(lag / dt))
        t_pre = LEAD_STEPS + max(0, -k)
        t_post = t_pre + k
        state = StdpState.zeros(1, 1)
        dw = 0.0
        for step in range(max(t_pre, t_post) + 2):
            pre = np.array([1.0 if step == t_pre else 0.0])
            post = np.array([1.0 if step == t_post else 0.0])
            state = stdp_trace_step(state, pre, post, stdp, dt)
            dw += float(hybrid_update(np.zeros((1, 1)), state.omega, hybrid)[0, 0])
            state.omega = np.zeros_like(state.omega)
        table.append((k * dt, dw))
    return table


def fit_exponential(lags, values) -> tuple[float, float]:
    """Least-squares fit of ``|v| = A exp(-|lag| / tau)`` in log space; returns (A, tau)."""
    lags = np.abs(np.asarray(lags, dtype=np.float64))
    mags = np.abs(np.asarray(values, dtype=np.float64))
    if lags.size < 2 or np.any(mags <= 0):
        raise ValueError("need at least two points with non-zero magnitude")
    slope, intercept = np.polyfit(lags, np.log(mags), 1)
    return float(np.exp(intercept)), float(-1.0 / slope)


def fit_window(table) -> dict:
    """Fit both sides of a probe table separately."""
    arr = np.asarray(table, dtype=np.float64)
    pos = arr[arr[:, 0] >= 0]
    neg = arr[arr[:, 0] < 0]
    a_plus, tau_plus = fit_exponential(pos[:, 0], pos[:, 1])
    a_minus, tau_minus = fit_exponential(neg[:, 0], neg[:, 1])
    return {"a_plus": a_plus, "tau_plus": tau_plus,
            "a_minus": a_minus, "tau_minus": tau_minus}


def format_probe(table) -> str:
    lines = ["delta_t_ms,delta_w"]
    lines += [f"{lag:.9g},{dw:.9g}" for lag, dw in table]
    return "\n".join(lines) + "\n"
