"""Leaky integrate-and-fire layer, PSP traces and the surrogate derivative.

Membrane update (explicit Euler, step ``dt``):

    V <- V + (dt / tau_m) * (-V + R_m * (I_syn + I_ext))

A neuron fires when V >= v_th and is then reset to v_reset. Presynaptic
spikes reach a target through an exponential kernel with unit peak, kept as
an O(1) running trace per source neuron.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ContractViolation, InputError

SPIKE_TRAIN_HEADER = "neuron_index\ttime_ms"


@dataclass(frozen=True)
class LifConfig:
    tau_m: float = 20.0
    r_m: float = 1.0
    v_th: float = 1.0
    v_reset: float = 0.0
    tau_s: float = 5.0
    dt: float = 1.0
    surrogate_slope: float = 10.0

    def __post_init__(self):
        if self.tau_m <= 0 or self.tau_s <= 0 or self.dt <= 0:
            raise ContractViolation("tau_m, tau_s and dt must be positive")
        if self.dt > self.tau_m / 2:
            raise ContractViolation("dt must not exceed tau_m / 2")
        if self.v_th <= self.v_reset:
            raise ContractViolation("v_th must exceed v_reset")
        if self.surrogate_slope <= 0:
            raise ContractViolation("surrogate_slope must be positive")

    @property
    def leak(self) -> float:
        """Multiplier applied to V each step in the absence of input."""
        return 1.0 - self.dt / self.tau_m

    @property
    def gain(self) -> float:
        """Multiplier from input current to membrane increment."""
        return self.dt / self.tau_m * self.r_m

    @property
    def trace_decay(self) -> float:
        return math.exp(-self.dt / self.tau_s)


@dataclass
class NeuronState:
    v: np.ndarray
    syn: np.ndarray
    last_spike: np.ndarray
    t: float = 0.0

    @classmethod
    def rest(cls, n: int, cfg: LifConfig | None = None) -> "NeuronState":
        v0 = 0.0 if cfg is None else cfg.v_reset
        return cls(np.full(n, v0), np.zeros(n), np.full(n, np.nan), 0.0)


@dataclass
class SynapticWeights:
    w: np.ndarray

    def __post_init__(self):
        if self.w.ndim != 2:
            raise ContractViolation("weights must be a 2-d (n_post, n_pre) array")

    @property
    def shape(self):
        return self.w.shape


@dataclass
class SpikeTrain:
    """Time-ordered ``(neuron_index, time_ms)`` events."""

    events: list[tuple[int, float]] = field(default_factory=list)
    n_neurons: int | None = None

    def __post_init__(self):
        seen = set()
        last = -math.inf
        for idx, t in self.events:
            if t < last:
                raise InputError("spike times must be non-decreasing")
            if idx < 0 or (self.n_neurons is not None and idx >= self.n_neurons):
                raise InputError(f"neuron index {idx} out of range")
            if (idx, t) in seen:
                raise InputError(f"duplicate event ({idx}, {t})")
            seen.add((idx, t))
            last = t

    def times(self, neuron: int) -> np.ndarray:
        return np.array([t for i, t in self.events if i == neuron], dtype=np.float64)

    @classmethod
    def from_raster(cls, raster: np.ndarray, dt: float, t0: float = 0.0) -> "SpikeTrain":
        """Build from a (steps, neurons) 0/1 array; step k sits at t0 + k*dt."""
        raster = np.asarray(raster)
        steps, neurons = np.nonzero(raster)
        events = [(int(j), t0 + float(k) * dt) for k, j in zip(steps, neurons)]
        return cls(events, raster.shape[1])

    def dumps(self) -> str:
        lines = [SPIKE_TRAIN_HEADER]
        lines += [f"{i}\t{t:.9g}" for i, t in self.events]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "SpikeTrain":
        rows = text.splitlines()
        if not rows or rows[0].strip() != SPIKE_TRAIN_HEADER:
            raise InputError("spike train text is missing its header line")
        events = []
        for row in rows[1:]:
            if not row.strip():
                continue
            idx, t = row.split("\t")
            events.append((int(idx), float(t)))
        return cls(events)

    def save(self, path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path) -> "SpikeTrain":
        return cls.loads(Path(path).read_text())


def psp_kernel(s, tau_s: float):
    """Causal unit-peak exponential kernel, ``exp(-s/tau_s)`` for s >= 0."""
    s = np.asarray(s, dtype=np.float64)
    out = np.where(s >= 0, np.exp(-np.maximum(s, 0.0) / tau_s), 0.0)
    return float(out) if out.ndim == 0 else out


def explicit_trace(spike_times, t: float, tau_s: float) -> float:
    """Direct sum of the kernel over a spike list; the reference for traces."""
    return float(np.sum(psp_kernel(t - np.asarray(spike_times, dtype=np.float64), tau_s)))


def update_trace(trace: np.ndarray, spikes: np.ndarray, cfg: LifConfig) -> np.ndarray:
    return trace * cfg.trace_decay + spikes


def synaptic_current(weights: SynapticWeights, syn_traces) -> np.ndarray:
    syn_traces = np.asarray(syn_traces, dtype=np.float64)
    if weights.w.shape[1] != syn_traces.shape[0]:
        raise ContractViolation(
            f"weights expect {weights.w.shape[1]} presynaptic traces, got {syn_traces.shape[0]}")
    return weights.w @ syn_traces


def surrogate_spike_grad(v, cfg: LifConfig):
    """Fast-sigmoid surrogate ``1 / (1 + k|v - v_th|)^2``; peak 1 at threshold."""
    z = np.asarray(v, dtype=np.float64) - cfg.v_th
    out = 1.0 / (1.0 + cfg.surrogate_slope * np.abs(z)) ** 2
    return float(out) if out.ndim == 0 else out


def smooth_spike(v, cfg: LifConfig):
    """Smoothed spike whose exact derivative is ``surrogate_spike_grad``.

    Equals ``1/k + z/(1 + k|z|)`` with ``z = v - v_th``: zero far below
    threshold, ``2/k`` far above.
    """
    k = cfg.surrogate_slope
    z = np.asarray(v, dtype=np.float64) - cfg.v_th
    return 1.0 / k + z / (1.0 + k * np.abs(z))


def hard_spike(v, cfg: LifConfig):
    return (np.asarray(v) >= cfg.v_th).astype(np.float64)


def membrane_update(v: np.ndarray, current: np.ndarray, cfg: LifConfig) -> np.ndarray:
    return cfg.leak * v + cfg.gain * current


def reset(v_pre: np.ndarray, s: np.ndarray, cfg: LifConfig) -> np.ndarray:
    """``v (1 - s) + v_reset s``; exact reset for binary s, blend for smoothed s."""
    return v_pre * (1.0 - s) + cfg.v_reset * s


def lif_step(state: NeuronState, i_syn, i_ext, cfg: LifConfig) -> tuple[NeuronState, np.ndarray]:
    i_syn = np.asarray(i_syn, dtype=np.float64)
    i_ext = np.asarray(i_ext, dtype=np.float64)
    n = state.v.shape[0]
    if i_syn.shape != (n,) or i_ext.shape != (n,):
        raise ContractViolation(f"currents must have shape ({n},)")
    if not (np.all(np.isfinite(i_syn)) and np.all(np.isfinite(i_ext))):
        raise InputError("non-finite input current")
    v_pre = membrane_update(state.v, i_syn + i_ext, cfg)
    s = hard_spike(v_pre, cfg)
    t = state.t + cfg.dt
    last = np.where(s > 0, t, state.last_spike)
    new = NeuronState(reset(v_pre, s, cfg), update_trace(state.syn, s, cfg), last, t)
    return new, s
