"""Synthetic sequence tasks.

Each task is a small stand-in for a sequence domain:

* ``delayed-copy``: a one-hot token at step 0, zeros afterwards; the target
  is class ``token + 1`` at step ``delay`` and class 0 (blank) elsewhere.
* ``spike-pattern-classification``: one of ``classes`` fixed Poisson
  rasters with +/-1 step jitter; the class is scored at the last step only.
* ``oscillatory-anomaly``: per-channel sums of sinusoids plus noise, with
  injected high-frequency bursts; per-step binary target.

Episodes are generated from a Philox stream keyed on ``(seed, episode)``,
so they are reproducible independently of how many were drawn before.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError

TASK_KINDS = ("delayed-copy", "spike-pattern-classification", "oscillatory-anomaly")
STEP_MS = 1.0
BURST_STEPS = 20


def philox(*key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(list(key))))


@dataclass(frozen=True)
class TaskSpec:
    kind: str = "delayed-copy"
    length: int = 20
    dim: int = 8
    delay: int = 10
    classes: int = 4
    anomaly_rate: float = 0.01
    rate_hz: float = 50.0
    seed: int = 0

    def validate(self) -> None:
        if self.kind not in TASK_KINDS:
            raise ConfigError(f"unknown task kind {self.kind!r}; expected one of {TASK_KINDS}")
        if self.length < 1 or self.dim < 1:
            raise ConfigError("length and dim must be positive")
        if self.kind == "delayed-copy" and not 0 <= self.delay < self.length:
            raise ConfigError("delayed-copy needs 0 <= delay < length")
        if self.kind == "spike-pattern-classification" and self.classes < 2:
            raise ConfigError("spike-pattern-classification needs at least 2 classes")
        if not 0.0 <= self.anomaly_rate <= 1.0:
            raise ConfigError("anomaly_rate must lie in [0, 1]")
        if self.rate_hz < 0 or self.rate_hz * STEP_MS / 1000.0 > 1.0:
            raise ConfigError("rate_hz must give a per-step probability in [0, 1]")

    @property
    def n_classes(self) -> int:
        return {"delayed-copy": self.dim + 1,
                "spike-pattern-classification": self.classes,
                "oscillatory-anomaly": 2}[self.kind]


def gen_episode(spec: TaskSpec, episode: int) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(inputs, targets)``: a (length, dim) float array and a
    length-long int array of class indices (-1 where nothing is scored)."""
    spec.validate()
    rng = philox(spec.seed, 1, episode)
    if spec.kind == "delayed-copy":
        return _copy_episode(spec, rng)
    if spec.kind == "spike-pattern-classification":
        return _pattern_episode(spec, rng)
    return _anomaly_episode(spec, rng)


def _copy_episode(spec, rng):
    inputs = np.zeros((spec.length, spec.dim))
    targets = np.zeros(spec.length, dtype=np.int64)
    token = int(rng.integers(spec.dim))
    inputs[0, token] = 1.0
    targets[spec.delay] = token + 1
    return inputs, targets


def pattern_templates(spec: TaskSpec) -> np.ndarray:
    rng = philox(spec.seed, 0)
    p = spec.rate_hz * STEP_MS / 1000.0
    return (rng.random((spec.classes, spec.length, spec.dim)) < p).astype(np.float64)


def _pattern_episode(spec, rng):
    templates = pattern_templates(spec)
    label = int(rng.integers(spec.classes))
    steps, chans = np.nonzero(templates[label])
    shifted = np.clip(steps + rng.integers(-1, 2, size=steps.size), 0, spec.length - 1)
    inputs = np.zeros((spec.length, spec.dim))
    inputs[shifted, chans] = 1.0
    targets = np.full(spec.length, -1, dtype=np.int64)
    targets[-1] = label
    return inputs, targets


def _anomaly_episode(spec, rng):
    base = philox(spec.seed, 0)
    freqs = base.uniform(4.0, 12.0, size=(spec.dim, 2))
    phases = base.uniform(0.0, 2 * np.pi, size=(spec.dim, 2))
    t = np.arange(spec.length)[:, None] * STEP_MS / 1000.0
    shift = rng.uniform(0.0, 2 * np.pi)
    signal = sum(np.sin(2 * np.pi * freqs[:, k] * t + phases[:, k] + shift) for k in range(2))
    signal = 0.5 * signal + 0.1 * rng.standard_normal((spec.length, spec.dim))

    targets = np.zeros(spec.length, dtype=np.int64)
    starts = rng.random(spec.length) < spec.anomaly_rate
    k = 0
    while k < spec.length:
        if starts[k]:
            end = min(spec.length, k + BURST_STEPS)
            tt = np.arange(end - k) * STEP_MS / 1000.0
            burst = 2.0 * np.sin(2 * np.pi * 40.0 * tt) * np.hanning(BURST_STEPS + 2)[1:end - k + 1]
            signal[k:end] += burst[:, None]
            targets[k:end] = 1
            k = end
        else:
            k += 1
    return signal, targets
