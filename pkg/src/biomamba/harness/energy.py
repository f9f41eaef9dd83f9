"""Synaptic-operation accounting from a metrics log.

One synaptic operation is one alive synapse receiving one presynaptic
spike. The dense reference charges every alive synapse on every step.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InputError


@dataclass(frozen=True)
class EnergySummary:
    steps: int
    total_spikes: int
    total_synops: int
    spikes_per_step: float
    sparsity: float
    dense_synops: int
    synop_ratio: float


def count_synops(pre_spikes: np.ndarray, mask: np.ndarray) -> int:
    """Synaptic operations for one step: spikes weighted by alive fan-out."""
    fan_out = np.count_nonzero(mask, axis=0)
    return int(fan_out @ (np.asarray(pre_spikes) > 0))


def energy_report(records) -> EnergySummary:
    """Summarize cumulative counters; the dense reference charges each
    window with the alive count recorded at its end (exact when pruning
    happens only on window boundaries)."""
    records = list(records)
    if not records:
        raise InputError("metrics log is empty")
    dense, prev = 0, 0
    for rec in records:
        dense += rec.alive_synapses * (rec.step - prev)
        prev = rec.step
    last = records[-1]
    return EnergySummary(
        steps=last.step,
        total_spikes=last.spikes,
        total_synops=last.synops,
        spikes_per_step=last.spikes / last.step if last.step else 0.0,
        sparsity=last.sparsity,
        dense_synops=dense,
        synop_ratio=last.synops / dense if dense else 0.0,
    )
