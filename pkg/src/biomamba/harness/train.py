"""Online training loop, metrics log and resumable state."""
from __future__ import annotations

import csv
import io
import logging
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..errors import NumericError
from ..learning.network import BimNetwork
from ..learning.online import Traces, online_step
from ..learning.stdp import StdpState
from ..pruning import PruningState, controller_tick
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .config import RunConfig
from .tasks import gen_episode, philox

log = logging.getLogger(__name__)

METRIC_FIELDS = ("step", "loss", "accuracy", "spikes", "synops", "alive_synapses",
                 "sparsity", "theta", "wall_ms")


@dataclass
class MetricsRecord:
    step: int
    loss: float
    accuracy: float
    spikes: int
    synops: int
    alive_synapses: int
    sparsity: float
    theta: float
    wall_ms: float

    def row(self) -> list[str]:
        return [str(self.step), _fmt(self.loss), _fmt(self.accuracy), str(self.spikes),
                str(self.synops), str(self.alive_synapses), _fmt(self.sparsity),
                _fmt(self.theta), _fmt(self.wall_ms)]


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def format_metrics(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(METRIC_FIELDS)
    for rec in records:
        writer.writerow(rec.row())
    return buf.getvalue()


def read_metrics(path) -> list[MetricsRecord]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != METRIC_FIELDS:
            raise ValueError(f"{path}: unexpected metrics header {reader.fieldnames}")
        return [MetricsRecord(int(r["step"]), float(r["loss"]), float(r["accuracy"]),
                              int(r["spikes"]), int(r["synops"]), int(r["alive_synapses"]),
                              float(r["sparsity"]), float(r["theta"]), float(r["wall_ms"]))
                for r in reader]


class Diverged(NumericError):
    """Training produced a non-finite value; carries the diagnostic checkpoint path."""

    def __init__(self, message: str, checkpoint: Path | None):
        super().__init__(message)
        self.checkpoint = checkpoint


@dataclass
class TrainerState:
    """Everything needed to continue a run bit-exactly."""

    cfg: RunConfig
    net: BimNetwork
    traces: Traces
    pruning: PruningState | None
    rng: np.random.Generator
    step: int = 0
    episode: int = 0
    pos: int = 0
    total_spikes: int = 0
    total_synops: int = 0
    window: dict = field(default_factory=lambda: {"loss": 0.0, "n_loss": 0,
                                                  "hits": 0, "n_acc": 0})

    @classmethod
    def initial(cls, cfg: RunConfig) -> "TrainerState":
        rng = philox(cfg.seed, 7)
        task = cfg.task_spec()
        net = BimNetwork.create(task.dim, cfg.n_state, cfg.n_out, cfg.n_post, task.n_classes,
                                rng, cfg.lif(), cfg.spike_mode, cfg.readout_scale)
        pruning = None
        if cfg.pruning and not net.bypass:
            pruning = PruningState(net.mask.copy(), cfg.theta0, cfg.beta, cfg.gamma, cfg.rho,
                                   cfg.interval, cfg.eq9_literal)
        return cls(cfg, net, Traces.fresh(net), pruning, rng)

    def state_nbytes(self) -> int:
        """Bytes held in run state (excludes the emitted metrics log)."""
        total = self.net.theta.nbytes + self.net.mask.nbytes + self.traces.nbytes()
        if self.pruning is not None:
            total += self.pruning.mask.nbytes
        return total

    def to_checkpoint(self) -> Checkpoint:
        tensors = {"theta": self.net.theta, "mask": self.net.mask,
                   "z": self.traces.z, "e": self.traces.e}
        if self.traces.stdp is not None:
            tensors.update(stdp_pre=self.traces.stdp.pre_trace,
                           stdp_post=self.traces.stdp.post_trace,
                           stdp_omega=self.traces.stdp.omega)
        header = {"step": self.step, "episode": self.episode, "pos": self.pos,
                  "total_spikes": self.total_spikes, "total_synops": self.total_synops,
                  "window": self.window,
                  "pruning_theta": None if self.pruning is None else self.pruning.theta}
        return Checkpoint(header, self.cfg.dumps(), tensors, self.rng.bit_generator.state)

    @classmethod
    def from_checkpoint(cls, ckpt: Checkpoint) -> "TrainerState":
        cfg = RunConfig.loads(ckpt.config_text)
        state = cls.initial(cfg)
        t, h = ckpt.tensors, ckpt.header
        state.net.theta[:] = t["theta"]
        state.net.mask[:] = t["mask"]
        state.traces.z = t["z"].copy()
        state.traces.e = t["e"].copy()
        if "stdp_pre" in t:
            state.traces.stdp = StdpState(t["stdp_pre"].copy(), t["stdp_post"].copy(),
                                          t["stdp_omega"].copy())
        if state.pruning is not None:
            state.pruning = replace(state.pruning, mask=t["mask"].copy(),
                                    theta=float(h["pruning_theta"]))
        state.rng.bit_generator.state = ckpt.rng_state
        state.step, state.episode, state.pos = int(h["step"]), int(h["episode"]), int(h["pos"])
        state.total_spikes = int(h["total_spikes"])
        state.total_synops = int(h["total_synops"])
        state.window = dict(h["window"])
        return state


@dataclass
class TrainResult:
    state: TrainerState
    records: list[MetricsRecord]
    peak_state_bytes: int
    checkpoint: Path | None = None


def _prune(state: TrainerState) -> None:
    net = state.net
    before = state.pruning.mask
    state.pruning = controller_tick(net.readout.w, state.pruning, state.rng)
    net.mask[:] = state.pruning.mask
    dead = (before > 0) & (state.pruning.mask == 0)
    if dead.any():
        state.traces.e[:, net.sl_w.start + np.flatnonzero(dead.ravel())] = 0.0


def run(state: TrainerState, until: int | None = None, out_dir=None,
        sink=None) -> TrainResult:
    """Advance ``state`` to step ``until`` (default: cfg.steps)."""
    cfg = state.cfg
    until = cfg.steps if until is None else until
    online = cfg.online()
    out_dir = Path(out_dir) if out_dir is not None else None
    records: list[MetricsRecord] = []
    peak = state.state_nbytes()
    t0 = time.perf_counter()
    inputs, targets = gen_episode(cfg.task_spec(), state.episode)
    net, traces = state.net, state.traces
    last_ckpt = None

    while state.step < until:
        step = state.step + 1
        if state.pos == 0:
            traces.reset_episode(net)
        if state.pruning is not None and step > 1 and (step - 1) % cfg.interval == 0:
            _prune(state)
        try:
            _, _, m = online_step(net, traces, inputs[state.pos], targets[state.pos], online)
        except NumericError as exc:
            path = None
            if out_dir is not None:
                path = save_checkpoint(out_dir / "diverged.ckpt", state.to_checkpoint())
            raise Diverged(f"step {step}: {exc}", path) from exc

        state.step = step
        state.total_spikes += m.spikes
        state.total_synops += m.synops
        w = state.window
        if targets[state.pos] >= 0:
            w["loss"] += m.loss
            w["n_loss"] += 1
        if m.correct is not None:
            w["hits"] += int(m.correct)
            w["n_acc"] += 1
        state.pos += 1
        if state.pos == len(targets):
            state.episode += 1
            state.pos = 0
            inputs, targets = gen_episode(cfg.task_spec(), state.episode)

        if step % cfg.metric_every == 0:
            rec = _record(state, (time.perf_counter() - t0) * 1e3 if cfg.wall_clock else 0.0)
            records.append(rec)
            if sink is not None:
                sink(rec)
            peak = max(peak, state.state_nbytes())
        if out_dir is not None and cfg.checkpoint_every and step % cfg.checkpoint_every == 0:
            last_ckpt = save_checkpoint(out_dir / "checkpoints" / f"step{step:09d}.ckpt",
                                        state.to_checkpoint())
    return TrainResult(state, records, peak, last_ckpt)


def _record(state: TrainerState, wall_ms: float) -> MetricsRecord:
    w = state.window
    net = state.net
    alive = int(np.count_nonzero(net.mask))
    total = net.mask.size
    rec = MetricsRecord(
        step=state.step,
        loss=w["loss"] / w["n_loss"] if w["n_loss"] else float("nan"),
        accuracy=w["hits"] / w["n_acc"] if w["n_acc"] else float("nan"),
        spikes=state.total_spikes,
        synops=state.total_synops,
        alive_synapses=alive,
        sparsity=(total - alive) / total if total else 0.0,
        theta=state.pruning.theta if state.pruning is not None else 0.0,
        wall_ms=wall_ms,
    )
    state.window = {"loss": 0.0, "n_loss": 0, "hits": 0, "n_acc": 0}
    return rec


def train_online(cfg: RunConfig, out_dir=None, resume=None) -> TrainResult:
    """Run training to ``cfg.steps``; writes metrics.csv and checkpoints under ``out_dir``.

    With ``resume`` (a checkpoint path) the run continues from that state
    and the metrics file holds only the records produced after it.
    """
    if resume is not None:
        ckpt = load_checkpoint(resume)
        state = TrainerState.from_checkpoint(ckpt)
        if state.cfg != cfg:
            log.warning("config differs from checkpoint; continuing with the checkpoint's")
            cfg = state.cfg
    else:
        state = TrainerState.initial(cfg)

    fh = writer = None
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.yaml").write_text(cfg.dumps())
        fh = open(out / "metrics.csv", "w", newline="")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(METRIC_FIELDS)
    try:
        result = run(state, out_dir=out_dir,
                     sink=(lambda r: writer.writerow(r.row())) if writer else None)
    finally:
        if fh is not None:
            fh.close()
    if out_dir is not None:
        result.checkpoint = save_checkpoint(Path(out_dir) / "final.ckpt", state.to_checkpoint())
    return result


def quarter_loss_ratio(records) -> tuple[float, float, float]:
    """``(first-quarter mean, final-quarter mean, ratio)`` of the logged loss."""
    losses = np.array([r.loss for r in records], dtype=np.float64)
    q = len(losses) // 4
    if q == 0:
        raise ValueError("need at least four metric records")
    first, last = float(np.nanmean(losses[:q])), float(np.nanmean(losses[-q:]))
    return first, last, last / first
