"""Run configuration: one flat mapping of documented keys.

Files are flat YAML mappings (``key: value`` per line). Every key must be
one of the fields of :class:`RunConfig`; ``lambda`` is accepted as the
spelling of ``lam``. Unknown keys are errors.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from pathlib import Path

import yaml

from ..errors import ConfigError, ContractViolation
from ..learning.hybrid import HybridRuleConfig
from ..learning.loss import LossSpec
from ..learning.online import OnlineConfig
from ..learning.stdp import StdpConfig
from ..spiking import LifConfig
from .tasks import TaskSpec

ALIASES = {"lambda": "lam"}


@dataclass(frozen=True)
class RunConfig:
    # task
    task: str = "delayed-copy"
    length: int = 20
    dim: int = 8
    delay: int = 10
    classes: int = 4
    anomaly_rate: float = 0.01
    rate_hz: float = 50.0
    task_seed: int = 0
    # network
    n_state: int = 32
    n_out: int = 8
    n_post: int = 16
    spike_mode: str = "hard"
    readout_scale: float = 1.0
    # LIF
    tau_m: float = 20.0
    r_m: float = 1.0
    v_th: float = 1.0
    v_reset: float = 0.0
    tau_s: float = 5.0
    dt: float = 1.0
    surrogate_slope: float = 10.0
    # STDP
    a_plus: float = 0.01
    a_minus: float = 0.012
    tau_plus: float = 20.0
    tau_minus: float = 20.0
    # hybrid rule
    eta: float = 0.01
    lam: float = 1.0
    omega_scale: float = 1.0
    # pruning
    pruning: bool = True
    theta0: float = 0.0
    beta: float = 50.0
    gamma: float = 0.01
    rho: float = 0.8
    interval: int = 100
    eq9_literal: bool = False
    # run
    steps: int = 10000
    metric_every: int = 100
    checkpoint_every: int = 0
    seed: int = 0
    wall_clock: bool = False

    def __post_init__(self):
        try:
            self.task_spec().validate()
            self.lif()
            self.stdp()
            self.hybrid()
        except ContractViolation as exc:
            raise ConfigError(str(exc)) from exc
        if self.steps < 1 or self.metric_every < 1 or self.checkpoint_every < 0:
            raise ConfigError("steps and metric_every must be >= 1, checkpoint_every >= 0")
        if self.interval < 1 or not 0.0 < self.rho < 1.0 or self.beta <= 0 or self.gamma <= 0:
            raise ConfigError("invalid pruning constants")
        if self.spike_mode not in ("hard", "smooth", "bypass"):
            raise ConfigError(f"unknown spike_mode {self.spike_mode!r}")

    def task_spec(self) -> TaskSpec:
        return TaskSpec(self.task, self.length, self.dim, self.delay, self.classes,
                        self.anomaly_rate, self.rate_hz, self.task_seed)

    def lif(self) -> LifConfig:
        return LifConfig(self.tau_m, self.r_m, self.v_th, self.v_reset, self.tau_s,
                         self.dt, self.surrogate_slope)

    def stdp(self) -> StdpConfig:
        return StdpConfig(self.a_plus, self.a_minus, self.tau_plus, self.tau_minus)

    def hybrid(self) -> HybridRuleConfig:
        return HybridRuleConfig(self.eta, self.lam, self.omega_scale)

    def online(self) -> OnlineConfig:
        return OnlineConfig(LossSpec("cross_entropy"), self.stdp(), self.hybrid())

    def to_flat(self) -> dict:
        return asdict(self)

    @classmethod
    def from_flat(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a flat mapping of key: value")
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for raw_key, value in data.items():
            key = ALIASES.get(raw_key, raw_key)
            if key not in known:
                raise ConfigError(f"unknown config key {raw_key!r}")
            kwargs[key] = _coerce(key, value, known[key].type)
        return cls(**kwargs)

    def dumps(self) -> str:
        return yaml.safe_dump(self.to_flat(), sort_keys=False)

    @classmethod
    def loads(cls, text: str) -> "RunConfig":
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"config is not valid YAML: {exc}") from exc
        return cls.from_flat(data or {})

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.loads(text)

    def replace(self, **changes) -> "RunConfig":
        flat = self.to_flat()
        flat.update(changes)
        return RunConfig.from_flat(flat)


def _coerce(key: str, value, type_name: str):
    if isinstance(value, (dict, list)) or value is None:
        raise ConfigError(f"{key}: expected a scalar, got {value!r}")
    if type_name == "bool":
        if not isinstance(value, bool):
            raise ConfigError(f"{key}: expected true/false, got {value!r}")
        return value
    if type_name == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        return value
    if type_name == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key}: expected a number, got {value!r}")
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"{key}: expected a string, got {value!r}")
    return value
