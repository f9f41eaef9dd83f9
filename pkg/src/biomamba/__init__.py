"""Selective state-space model with a spiking readout, trained online by a
mix of exact real-time recurrent learning and spike-timing-dependent
plasticity, plus adaptive synaptic pruning."""
from .errors import (ConfigError, ContractViolation, FormatError, InputError, NumericError,
                     ResourceError)
from .learning import (BimNetwork, HybridRuleConfig, LossSpec, OnlineConfig, StdpConfig,
                       StdpState, Traces, online_step)
from .pruning import PruningState, apply_pruning, controller_tick, measure_sparsity
from .spiking import LifConfig, NeuronState, SpikeTrain, SynapticWeights, lif_step
from .ssm import SsmParams, SsmState, selective_params, ssm_scan, ssm_step

__version__ = "0.1.0"

__all__ = [
    "BimNetwork", "ConfigError", "ContractViolation", "FormatError", "HybridRuleConfig",
    "InputError", "LifConfig", "LossSpec", "NeuronState", "NumericError", "OnlineConfig",
    "PruningState", "ResourceError", "SpikeTrain", "SsmParams", "SsmState", "StdpConfig",
    "StdpState", "SynapticWeights", "Traces", "apply_pruning", "controller_tick",
    "lif_step", "measure_sparsity", "online_step", "selective_params", "ssm_scan", "ssm_step",
]
