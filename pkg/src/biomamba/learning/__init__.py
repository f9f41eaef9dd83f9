from .hybrid import HybridRuleConfig, hybrid_update
from .loss import LossSpec, loss_and_grad
from .network import BimNetwork, forward, output_jacobians, propagate
from .online import OnlineConfig, StepMetrics, Traces, online_step
from .rtrl import eligibility_step, instantaneous_gradient, rtrl_sequence_gradient
from .stdp import StdpConfig, StdpState, stdp_pairwise, stdp_trace_step, stdp_window

__all__ = [
    "BimNetwork", "HybridRuleConfig", "LossSpec", "OnlineConfig", "StdpConfig", "StdpState",
    "StepMetrics", "Traces", "eligibility_step", "forward", "hybrid_update",
    "instantaneous_gradient", "loss_and_grad", "online_step", "output_jacobians", "propagate",
    "rtrl_sequence_gradient", "stdp_pairwise", "stdp_trace_step", "stdp_window",
]
