"""Training engine and experiment harness for GFlowNets in environments
with stochastic transition dynamics."""

from .envs import BitSeq, EnvSpec, ExternalRewardSeq, HyperGrid, OddState, \
    StepRecord, Trajectory, TwoArmToy
from .trainer import MetricsRecord, TrainConfig, TrainRun, train

__all__ = [
    "BitSeq", "EnvSpec", "ExternalRewardSeq", "HyperGrid", "OddState",
    "StepRecord", "Trajectory", "TwoArmToy", "MetricsRecord", "TrainConfig",
    "TrainRun", "train",
]

__version__ = "0.1.0"
