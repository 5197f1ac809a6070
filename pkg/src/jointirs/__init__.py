"""Joint uplink/downlink IRS configuration for multi-user MISO systems."""
from .channel import DuplexChannelSet, LinkChannels, effective_channel, sample_channels
from .config import ConfigError, SystemConfig, load_config
from .designs import (BcdOptions, DesignKind, Solution, bcd_joint, fixed_downlink_design,
                      fixed_uplink_design, individual_design, initial_state, slicing_designs)
from .experiment import RegionResult, SweepSpec, run_sweep
from .metrics import DuplexParams, RatePoint, Weights
from .region import envelope, gain_loss_metrics

__all__ = [
    "BcdOptions", "ConfigError", "DesignKind", "DuplexChannelSet", "DuplexParams", "LinkChannels",
    "RatePoint", "RegionResult", "Solution", "SweepSpec", "SystemConfig", "Weights", "bcd_joint",
    "effective_channel", "envelope", "fixed_downlink_design", "fixed_uplink_design",
    "gain_loss_metrics", "individual_design", "initial_state", "load_config", "run_sweep",
    "sample_channels", "slicing_designs",
]
__version__ = "0.1.0"
