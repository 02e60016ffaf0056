from .app import AppNode, ExecutionerConfig, OutputConfig, StepReport, SubAppSlot, TransientMultiApp
from .microstructure import SphereDegradation, degrade_step, effective_conductivity, run_example_microstructure
from .transfers import (
    MultiAppFieldCopyTransfer,
    MultiAppGatherInterpolateTransfer,
    MultiAppPointSampleTransfer,
    Transfer,
)

__all__ = [
    "AppNode",
    "ExecutionerConfig",
    "MultiAppFieldCopyTransfer",
    "MultiAppGatherInterpolateTransfer",
    "MultiAppPointSampleTransfer",
    "OutputConfig",
    "SphereDegradation",
    "StepReport",
    "SubAppSlot",
    "Transfer",
    "TransientMultiApp",
    "degrade_step",
    "effective_conductivity",
    "run_example_microstructure",
]
