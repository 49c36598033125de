"""Trip, scenario, and driving-regime analytics for driving telemetry.

The pipeline ingests raw speed traces, splits them into trips, segments
each trip into typed scenarios around braking road events, isolates
coasting/braking/acceleration regimes, and rolls everything up into
figure-ready statistics. A seeded synthetic-trip generator provides
ground truth for closed-loop validation.
"""

from .config import PipelineConfig, load_config
from .kernels import BACKEND as KERNEL_BACKEND
from .model import (ExtremeSet, Regime, RegimeType, RiskLevel, Sample,
                    Scenario, ScenarioType, TripRecord)

__version__ = "0.1.0"

__all__ = [
    "ExtremeSet", "KERNEL_BACKEND", "PipelineConfig", "Regime", "RegimeType",
    "RiskLevel", "Sample", "Scenario", "ScenarioType", "TripRecord",
    "load_config", "__version__",
]
