"""Pipeline configuration: every tunable constant in one place.

Defaults follow the published constants where one exists (5 m/s extreme
threshold, 6 s merge gap, 0.2 m/s^2 settle acceleration, +/-2 m/s speed
margin, 5 deg/s turning test, TTC cuts at 1/3/5.5 s, 99.9 % envelope).
A JSON file named by ``TRAJSEG_CONFIG`` (or ``--config``) overrides the
defaults, and CLI flags override the file. The effective configuration
is echoed into every output directory for reproducibility.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass
from pathlib import Path

from .errors import SchemaError, UsageError

ENV_VAR = "TRAJSEG_CONFIG"

#: liters per U.S. gallon, exact definition
LITERS_PER_GALLON = 3.785411784
#: meters per statute mile, exact definition
METERS_PER_MILE = 1609.344


@dataclass(frozen=True)
class PipelineConfig:
    # event search / segmentation
    threshold_mps: float = 5.0
    merge_gap_s: float = 6.0
    alg1_zero_guard: str = "off"        # "literal" transcribes the v_min != 0 line
    v_stop_mps: float = 0.1             # stop test for Crp gap labeling
    # regime isolation
    settle_accel_mps2: float = 0.2
    speed_margin_mps: float = 2.0
    pedal_proxy: bool = False           # accel<=0 / accel>0 stand-in for missing pedals
    # metrics
    pv_length_default_m: float = 5.0
    cutin_margin_m: float = 10.0
    cutin_refractory_s: float = 2.0
    yaw_turn_thresh_degps: float = 5.0
    event_window_s: float = 5.0         # turning test window around the braking event
    curvature_floor_mps: float = 1.0
    ttc_critical_s: float = 1.0
    ttc_forced_s: float = 3.0
    ttc_urgent_s: float = 5.5
    # stats
    bin_width_mps: float = 5.0
    envelope_percentile: float = 99.9
    envelope_min_points: int = 1000
    envelope_min_bins: int = 5
    pool_exact_limit: int = 1_000_000
    pool_reservoir_size: int = 100_000
    pool_seed: int = 20_240_817
    # ingest
    min_trip_duration_s: float = 60.0
    resample_1hz: bool = False

    def __post_init__(self):
        if self.alg1_zero_guard not in ("literal", "off"):
            raise UsageError(
                f"alg1_zero_guard must be 'literal' or 'off', got {self.alg1_zero_guard!r}")
        if self.threshold_mps <= 0:
            raise UsageError("threshold_mps must be > 0")

    def replace(self, **kw) -> "PipelineConfig":
        return dataclasses.replace(self, **kw)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def echo(self, out_dir) -> None:
        """Write the effective configuration next to the artifacts it produced."""
        path = Path(out_dir) / "config.json"
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")


def load_config(path=None, overrides=None) -> PipelineConfig:
    """Build a config from defaults, an optional JSON file, and overrides."""
    values = {}
    if path is None:
        path = os.environ.get(ENV_VAR)
    if path:
        try:
            raw = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise UsageError(f"config file not found: {path}")
        except json.JSONDecodeError as e:
            raise SchemaError(f"config file {path} is not valid JSON: {e}")
        if not isinstance(raw, dict):
            raise SchemaError(f"config file {path} must hold a JSON object")
        values.update(raw)
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    known = {f.name for f in dataclasses.fields(PipelineConfig)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise SchemaError(f"unknown config keys: {', '.join(unknown)}")
    return PipelineConfig(**values)
