"""Per-sample and per-trip analytics over segmented trips.

Covers time-to-collision risk levels, cut-in/lane-change detection,
aggressiveness (time integral of squared acceleration per kilometer),
steady-state cornering curvature, scenario setup parameters, and the
trip-level metric rollup with distance-weighted composition fractions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .config import LITERS_PER_GALLON, METERS_PER_MILE, PipelineConfig
from .errors import ContractError, NotApplicableError
from .model import (EVENT_TYPES, RiskLevel, Sample, Scenario, ScenarioParams,
                    ScenarioType, TripRecord)

RISK_BY_CODE = (RiskLevel.NO_PV, RiskLevel.FADING_AWAY, RiskLevel.CLOSING_IN,
                RiskLevel.URGENT, RiskLevel.FORCED, RiskLevel.CRITICAL)


def ttc(sample: Sample, pv_length_default: float = 5.0) -> Optional[float]:
    """Time to collision at held relative speed; None when no PV is present.

    Returns ``math.inf`` when not closing in (the clamped relative speed
    zeroes the denominator).
    """
    if not sample.has_pv:
        return None
    lp = sample.pv_length if sample.pv_length is not None else pv_length_default
    closing = sample.v - sample.pv_speed
    if closing <= 0:
        return math.inf
    return (sample.gap - lp) / closing


def classify_risk(sample: Sample, config: PipelineConfig | None = None) -> RiskLevel:
    """Collision risk level of one sample per the TTC decision table."""
    config = config or PipelineConfig()
    if not sample.has_pv:
        return RiskLevel.NO_PV
    if sample.v - sample.pv_speed <= 0:
        return RiskLevel.FADING_AWAY
    x = ttc(sample, config.pv_length_default_m)
    if x >= config.ttc_urgent_s:
        return RiskLevel.CLOSING_IN
    if x >= config.ttc_forced_s:
        return RiskLevel.URGENT
    if x >= config.ttc_critical_s:
        return RiskLevel.FORCED
    return RiskLevel.CRITICAL


def risk_level_series(trip: TripRecord, config: PipelineConfig | None = None):
    """Vectorized per-sample risk codes (index into RISK_BY_CODE)."""
    config = config or PipelineConfig()
    n = len(trip)
    if trip.gap is None:
        return np.zeros(n, dtype=np.int8)
    if trip.pv_length is not None:
        lp = np.where(np.isnan(trip.pv_length),
                      config.pv_length_default_m, trip.pv_length)
    else:
        lp = np.full(n, config.pv_length_default_m)
    return kernels.risk_levels(trip.v, trip.gap, trip.pv_speed, lp,
                               config.ttc_critical_s, config.ttc_forced_s,
                               config.ttc_urgent_s)


@dataclass(frozen=True)
class CutInEvent:
    """A preceding vehicle appearing, or a gap collapsing beyond kinematics."""

    k: int
    gap_after: float
    relative_speed: float
    approach_speed: float
    gap_before: Optional[float] = None

    def to_dict(self) -> dict:
        return {"k": self.k, "gap_before_m": self.gap_before,
                "gap_after_m": self.gap_after,
                "relative_speed_mps": self.relative_speed,
                "approach_speed_mps": self.approach_speed}


def detect_cut_ins(trip: TripRecord, config: PipelineConfig | None = None):
    """Find cut-in/lane-change events on a trip with derived signals.

    An event fires when the PV appears after absence, or when the gap
    shrinks by more than the kinematic expectation plus the margin.
    Detections within the refractory window of an event merge into it.
    """
    config = config or PipelineConfig()
    if trip.gap is None or len(trip) < 2:
        return []
    idx, appeared = kernels.cut_in_candidates(
        trip.t, trip.v, trip.gap, trip.pv_speed, config.cutin_margin_m)
    events = []
    last_t = -math.inf
    for pos, k in enumerate(idx):
        k = int(k)
        if trip.t[k] - last_t <= config.cutin_refractory_s:
            continue
        last_t = float(trip.t[k])
        before = None
        if not appeared[pos]:
            before = float(trip.gap[k - 1])
        events.append(CutInEvent(
            k=k, gap_before=before, gap_after=float(trip.gap[k]),
            relative_speed=float(trip.pv_speed[k] - trip.v[k]),
            approach_speed=float(trip.v[k])))
    return events


def aggressiveness(accel, t, dist_span_m: float) -> float:
    """Left-rectangle integral of squared acceleration per kilometer."""
    if dist_span_m <= 0:
        raise ContractError("aggressiveness is undefined over zero distance")
    accel = np.asarray(accel, dtype=float)
    t = np.asarray(t, dtype=float)
    integral = float(np.sum(accel[:-1] ** 2 * np.diff(t)))
    return integral / (dist_span_m / 1000.0)


def aggressiveness_over(trip: TripRecord, k0: int, kf: int) -> Optional[float]:
    """Aggressiveness of the trip span [k0, kf]; None over zero distance."""
    span = float(trip.dist[kf] - trip.dist[k0])
    if span <= 0:
        return None
    return aggressiveness(trip.accel[k0:kf + 1], trip.t[k0:kf + 1], span)


def curvature(sample: Sample, v_floor: float = 1.0) -> Optional[float]:
    """Steady-state cornering curvature |yaw|/v in 1/m; None below the floor."""
    if sample.yaw_rate is None:
        return None
    if sample.v < v_floor:
        return None
    return abs(math.radians(sample.yaw_rate)) / sample.v


def curvature_series(trip: TripRecord, v_floor: float = 1.0):
    """Per-sample curvature with NaN where undefined."""
    if trip.yaw_rate is None:
        return np.full(len(trip), np.nan)
    with np.errstate(divide="ignore", invalid="ignore"):
        k = np.abs(np.radians(trip.yaw_rate)) / trip.v
    k[trip.v < v_floor] = np.nan
    return k


def scenario_params(scenario: Scenario, trip: TripRecord,
                    config: PipelineConfig | None = None) -> ScenarioParams:
    """Road-event setup parameters for one braking scenario.

    The braking-event sample is the first index attaining the scenario's
    minimum speed, which recovers the influential minimum. Turning is
    detected from the yaw channel within the event window.
    """
    config = config or PipelineConfig()
    if scenario.stype not in (ScenarioType.B, ScenarioType.BNA, ScenarioType.BSNA):
        raise NotApplicableError(
            f"scenario parameters do not apply to {scenario.stype.value}")
    k0, kf = scenario.k0, scenario.kf
    event_k = k0 + int(np.argmin(trip.v[k0:kf + 1]))
    lo = int(np.searchsorted(trip.t, trip.t[event_k] - config.event_window_s, "left"))
    hi = int(np.searchsorted(trip.t, trip.t[event_k] + config.event_window_s, "right"))
    is_turning = False
    max_curv = None
    turn_speed = None
    if trip.yaw_rate is not None:
        yaw = trip.yaw_rate[lo:hi]
        with np.errstate(invalid="ignore"):
            is_turning = bool(np.any(np.abs(yaw) > config.yaw_turn_thresh_degps))
        if is_turning:
            k_win = curvature_series(trip, config.curvature_floor_mps)[lo:hi]
            max_curv = (None if np.all(np.isnan(k_win))
                        else float(np.nanmax(k_win)))
            turn_speed = float(np.min(trip.v[lo:hi]))
    return ScenarioParams(
        approaching_speed=float(trip.v[k0]),
        perceivable_distance=float(trip.dist[event_k] - trip.dist[k0]),
        is_turning=is_turning, max_curvature=max_curv, turning_speed=turn_speed)


@dataclass(frozen=True)
class TripMetrics:
    """Trip-level rollup of the published parameter suite."""

    distance_km: float
    duration_s: float
    avg_speed_mps: float
    braking_event_density_per_km: float
    cutin_density_per_km: float
    aggressiveness: float
    fuel_economy_mpg: Optional[float] = None
    scenario_distance_fractions: dict = field(default_factory=dict)
    risk_distance_fractions: dict = field(default_factory=dict)
    diagnostics: tuple = ()

    def to_record(self, trip: TripRecord, sample_rate_hz: float) -> dict:
        return {
            "trip_id": trip.trip_id,
            "vehicle_id": trip.vehicle_id,
            "vehicle_model": trip.vehicle_model,
            "distance_km": self.distance_km,
            "duration_s": self.duration_s,
            "avg_speed_mps": self.avg_speed_mps,
            "braking_event_density_per_km": self.braking_event_density_per_km,
            "cutin_density_per_km": self.cutin_density_per_km,
            "aggressiveness_m2s3_per_km": self.aggressiveness,
            "fuel_economy_mpg": self.fuel_economy_mpg,
            "scenario_distance_fractions": self.scenario_distance_fractions,
            "risk_distance_fractions": self.risk_distance_fractions,
            "sample_rate_hz": sample_rate_hz,
            "diagnostics": list(self.diagnostics),
        }


def _scenario_fractions(trip, scenarios):
    """Distance-weighted composition; the boundary sample counts toward
    the earlier scenario."""
    total = trip.distance_m
    shares = {}
    n_last = trip.last_index
    for i, s in enumerate(scenarios):
        lo = s.k0 if i == 0 else s.k0 + 1
        hi = min(s.kf + 1, n_last)
        span = float(trip.dist[hi] - trip.dist[min(lo, hi)])
        shares[s.stype.value] = shares.get(s.stype.value, 0.0) + span
    return {k: v / total for k, v in shares.items()} if total > 0 else {}


def _risk_fractions(trip, config):
    total = trip.distance_m
    if total <= 0:
        return {}
    codes = risk_level_series(trip, config)
    inc = trip.v[:-1] * np.diff(trip.t)
    sums = np.bincount(codes[:-1], weights=inc, minlength=6)
    return {RISK_BY_CODE[i].value: float(sums[i] / total)
            for i in range(6) if sums[i] > 0}


def trip_metrics(trip: TripRecord, scenarios, cut_ins=None,
                 config: PipelineConfig | None = None) -> TripMetrics:
    """Compute the trip-level metric suite from a segmented trip."""
    config = config or PipelineConfig()
    if trip.dist is None:
        raise ContractError("trip needs derived signals")
    dist_km = trip.distance_m / 1000.0
    duration = trip.duration_s
    if cut_ins is None:
        cut_ins = detect_cut_ins(trip, config)
    n_events = sum(1 for s in scenarios if s.stype in EVENT_TYPES)
    diagnostics = []
    mpg = None
    if trip.fuel_flow is not None:
        liters = float(np.nansum(trip.fuel_flow[:-1] * np.diff(trip.t))) / 3600.0
        gallons = liters / LITERS_PER_GALLON
        if gallons > 0:
            mpg = (trip.distance_m / METERS_PER_MILE) / gallons
        else:
            diagnostics.append("fuel channel present but zero volume; MPG omitted")
    agg = aggressiveness_over(trip, 0, trip.last_index)
    return TripMetrics(
        distance_km=dist_km,
        duration_s=duration,
        avg_speed_mps=trip.distance_m / duration if duration > 0 else 0.0,
        braking_event_density_per_km=n_events / dist_km if dist_km > 0 else 0.0,
        cutin_density_per_km=len(cut_ins) / dist_km if dist_km > 0 else 0.0,
        aggressiveness=agg if agg is not None else 0.0,
        fuel_economy_mpg=mpg,
        scenario_distance_fractions=_scenario_fractions(trip, scenarios),
        risk_distance_fractions=_risk_fractions(trip, config),
        diagnostics=tuple(diagnostics),
    )
