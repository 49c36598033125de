"""Driving regime isolation: coasting, braking, acceleration within a scenario.

Coasting runs from the first sample with both pedals released to the
first brake application; braking runs from the brake application (first
rising edge, since source brake signals are binary) to the sample where
the scenario's minimum speed is reached; acceleration runs from the
first accelerator application at or after the minimum to the first
sample whose speed sits within the margin of the scenario's final speed
while acceleration has dropped below the settle threshold. When the
accelerator channel is missing, ``pedal_proxy`` substitutes the sign of
the derived acceleration.
"""

from __future__ import annotations

import numpy as np

from .config import PipelineConfig
from .errors import MissingSignalError, NotApplicableError
from .model import (REGIME_SCOPE, Regime, RegimeParams, RegimeType, Scenario,
                    ScenarioType, TripRecord)
from .metrics import aggressiveness_over


def _first_true(mask, offset):
    idx = np.flatnonzero(mask)
    return int(idx[0]) + offset if len(idx) else None


def _regime(trip, rtype, k0, kf):
    dist = float(trip.dist[kf] - trip.dist[k0])
    dur = float(trip.t[kf] - trip.t[k0])
    agg = aggressiveness_over(trip, k0, kf) if dist > 0 else None
    return Regime(k0=k0, kf=kf, rtype=rtype, params=RegimeParams(
        v0=float(trip.v[k0]), vf=float(trip.v[kf]),
        distance_m=dist, duration_s=dur, aggressiveness=agg))


def isolate_regimes(scenario: Scenario, trip: TripRecord,
                    config: PipelineConfig | None = None):
    """Split one braking/acceleration scenario into ordered regimes."""
    config = config or PipelineConfig()
    if scenario.stype not in REGIME_SCOPE:
        raise NotApplicableError(
            f"regime isolation does not apply to {scenario.stype.value} scenarios")
    if trip.accel is None or trip.dist is None:
        raise MissingSignalError("trip needs derived signals (accel, dist)")
    k0, kf = scenario.k0, scenario.kf
    sl = slice(k0, kf + 1)
    v = trip.v[sl]
    accel = trip.accel[sl]
    brake_on = trip.brake_pedal[sl] > 0
    if trip.accel_pedal is not None:
        gas_on = np.nan_to_num(trip.accel_pedal[sl], nan=0.0) > 0
    elif config.pedal_proxy:
        gas_on = accel > 0
    else:
        raise MissingSignalError(
            "accelerator channel absent and pedal proxy disabled")

    out = []
    k_brake = _first_true(brake_on, k0)

    if k_brake is not None:
        released = ~brake_on & ~gas_on
        k_rel = _first_true(released, k0)
        if k_rel is not None and k_rel < k_brake:
            out.append(_regime(trip, RegimeType.CST, k_rel, k_brake))

    v_min = float(np.min(v))
    k_reach = None
    if k_brake is not None:
        rel = trip.v[k_brake:kf + 1]
        k_reach = _first_true(rel <= v_min + 1e-12, k_brake)
        if k_reach is not None and k_reach > k_brake:
            out.append(_regime(trip, RegimeType.B, k_brake, k_reach))

    anchor = k_reach if k_reach is not None else int(np.argmin(v)) + k0
    k_gas = _first_true(gas_on[anchor - k0:], anchor)
    if k_gas is not None:
        vf = float(trip.v[kf])
        settled = ((np.abs(trip.v[k_gas:kf + 1] - vf) <= config.speed_margin_mps)
                   & (trip.accel[k_gas:kf + 1] < config.settle_accel_mps2))
        k_end = _first_true(settled, k_gas)
        if k_end is None:
            k_end = kf
        if k_end > k_gas:
            out.append(_regime(trip, RegimeType.A, k_gas, k_end))
    return out


def regime_record(trip: TripRecord, scenario_index: int, regime: Regime) -> dict:
    """JSONL record for one regime."""
    p = regime.params
    return {
        "trip_id": trip.trip_id,
        "scenario_index": scenario_index,
        "type": regime.rtype.value,
        "t0": float(trip.t[regime.k0]),
        "tf": float(trip.t[regime.kf]),
        "v0": p.v0,
        "vf": p.vf,
        "distance_m": p.distance_m,
        "duration_s": p.duration_s,
        "aggressiveness": p.aggressiveness,
    }


def coasting_initiation_rates(scenario_types, regime_lists):
    """Fraction of braking scenarios that open with a coasting regime.

    Takes parallel sequences of scenario types and their isolated regime
    lists; returns {type: rate} over B, BnA, and BSnA scenarios.
    """
    counts = {}
    hits = {}
    for stype, regs in zip(scenario_types, regime_lists):
        if stype not in (ScenarioType.B, ScenarioType.BNA, ScenarioType.BSNA):
            continue
        key = stype.value
        counts[key] = counts.get(key, 0) + 1
        if any(r.rtype is RegimeType.CST for r in regs):
            hits[key] = hits.get(key, 0) + 1
    return {key: hits.get(key, 0) / n for key, n in counts.items()}
