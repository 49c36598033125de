"""Shared domain types: samples, trips, extremes, scenarios, regimes, risk levels.

All types are immutable after construction and safe to share across
workers. Intervals are index-based (inclusive [k0, kf] into the owning
trip); timestamps are derived. Per-sample absence of the preceding-vehicle
channels is represented as NaN in the array form and ``None`` in the
scalar form, never as zero.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ContractError


class ScenarioType(enum.Enum):
    CRS = "Crs"
    BSNA = "BSnA"
    BNA = "BnA"
    A = "A"
    B = "B"
    CRP = "Crp"

    def __str__(self):
        return self.value


class RegimeType(enum.Enum):
    CST = "Cst"
    B = "B"
    A = "A"

    def __str__(self):
        return self.value


class RiskLevel(enum.Enum):
    NO_PV = "NoPV"
    FADING_AWAY = "FadingAway"
    CLOSING_IN = "ClosingIn"
    URGENT = "Urgent"
    FORCED = "Forced"
    CRITICAL = "Critical"

    def __str__(self):
        return self.value


#: braking road events: scenario types opened by a qualifying speed drop
EVENT_TYPES = (ScenarioType.BSNA, ScenarioType.BNA)

#: scenario types that the regime isolation accepts
REGIME_SCOPE = (ScenarioType.B, ScenarioType.BNA, ScenarioType.BSNA, ScenarioType.A)


@dataclass(frozen=True)
class Sample:
    """One timestamped telemetry record in canonical units (m/s, deg/s, s)."""

    t: float
    v: float
    brake_pedal: float = 0.0
    accel_pedal: Optional[float] = None
    yaw_rate: Optional[float] = None
    fuel_flow: Optional[float] = None
    gap: Optional[float] = None
    pv_speed: Optional[float] = None
    pv_length: Optional[float] = None
    ignition: bool = True

    def __post_init__(self):
        if self.v < 0:
            raise ContractError(f"speed must be >= 0, got {self.v}")
        if self.gap is not None and self.gap <= 0:
            raise ContractError(f"gap must be > 0 when present, got {self.gap}")
        if self.fuel_flow is not None and self.fuel_flow < 0:
            raise ContractError("fuel_flow must be >= 0 when present")
        if (self.gap is None) != (self.pv_speed is None):
            raise ContractError("gap and pv_speed must be jointly present or absent")

    @property
    def brake_pressed(self) -> bool:
        return self.brake_pedal > 0

    @property
    def has_pv(self) -> bool:
        return self.gap is not None

    def to_dict(self) -> dict:
        return {
            "t": self.t, "v": self.v, "brake_pedal": self.brake_pedal,
            "accel_pedal": self.accel_pedal, "yaw_rate": self.yaw_rate,
            "fuel_flow": self.fuel_flow, "gap": self.gap,
            "pv_speed": self.pv_speed, "pv_length": self.pv_length,
            "ignition": self.ignition,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Sample":
        return cls(**d)


def _optional_channel(arr, n, name):
    if arr is None:
        return None
    out = np.asarray(arr, dtype=float)
    if out.shape != (n,):
        raise ContractError(f"{name} must have length {n}")
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class TripRecord:
    """A contiguous ignition-on run of samples plus derived signals.

    Signals are stored column-wise as read-only numpy arrays. ``accel``
    and ``dist`` are empty until :func:`trajseg.ingest.derive_signals`
    has run. Optional channels are ``None`` when the source had no such
    column; per-sample absence within a present channel is NaN.
    """

    t: np.ndarray
    v: np.ndarray
    brake_pedal: np.ndarray
    dt: float = 1.0
    accel_pedal: Optional[np.ndarray] = None
    yaw_rate: Optional[np.ndarray] = None
    fuel_flow: Optional[np.ndarray] = None
    gap: Optional[np.ndarray] = None
    pv_speed: Optional[np.ndarray] = None
    pv_length: Optional[np.ndarray] = None
    accel: Optional[np.ndarray] = None
    dist: Optional[np.ndarray] = None
    vehicle_id: str = "veh"
    trip_id: str = "trip"
    vehicle_model: Optional[str] = None

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.v, dtype=float)
        brake = np.asarray(self.brake_pedal, dtype=float)
        n = len(t)
        if len(v) != n or len(brake) != n:
            raise ContractError("t, v, brake_pedal must share one length")
        if n > 1 and not np.all(np.diff(t) > 0):
            raise ContractError("timestamps must be strictly increasing")
        if np.any(v < 0):
            raise ContractError("speeds must be >= 0")
        for name in ("t", "v", "brake_pedal"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        for name in ("accel_pedal", "yaw_rate", "fuel_flow", "gap",
                     "pv_speed", "pv_length", "accel", "dist"):
            object.__setattr__(self, name, _optional_channel(getattr(self, name), n, name))
        if self.gap is not None or self.pv_speed is not None:
            if self.gap is None or self.pv_speed is None:
                raise ContractError("gap and pv_speed channels are jointly present")
            if np.any(np.isnan(self.gap) != np.isnan(self.pv_speed)):
                raise ContractError("gap and pv_speed must be jointly present per sample")
        if self.dist is not None:
            if self.dist[0] != 0.0 or np.any(np.diff(self.dist) < 0):
                raise ContractError("dist must start at 0 and be non-decreasing")

    def __len__(self):
        return len(self.t)

    @property
    def n_samples(self) -> int:
        return len(self.t)

    @property
    def last_index(self) -> int:
        return len(self.t) - 1

    @property
    def duration_s(self) -> float:
        return float(self.t[-1] - self.t[0])

    @property
    def distance_m(self) -> float:
        if self.dist is None:
            raise ContractError("derive_signals has not run on this trip")
        return float(self.dist[-1])

    def _scalar(self, channel, k):
        arr = getattr(self, channel)
        if arr is None:
            return None
        x = float(arr[k])
        return None if np.isnan(x) else x

    def sample(self, k: int) -> Sample:
        """Materialize sample ``k`` as a scalar record."""
        return Sample(
            t=float(self.t[k]), v=float(self.v[k]),
            brake_pedal=float(self.brake_pedal[k]),
            accel_pedal=self._scalar("accel_pedal", k),
            yaw_rate=self._scalar("yaw_rate", k),
            fuel_flow=self._scalar("fuel_flow", k),
            gap=self._scalar("gap", k),
            pv_speed=self._scalar("pv_speed", k),
            pv_length=self._scalar("pv_length", k),
            ignition=True,
        )

    @property
    def samples(self):
        return [self.sample(k) for k in range(len(self))]

    def replace(self, **kw) -> "TripRecord":
        fields = {
            "t": self.t, "v": self.v, "brake_pedal": self.brake_pedal,
            "dt": self.dt, "accel_pedal": self.accel_pedal,
            "yaw_rate": self.yaw_rate, "fuel_flow": self.fuel_flow,
            "gap": self.gap, "pv_speed": self.pv_speed,
            "pv_length": self.pv_length, "accel": self.accel,
            "dist": self.dist, "vehicle_id": self.vehicle_id,
            "trip_id": self.trip_id, "vehicle_model": self.vehicle_model,
        }
        fields.update(kw)
        return TripRecord(**fields)


@dataclass(frozen=True)
class ExtremeSet:
    """Local and influential speed extremes found by the road-event search.

    Influential extremes interleave as max_i < min_i < max_{i+1}; every
    influential index also appears in the corresponding local list.
    """

    k_min: tuple
    k_max: tuple
    k_inf_min: tuple
    k_inf_max: tuple

    def __post_init__(self):
        for name in ("k_min", "k_max", "k_inf_min", "k_inf_max"):
            val = tuple(int(x) for x in getattr(self, name))
            if any(b <= a for a, b in zip(val, val[1:])):
                raise ContractError(f"{name} must be strictly increasing")
            object.__setattr__(self, name, val)
        if len(self.k_inf_min) != len(self.k_inf_max):
            raise ContractError("influential min/max lists must pair up")
        kmin, kmax = set(self.k_min), set(self.k_max)
        if not set(self.k_inf_min) <= kmin or not set(self.k_inf_max) <= kmax:
            raise ContractError("influential extremes must be local extremes")
        for i, (mx, mn) in enumerate(zip(self.k_inf_max, self.k_inf_min)):
            if mx >= mn:
                raise ContractError("influential pairs must satisfy max_i < min_i")
            if i + 1 < len(self.k_inf_max) and mn >= self.k_inf_max[i + 1]:
                raise ContractError("influential pairs must not interleave")

    @property
    def n_pairs(self) -> int:
        return len(self.k_inf_min)


@dataclass(frozen=True)
class ScenarioParams:
    """Road-event setup parameters for braking scenarios."""

    approaching_speed: float
    perceivable_distance: float
    is_turning: bool = False
    max_curvature: Optional[float] = None
    turning_speed: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "approaching_speed_mps": self.approaching_speed,
            "perceivable_distance_m": self.perceivable_distance,
            "is_turning": self.is_turning,
            "max_curvature_per_m": self.max_curvature,
            "turning_speed_mps": self.turning_speed,
        }


@dataclass(frozen=True)
class Scenario:
    """A labeled interval [k0, kf] of a trip; intervals of one trip tile it."""

    k0: int
    kf: int
    stype: ScenarioType
    params: Optional[ScenarioParams] = None

    def __post_init__(self):
        if self.k0 >= self.kf:
            raise ContractError(f"scenario needs k0 < kf, got [{self.k0}, {self.kf}]")

    @property
    def n_samples(self) -> int:
        return self.kf - self.k0 + 1


@dataclass(frozen=True)
class RegimeParams:
    v0: float
    vf: float
    distance_m: float
    duration_s: float
    aggressiveness: Optional[float] = None


@dataclass(frozen=True)
class Regime:
    """A coasting/braking/acceleration sub-interval of a scenario."""

    k0: int
    kf: int
    rtype: RegimeType
    params: Optional[RegimeParams] = None

    def __post_init__(self):
        if self.k0 >= self.kf:
            raise ContractError(f"regime needs k0 < kf, got [{self.k0}, {self.kf}]")


def check_cover(scenarios, last_index: int) -> None:
    """Assert the scenario cover property: tiles [0, N] with shared endpoints."""
    if not scenarios:
        raise ContractError("empty scenario list cannot cover a trip")
    if scenarios[0].k0 != 0:
        raise ContractError(f"cover must start at 0, got {scenarios[0].k0}")
    if scenarios[-1].kf != last_index:
        raise ContractError(f"cover must end at {last_index}, got {scenarios[-1].kf}")
    for a, b in zip(scenarios, scenarios[1:]):
        if b.k0 != a.kf:
            raise ContractError(f"cover gap/overlap between kf={a.kf} and k0={b.k0}")


def scenario_to_dict(s: Scenario) -> dict:
    d = {"k0": s.k0, "kf": s.kf, "type": s.stype.value}
    if s.params is not None:
        d["params"] = s.params.to_dict()
    return d


def scenario_from_dict(d: dict) -> Scenario:
    params = None
    if d.get("params") is not None:
        p = d["params"]
        params = ScenarioParams(
            approaching_speed=p["approaching_speed_mps"],
            perceivable_distance=p["perceivable_distance_m"],
            is_turning=p["is_turning"],
            max_curvature=p.get("max_curvature_per_m"),
            turning_speed=p.get("turning_speed_mps"),
        )
    return Scenario(k0=d["k0"], kf=d["kf"], stype=ScenarioType(d["type"]), params=params)
