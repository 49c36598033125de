"""Telemetry ingestion: CSV parsing, unit normalization, trip splitting.

Input files are delimited text with a header row. A column map binds
canonical field names to source columns and units; ``t`` and ``v`` are
mandatory. Speeds normalize to m/s, yaw to deg/s, time to seconds.
Preceding-vehicle channels keep per-sample absence as NaN; they are
never zero-filled.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from .errors import DataError, DegenerateTripError, SchemaError
from .model import Sample, TripRecord

MANDATORY_FIELDS = ("t", "v")
OPTIONAL_FIELDS = ("brake_pedal", "accel_pedal", "yaw_rate", "fuel_flow",
                   "gap", "pv_speed", "pv_length", "ignition")
ALL_FIELDS = MANDATORY_FIELDS + OPTIONAL_FIELDS

# multiplicative conversions to canonical units, keyed per field family
_UNIT_FACTORS = {
    "t": {"s": 1.0, "ms": 1e-3},
    "speed": {"mps": 1.0, "kmh": 1.0 / 3.6, "mph": 0.44704},
    "yaw": {"degps": 1.0, "radps": 180.0 / np.pi},
    "fuel": {"lph": 1.0, "galph": 3.785411784},
    "length": {"m": 1.0, "km": 1000.0, "ft": 0.3048},
    "raw": {"raw": 1.0},
}
_FIELD_FAMILY = {
    "t": "t", "v": "speed", "pv_speed": "speed", "yaw_rate": "yaw",
    "fuel_flow": "fuel", "gap": "length", "pv_length": "length",
    "brake_pedal": "raw", "accel_pedal": "raw", "ignition": "raw",
}
DEFAULT_UNITS = {
    "t": "s", "v": "mps", "pv_speed": "mps", "yaw_rate": "degps",
    "fuel_flow": "lph", "gap": "m", "pv_length": "m",
    "brake_pedal": "raw", "accel_pedal": "raw", "ignition": "raw",
}

#: canonical on-disk schema; the synthetic generator emits the same layout
CANONICAL_COLUMNS = {
    "t": "t", "v": "v_mps", "brake_pedal": "brake_pedal",
    "accel_pedal": "accel_pedal", "yaw_rate": "yaw_rate_degps",
    "fuel_flow": "fuel_flow_lph", "gap": "gap_m", "pv_speed": "pv_speed_mps",
    "pv_length": "pv_length_m", "ignition": "ignition",
}


@dataclass(frozen=True)
class ColumnMap:
    """Binding from canonical field names to source columns and units."""

    columns: dict = field(default_factory=dict)   # field -> source column
    units: dict = field(default_factory=dict)     # field -> unit tag

    def __post_init__(self):
        for name in MANDATORY_FIELDS:
            if name not in self.columns:
                raise SchemaError(f"column map must bind mandatory field {name!r}")
        for name in self.columns:
            if name not in ALL_FIELDS:
                raise SchemaError(f"unknown canonical field {name!r}")
        for name, unit in self.units.items():
            family = _FIELD_FAMILY[name]
            if unit not in _UNIT_FACTORS[family]:
                raise SchemaError(
                    f"field {name!r} cannot carry unit {unit!r}; "
                    f"expected one of {sorted(_UNIT_FACTORS[family])}")

    def factor(self, name: str) -> float:
        unit = self.units.get(name, DEFAULT_UNITS[name])
        return _UNIT_FACTORS[_FIELD_FAMILY[name]][unit]


def canonical_column_map() -> ColumnMap:
    return ColumnMap(columns=dict(CANONICAL_COLUMNS))


def load_column_map(path) -> ColumnMap:
    """Read a column map config: {field: {"column": name, "unit": tag}}.

    A bare string value is shorthand for a column in canonical units.
    """
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise SchemaError(f"schema file not found: {path}")
    except json.JSONDecodeError as e:
        raise SchemaError(f"schema file {path} is not valid JSON: {e}")
    if not isinstance(raw, dict):
        raise SchemaError("schema file must hold a JSON object")
    columns, units = {}, {}
    for name, spec in raw.items():
        if isinstance(spec, str):
            columns[name] = spec
        elif isinstance(spec, dict) and "column" in spec:
            columns[name] = spec["column"]
            if "unit" in spec:
                units[name] = spec["unit"]
        else:
            raise SchemaError(f"bad entry for field {name!r} in schema file")
    return ColumnMap(columns=columns, units=units)


@dataclass(frozen=True)
class SampleFrame:
    """Column-wise parsed telemetry, pre trip-splitting."""

    t: np.ndarray
    v: np.ndarray
    brake_pedal: np.ndarray
    ignition: np.ndarray
    accel_pedal: Optional[np.ndarray] = None
    yaw_rate: Optional[np.ndarray] = None
    fuel_flow: Optional[np.ndarray] = None
    gap: Optional[np.ndarray] = None
    pv_speed: Optional[np.ndarray] = None
    pv_length: Optional[np.ndarray] = None
    diagnostics: tuple = ()

    def __len__(self):
        return len(self.t)

    def _opt(self, name, k):
        arr = getattr(self, name)
        if arr is None:
            return None
        x = float(arr[k])
        return None if np.isnan(x) else x

    def sample(self, k: int) -> Sample:
        return Sample(
            t=float(self.t[k]), v=float(self.v[k]),
            brake_pedal=float(self.brake_pedal[k]),
            accel_pedal=self._opt("accel_pedal", k),
            yaw_rate=self._opt("yaw_rate", k),
            fuel_flow=self._opt("fuel_flow", k),
            gap=self._opt("gap", k),
            pv_speed=self._opt("pv_speed", k),
            pv_length=self._opt("pv_length", k),
            ignition=bool(self.ignition[k]),
        )

    def samples(self):
        return [self.sample(k) for k in range(len(self))]


def _coerce_ignition(series: pd.Series) -> np.ndarray:
    numeric = pd.to_numeric(series, errors="coerce")
    out = numeric.to_numpy(dtype=float)
    bad = np.isnan(out)
    if bad.any():
        text = series.astype(str).str.strip().str.lower()
        mapped = text.map({"true": 1.0, "false": 0.0, "on": 1.0, "off": 0.0,
                           "yes": 1.0, "no": 0.0})
        out = np.where(bad, mapped.to_numpy(dtype=float), out)
    # rows still NaN default to ignition-on
    return np.nan_to_num(out, nan=1.0) != 0.0


def parse_telemetry(source, column_map: ColumnMap) -> SampleFrame:
    """Parse one delimited telemetry table into canonical-unit columns.

    Rows whose mandatory fields fail to parse are dropped and reported in
    ``frame.diagnostics`` (1-based data-row numbers). Non-monotone
    timestamps raise a :class:`DataError` naming the first offending row.
    """
    if isinstance(source, (bytes, bytearray)):
        buf = io.BytesIO(source)
    elif isinstance(source, str) and "\n" in source:
        buf = io.StringIO(source)
    else:
        buf = source
    try:
        df = pd.read_csv(buf, skipinitialspace=True)
    except Exception as e:
        raise DataError(f"could not read CSV: {e}")
    header = list(df.columns)
    for name in MANDATORY_FIELDS:
        col = column_map.columns[name]
        if col not in header:
            raise SchemaError(
                f"mandatory column {col!r} (field {name!r}) missing; header has {header}")

    cols = {}
    for name, col in column_map.columns.items():
        if col in header:
            cols[name] = df[col]

    n = len(df)
    keep = np.ones(n, dtype=bool)
    diagnostics = []
    values = {}
    for name in MANDATORY_FIELDS:
        arr = pd.to_numeric(cols[name], errors="coerce").to_numpy(dtype=float)
        bad = np.isnan(arr)
        for row in np.flatnonzero(bad & keep)[:50]:
            diagnostics.append(f"row {row + 1}: unparseable {name!r}, dropped")
        keep &= ~bad
        values[name] = arr * column_map.factor(name)
    kept_rows = np.flatnonzero(keep)
    if len(kept_rows) == 0:
        raise DataError("no parseable rows")

    t = values["t"][keep]
    dt_bad = np.flatnonzero(np.diff(t) <= 0)
    if len(dt_bad):
        row = kept_rows[dt_bad[0] + 1] + 1
        raise DataError(f"timestamps not strictly increasing at row {row}")
    v = values["v"][keep]
    if np.any(v < 0):
        row = kept_rows[int(np.argmax(v < 0))] + 1
        raise DataError(f"negative speed at row {row}")

    def optional(name):
        if name not in cols:
            return None
        arr = pd.to_numeric(cols[name], errors="coerce").to_numpy(dtype=float)
        return arr[keep] * column_map.factor(name)

    brake = optional("brake_pedal")
    if brake is None:
        brake = np.zeros(len(t))
    else:
        brake = np.nan_to_num(brake, nan=0.0)
    ign_col = cols.get("ignition")
    if ign_col is not None:
        ignition = _coerce_ignition(ign_col)[keep]
    else:
        ignition = np.ones(len(t), dtype=bool)

    gap = optional("gap")
    pv_speed = optional("pv_speed")
    if (gap is None) != (pv_speed is None):
        raise SchemaError("gap and pv_speed columns must be mapped together")

    return SampleFrame(
        t=t, v=v, brake_pedal=brake, ignition=ignition,
        accel_pedal=optional("accel_pedal"), yaw_rate=optional("yaw_rate"),
        fuel_flow=optional("fuel_flow"), gap=gap, pv_speed=pv_speed,
        pv_length=optional("pv_length"), diagnostics=tuple(diagnostics),
    )


def split_trips(frame: SampleFrame, min_duration_s: float = 60.0,
                vehicle_id: str = "veh", trip_prefix: str = "trip",
                vehicle_model: Optional[str] = None):
    """Split parsed telemetry into trips at ignition edges.

    Returns (trips, n_dropped): one TripRecord per maximal ignition-on
    run lasting at least ``min_duration_s``; shorter runs are dropped
    and counted.
    """
    ign = np.asarray(frame.ignition, dtype=bool)
    if len(ign) == 0:
        return [], 0
    edges = np.flatnonzero(np.diff(ign.astype(np.int8)))
    starts = ([0] if ign[0] else []) + [int(e) + 1 for e in edges if ign[e + 1]]
    ends = [int(e) + 1 for e in edges if ign[e]] + ([len(ign)] if ign[-1] else [])
    trips, dropped = [], 0
    seq = 0
    for a, b in zip(starts, ends):
        if b - a < 2 or frame.t[b - 1] - frame.t[a] < min_duration_s:
            dropped += 1
            continue
        sl = slice(a, b)

        def cut(name):
            arr = getattr(frame, name)
            return None if arr is None else arr[sl].copy()

        trips.append(TripRecord(
            t=frame.t[sl].copy(), v=frame.v[sl].copy(),
            brake_pedal=frame.brake_pedal[sl].copy(),
            dt=float(np.median(np.diff(frame.t[sl]))),
            accel_pedal=cut("accel_pedal"), yaw_rate=cut("yaw_rate"),
            fuel_flow=cut("fuel_flow"), gap=cut("gap"),
            pv_speed=cut("pv_speed"), pv_length=cut("pv_length"),
            vehicle_id=vehicle_id, trip_id=f"{trip_prefix}-{seq:04d}",
            vehicle_model=vehicle_model,
        ))
        seq += 1
    return trips, dropped


def _interp_channel(t_new, t_old, arr, hold: bool):
    """Resample one channel; NaN spans stay NaN instead of bleeding."""
    if arr is None:
        return None
    idx = np.searchsorted(t_old, t_new, side="right") - 1
    idx = np.clip(idx, 0, len(t_old) - 1)
    nxt = np.minimum(idx + 1, len(t_old) - 1)
    if hold:
        return arr[idx].copy()
    span = t_old[nxt] - t_old[idx]
    w = np.where(span > 0, (t_new - t_old[idx]) / np.where(span > 0, span, 1.0), 0.0)
    left, right = arr[idx], arr[nxt]
    out = np.where(w > 0, left + w * (right - left), left)
    out = np.where(np.isnan(left) | ((w > 0) & np.isnan(right)), np.nan, out)
    return out


def resample_to_1hz(trip: TripRecord) -> TripRecord:
    """Linear-interpolate a trip onto a 1 Hz grid anchored at its start.

    Step channels (brake, pedals toggles) hold the previous value; a
    trip already on a 1 Hz grid comes back unchanged.
    """
    t = trip.t
    grid = t[0] + np.arange(0.0, np.floor(t[-1] - t[0]) + 1.0)
    if len(grid) == len(t) and np.array_equal(grid, t):
        return trip
    return TripRecord(
        t=grid,
        v=_interp_channel(grid, t, trip.v, hold=False),
        brake_pedal=_interp_channel(grid, t, trip.brake_pedal, hold=True),
        dt=1.0,
        accel_pedal=_interp_channel(grid, t, trip.accel_pedal, hold=True),
        yaw_rate=_interp_channel(grid, t, trip.yaw_rate, hold=False),
        fuel_flow=_interp_channel(grid, t, trip.fuel_flow, hold=False),
        gap=_interp_channel(grid, t, trip.gap, hold=False),
        pv_speed=_interp_channel(grid, t, trip.pv_speed, hold=False),
        pv_length=_interp_channel(grid, t, trip.pv_length, hold=False),
        vehicle_id=trip.vehicle_id, trip_id=trip.trip_id,
        vehicle_model=trip.vehicle_model,
    )


def derive_signals(trip: TripRecord, resample_1hz: bool = False) -> TripRecord:
    """Attach acceleration and cumulative distance to a trip.

    Acceleration is the forward difference with the final sample
    back-filled; distance integrates by left rectangles, which keeps it
    non-decreasing for non-negative speeds.
    """
    if len(trip) < 2:
        raise DegenerateTripError(
            f"trip {trip.trip_id} has {len(trip)} samples; need at least 2")
    if resample_1hz:
        trip = resample_to_1hz(trip)
    dt = np.diff(trip.t)
    accel = np.empty(len(trip))
    accel[:-1] = np.diff(trip.v) / dt
    accel[-1] = accel[-2]
    dist = np.empty(len(trip))
    dist[0] = 0.0
    np.cumsum(trip.v[:-1] * dt, out=dist[1:])
    return trip.replace(accel=accel, dist=dist)


def write_trip_csv(trip: TripRecord, path) -> None:
    """Dump a trip in the canonical normalized schema."""
    data = {"t": trip.t, "v_mps": trip.v, "brake_pedal": trip.brake_pedal}
    for name in ("accel_pedal", "yaw_rate", "fuel_flow", "gap",
                 "pv_speed", "pv_length"):
        arr = getattr(trip, name)
        if arr is not None:
            data[CANONICAL_COLUMNS[name]] = arr
    data["ignition"] = np.ones(len(trip), dtype=int)
    pd.DataFrame(data).to_csv(path, index=False, float_format="%.9g")


def read_trip_csv(path, vehicle_id=None, trip_id=None,
                  vehicle_model=None) -> TripRecord:
    """Load one canonical-schema trip file and derive its signals."""
    frame = parse_telemetry(Path(path), canonical_column_map())
    stem = Path(path).stem
    trips, _ = split_trips(frame, min_duration_s=0.0,
                           vehicle_id=vehicle_id or stem,
                           trip_prefix=trip_id or stem,
                           vehicle_model=vehicle_model)
    if len(trips) != 1:
        raise DataError(f"{path} holds {len(trips)} ignition runs; expected 1")
    trip = trips[0].replace(trip_id=trip_id or stem)
    return derive_signals(trip)
