"""Scenario segmentation: slice a trip at influential extremes and label it.

Within each influential (max, min) pair, qualifying speed drops form a
braking chain and qualifying rises an acceleration chain. A chain
element becomes a standalone B (or A) scenario when the next element of
its own chain starts more than ``merge_gap_s`` seconds after it ends;
the remaining terminal drop and first rise form the event scenario,
labeled BSnA when the influential minimum is a stop and BnA otherwise.
The last element of a chain has no successor to test against and is
absorbed, so a lone drop-rise pair around a long plateau merges into a
single BnA; the 6 s rule only separates consecutive drops (or rises)
within one chain. Uncovered stretches become Crp when they contain a
stop sample and Crs otherwise, yielding a total cover.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .config import PipelineConfig
from .errors import ContractError
from .events import search_events
from .model import ExtremeSet, Scenario, ScenarioType, TripRecord, check_cover


def slice_and_dice(v, t, extremes: ExtremeSet, threshold=5.0, merge_gap_s=6.0):
    """Cut event scenarios out of a trip given its influential extremes.

    Returns a list of (k0, kf, ScenarioType) tuples, sorted and
    non-overlapping (shared endpoints allowed).
    """
    v = np.asarray(v, dtype=float)
    t = np.asarray(t, dtype=float)
    k_min = np.asarray(extremes.k_min, dtype=np.int64)
    k_max = np.asarray(extremes.k_max, dtype=np.int64)
    inf_min = np.asarray(extremes.k_inf_min, dtype=np.int64)
    inf_max = np.asarray(extremes.k_inf_max, dtype=np.int64)
    n_last = len(v) - 1
    if len(inf_min) == 0:
        return []

    q = k_max[kernels.drop_qualifiers(v, k_min, k_max, threshold)]
    r = k_min[kernels.rise_qualifiers(v, k_min, k_max, threshold)]

    def next_min_after(m):
        pos = np.searchsorted(k_min, m, side="right")
        return int(k_min[pos]) if pos < len(k_min) else None

    def next_max_after(n):
        pos = np.searchsorted(k_max, n, side="right")
        return int(k_max[pos]) if pos < len(k_max) else None

    out = []
    for i in range(len(inf_min)):
        im, imn = int(inf_max[i]), int(inf_min[i])

        brk = q[(q >= im) & (q <= imn)]
        kf_slc = None
        for j, m in enumerate(brk):
            landing = next_min_after(m)
            if j + 1 < len(brk) and t[brk[j + 1]] - t[landing] > merge_gap_s:
                out.append((int(m), landing, ScenarioType.B))
                kf_slc = landing
        if kf_slc is not None:
            after = brk[brk > kf_slc]
            k0 = int(after[0]) if len(after) else im
        else:
            k0 = int(brk[0]) if len(brk) else im

        label = ScenarioType.BSNA if v[imn] == 0.0 else ScenarioType.BNA

        hi = int(inf_max[i + 1]) if i + 1 < len(inf_max) else n_last
        acc = r[(r >= imn) & (r <= hi)]
        kf_slc = None
        for j, n in enumerate(acc):
            peak = next_max_after(n)
            if j + 1 < len(acc) and t[acc[j + 1]] - t[peak] > merge_gap_s:
                kf_slc = peak
                if j > 0:
                    out.append((int(n), peak, ScenarioType.A))
                else:
                    out.append((k0, peak, label))
        if kf_slc is None:
            anchor = int(acc[-1]) if len(acc) else imn
            peak = next_max_after(anchor)
            out.append((k0, peak if peak is not None else n_last, label))

    for (a0, a1, _), (b0, _, _) in zip(out, out[1:]):
        if b0 < a1:
            raise ContractError(f"event intervals overlap: ..{a1}] vs [{b0}..")
    return out


def fill_gaps(trip: TripRecord, event_scenarios, v_stop=0.1):
    """Complete a sorted event-scenario list into a total cover of the trip.

    Every uncovered stretch of at least one sample becomes Crp when it
    contains a sample at or below the stop speed, Crs otherwise.
    """
    n_last = trip.last_index
    v = trip.v
    out = []
    cursor = 0

    def emit_gap(a, b):
        stype = (ScenarioType.CRP if float(np.min(v[a:b + 1])) <= v_stop
                 else ScenarioType.CRS)
        out.append(Scenario(k0=a, kf=b, stype=stype))

    for s in event_scenarios:
        if s.k0 < cursor and out:
            raise ContractError(
                f"scenario [{s.k0}, {s.kf}] overlaps the previous one")
        if s.k0 > cursor or (not out and s.k0 > 0):
            emit_gap(cursor, s.k0)
        out.append(s)
        cursor = s.kf
    if cursor < n_last or not out:
        emit_gap(cursor, n_last)
    check_cover(out, n_last)
    return out


def segment_trip(trip: TripRecord, config: PipelineConfig | None = None):
    """Segment one trip into a total, ordered, typed scenario cover."""
    config = config or PipelineConfig()
    if len(trip) < 3:
        return fill_gaps(trip, [], v_stop=config.v_stop_mps)
    extremes = search_events(trip.v, config)
    cuts = slice_and_dice(trip.v, trip.t, extremes,
                          threshold=config.threshold_mps,
                          merge_gap_s=config.merge_gap_s)
    events = [Scenario(k0=a, kf=b, stype=s) for a, b, s in cuts]
    return fill_gaps(trip, events, v_stop=config.v_stop_mps)


def scenario_record(trip: TripRecord, scenario: Scenario) -> dict:
    """JSONL record for one scenario."""
    k0, kf = scenario.k0, scenario.kf
    dist = trip.dist
    return {
        "trip_id": trip.trip_id,
        "vehicle_id": trip.vehicle_id,
        "k0": k0,
        "kf": kf,
        "t0": float(trip.t[k0]),
        "tf": float(trip.t[kf]),
        "type": scenario.stype.value,
        "v0": float(trip.v[k0]),
        "vf": float(trip.v[kf]),
        "distance_m": float(dist[kf] - dist[k0]) if dist is not None else None,
    }
