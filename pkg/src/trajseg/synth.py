"""Synthetic trip generation with known ground truth.

Trips render from explicit scenario plans as piecewise constant-
acceleration speed profiles at 1 Hz. Cruise stretches carry a gentle
deterministic wiggle (amplitude 0.25 m/s, well under the 5 m/s event
threshold) shaped so that every item junction is a clean local extreme:
a cruise entered from a rise starts descending and one entered from a
drop starts ascending, and every cruise ends ascending into the next
item. That makes the segmentation recover plan-item boundaries exactly
on noise-free renders. Pedal flags switch exactly at phase boundaries:
released while coasting, brake during braking and stops, accelerator
during rises and cruises.

Ground-truth labels come from the plan, not from the pipeline. The
default random-plan grammar only emits constructs the event-based
slicing can represent: standalone A items, leading accelerations,
trailing decelerations, and mid-trip creeping are excluded because the
slicing absorbs them into neighboring stretches (see the module tests
for pinned examples of each).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import PlanError
from .ingest import derive_signals
from .model import Regime, RegimeType, Scenario, ScenarioType, TripRecord

RIPPLE_AMP = 0.25
RIPPLE_HALF = 4  # samples per wiggle leg

_EVENT_KINDS = (ScenarioType.BNA, ScenarioType.BSNA)


@dataclass(frozen=True)
class PlanItem:
    """One scenario of a plan; speeds are item-final (start = previous end)."""

    stype: ScenarioType
    target_speed: float
    duration_s: float = 0.0       # Crs length; Crp creep length
    stop_s: float = 0.0           # BSnA / Crp dwell
    min_speed: float = 0.0        # BnA valley speed
    decel_mps2: float = 1.5
    accel_mps2: float = 1.0
    coast_s: float = 0.0
    coast_decel_mps2: float = 0.4
    yaw_degps: float = 0.0        # turning pulse magnitude at the event

    def to_dict(self) -> dict:
        return {"type": self.stype.value, "target_speed": self.target_speed,
                "duration_s": self.duration_s, "stop_s": self.stop_s,
                "min_speed": self.min_speed, "decel_mps2": self.decel_mps2,
                "accel_mps2": self.accel_mps2, "coast_s": self.coast_s,
                "coast_decel_mps2": self.coast_decel_mps2,
                "yaw_degps": self.yaw_degps}

    @classmethod
    def from_dict(cls, d: dict) -> "PlanItem":
        d = dict(d)
        d["stype"] = ScenarioType(d.pop("type"))
        return cls(**d)


@dataclass(frozen=True)
class ScenarioPlan:
    """A plan plus its rendering options.

    Speed noise is a stationary first-order autoregressive Gaussian
    process with marginal deviation ``noise_sigma`` and correlation time
    ``noise_tau_s``: at 1 Hz a vehicle cannot jitter independently from
    sample to sample, and wheel-speed sensors read exactly zero at
    standstill, so true-stop samples stay clean.
    """

    items: tuple
    noise_sigma: float = 0.0
    noise_tau_s: float = 6.0
    pv_cutins: int = 0
    with_fuel: bool = True

    def to_dict(self) -> dict:
        return {"items": [i.to_dict() for i in self.items],
                "noise_sigma": self.noise_sigma,
                "noise_tau_s": self.noise_tau_s,
                "pv_cutins": self.pv_cutins,
                "with_fuel": self.with_fuel}

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioPlan":
        return cls(items=tuple(PlanItem.from_dict(i) for i in d["items"]),
                   noise_sigma=d.get("noise_sigma", 0.0),
                   noise_tau_s=d.get("noise_tau_s", 6.0),
                   pv_cutins=d.get("pv_cutins", 0),
                   with_fuel=d.get("with_fuel", True))


def save_plans(plans, path) -> None:
    payload = [p.to_dict() for p in plans]
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_plans(path):
    with open(path) as fh:
        return [ScenarioPlan.from_dict(d) for d in json.load(fh)]


def _steps(dv: float, rate: float) -> int:
    return max(1, int(np.ceil(abs(dv) / rate - 1e-9)))


class _Leg:
    __slots__ = ("n", "v_end", "brake", "gas", "tag", "item")

    def __init__(self, n, v_end, brake, gas, tag, item):
        self.n, self.v_end = int(n), float(v_end)
        self.brake, self.gas, self.tag, self.item = brake, gas, tag, item


def validate_plan(plan: ScenarioPlan) -> None:
    """Reject structurally broken or physically unrealizable plans."""
    if not plan.items:
        raise PlanError("plan has no items")
    if plan.noise_sigma < 0:
        raise PlanError("noise sigma must be >= 0")
    v = None
    for idx, it in enumerate(plan.items):
        where = f"item {idx} ({it.stype.value})"
        for rate in (it.decel_mps2, it.accel_mps2, it.coast_decel_mps2):
            if not (0 < rate <= 5.0):
                raise PlanError(f"{where}: rates must lie in (0, 5] m/s^2")
        if not (0 <= it.target_speed <= 40) or it.min_speed < 0:
            raise PlanError(f"{where}: speeds must lie in [0, 40] m/s")
        first = v is None
        if it.stype is ScenarioType.CRS:
            if first:
                v = it.target_speed
            if it.target_speed != v:
                raise PlanError(f"{where}: cruise must hold the entry speed")
            if it.duration_s < 2 * RIPPLE_HALF:
                raise PlanError(f"{where}: cruise shorter than {2 * RIPPLE_HALF} s")
        elif it.stype is ScenarioType.CRP:
            if first:
                v = 0.0
            if not (first or idx == len(plan.items) - 1):
                raise PlanError(f"{where}: creeping only leads or ends a plan")
            if first and it.target_speed < 5.0:
                raise PlanError(f"{where}: leading creep must rise to >= 5 m/s")
            if not first and it.target_speed != 0.0:
                raise PlanError(f"{where}: trailing creep must end stopped")
            if it.stop_s < 1:
                raise PlanError(f"{where}: creep needs a stop dwell")
        elif it.stype in _EVENT_KINDS:
            if first:
                raise PlanError(f"{where}: a braking event cannot start a plan")
            floor = it.min_speed if it.stype is ScenarioType.BNA else 0.0
            if it.stype is ScenarioType.BSNA and it.stop_s < 1:
                raise PlanError(f"{where}: stop dwell must be >= 1 s")
            if it.stype is ScenarioType.BNA and it.min_speed <= 0:
                raise PlanError(f"{where}: a no-stop event needs min_speed > 0")
            coast_drop = it.coast_s * it.coast_decel_mps2
            if v - coast_drop <= floor:
                raise PlanError(f"{where}: coasting already passes the valley speed")
            if it.target_speed <= floor:
                raise PlanError(f"{where}: must accelerate above the valley")
            v = it.target_speed
            continue
        elif it.stype is ScenarioType.B:
            if first:
                raise PlanError(f"{where}: a braking item cannot start a plan")
            coast_drop = it.coast_s * it.coast_decel_mps2
            if it.target_speed >= v - coast_drop:
                raise PlanError(f"{where}: braking must reduce speed")
            v = it.target_speed
            continue
        elif it.stype is ScenarioType.A:
            raise PlanError(
                f"{where}: standalone accelerations are not renderable; "
                "the slicing absorbs the last rise before any event")
        if it.stype is ScenarioType.CRP and first:
            v = it.target_speed
        elif it.stype is ScenarioType.CRS:
            v = it.target_speed
        elif it.stype is ScenarioType.CRP:
            v = 0.0


def _cruise_legs(level, n_total, entered_from_drop, item_idx):
    amp = RIPPLE_AMP
    h = RIPPLE_HALF
    legs = []
    if entered_from_drop:
        if n_total < 4 * h:
            raise PlanError(
                f"item {item_idx}: cruise after a drop needs >= {4 * h} s")
        legs.append(_Leg(h, level + amp, False, True, "cruise", item_idx))
        legs.append(_Leg(2 * h, level - amp, False, True, "cruise", item_idx))
        flat = n_total - 4 * h
        if flat:
            legs.append(_Leg(flat, level - amp, False, True, "cruise", item_idx))
        legs.append(_Leg(h, level, False, True, "cruise", item_idx))
    else:
        if n_total < 2 * h:
            raise PlanError(f"item {item_idx}: cruise needs >= {2 * h} s")
        legs.append(_Leg(h, level - amp, False, True, "cruise", item_idx))
        flat = n_total - 2 * h
        if flat:
            legs.append(_Leg(flat, level - amp, False, True, "cruise", item_idx))
        legs.append(_Leg(h, level, False, True, "cruise", item_idx))
    return legs


def _plan_legs(plan: ScenarioPlan):
    """Expand plan items into constant-slope legs with pedal and regime tags."""
    legs = []
    v = None
    prev_drop = False
    for idx, it in enumerate(plan.items):
        if it.stype is ScenarioType.CRS:
            if v is None:
                v = it.target_speed
            legs.extend(_cruise_legs(it.target_speed, int(round(it.duration_s)),
                                     prev_drop, idx))
            v = it.target_speed
            prev_drop = False
        elif it.stype is ScenarioType.CRP and v is None:
            creep_v = min(0.8, max(0.5, it.target_speed / 10))
            legs.append(_Leg(max(1, int(round(it.stop_s))), 0.0,
                             True, False, "dwell", idx))
            legs.append(_Leg(2, creep_v, False, True, "creep", idx))
            legs.append(_Leg(max(1, int(round(it.duration_s or 6))), creep_v,
                             False, True, "creep", idx))
            legs.append(_Leg(_steps(it.target_speed - creep_v, it.accel_mps2),
                             it.target_speed, False, True, "rise", idx))
            v = it.target_speed
            prev_drop = False
        elif it.stype is ScenarioType.CRP:
            legs.append(_Leg(_steps(v, it.decel_mps2), 0.0,
                             True, False, "brake", idx))
            legs.append(_Leg(max(1, int(round(it.stop_s))), 0.0,
                             True, False, "dwell", idx))
            v = 0.0
            prev_drop = False
        elif it.stype is ScenarioType.B or it.stype in _EVENT_KINDS:
            floor = (it.target_speed if it.stype is ScenarioType.B
                     else (it.min_speed if it.stype is ScenarioType.BNA else 0.0))
            if it.coast_s > 0:
                v_coast = v - it.coast_s * it.coast_decel_mps2
                legs.append(_Leg(int(round(it.coast_s)), v_coast,
                                 False, False, "coast", idx))
            else:
                v_coast = v
            legs.append(_Leg(_steps(v_coast - floor, it.decel_mps2), floor,
                             True, False, "brake", idx))
            if it.stype is ScenarioType.BSNA:
                legs.append(_Leg(max(1, int(round(it.stop_s))), 0.0,
                                 True, False, "dwell", idx))
            if it.stype in _EVENT_KINDS:
                legs.append(_Leg(_steps(it.target_speed - floor, it.accel_mps2),
                                 it.target_speed, False, True, "rise", idx))
                prev_drop = False
            else:
                prev_drop = True
            v = it.target_speed
    return legs


def render_trip(plan: ScenarioPlan, seed: int, vehicle_id="synth",
                trip_id="synth-0000", vehicle_model=None):
    """Render a plan to a 1 Hz trip plus its ground truth.

    Returns (trip, scenarios, regimes, meta): ground-truth scenarios
    tile the trip at plan-item boundaries; regimes are (scenario_index,
    Regime) pairs; meta records planted cut-in count and the noise
    level. Rendering is deterministic in (plan, seed).
    """
    validate_plan(plan)
    legs = _plan_legs(plan)
    n_steps = sum(leg.n for leg in legs)
    n = n_steps + 1
    v = np.empty(n)
    brake = np.empty(n_steps, dtype=bool)
    gas = np.empty(n_steps, dtype=bool)
    tags = []
    item_of_step = np.empty(n_steps, dtype=np.int64)
    pos = 0
    cur = 0.0 if plan.items[0].stype is ScenarioType.CRP else plan.items[0].target_speed
    v[0] = cur
    spans = {}
    for leg in legs:
        ramp = np.linspace(cur, leg.v_end, leg.n + 1)
        v[pos + 1:pos + leg.n + 1] = ramp[1:]
        brake[pos:pos + leg.n] = leg.brake
        gas[pos:pos + leg.n] = leg.gas
        item_of_step[pos:pos + leg.n] = leg.item
        tags.append((leg.tag, leg.item, pos, pos + leg.n))
        spans.setdefault((leg.item, leg.tag), []).append((pos, pos + leg.n))
        cur = leg.v_end
        pos += leg.n

    rng = np.random.default_rng(seed)
    if plan.noise_sigma > 0:
        rho = float(np.exp(-1.0 / max(plan.noise_tau_s, 1e-9)))
        innov = rng.normal(0.0, 1.0, n)
        eps = np.empty(n)
        eps[0] = innov[0]
        c = float(np.sqrt(1.0 - rho * rho))
        for k in range(1, n):
            eps[k] = rho * eps[k - 1] + c * innov[k]
        moving = v > 0
        v = np.where(moving, np.maximum(0.0, v + plan.noise_sigma * eps), 0.0)

    # pedal flags broadcast to the step's left sample; last sample holds
    brake_pedal = np.zeros(n)
    brake_pedal[:-1][brake] = 5.0
    brake_pedal[-1] = brake_pedal[-2]
    accel_pedal = np.zeros(n)
    accel_pedal[:-1][gas] = 20.0
    accel_pedal[-1] = accel_pedal[-2]

    t = np.arange(n, dtype=float)

    # ground-truth scenarios at item boundaries
    bounds = np.zeros(len(plan.items) + 1, dtype=np.int64)
    for step, item in enumerate(item_of_step):
        bounds[item + 1] = step + 1
    for i in range(1, len(bounds)):
        bounds[i] = max(bounds[i], bounds[i - 1])
    scenarios = [Scenario(k0=int(bounds[i]), kf=int(bounds[i + 1]),
                          stype=it.stype)
                 for i, it in enumerate(plan.items)]

    regimes = []
    for i, it in enumerate(plan.items):
        if it.stype not in _EVENT_KINDS and it.stype is not ScenarioType.B:
            continue
        for tag, rtype in (("coast", RegimeType.CST), ("brake", RegimeType.B),
                           ("rise", RegimeType.A)):
            span = spans.get((i, tag))
            if span:
                regimes.append((i, Regime(k0=span[0][0], kf=span[0][1],
                                          rtype=rtype)))

    yaw = None
    if any(it.yaw_degps > 0 for it in plan.items):
        yaw = np.zeros(n)
        for i, it in enumerate(plan.items):
            if it.yaw_degps <= 0 or it.stype not in _EVENT_KINDS:
                continue
            brk = spans[(i, "brake")][0]
            lo = max(0, brk[1] - 3)
            hi = min(n, brk[1] + 4)
            yaw[lo:hi] = it.yaw_degps

    fuel = None
    if plan.with_fuel:
        accel_fwd = np.empty(n)
        accel_fwd[:-1] = np.diff(v)
        accel_fwd[-1] = accel_fwd[-2]
        fuel = 0.8 + 0.35 * v + 0.9 * np.clip(accel_fwd, 0, None) * v / 10.0

    gap = pv_speed = None
    placed = 0
    if plan.pv_cutins > 0:
        gap = np.full(n, np.nan)
        pv_speed = np.full(n, np.nan)
        cruise_spans = [(a, b) for tag, _, a, b in tags
                        if tag == "cruise" and b - a >= 12]
        order = rng.permutation(len(cruise_spans))
        for j in order[:plan.pv_cutins]:
            a, b = cruise_spans[j]
            start = a + 2
            end = min(b, start + 15)
            g0 = float(rng.uniform(18.0, 35.0))
            rel = float(rng.uniform(-2.0, 2.0))
            span = np.arange(start, end)
            gap[span] = np.maximum(2.0, g0 + rel * (span - start))
            pv_speed[span] = np.maximum(0.0, v[span] + rel)
            placed += 1

    trip = TripRecord(
        t=t, v=v, brake_pedal=brake_pedal, dt=1.0,
        accel_pedal=accel_pedal, yaw_rate=yaw, fuel_flow=fuel,
        gap=gap, pv_speed=pv_speed,
        vehicle_id=vehicle_id, trip_id=trip_id, vehicle_model=vehicle_model)
    trip = derive_signals(trip)
    meta = {"cutins": placed, "noise_sigma": plan.noise_sigma,
            "n_samples": n}
    return trip, scenarios, regimes, meta


@dataclass(frozen=True)
class GeneratorConfig:
    """Bounds for random plan generation (recoverable grammar only)."""

    min_items: int = 2
    max_items: int = 30
    speed_lo: float = 8.0
    speed_hi: float = 33.0
    event_delta: float = 6.5          # minimum drop/rise, margin over the 5 m/s threshold
    cruise_s: tuple = (18.0, 40.0)
    stop_s: tuple = (8.0, 20.0)
    decel: tuple = (1.0, 2.2)
    accel: tuple = (1.0, 1.8)
    coast_prob: float = 0.5
    coast_s: tuple = (3.0, 8.0)
    coast_decel: tuple = (0.3, 0.5)
    pre_brake_prob: float = 0.25
    lead_crp_prob: float = 0.3
    tail_crp_prob: float = 0.25
    tail_end_at_event_prob: float = 0.2
    turn_prob: float = 0.3
    yaw_degps: tuple = (6.0, 12.0)
    bsna_prob: float = 0.5
    min_bsna: int = 0
    max_bsna: Optional[int] = None
    noise_sigma: float = 0.0
    pv_cutins_max: int = 2
    with_fuel: bool = True

    def __post_init__(self):
        if not (1 <= self.min_items <= self.max_items):
            raise PlanError("bad item-count bounds")
        if self.speed_lo < self.event_delta + 1 or self.speed_hi > 35:
            raise PlanError("speed bounds must fit [event_delta + 1, 35]")


def random_plan(gconfig: GeneratorConfig | None = None, seed: int = 0) -> ScenarioPlan:
    """Draw a random plan within the generator bounds, seeded."""
    g = gconfig or GeneratorConfig()
    rng = np.random.default_rng(seed)
    items = []
    n_bsna = 0

    def u(lohi):
        return float(rng.uniform(*lohi))

    level = float(rng.uniform(g.speed_lo, g.speed_hi))
    if rng.random() < g.lead_crp_prob:
        items.append(PlanItem(ScenarioType.CRP, target_speed=level,
                              stop_s=u((3.0, 8.0)), duration_s=u((4.0, 10.0)),
                              accel_mps2=u(g.accel)))
    else:
        items.append(PlanItem(ScenarioType.CRS, target_speed=level,
                              duration_s=u(g.cruise_s)))

    def coast_kw(drop_room):
        if rng.random() >= g.coast_prob:
            return {}
        cd = u(g.coast_decel)
        cs = min(u(g.coast_s), max(0.0, (drop_room - 1.5) / cd))
        if cs < 1.0:
            return {}
        return {"coast_s": float(int(cs)), "coast_decel_mps2": cd}

    budget = int(rng.integers(g.min_items, g.max_items + 1))
    made_event = False
    while True:
        room = budget - len(items)
        if made_event and room < 2:
            break
        # optional stacked pre-event braking items
        while (room >= 4 and level >= g.speed_lo + g.event_delta + 2.0
               and rng.random() < g.pre_brake_prob):
            drop = u((g.event_delta, min(9.0, level - g.speed_lo - 1.0)))
            nxt = level - drop
            items.append(PlanItem(ScenarioType.B, target_speed=nxt,
                                  decel_mps2=u(g.decel),
                                  **coast_kw(level - nxt)))
            items.append(PlanItem(ScenarioType.CRS, target_speed=nxt,
                                  duration_s=u(g.cruise_s)))
            level = nxt
            room = budget - len(items)
        want_bsna = rng.random() < g.bsna_prob
        if g.max_bsna is not None and n_bsna >= g.max_bsna:
            want_bsna = False
        if n_bsna < g.min_bsna:
            want_bsna = True
        if not want_bsna and level < g.event_delta + 2.0:
            want_bsna = True
        yaw = u(g.yaw_degps) if rng.random() < g.turn_prob else 0.0
        if want_bsna:
            valley = 0.0
            new_level = float(rng.uniform(g.speed_lo, g.speed_hi))
            items.append(PlanItem(ScenarioType.BSNA, target_speed=new_level,
                                  stop_s=u(g.stop_s), decel_mps2=u(g.decel),
                                  accel_mps2=u(g.accel), yaw_degps=yaw,
                                  **coast_kw(level)))
            n_bsna += 1
        else:
            valley = float(rng.uniform(1.5, level - g.event_delta))
            new_level = float(rng.uniform(valley + g.event_delta, g.speed_hi))
            items.append(PlanItem(ScenarioType.BNA, target_speed=new_level,
                                  min_speed=valley, decel_mps2=u(g.decel),
                                  accel_mps2=u(g.accel), yaw_degps=yaw,
                                  **coast_kw(level - valley)))
        level = new_level
        made_event = True
        room = budget - len(items)
        if room <= 1 or (n_bsna >= g.min_bsna and room <= 3):
            # close the trip
            roll = rng.random()
            if len(items) >= g.max_items or roll > 1.0 - g.tail_end_at_event_prob:
                pass
            elif roll < g.tail_crp_prob:
                items.append(PlanItem(ScenarioType.CRP, target_speed=0.0,
                                      stop_s=u((3.0, 8.0)),
                                      decel_mps2=u(g.decel)))
            else:
                items.append(PlanItem(ScenarioType.CRS, target_speed=level,
                                      duration_s=u(g.cruise_s)))
            break
        items.append(PlanItem(ScenarioType.CRS, target_speed=level,
                              duration_s=u(g.cruise_s)))
    plan = ScenarioPlan(
        items=tuple(items), noise_sigma=g.noise_sigma,
        pv_cutins=int(rng.integers(0, g.pv_cutins_max + 1)),
        with_fuel=g.with_fuel)
    validate_plan(plan)
    return plan
