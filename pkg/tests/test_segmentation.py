import numpy as np
import pytest

from reference import reference_slice_and_dice
from trajseg.errors import ContractError
from trajseg.events import search_events
from trajseg.ingest import derive_signals
from trajseg.model import Scenario, ScenarioType, TripRecord, check_cover
from trajseg.segmentation import (fill_gaps, scenario_record, segment_trip,
                                  slice_and_dice)
from test_events import random_series, trapezoid_stop_and_go


def make_trip(v, **kw):
    v = np.asarray(v, dtype=float)
    trip = TripRecord(t=np.arange(len(v), dtype=float), v=v,
                      brake_pedal=np.zeros(len(v)), **kw)
    return derive_signals(trip)


def run_slices(v):
    v = np.asarray(v, dtype=float)
    es = search_events(v)
    return slice_and_dice(v, np.arange(len(v), dtype=float), es)


def test_stop_and_go_is_one_bsna_peak_to_peak():
    cuts = run_slices(trapezoid_stop_and_go())
    assert cuts == [(15, 85, ScenarioType.BSNA)]


def test_braking_without_stop_is_one_bna():
    v = np.concatenate([np.full(11, 20.0), np.linspace(20, 5, 16)[1:],
                        np.linspace(5, 20, 16)[1:]])
    cuts = run_slices(v)
    assert cuts == [(0, 40, ScenarioType.BNA)]


def test_lone_drop_and_rise_around_plateau_merge_into_one_bna():
    # The 6 s separation rule only splits consecutive drops (or rises)
    # within one chain; a single drop paired with a single rise always
    # forms one event, however long the plateau between them.
    v = np.concatenate([np.linspace(20, 10, 6), np.full(29, 10.0),
                        np.linspace(10, 20, 6)[1:]])
    cuts = run_slices(v)
    assert cuts == [(0, 39, ScenarioType.BNA)]


def shelf_profile(hold):
    """Drop 26->18, dip shelf, bump to 18.5, then brake to a stop and go."""
    return np.concatenate([
        np.full(10, 26.0),               # cruise at 26, plateau rep 0
        np.linspace(26, 18, 9)[1:],      # drop 1 lands k=17
        np.full(hold, 18.0),             # shelf valley (local minimum at 17)
        [18.5],                          # bump peak opening drop 2
        np.linspace(18.5, 0, 11)[1:],    # brake into a stop
        np.full(8, 0.0),
        np.linspace(0, 15, 16)[1:],
    ])


def test_stacked_drops_emit_standalone_b_then_event():
    v = shelf_profile(hold=9)            # bump at k=27, 10 s after the landing
    cuts = run_slices(v)
    assert cuts == [(0, 17, ScenarioType.B), (27, 60, ScenarioType.BSNA)]


def test_close_drops_merge_into_the_event():
    v = shelf_profile(hold=3)            # bump 4 s after the landing (< 6 s)
    cuts = run_slices(v)
    assert len(cuts) == 1
    assert cuts[0][0] == 0 and cuts[0][2] is ScenarioType.BSNA


def test_fill_gaps_labels_cruise_and_creep():
    v = np.concatenate([np.full(40, 20.0), np.zeros(10), np.full(30, 20.0)])
    trip = make_trip(v)
    events = [Scenario(k0=35, kf=65, stype=ScenarioType.BSNA)]
    cover = fill_gaps(trip, events)
    assert [(s.k0, s.kf, s.stype) for s in cover] == [
        (0, 35, ScenarioType.CRS),
        (35, 65, ScenarioType.BSNA),
        (65, 79, ScenarioType.CRS),
    ]


def test_fill_gaps_stop_makes_crp():
    v = np.concatenate([np.full(20, 20.0), np.zeros(5), np.full(20, 20.0)])
    trip = make_trip(v)
    cover = fill_gaps(trip, [])
    assert [s.stype for s in cover] == [ScenarioType.CRP]


def test_fill_gaps_identity_when_covered():
    trip = make_trip(np.full(50, 20.0))
    events = [Scenario(k0=0, kf=49, stype=ScenarioType.BNA)]
    assert fill_gaps(trip, events) == events


def test_fill_gaps_rejects_overlap():
    trip = make_trip(np.full(50, 20.0))
    with pytest.raises(ContractError):
        fill_gaps(trip, [Scenario(0, 30, ScenarioType.BNA),
                         Scenario(20, 49, ScenarioType.BNA)])


def test_segment_all_stop_trip_is_single_crp():
    trip = make_trip(np.zeros(120))
    cover = segment_trip(trip)
    assert [(s.k0, s.kf, s.stype) for s in cover] == [
        (0, 119, ScenarioType.CRP)]


def test_segment_constant_cruise_is_single_crs():
    trip = make_trip(np.full(90, 25.0))
    cover = segment_trip(trip)
    assert [(s.k0, s.kf, s.stype) for s in cover] == [
        (0, 89, ScenarioType.CRS)]


def test_cover_property_on_random_series():
    rng = np.random.default_rng(11)
    for _ in range(300):
        v = random_series(rng, int(rng.integers(5, 200)))
        trip = make_trip(v)
        cover = segment_trip(trip)
        check_cover(cover, trip.last_index)


def test_label_soundness_on_random_series():
    # stop events contain a stop sample; the stop/no-stop label reflects
    # the speed at the event's influential minimum; standalone drops and
    # rises move more than the threshold
    rng = np.random.default_rng(13)
    thr = 5.0
    for _ in range(400):
        v = random_series(rng, int(rng.integers(5, 200)))
        es = search_events(v)
        cuts = slice_and_dice(v, np.arange(len(v), dtype=float), es)
        for k0, kf, stype in cuts:
            if stype is ScenarioType.BSNA:
                assert np.min(v[k0:kf + 1]) == 0.0
            elif stype is ScenarioType.BNA:
                anchors = [m for m in es.k_inf_min if k0 <= m <= kf]
                assert anchors and all(v[m] != 0.0 for m in anchors)
            elif stype is ScenarioType.B:
                assert v[k0] - v[kf] > thr
            elif stype is ScenarioType.A:
                assert v[kf] - v[k0] > thr


def test_matches_reference_transcription_on_random_series():
    rng = np.random.default_rng(17)
    t_of = lambda n: np.arange(n, dtype=float)
    for _ in range(400):
        v = random_series(rng, int(rng.integers(5, 200)))
        es = search_events(v)
        got = slice_and_dice(v, t_of(len(v)), es)
        ref = reference_slice_and_dice(v, t_of(len(v)), es.k_min, es.k_max,
                                       es.k_inf_min, es.k_inf_max, 5.0, 6.0)
        assert got == ref


def test_segmentation_is_deterministic():
    rng = np.random.default_rng(23)
    v = random_series(rng, 400)
    trip = make_trip(v)
    a = segment_trip(trip)
    b = segment_trip(trip)
    assert a == b


def test_scenario_record_schema():
    trip = make_trip(np.full(90, 25.0))
    rec = scenario_record(trip, segment_trip(trip)[0])
    assert set(rec) == {"trip_id", "vehicle_id", "k0", "kf", "t0", "tf",
                        "type", "v0", "vf", "distance_m"}
    assert rec["type"] == "Crs"
    assert rec["distance_m"] == pytest.approx(25.0 * 89)
