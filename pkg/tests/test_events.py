import numpy as np
import pytest

from reference import reference_local_extremes, reference_select_influential
from trajseg.errors import DegenerateSeriesError
from trajseg.events import (find_local_extremes, search_events,
                            select_influential_extremes)


def random_series(rng, n):
    """Quantized random walk: plenty of plateaus, stops, and ties."""
    steps = rng.choice([-4.0, -2.0, -1.0, 0.0, 0.0, 0.0, 1.0, 2.0, 4.0],
                       size=n - 1)
    v = np.concatenate([[float(rng.integers(0, 20))], steps]).cumsum()
    return np.clip(v, 0.0, 35.0)


def trapezoid_stop_and_go():
    """Accelerate to 15, cruise, brake to stop, wait, accelerate again."""
    return np.concatenate([
        np.linspace(0, 15, 16),          # rise ends at k=15
        np.full(30, 15.0),               # cruise plateau [15, 45]
        np.linspace(15, 0, 16)[1:],      # drop ends at k=60
        np.full(10, 0.0),                # stop plateau [60, 70]
        np.linspace(0, 15, 16)[1:],      # rise ends at k=85
    ])


def test_extremes_simple_zigzag():
    k_min, k_max = find_local_extremes([0.0, 5, 10, 5, 0, 5, 10])
    assert k_min.tolist() == [0, 4]
    assert k_max.tolist() == [2, 6]


def test_extremes_constant_series_collapses_to_origin():
    k_min, k_max = find_local_extremes(np.full(50, 7.0))
    assert k_min.tolist() == [0]
    assert k_max.tolist() == [0]


def test_extremes_symmetric_v():
    k_min, k_max = find_local_extremes([10.0, 0.0, 10.0])
    assert k_min.tolist() == [1]
    assert k_max.tolist() == [0, 2]


def test_extremes_plateau_first_index():
    v = [3.0, 1.0, 1.0, 1.0, 4.0, 4.0, 2.0]
    k_min, k_max = find_local_extremes(v)
    assert k_min.tolist() == [1, 6]
    assert k_max.tolist() == [0, 4]


def test_extremes_need_three_samples():
    with pytest.raises(DegenerateSeriesError):
        find_local_extremes([1.0, 2.0])


def test_trapezoid_yields_one_pair_at_cruise_and_stop():
    v = trapezoid_stop_and_go()
    k_min, k_max = find_local_extremes(v)
    inf_min, inf_max = select_influential_extremes(v, k_min, k_max,
                                                   zero_guard="off")
    assert inf_min.tolist() == [60]   # stop plateau representative
    assert inf_max.tolist() == [15]   # cruise plateau representative


def test_literal_zero_guard_suppresses_stop_events():
    v = trapezoid_stop_and_go()
    k_min, k_max = find_local_extremes(v)
    inf_min, inf_max = select_influential_extremes(v, k_min, k_max,
                                                   zero_guard="literal")
    assert inf_min.tolist() == []
    assert inf_max.tolist() == []


def test_small_ripple_has_no_influential_extremes():
    t = np.arange(200)
    v = 20.0 + 2.0 * np.sin(t / 3.0)
    k_min, k_max = find_local_extremes(v)
    inf_min, inf_max = select_influential_extremes(v, k_min, k_max)
    assert len(inf_min) == 0


def test_two_valleys_give_two_ordered_pairs():
    valley = [np.linspace(15, 0, 6)[1:], np.full(5, 0.0),
              np.linspace(0, 15, 6)[1:]]
    v = np.concatenate([np.full(10, 15.0)] + valley + valley + [np.full(5, 15.0)])
    k_min, k_max = find_local_extremes(v)
    inf_min, inf_max = select_influential_extremes(v, k_min, k_max,
                                                   zero_guard="off")
    assert len(inf_min) == 2
    assert inf_max[0] < inf_min[0] < inf_max[1] < inf_min[1]
    # the literal guard drops both stop events
    lit_min, _ = select_influential_extremes(v, k_min, k_max,
                                             zero_guard="literal")
    assert len(lit_min) == 0


def test_threshold_monotonicity():
    rng = np.random.default_rng(42)
    for _ in range(200):
        v = random_series(rng, int(rng.integers(10, 150)))
        k_min, k_max = find_local_extremes(v)
        counts = []
        for thr in (1.0, 2.0, 4.0, 5.0, 8.0, 12.0):
            inf_min, _ = select_influential_extremes(v, k_min, k_max,
                                                     threshold=thr)
            counts.append(len(inf_min))
        assert counts == sorted(counts, reverse=True)


def test_each_pair_window_contains_a_qualifying_drop():
    # the selection guarantees a single-step drop above the threshold
    # somewhere between the previous influential minimum and the new one
    rng = np.random.default_rng(7)
    thr = 5.0
    for _ in range(500):
        v = random_series(rng, int(rng.integers(10, 150)))
        k_min, k_max = find_local_extremes(v)
        inf_min, inf_max = select_influential_extremes(v, k_min, k_max, thr)
        prv = 0
        for mn in inf_min:
            found = False
            for m in k_max:
                if not (prv <= m < mn):
                    continue
                nxt = [x for x in k_min if x > m]
                if nxt and v[m] - v[nxt[0]] > thr:
                    found = True
                    break
            assert found
            prv = mn


@pytest.mark.parametrize("zero_guard", ["literal", "off"])
def test_matches_reference_transcription(zero_guard):
    rng = np.random.default_rng(123)
    for _ in range(400):
        v = random_series(rng, int(rng.integers(5, 200)))
        k_min, k_max = find_local_extremes(v)
        ref_min, ref_max = reference_local_extremes(v)
        assert k_min.tolist() == ref_min
        assert k_max.tolist() == ref_max
        got = select_influential_extremes(v, k_min, k_max,
                                          zero_guard=zero_guard)
        ref = reference_select_influential(v, ref_min, ref_max, 5.0,
                                           zero_guard == "literal")
        assert got[0].tolist() == ref[0]
        assert got[1].tolist() == ref[1]


def test_search_events_packages_extreme_set():
    es = search_events(trapezoid_stop_and_go())
    assert es.n_pairs == 1
    assert es.k_inf_max[0] < es.k_inf_min[0]
