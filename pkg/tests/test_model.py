import numpy as np
import pytest

from trajseg.errors import ContractError
from trajseg.model import (ExtremeSet, Regime, RegimeType, Sample, Scenario,
                           ScenarioType, TripRecord, check_cover,
                           scenario_from_dict, scenario_to_dict)


def test_sample_invariants():
    with pytest.raises(ContractError):
        Sample(t=0, v=-1)
    with pytest.raises(ContractError):
        Sample(t=0, v=1, gap=0.0, pv_speed=3.0)
    with pytest.raises(ContractError):
        Sample(t=0, v=1, gap=10.0)  # pv_speed missing
    s = Sample(t=0, v=1, brake_pedal=5.0, gap=10.0, pv_speed=3.0)
    assert s.brake_pressed and s.has_pv


def test_sample_serialization_round_trip():
    s = Sample(t=1.5, v=12.0, brake_pedal=0.0, accel_pedal=20.0,
               yaw_rate=-3.0, fuel_flow=1.2, gap=18.0, pv_speed=11.0)
    assert Sample.from_dict(s.to_dict()) == s


def test_trip_requires_monotone_time():
    with pytest.raises(ContractError):
        TripRecord(t=[0.0, 1.0, 1.0], v=[1, 1, 1], brake_pedal=[0, 0, 0])


def test_trip_channels_jointly_present():
    with pytest.raises(ContractError):
        TripRecord(t=[0.0, 1.0], v=[1, 1], brake_pedal=[0, 0],
                   gap=[10.0, 10.0])
    trip = TripRecord(t=[0.0, 1.0], v=[1, 1], brake_pedal=[0, 0],
                      gap=[10.0, np.nan], pv_speed=[2.0, np.nan])
    assert trip.sample(1).gap is None
    assert trip.sample(0).gap == 10.0


def test_trip_arrays_read_only():
    trip = TripRecord(t=[0.0, 1.0], v=[1, 2], brake_pedal=[0, 0])
    with pytest.raises(ValueError):
        trip.v[0] = 5.0


def test_extreme_set_invariants():
    ExtremeSet(k_min=(0, 4), k_max=(2, 6), k_inf_min=(4,), k_inf_max=(2,))
    with pytest.raises(ContractError):
        ExtremeSet(k_min=(0, 4), k_max=(2, 6), k_inf_min=(4,), k_inf_max=(6,))
    with pytest.raises(ContractError):
        # influential index not among the local extremes
        ExtremeSet(k_min=(0, 4), k_max=(2, 6), k_inf_min=(3,), k_inf_max=(2,))


def test_scenario_and_regime_need_nonempty_intervals():
    with pytest.raises(ContractError):
        Scenario(k0=5, kf=5, stype=ScenarioType.CRS)
    with pytest.raises(ContractError):
        Regime(k0=5, kf=4, rtype=RegimeType.B)


def test_scenario_serialization_round_trip():
    s = Scenario(k0=3, kf=9, stype=ScenarioType.BSNA)
    assert scenario_from_dict(scenario_to_dict(s)) == s


def test_cover_property_checker():
    good = [Scenario(0, 5, ScenarioType.CRS), Scenario(5, 9, ScenarioType.CRP)]
    check_cover(good, 9)
    with pytest.raises(ContractError):
        check_cover(good, 10)
    with pytest.raises(ContractError):
        check_cover([Scenario(0, 4, ScenarioType.CRS),
                     Scenario(5, 9, ScenarioType.CRP)], 9)
