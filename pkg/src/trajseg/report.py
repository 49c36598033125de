"""Figure-data exports: plot-ready CSV summaries of the analyzed corpus.

Single-series families use the header ``bin_lo,bin_hi,n,median,q1,q3,
wlo,whi``; multi-series families (scenario/risk composition, regimes,
aggressiveness) prepend ``series`` and ``key`` columns naming the group
and the binned field. The turning envelope exports its selected
percentile points and fit parameters instead of box rows.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .config import PipelineConfig
from .errors import EmptySampleError, UnderdeterminedFitError
from .model import RiskLevel, ScenarioType
from .stats import Binning, bin_and_summarize, fit_turning_envelope

BOX_HEADER = ("bin_lo", "bin_hi", "n", "median", "q1", "q3", "wlo", "whi")


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow(row)


def _box_rows(records, key, value, width):
    try:
        summary = bin_and_summarize(records, key, value, Binning(key, width))
    except EmptySampleError:
        return []
    rows = []
    for r in summary.to_rows():
        rows.append([r["bin_lo"], r["bin_hi"], r["n"], r["median"],
                     r["q1"], r["q3"], r["wlo"], r["whi"]])
    return rows


def _single_series(path, records, key, value, width):
    _write_csv(path, BOX_HEADER, _box_rows(records, key, value, width))


def _multi_series(path, groups, width):
    """groups: iterable of (series, key, records, value)."""
    rows = []
    for series, key, records, value in groups:
        for row in _box_rows(records, key, value, width):
            rows.append([series, key] + row)
    _write_csv(path, ("series", "key") + BOX_HEADER, rows)


def _fraction_records(metrics, field_name, labels):
    out = {label: [] for label in labels}
    for m in metrics:
        fractions = m.get(field_name) or {}
        for label in labels:
            out[label].append({"avg_speed_mps": m["avg_speed_mps"],
                               "fraction": fractions.get(label, 0.0)})
    return out


def write_figure_data(metrics, scenario_params, regime_params, out_dir,
                      config: PipelineConfig | None = None) -> dict:
    """Emit every figure family into ``out_dir``; returns a manifest."""
    config = config or PipelineConfig()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    width = config.bin_width_mps
    manifest = {"families": []}

    def done(name):
        manifest["families"].append(name)

    _single_series(out / "fig_trip_distance.csv", metrics,
                   "avg_speed_mps", "distance_km", width)
    done("fig_trip_distance")
    _single_series(out / "fig_braking_event_density.csv", metrics,
                   "avg_speed_mps", "braking_event_density_per_km", width)
    done("fig_braking_event_density")
    _single_series(out / "fig_cutin_density.csv", metrics,
                   "avg_speed_mps", "cutin_density_per_km", width)
    done("fig_cutin_density")

    scen_fracs = _fraction_records(metrics, "scenario_distance_fractions",
                                   [s.value for s in ScenarioType])
    _multi_series(out / "fig_scenario_distance_fractions.csv",
                  [(label, "avg_speed_mps", recs, "fraction")
                   for label, recs in scen_fracs.items()], width)
    done("fig_scenario_distance_fractions")

    risk_fracs = _fraction_records(metrics, "risk_distance_fractions",
                                   [r.value for r in RiskLevel])
    _multi_series(out / "fig_risk_distance_fractions.csv",
                  [(label, "avg_speed_mps", recs, "fraction")
                   for label, recs in risk_fracs.items()], width)
    done("fig_risk_distance_fractions")

    by_type = {}
    for r in regime_params:
        by_type.setdefault(r["type"], []).append(r)
    regime_key = {"Cst": "v0", "B": "v0", "A": "vf"}
    _multi_series(out / "fig_regime_distance.csv",
                  [(t, regime_key[t], rows, "distance_m")
                   for t, rows in sorted(by_type.items())], width)
    done("fig_regime_distance")
    _multi_series(out / "fig_regime_time.csv",
                  [(t, regime_key[t], rows, "duration_s")
                   for t, rows in sorted(by_type.items())], width)
    done("fig_regime_time")
    # aggressiveness keyed by the low-speed end of the regime
    agg_key = {"Cst": "vf", "B": "vf", "A": "v0"}
    _multi_series(out / "fig_aggressiveness.csv",
                  [(t, agg_key[t], rows, "aggressiveness")
                   for t, rows in sorted(by_type.items()) if t in ("A", "B")],
                  width)
    done("fig_aggressiveness")

    _single_series(out / "fig_approaching_speed.csv", scenario_params,
                   "trip_avg_speed_mps", "approaching_speed_mps", width)
    done("fig_approaching_speed")
    _single_series(out / "fig_perceivable_distance.csv", scenario_params,
                   "approaching_speed_mps", "perceivable_distance_m", width)
    done("fig_perceivable_distance")
    turning = [r for r in scenario_params if r.get("is_turning")]
    _single_series(out / "fig_event_curvature.csv", turning,
                   "approaching_speed_mps", "max_curvature_per_m", width)
    done("fig_event_curvature")

    manifest["turning_envelope"] = _envelope_export(turning, out, config)
    manifest["initiation_rates"] = _initiation_rates(
        scenario_params, regime_params, out)
    with open(out / "report_manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def _envelope_export(turning, out: Path, config: PipelineConfig):
    pairs = [(r["max_curvature_per_m"], r["turning_speed_mps"])
             for r in turning
             if r.get("max_curvature_per_m") is not None
             and r.get("turning_speed_mps") is not None]
    status = {"n_points": len(pairs)}
    try:
        fit = fit_turning_envelope(
            [p[0] for p in pairs], [p[1] for p in pairs],
            percentile=config.envelope_percentile,
            min_points=config.envelope_min_points,
            min_bins=config.envelope_min_bins)
    except UnderdeterminedFitError as e:
        status["error"] = str(e)
        _write_csv(out / "fig_turning_envelope.csv",
                   ("bin_lo", "bin_hi", "selected_speed", "fitted_speed"), [])
        with open(out / "envelope.json", "w") as fh:
            json.dump(status, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return status
    rows = []
    for i, (k, v) in enumerate(zip(fit.selected_curvature, fit.selected_speed)):
        rows.append([k, k, v, v - fit.residuals[i]])
    _write_csv(out / "fig_turning_envelope.csv",
               ("curvature", "curvature_med", "selected_speed", "fitted_speed"),
               rows)
    status.update({"c0": fit.c0, "v_cap": fit.v_cap,
                   "residual_rms": float(sum(r * r for r in fit.residuals)
                                         / max(len(fit.residuals), 1)) ** 0.5})
    with open(out / "envelope.json", "w") as fh:
        json.dump(status, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return status


def _initiation_rates(scenario_params, regime_params, out: Path):
    totals = {}
    for r in scenario_params:
        totals[r["type"]] = totals.get(r["type"], 0) + 1
    with_cst = {}
    seen = set()
    for r in regime_params:
        if r["type"] != "Cst":
            continue
        key = (r["trip_id"], r["scenario_index"])
        if key in seen:
            continue
        seen.add(key)
        st = r.get("scenario_type")
        with_cst[st] = with_cst.get(st, 0) + 1
    rates = {t: with_cst.get(t, 0) / n for t, n in sorted(totals.items())}
    payload = {"rates": rates, "scenario_counts": totals,
               "coasting_counts": with_cst}
    with open(out / "initiation_rates.json", "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return payload
