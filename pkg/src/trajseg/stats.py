"""Figure-style aggregation: boxplot summaries, speed binning, envelope fit.

Quartiles interpolate linearly between order statistics; whiskers follow
the Tukey convention (most extreme points within 1.5 IQR of the
quartiles). Binned aggregation keeps exact value vectors up to a size
limit per cell and degrades to seeded reservoir sampling beyond it, so
desk-scale results are exact and full-scale memory stays bounded.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import EmptySampleError, SchemaError, UnderdeterminedFitError


@dataclass(frozen=True)
class BoxSummary:
    n: int
    median: float
    q1: float
    q3: float
    whisker_low: float
    whisker_high: float

    def __post_init__(self):
        ordered = (self.whisker_low <= self.q1 <= self.median
                   <= self.q3 <= self.whisker_high)
        if not ordered or self.n < 1:
            raise ValueError("malformed box summary")

    def to_dict(self) -> dict:
        return {"n": self.n, "median": self.median, "q1": self.q1,
                "q3": self.q3, "wlo": self.whisker_low,
                "whi": self.whisker_high}


def box_summary(values) -> BoxSummary:
    """Boxplot statistics of a value vector."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise EmptySampleError("box summary of an empty sample")
    q1, med, q3 = np.percentile(arr, [25.0, 50.0, 75.0])
    iqr = q3 - q1
    lo_fence = q1 - 1.5 * iqr
    hi_fence = q3 + 1.5 * iqr
    return BoxSummary(
        n=int(arr.size), median=float(med), q1=float(q1), q3=float(q3),
        whisker_low=float(np.min(arr[arr >= lo_fence])),
        whisker_high=float(np.max(arr[arr <= hi_fence])))


@dataclass(frozen=True)
class Binning:
    """Equal-width binning of a record key (speeds default to 5 m/s bins)."""

    key: str
    width: float = 5.0
    edges: Optional[tuple] = None

    def resolve_edges(self, values) -> np.ndarray:
        if self.edges is not None:
            return np.asarray(self.edges, dtype=float)
        lo = np.floor(np.min(values) / self.width) * self.width
        hi = np.max(values)
        n = max(1, int(np.ceil((hi - lo) / self.width + 1e-12)))
        if lo + n * self.width <= hi:
            n += 1
        return lo + self.width * np.arange(n + 1)


@dataclass(frozen=True)
class BinnedSummaries:
    key: str
    edges: tuple
    bins: tuple          # (lo, hi, BoxSummary) per non-empty bin
    empty_bins: tuple    # (lo, hi) listed for metadata

    def to_rows(self):
        for lo, hi, box in self.bins:
            row = {"bin_lo": lo, "bin_hi": hi}
            row.update(box.to_dict())
            yield row


def bin_and_summarize(records, key: str, value: str,
                      binning: Binning | None = None) -> BinnedSummaries:
    """One box summary per non-empty bin of ``key``, summarizing ``value``.

    Records missing the value (None/NaN) are skipped; unknown field
    names raise a schema error.
    """
    records = list(records)
    binning = binning or Binning(key=key)
    for r in records[:1]:
        for name in (key, value):
            if name not in r:
                raise SchemaError(f"records lack field {name!r}")
    pairs = []
    for r in records:
        try:
            k, x = r[key], r[value]
        except KeyError as e:
            raise SchemaError(f"record lacks field {e.args[0]!r}")
        if k is None or x is None:
            continue
        k, x = float(k), float(x)
        if np.isnan(k) or np.isnan(x):
            continue
        pairs.append((k, x))
    if not pairs:
        raise EmptySampleError(f"no records carry both {key!r} and {value!r}")
    keys = np.array([p[0] for p in pairs])
    vals = np.array([p[1] for p in pairs])
    edges = binning.resolve_edges(keys)
    which = np.clip(np.searchsorted(edges, keys, side="right") - 1,
                    0, len(edges) - 2)
    bins, empty = [], []
    for b in range(len(edges) - 1):
        lo, hi = float(edges[b]), float(edges[b + 1])
        sel = vals[which == b]
        if sel.size:
            bins.append((lo, hi, box_summary(sel)))
        else:
            empty.append((lo, hi))
    return BinnedSummaries(key=key, edges=tuple(float(e) for e in edges),
                           bins=tuple(bins), empty_bins=tuple(empty))


class ValuePool:
    """Value accumulator: exact up to a limit, then seeded reservoir sampling.

    Merging two exact pools whose union fits the limit is exact, so
    shard-merge aggregation reproduces single-pass results at desk
    scale; above the limit order statistics come from the reservoir.
    """

    def __init__(self, exact_limit: int = 1_000_000,
                 reservoir_size: int = 100_000, seed: int = 20_240_817):
        self.exact_limit = exact_limit
        self.reservoir_size = reservoir_size
        self.seed = seed
        self.count = 0
        self._chunks = []
        self._reservoir = None
        self._rng = np.random.default_rng(seed)

    @property
    def exact(self) -> bool:
        return self._reservoir is None

    def add_many(self, values) -> None:
        arr = np.asarray(values, dtype=float).ravel()
        if arr.size == 0:
            return
        if self.exact and self.count + arr.size <= self.exact_limit:
            self._chunks.append(arr.copy())
            self.count += arr.size
            return
        if self.exact:
            self._spill()
        for x in arr:
            self.count += 1
            if len(self._reservoir) < self.reservoir_size:
                self._reservoir.append(float(x))
            else:
                j = int(self._rng.integers(0, self.count))
                if j < self.reservoir_size:
                    self._reservoir[j] = float(x)

    def _spill(self):
        held = np.concatenate(self._chunks) if self._chunks else np.empty(0)
        self._chunks = []
        self._reservoir = []
        count = self.count
        self.count = 0
        self.add_many(held)
        assert self.count == count

    def merge(self, other: "ValuePool") -> "ValuePool":
        out = ValuePool(self.exact_limit, self.reservoir_size, self.seed)
        for pool in (self, other):
            out.add_many(pool.values())
            if not pool.exact:
                # sampled pools lose exact counts; carry them through
                out.count += pool.count - len(pool._reservoir)
                if out.exact and out.count > out.exact_limit:
                    out._spill()
        return out

    def values(self) -> np.ndarray:
        if self.exact:
            return (np.concatenate(self._chunks) if self._chunks
                    else np.empty(0))
        return np.asarray(self._reservoir)

    def summary(self) -> BoxSummary:
        return box_summary(self.values())


@dataclass(frozen=True)
class EnvelopeFit:
    """Clipped power-law speed envelope v(k) = min(c0 k^-1/2, v_cap)."""

    c0: float
    v_cap: float
    bin_edges: tuple
    selected_curvature: tuple
    selected_speed: tuple
    residuals: tuple

    def speed_at(self, curvature):
        k = np.asarray(curvature, dtype=float)
        return np.minimum(self.c0 / np.sqrt(k), self.v_cap)


def fit_turning_envelope(curvature, speed, percentile: float = 99.9,
                         min_points: int = 1000, min_bins: int = 5,
                         n_bins: int = 12, min_bin_count: int = 50) -> EnvelopeFit:
    """Fit the speed envelope under which the given share of data lies.

    Per log-spaced curvature bin, the ``percentile`` speed is selected;
    the clipped power law is then least-squares fit to the selected
    points by enumerating the cap/slope split (exact for this family).
    """
    k = np.asarray(curvature, dtype=float).ravel()
    v = np.asarray(speed, dtype=float).ravel()
    ok = np.isfinite(k) & np.isfinite(v) & (k > 0)
    k, v = k[ok], v[ok]
    if k.size < min_points:
        raise UnderdeterminedFitError(
            f"need at least {min_points} valid points, got {k.size}")
    lo, hi = np.min(k), np.max(k)
    if lo == hi:
        raise UnderdeterminedFitError(
            "all points share one curvature; envelope is underdetermined",
            deficient_bins=[(float(lo), float(hi))])
    edges = np.geomspace(lo, hi * (1 + 1e-12), n_bins + 1)
    which = np.clip(np.searchsorted(edges, k, side="right") - 1, 0, n_bins - 1)
    sel_k, sel_v, deficient = [], [], []
    for b in range(n_bins):
        mask = which == b
        count = int(np.sum(mask))
        if count < min_bin_count:
            deficient.append((float(edges[b]), float(edges[b + 1])))
            continue
        sel_k.append(float(np.median(k[mask])))
        sel_v.append(float(np.percentile(v[mask], percentile)))
    if len(sel_k) < min_bins:
        raise UnderdeterminedFitError(
            f"only {len(sel_k)} usable curvature bins, need {min_bins}",
            deficient_bins=deficient)
    sel_k = np.asarray(sel_k)
    sel_v = np.asarray(sel_v)

    # cap region is a low-curvature prefix; enumerate the split and solve
    # each side in closed form
    x = 1.0 / np.sqrt(sel_k)
    best = None
    m = len(sel_k)
    for j in range(0, m - 1):
        slope_v, slope_x = sel_v[j:], x[j:]
        c0 = float(np.dot(slope_v, slope_x) / np.dot(slope_x, slope_x))
        v_cap = float(np.mean(sel_v[:j])) if j else float(c0 / np.sqrt(sel_k[0]))
        pred = np.minimum(c0 * x, v_cap)
        sse = float(np.sum((sel_v - pred) ** 2))
        if best is None or sse < best[0]:
            best = (sse, c0, v_cap)
    _, c0, v_cap = best
    residuals = sel_v - np.minimum(c0 * x, v_cap)
    return EnvelopeFit(
        c0=c0, v_cap=v_cap, bin_edges=tuple(float(e) for e in edges),
        selected_curvature=tuple(float(q) for q in sel_k),
        selected_speed=tuple(float(q) for q in sel_v),
        residuals=tuple(float(r) for r in residuals))
