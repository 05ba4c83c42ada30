"""Roadside-unit placement over vehicle/intersection contact matrices.

Contact between a vehicle and a site is judged per snapshot from the
vehicle's window position, with the same closed-radius rule as V2V links.
The temporal matrix adds one interval per snapshot in contact; the
aggregated matrix first collapses snapshots into aggregation windows and
adds one interval per window with any contact.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from ._util import natural_key
from .errors import ParameterError, TraceParseError
from .trace import Trace

DEFAULT_WINDOW = 320.0


@dataclass(frozen=True)
class Site:
    site_id: str
    x: float
    y: float


@dataclass(frozen=True)
class SiteSet:
    sites: tuple[Site, ...]
    radius: float
    source: str = "file"

    def __post_init__(self):
        if not self.sites:
            raise ParameterError("site set is empty")
        if not self.radius > 0:
            raise ParameterError("site radius must be positive")
        ids = [s.site_id for s in self.sites]
        if len(set(ids)) != len(ids):
            dup = sorted({i for i in ids if ids.count(i) > 1}, key=natural_key)
            raise ParameterError(f"duplicate site ids: {dup}")

    @property
    def I(self) -> int:
        return len(self.sites)

    @property
    def ids(self) -> list[str]:
        return [s.site_id for s in self.sites]

    def coords(self) -> np.ndarray:
        return np.array([(s.x, s.y) for s in self.sites], dtype=float)

    def index(self, site_id) -> int:
        for i, s in enumerate(self.sites):
            if s.site_id == site_id:
                return i
        raise ParameterError(f"unknown site id {site_id!r}")

    def subset(self, site_ids) -> "SiteSet":
        return SiteSet(tuple(self.sites[self.index(i)] for i in site_ids), self.radius, self.source)


def load_sites(data: bytes, radius: float) -> SiteSet:
    """Parse a ``site_id,x,y`` CSV."""
    text = data.decode("utf-8-sig") if isinstance(data, bytes) else data
    reader = csv.reader(io.StringIO(text, newline=""))
    header = [h.strip() for h in next(reader, [])]
    if header[:3] != ["site_id", "x", "y"]:
        raise TraceParseError("sites header must be 'site_id,x,y'", line=1)
    sites = []
    for row in reader:
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) < 3:
            raise TraceParseError("expected site_id,x,y", line=reader.line_num)
        try:
            x, y = float(row[1]), float(row[2])
        except ValueError:
            raise TraceParseError("bad site coordinate", line=reader.line_num) from None
        if not (math.isfinite(x) and math.isfinite(y)):
            raise TraceParseError("non-finite site coordinate", line=reader.line_num)
        sites.append(Site(row[0].strip(), x, y))
    return SiteSet(tuple(sites), radius, "file")


def grid_sites(trace: Trace, spacing: float, radius: float) -> SiteSet:
    """Candidate sites at the centres of a ``spacing`` grid over the trace bounding box."""
    if not spacing > 0:
        raise ParameterError("grid spacing must be positive")
    xmin, ymin, xmax, ymax = trace.bounds()
    cols = max(1, math.ceil((xmax - xmin) / spacing))
    rows = max(1, math.ceil((ymax - ymin) / spacing))
    sites = tuple(Site(f"g{r}_{c}", xmin + (c + 0.5) * spacing, ymin + (r + 0.5) * spacing)
                  for r in range(rows) for c in range(cols))
    return SiteSet(sites, radius, "grid-generated")


def write_sites(sites: SiteSet) -> bytes:
    out = io.StringIO(newline="")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(("site_id", "x", "y"))
    for s in sites.sites:
        w.writerow((s.site_id, repr(s.x), repr(s.y)))
    return out.getvalue().encode()


def contact_snapshots(trace: Trace, sites: SiteSet):
    """Per snapshot, the ``(site, vehicle)`` index pairs in contact as an ``(k, 2)`` array."""
    tree = cKDTree(sites.coords())
    out = []
    for ids, xy in trace.window_positions():
        pairs = []
        if len(ids):
            for j, hits in zip(ids, tree.query_ball_point(xy, sites.radius)):
                pairs.extend((i, int(j)) for i in hits)
        out.append(np.array(sorted(pairs), dtype=np.int64).reshape(-1, 2))
    return out


@dataclass(frozen=True)
class ContactMatrix:
    model: str
    entries: np.ndarray          # sites x vehicles, seconds
    site_ids: tuple[str, ...]
    vehicle_ids: tuple[str, ...]
    tau_unit: float
    window: float | None = None

    def to_triplets(self) -> bytes:
        out = io.StringIO(newline="")
        w = csv.writer(out, lineterminator="\n")
        w.writerow(("site_id", "vehicle_id", "seconds"))
        for i, j in zip(*np.nonzero(self.entries)):
            w.writerow((self.site_ids[i], self.vehicle_ids[j], repr(float(self.entries[i, j]))))
        return out.getvalue().encode()


def contact_matrix_temporal(trace: Trace, sites: SiteSet) -> ContactMatrix:
    counts = np.zeros((sites.I, trace.n_vehicles), dtype=np.int64)
    for pairs in contact_snapshots(trace, sites):
        if len(pairs):
            np.add.at(counts, (pairs[:, 0], pairs[:, 1]), 1)
    delta = trace.spec.interval
    return ContactMatrix("temporal", counts * delta, tuple(sites.ids), tuple(trace.vehicle_ids), delta)


def window_snapshots(window: float, interval: float) -> int:
    ratio = window / interval
    w = round(ratio)
    if w < 1 or not math.isclose(ratio, w, rel_tol=0, abs_tol=1e-9):
        raise ParameterError(f"window {window} is not a positive multiple of the interval {interval}")
    return w


def contact_matrix_aggregated(trace: Trace, sites: SiteSet,
                              window: float = DEFAULT_WINDOW) -> ContactMatrix:
    w = window_snapshots(window, trace.spec.interval)
    counts = np.zeros((sites.I, trace.n_vehicles), dtype=np.int64)
    snaps = contact_snapshots(trace, sites)
    for start in range(0, len(snaps), w):
        group = [p for p in snaps[start:start + w] if len(p)]
        if group:
            pairs = np.unique(np.concatenate(group), axis=0)
            counts[pairs[:, 0], pairs[:, 1]] += 1
    delta = trace.spec.interval
    return ContactMatrix("aggregated", counts * delta, tuple(sites.ids),
                         tuple(trace.vehicle_ids), delta, float(window))


@dataclass(frozen=True)
class Placement:
    selected: tuple[str, ...]
    t_j: np.ndarray
    tau: float | None
    k: int
    model: str = "temporal"
    strategy: str = "greedy"
    window: float | None = None
    gains: tuple[float, ...] = ()
    scores: dict = field(default_factory=dict)

    @property
    def n_vehicles(self) -> int:
        return int(self.t_j.size)

    @property
    def covered_count(self) -> int:
        if self.tau is None:
            return 0
        return int(np.count_nonzero(self.t_j >= self.tau))

    @property
    def total_covered_time(self) -> float:
        return float(self.t_j.sum())

    @property
    def coverage(self) -> float:
        return self.covered_count / self.n_vehicles if self.n_vehicles else 0.0

    def to_dict(self, bins: int = 10) -> dict:
        d = {
            "selected": list(self.selected),
            "strategy": self.strategy,
            "parameters": {"k": self.k, "tau": self.tau, "model": self.model, "window": self.window},
            "n_vehicles": self.n_vehicles,
            "covered_count": self.covered_count,
            "coverage_percent": 100.0 * self.coverage,
            "total_covered_time": self.total_covered_time,
            "gains": list(self.gains),
        }
        if self.tau is not None:
            counts, edges = np.histogram(self.t_j, bins=bins, range=(0.0, self.tau))
            d["t_j_histogram"] = {"edges": [float(e) for e in edges], "counts": [int(c) for c in counts]}
        if self.scores:
            d["scores"] = self.scores
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _check_k_tau(k, tau):
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise ParameterError("k must be an integer >= 1")
    if not tau > 0:
        raise ParameterError("tau must be positive")


def mcttp_greedy(tm: ContactMatrix, k: int, tau: float) -> Placement:
    """Greedy maximum coverage with time threshold.

    Each step takes the remaining site with the largest capped gain
    ``sum_j min(tau - t_j, T_ij)``; equal gains go to the lowest site id.
    Selection stops after ``k`` sites, when no candidates remain, or when no
    candidate adds coverage time.
    """
    _check_k_tau(k, tau)
    entries = np.asarray(tm.entries, dtype=float)
    t = np.zeros(entries.shape[1], dtype=float)
    rank = {i: r for r, i in enumerate(sorted(range(len(tm.site_ids)),
                                               key=lambda i: natural_key(tm.site_ids[i])))}
    remaining = set(range(len(tm.site_ids)))
    selected, gains = [], []
    while len(selected) < k and remaining:
        need = tau - t
        best, best_gain = None, 0.0
        for i in sorted(remaining, key=rank.__getitem__):
            gain = float(np.minimum(need, entries[i]).sum())
            if gain > best_gain:
                best, best_gain = i, gain
        if best is None:
            break
        remaining.discard(best)
        selected.append(tm.site_ids[best])
        gains.append(best_gain)
        t = np.minimum(tau, t + entries[best])
    return Placement(tuple(selected), t, float(tau), int(k), tm.model, "greedy", tm.window, tuple(gains))


def evaluate_coverage(trace: Trace, sites: SiteSet, selected, tau: float) -> Placement:
    """Replay the trace and accumulate each vehicle's contact time with the selected sites.

    Contact times with different sites add up, as in the coverage objective;
    each vehicle's total is capped at ``tau``.
    """
    if not tau > 0:
        raise ParameterError("tau must be positive")
    selected = tuple(selected)
    if len(set(selected)) != len(selected):
        raise ParameterError("selected sites must be distinct")
    if not selected:
        return Placement((), np.zeros(trace.n_vehicles), float(tau), 0, "temporal", "evaluation")
    chosen = sites.subset(selected)
    counts = np.zeros(trace.n_vehicles, dtype=np.int64)
    for pairs in contact_snapshots(trace, chosen):
        if len(pairs):
            np.add.at(counts, pairs[:, 1], 1)
    t = np.minimum(float(tau), counts * trace.spec.interval)
    return Placement(selected, t, float(tau), len(selected), "temporal", "evaluation")


def site_scores(trace: Trace, sites: SiteSet, values) -> np.ndarray:
    """Mean per-vehicle value over every vehicle-snapshot within each site's radius.

    Sites never visited score 0.
    """
    values = np.asarray(values, dtype=float)
    total = np.zeros(sites.I)
    members = np.zeros(sites.I, dtype=np.int64)
    for pairs in contact_snapshots(trace, sites):
        if len(pairs):
            np.add.at(total, pairs[:, 0], values[pairs[:, 1]])
            np.add.at(members, pairs[:, 0], 1)
    out = np.zeros(sites.I)
    np.divide(total, members, out=out, where=members > 0)
    return out


def ranked_placement(report, trace: Trace, sites: SiteSet, k: int,
                     measure: str = "betweenness", normalized: bool = True) -> Placement:
    """Top-``k`` sites by the centrality of the vehicles seen there.

    Ties go to the lowest site id. Coverage fields are left empty; pass the
    selection to :func:`evaluate_coverage`.
    """
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise ParameterError("k must be an integer >= 1")
    vals = report.normalized(measure) if normalized else report.raw(measure)
    if len(vals) != trace.n_vehicles:
        raise ParameterError("report and trace describe different vehicle sets")
    scores = site_scores(trace, sites, vals)
    order = sorted(range(sites.I), key=lambda i: (-scores[i], natural_key(sites.sites[i].site_id)))
    chosen = tuple(sites.sites[i].site_id for i in order[:k])
    return Placement(chosen, np.zeros(trace.n_vehicles), None, int(k), report.model, "ranked",
                     scores={sites.sites[i].site_id: float(scores[i]) for i in order})
