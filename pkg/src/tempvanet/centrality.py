"""Aggregated and temporal degree, closeness and betweenness.

Temporal paths are sequences of snapshot edges whose snapshot indices never
decrease; any number of hops may happen inside one snapshot and the length
of a path is its hop count. Closeness is harmonic (unreachable vertices add
0) and both closeness and betweenness are summed over the nested
sub-intervals ``[i, t_y]`` for ``i = t_x..t_y``.
"""
from __future__ import annotations

import os
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .graph import AggregatedGraph, TemporalGraph, aggregate

MEASURES = ("degree", "closeness", "betweenness")
MODELS = ("aggregated", "temporal")
BETWEENNESS_MODES = ("global", "per-vertex")


class MeasureValues(NamedTuple):
    raw: np.ndarray
    normalized: np.ndarray


@dataclass(frozen=True)
class TemporalPathSummary:
    source: int
    interval: tuple[int, int]
    dist: dict[int, int]
    sigma: dict[int, int]


@dataclass(frozen=True)
class NormalizationSpec:
    """Factors used to turn raw centralities into normalized ones.

    ``m`` is the number of sub-intervals evaluated (1 for the aggregated
    model). In ``per-vertex`` betweenness mode the factor is
    ``sv * dv * m`` for each vertex, held in ``betweenness_factors``.
    """

    n: int
    m: int = 1
    betweenness_mode: str = "global"
    betweenness_factors: tuple[float, ...] | None = None

    @property
    def closeness_factor(self) -> float:
        return float((self.n - 1) * self.m)

    @property
    def betweenness_factor(self) -> float:
        # unordered pairs, so the same scale as the static normalization
        return (self.n - 1) * (self.n - 2) / 2 * self.m

    def as_dict(self) -> dict:
        d = {"m": self.m, "closeness_factor": self.closeness_factor,
             "betweenness_mode": self.betweenness_mode, "degree_factor": None}
        if self.betweenness_mode == "global":
            d["betweenness_factor"] = self.betweenness_factor
        else:
            d["betweenness_factors"] = list(self.betweenness_factors)
        return d


def _divide(raw, factor):
    factor = np.broadcast_to(np.asarray(factor, dtype=float), raw.shape)
    out = np.zeros(raw.shape, dtype=float)
    np.divide(raw, factor, out=out, where=factor > 0)
    return out


# ---------------------------------------------------------------- static ---

def static_degree(g: AggregatedGraph) -> np.ndarray:
    return np.array([len(a) for a in g.neighbours], dtype=np.int64)


def static_closeness(g: AggregatedGraph) -> MeasureValues:
    """Harmonic closeness ``sum_u 1/d(v, u)``, normalized by ``n - 1``."""
    import networkx as nx

    h = nx.harmonic_centrality(g.to_networkx())
    raw = np.array([float(h[v]) for v in range(g.n)], dtype=float)
    return MeasureValues(raw, _divide(raw, g.n - 1))


def static_betweenness(g: AggregatedGraph) -> MeasureValues:
    """Shortest-path betweenness with each unordered pair counted once."""
    import networkx as nx

    b = nx.betweenness_centrality(g.to_networkx(), normalized=False)
    raw = np.array([float(b[v]) for v in range(g.n)], dtype=float)
    return MeasureValues(raw, _divide(raw, (g.n - 1) * (g.n - 2) / 2))


# -------------------------------------------------------------- temporal ---

def _explore(adj, source, start, stop):
    """Layered time-respecting BFS from ``source`` over snapshots start..stop (0-based).

    A state ``(v, t)`` means "at v, last edge taken in snapshot t". A state
    reached at hop level h is kept only if v was not reached at a lower level
    with a last snapshot <= t; otherwise any continuation could be spliced
    onto the shorter prefix, so it lies on no shortest path.

    Returns ``(levels, preds, dist, sigma)`` where ``levels[h]`` maps kept
    states to the number of distinct edge sequences reaching them and
    ``preds[h][state]`` lists predecessor states at level ``h - 1``.
    """
    reach = {source: start}
    dist = {source: 0}
    sigma = {source: 1}
    frontier = {(source, start): 1}
    levels = [frontier]
    preds = [{}]
    h = 0
    while frontier:
        h += 1
        counts = defaultdict(int)
        back = defaultdict(list)
        for state, c in frontier.items():
            v, t = state
            for t2 in range(t, stop + 1):
                for w in adj[t2][v]:
                    if reach.get(w, stop + 1) <= t2:
                        continue
                    counts[(w, t2)] += c
                    back[(w, t2)].append(state)
        if not counts:
            break
        new = {}
        for (w, t2), c in counts.items():
            if t2 < reach.get(w, stop + 1):
                reach[w] = t2
            if w not in dist:
                new[w] = new.get(w, 0) + c
        for w, c in new.items():
            dist[w] = h
            sigma[w] = c
        frontier = dict(counts)
        levels.append(frontier)
        preds.append(dict(back))
    return levels, preds, dist, sigma


def temporal_bfs(tg: TemporalGraph, source: int, interval: tuple[int, int]) -> TemporalPathSummary:
    """Hop distances and shortest-path counts from ``source`` within ``interval`` (1-based)."""
    i, t_y = interval
    tg.check_interval(i, t_y)
    if not 0 <= source < tg.n:
        raise IndexError(f"source {source} outside 0..{tg.n - 1}")
    _, _, dist, sigma = _explore(tg.adjacency, source, i - 1, t_y - 1)
    return TemporalPathSummary(source, (i, t_y), dist, sigma)


def _dependencies(levels, preds, dist, sigma, with_targets):
    """Brandes back-propagation over the state DAG of one exploration.

    Returns per-state dependencies and, if requested, per-state bitmasks of
    the targets whose shortest paths run through that state.
    """
    delta = defaultdict(float)
    targets = defaultdict(int) if with_targets else None
    for h in range(len(levels) - 1, 0, -1):
        below = levels[h - 1]
        for s, count in levels[h].items():
            w = s[0]
            terminal = dist[w] == h
            f = delta.get(s, 0.0) / count
            if terminal:
                f += 1.0 / sigma[w]
            if with_targets:
                mask = targets.get(s, 0) | ((1 << w) if terminal else 0)
            for p in preds[h][s]:
                delta[p] += below[p] * f
                if with_targets:
                    targets[p] |= mask
    return delta, targets


def _source_contribution(adj, n, source, t_x, t_y, with_targets):
    """Closeness of ``source`` and its betweenness partials over all sub-intervals."""
    closeness = 0.0
    between = np.zeros(n, dtype=float)
    through = 0          # bitmask of vertices interior to some path from source
    target_sets = {}     # vertex -> bitmask of targets reached through it
    for i in range(t_x, t_y + 1):
        levels, preds, dist, sigma = _explore(adj, source, i - 1, t_y - 1)
        closeness += sum(1.0 / d for d in dist.values() if d > 0)
        delta, targets = _dependencies(levels, preds, dist, sigma, with_targets)
        for s, d in delta.items():
            if s[0] != source:
                between[s[0]] += d
        if with_targets:
            for s, mask in targets.items():
                v = s[0]
                if v != source and mask:
                    through |= 1 << v
                    target_sets[v] = target_sets.get(v, 0) | mask
    return closeness, between, through, target_sets


_WORKER_STATE = {}


def _init_worker(adj, n, t_x, t_y, with_targets):
    _WORKER_STATE.update(adj=adj, n=n, t_x=t_x, t_y=t_y, with_targets=with_targets)


def _worker(source):
    s = _WORKER_STATE
    return _source_contribution(s["adj"], s["n"], source, s["t_x"], s["t_y"], s["with_targets"])


def _resolve_threads(threads):
    if threads is None or threads <= 0:
        return os.cpu_count() or 1
    return threads


def _all_sources(tg, t_x, t_y, threads, with_targets):
    threads = _resolve_threads(threads)
    adj = tg.adjacency
    if threads == 1 or tg.n < 2:
        return [_source_contribution(adj, tg.n, s, t_x, t_y, with_targets) for s in range(tg.n)]
    chunk = max(1, tg.n // (threads * 4))
    with ProcessPoolExecutor(threads, initializer=_init_worker,
                             initargs=(adj, tg.n, t_x, t_y, with_targets)) as pool:
        # map preserves source order, so the reduction below is order-stable
        return list(pool.map(_worker, range(tg.n), chunksize=chunk))


def temporal_degree(tg: TemporalGraph, interval: tuple[int, int] | None = None) -> np.ndarray:
    """Per-snapshot degrees summed over the interval."""
    t_x, t_y = interval or (1, tg.T)
    tg.check_interval(t_x, t_y)
    deg = np.zeros(tg.n, dtype=np.int64)
    for s in tg.snapshots[t_x - 1:t_y]:
        deg += np.array(s.degrees(), dtype=np.int64)
    return deg


@dataclass(frozen=True)
class _TemporalPaths:
    closeness: np.ndarray
    betweenness: np.ndarray
    sv: np.ndarray | None
    dv: np.ndarray | None


def _temporal_paths(tg, interval, threads=1, with_targets=False) -> _TemporalPaths:
    t_x, t_y = interval or (1, tg.T)
    tg.check_interval(t_x, t_y)
    parts = _all_sources(tg, t_x, t_y, threads, with_targets)
    close = np.array([p[0] for p in parts], dtype=float)
    between = np.zeros(tg.n, dtype=float)
    for p in parts:
        between += p[1]
    # each ordered pair is visited once from its source; halve for unordered pairs
    between *= 0.5
    sv = dv = None
    if with_targets:
        sv = np.zeros(tg.n, dtype=np.int64)
        dest = [0] * tg.n
        for p in parts:
            for v in range(tg.n):
                if p[2] >> v & 1:
                    sv[v] += 1
            for v, mask in p[3].items():
                dest[v] |= mask
        dv = np.array([bin(m).count("1") for m in dest], dtype=np.int64)
    return _TemporalPaths(close, between, sv, dv)


def temporal_closeness(tg: TemporalGraph, interval: tuple[int, int] | None = None,
                       threads: int = 1) -> MeasureValues:
    t_x, t_y = interval or (1, tg.T)
    raw = _temporal_paths(tg, (t_x, t_y), threads).closeness
    norm = NormalizationSpec(tg.n, t_y - t_x + 1)
    return MeasureValues(raw, _divide(raw, norm.closeness_factor))


def temporal_betweenness(tg: TemporalGraph, interval: tuple[int, int] | None = None,
                         threads: int = 1, mode: str = "global") -> MeasureValues:
    t_x, t_y = interval or (1, tg.T)
    if mode not in BETWEENNESS_MODES:
        raise ValueError(f"unknown betweenness normalization {mode!r}")
    paths = _temporal_paths(tg, (t_x, t_y), threads, with_targets=mode == "per-vertex")
    norm = _temporal_normalization(tg.n, t_y - t_x + 1, mode, paths)
    return MeasureValues(paths.betweenness, _betweenness_norm(paths.betweenness, norm))


def _temporal_normalization(n, m, mode, paths):
    if mode == "per-vertex":
        factors = tuple(float(s * d * m) for s, d in zip(paths.sv, paths.dv))
        return NormalizationSpec(n, m, mode, factors)
    return NormalizationSpec(n, m, mode)


def _betweenness_norm(raw, norm: NormalizationSpec):
    if norm.betweenness_mode == "per-vertex":
        return _divide(raw, np.array(norm.betweenness_factors))
    return _divide(raw, norm.betweenness_factor)


# --------------------------------------------------------------- reports ---

@dataclass(frozen=True)
class CentralityReport:
    model: str
    interval: tuple[int, int]
    normalization: NormalizationSpec
    labels: tuple[str, ...]
    values: dict[str, MeasureValues] = field(default_factory=dict)
    graph_digest: str = ""

    @property
    def n(self) -> int:
        return len(self.labels)

    def raw(self, measure: str) -> np.ndarray:
        return self.values[measure].raw

    def normalized(self, measure: str) -> np.ndarray:
        return self.values[measure].normalized

    def __getattr__(self, name):
        # degree_raw, closeness_norm, ... as attribute shorthands
        measure, _, kind = name.rpartition("_")
        values = self.__dict__.get("values", {})
        if measure in values and kind in ("raw", "norm"):
            vals = values[measure]
            return vals.raw if kind == "raw" else vals.normalized
        raise AttributeError(name)


def compute_report(tg: TemporalGraph, model: str, interval: tuple[int, int] | None = None,
                   measures=MEASURES, threads: int = 1,
                   betweenness_mode: str = "global") -> CentralityReport:
    """All requested measures for one model over ``interval`` (default: whole graph)."""
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}")
    unknown = set(measures) - set(MEASURES)
    if unknown:
        raise ValueError(f"unknown measures: {sorted(unknown)}")
    t_x, t_y = interval or (1, tg.T)
    tg.check_interval(t_x, t_y)
    values = {}
    if model == "aggregated":
        g = aggregate(tg, t_x, t_y)
        norm = NormalizationSpec(tg.n, 1, "global")
        if "degree" in measures:
            deg = static_degree(g).astype(float)
            values["degree"] = MeasureValues(deg, deg.copy())
        if "closeness" in measures:
            values["closeness"] = static_closeness(g)
        if "betweenness" in measures:
            values["betweenness"] = static_betweenness(g)
    else:
        m = t_y - t_x + 1
        norm = NormalizationSpec(tg.n, m, betweenness_mode)
        if "degree" in measures:
            deg = temporal_degree(tg, (t_x, t_y)).astype(float)
            values["degree"] = MeasureValues(deg, deg.copy())
        if "closeness" in measures or "betweenness" in measures:
            paths = _temporal_paths(tg, (t_x, t_y), threads,
                                    with_targets=betweenness_mode == "per-vertex")
            norm = _temporal_normalization(tg.n, m, betweenness_mode, paths)
            if "closeness" in measures:
                values["closeness"] = MeasureValues(paths.closeness,
                                                    _divide(paths.closeness, norm.closeness_factor))
            if "betweenness" in measures:
                values["betweenness"] = MeasureValues(paths.betweenness,
                                                      _betweenness_norm(paths.betweenness, norm))
    ordered = {k: values[k] for k in MEASURES if k in values}
    return CentralityReport(model, (t_x, t_y), norm, tuple(tg.labels), ordered, tg.digest())


def write_report(report: CentralityReport, directory, measure: str):
    """Write ``<model>_<measure>.csv`` plus its JSON metadata; returns both paths."""
    import csv
    import json
    from pathlib import Path

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    stem = f"{report.model}_{measure}"
    vals = report.values[measure]
    csv_path = directory / f"{stem}.csv"
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("vertex", "vehicle_id", "measure", "model", "raw", "normalized"))
        for v in range(report.n):
            w.writerow((v, report.labels[v], measure, report.model,
                        repr(float(vals.raw[v])), repr(float(vals.normalized[v]))))
    meta = {
        "model": report.model,
        "measure": measure,
        "interval": list(report.interval),
        "n": report.n,
        "normalization": report.normalization.as_dict(),
        "graph_sha256": report.graph_digest,
    }
    json_path = directory / f"{stem}.json"
    json_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return csv_path, json_path


def read_report_csv(path):
    """Load one exported report file as ``(labels, raw, normalized)``."""
    import csv

    labels, raw, norm = [], [], []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            labels.append(row["vehicle_id"])
            raw.append(float(row["raw"]))
            norm.append(float(row["normalized"]))
    if not labels:
        raise ValueError(f"{path}: report has no rows")
    return labels, np.array(raw), np.array(norm)
