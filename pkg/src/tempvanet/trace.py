"""Trace ingestion and proximity-graph construction.

A trace is a set of timestamped vehicle positions. Time is cut into
half-open windows ``[t_start + k*interval, t_start + (k+1)*interval)``; the
last sample of a vehicle inside a window is its position for that snapshot,
and two vehicles are linked when they are at most ``radius`` metres apart.
"""
from __future__ import annotations

import csv
import io
import math
import xml.parsers.expat
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from ._util import natural_key, snapshot_count
from .errors import EmptyTraceError, ParameterError, SchemaError, TraceParseError
from .graph import SnapshotGraph, TemporalGraph

CSV_HEADER = ("vehicle_id", "t", "x", "y")


@dataclass(frozen=True, order=True)
class TraceRecord:
    vehicle_id: str
    t: float
    x: float
    y: float


@dataclass(frozen=True)
class SnapshotSpec:
    t_start: float
    t_end: float
    interval: float
    radius: float = 100.0

    def __post_init__(self):
        for name in ("t_start", "t_end", "interval", "radius"):
            if not math.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite")
        if self.t_end <= self.t_start:
            raise ParameterError("t_end must be greater than t_start")
        if self.interval <= 0:
            raise ParameterError("interval must be positive")
        if self.radius <= 0:
            raise ParameterError("radius must be positive")

    @property
    def n_snapshots(self) -> int:
        return snapshot_count(self.t_start, self.t_end, self.interval)

    def window_index(self, t):
        """Snapshot (0-based) containing time ``t``; works on scalars and arrays.

        Times within 1e-9 windows of a boundary belong to the later window, so
        ``0.3`` with a ``0.1`` interval starts window 3.
        """
        t = np.asarray(t, dtype=float)
        return np.floor((t - self.t_start) / self.interval + 1e-9).astype(np.int64)


@dataclass(frozen=True)
class Trace:
    records: tuple[TraceRecord, ...]
    spec: SnapshotSpec
    vehicle_index: dict[str, int]
    dropped: int = 0
    _arrays: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    @property
    def n_vehicles(self) -> int:
        return len(self.vehicle_index)

    @property
    def vehicle_ids(self) -> list[str]:
        ids = [""] * len(self.vehicle_index)
        for vid, i in self.vehicle_index.items():
            ids[i] = vid
        return ids

    def bounds(self):
        """(xmin, ymin, xmax, ymax) over all records."""
        xs = [r.x for r in self.records]
        ys = [r.y for r in self.records]
        return min(xs), min(ys), max(xs), max(ys)

    def window_positions(self):
        """Per-snapshot vehicle positions.

        Returns a list of length ``spec.n_snapshots``; entry k is a pair
        ``(ids, xy)`` with ``ids`` the ascending dense ids present in window k
        and ``xy`` their ``(len(ids), 2)`` coordinates.
        """
        if "windows" in self._arrays:
            return self._arrays["windows"]
        T = self.spec.n_snapshots
        ids = np.fromiter((self.vehicle_index[r.vehicle_id] for r in self.records),
                          dtype=np.int64, count=len(self.records))
        ts = np.fromiter((r.t for r in self.records), dtype=float, count=len(self.records))
        xy = np.array([(r.x, r.y) for r in self.records], dtype=float).reshape(-1, 2)
        ks = self.spec.window_index(ts)
        # records are sorted by (vehicle, t): the last row of each (k, id) group wins
        order = np.lexsort((np.arange(len(ks)), ids, ks))
        ks, ids, xy = ks[order], ids[order], xy[order]
        last = np.ones(len(ks), dtype=bool)
        last[:-1] = (ks[1:] != ks[:-1]) | (ids[1:] != ids[:-1])
        ks, ids, xy = ks[last], ids[last], xy[last]
        bounds = np.searchsorted(ks, np.arange(T + 1))
        windows = [(ids[bounds[k]:bounds[k + 1]], xy[bounds[k]:bounds[k + 1]]) for k in range(T)]
        self._arrays["windows"] = windows
        return windows


def _build_trace(rows, spec: SnapshotSpec) -> Trace:
    latest = {}
    for vid, t, x, y in rows:
        latest[(vid, t)] = (x, y)
    kept = []
    dropped = 0
    for (vid, t), (x, y) in latest.items():
        if spec.t_start <= t < spec.t_end:
            kept.append(TraceRecord(vid, t, x, y))
        else:
            dropped += 1
    if not kept:
        raise EmptyTraceError("no trace records inside the snapshot window")
    kept.sort(key=lambda r: (natural_key(r.vehicle_id), r.vehicle_id, r.t))
    index = {}
    for r in kept:
        index.setdefault(r.vehicle_id, len(index))
    return Trace(tuple(kept), spec, index, dropped)


def _number(text, name, line=None, offset=None):
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise TraceParseError(f"bad value for {name}: {text!r}", line=line, offset=offset) from None
    if not math.isfinite(value):
        raise TraceParseError(f"non-finite {name}: {text!r}", line=line, offset=offset)
    if name == "t" and value < 0:
        raise TraceParseError(f"negative timestamp {text!r}", line=line, offset=offset)
    return value


def _csv_rows(data: bytes):
    text = data.decode("utf-8-sig") if isinstance(data, bytes) else data
    reader = csv.reader(io.StringIO(text, newline=""))
    header = next(reader, None)
    if header is None:
        raise EmptyTraceError("empty trace file")
    header = [h.strip() for h in header]
    for col in CSV_HEADER:
        if col not in header:
            raise SchemaError(col, line=1)
    cols = [header.index(c) for c in CSV_HEADER]
    rows = []
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise TraceParseError(f"expected {len(header)} fields, got {len(row)}", line=line)
        vid = row[cols[0]].strip()
        if not vid:
            raise TraceParseError("empty vehicle_id", line=line)
        rows.append((vid, *(_number(row[c].strip(), n, line=line) for c, n in zip(cols[1:], "txy"))))
    if not rows:
        raise EmptyTraceError("trace has a header but no records")
    return rows


def parse_csv(data: bytes, spec: SnapshotSpec) -> Trace:
    """Parse a ``vehicle_id,t,x,y`` CSV trace."""
    return _build_trace(_csv_rows(data), spec)


def _fcd_rows(data: bytes):
    parser = xml.parsers.expat.ParserCreate()
    rows = []
    state = {"time": None}

    def start(tag, attrs):
        if tag == "timestep":
            if "time" not in attrs:
                raise SchemaError("time", offset=parser.CurrentByteIndex)
            state["time"] = _number(attrs["time"], "t", offset=parser.CurrentByteIndex)
        elif tag == "vehicle":
            if state["time"] is None:
                raise TraceParseError("<vehicle> outside <timestep>", offset=parser.CurrentByteIndex)
            for name in ("id", "x", "y"):
                if name not in attrs:
                    raise SchemaError(name, offset=parser.CurrentByteIndex)
            off = parser.CurrentByteIndex
            rows.append((attrs["id"], state["time"], _number(attrs["x"], "x", offset=off),
                         _number(attrs["y"], "y", offset=off)))

    def end(tag):
        if tag == "timestep":
            state["time"] = None

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    try:
        parser.Parse(data, True)
    except xml.parsers.expat.ExpatError as exc:
        raise TraceParseError(f"malformed XML: {xml.parsers.expat.ErrorString(exc.code)}",
                              offset=parser.ErrorByteIndex) from None
    if not rows:
        raise EmptyTraceError("FCD file has no vehicle samples")
    return rows


def parse_fcd_xml(data: bytes, spec: SnapshotSpec) -> Trace:
    """Parse SUMO floating-car-data output (``<timestep>``/``<vehicle>``)."""
    return _build_trace(_fcd_rows(data), spec)


def read_rows(path):
    """Raw ``(vehicle_id, t, x, y)`` rows from a CSV or FCD XML file."""
    path = Path(path)
    data = path.read_bytes()
    if path.suffix.lower() == ".xml" or data.lstrip()[:1] == b"<":
        return _fcd_rows(data)
    return _csv_rows(data)


def read_trace(path, spec: SnapshotSpec | None = None, *, interval=None, radius=100.0) -> Trace:
    """Load a trace file, inferring the time window from the data if ``spec`` is None.

    The inferred window starts at the earliest timestamp and ends one
    ``interval`` after the latest so that every record is kept.
    """
    rows = read_rows(path)
    if spec is None:
        if interval is None:
            raise ParameterError("interval is required when the time window is inferred")
        ts = [r[1] for r in rows]
        spec = SnapshotSpec(min(ts), max(ts) + interval, interval, radius)
    return _build_trace(rows, spec)


def format_float(value: float) -> str:
    return repr(float(value))


def write_csv(trace: Trace) -> bytes:
    out = io.StringIO(newline="")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in trace.records:
        w.writerow((r.vehicle_id, format_float(r.t), format_float(r.x), format_float(r.y)))
    return out.getvalue().encode("utf-8")


def snapshot_graphs(trace: Trace) -> TemporalGraph:
    """Unit-disk proximity graph per snapshot window (distance <= radius)."""
    n = trace.n_vehicles
    snaps = []
    for k, (ids, xy) in enumerate(trace.window_positions()):
        edges = set()
        if len(ids) > 1:
            for a, b in cKDTree(xy).query_pairs(trace.spec.radius):
                u, v = int(ids[a]), int(ids[b])
                edges.add((u, v) if u < v else (v, u))
        snaps.append(SnapshotGraph(n, frozenset(edges), k + 1))
    return TemporalGraph(n, tuple(snaps), tuple(trace.vehicle_ids))
