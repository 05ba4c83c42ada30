"""Temporal and aggregated graph containers.

A temporal graph is a fixed vertex set ``0..n-1`` plus an ordered list of
snapshot edge sets. Snapshot indices are 1-based everywhere in the public
API; the aggregated graph is the union of the snapshot edge sets over an
inclusive index range.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import cached_property

from .errors import BoundsError, TraceParseError


def _canonical(edges, n):
    out = set()
    for u, v in edges:
        u, v = int(u), int(v)
        if u == v:
            raise ValueError(f"self-loop on vertex {u}")
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"edge ({u}, {v}) outside vertex range 0..{n - 1}")
        out.add((u, v) if u < v else (v, u))
    return frozenset(out)


def _neighbours(n, edges):
    nbrs = [[] for _ in range(n)]
    for u, v in edges:
        nbrs[u].append(v)
        nbrs[v].append(u)
    return tuple(tuple(sorted(a)) for a in nbrs)


@dataclass(frozen=True)
class SnapshotGraph:
    n: int
    edges: frozenset
    t_index: int = 1

    def __post_init__(self):
        object.__setattr__(self, "edges", _canonical(self.edges, self.n))

    @cached_property
    def neighbours(self) -> tuple[tuple[int, ...], ...]:
        return _neighbours(self.n, self.edges)

    def degrees(self) -> list[int]:
        return [len(a) for a in self.neighbours]


@dataclass(frozen=True)
class AggregatedGraph:
    n: int
    edges: frozenset
    source_interval: tuple[int, int] = (1, 1)

    def __post_init__(self):
        object.__setattr__(self, "edges", _canonical(self.edges, self.n))

    @cached_property
    def neighbours(self) -> tuple[tuple[int, ...], ...]:
        return _neighbours(self.n, self.edges)

    def to_networkx(self):
        import networkx as nx

        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(sorted(self.edges))
        return g


@dataclass(frozen=True)
class TemporalGraph:
    n: int
    snapshots: tuple[SnapshotGraph, ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.snapshots:
            raise ValueError("a temporal graph needs at least one snapshot")
        if any(s.n != self.n for s in self.snapshots):
            raise ValueError("all snapshots must share the vertex count")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(str(i) for i in range(self.n)))
        elif len(self.labels) != self.n:
            raise ValueError("labels must name every vertex")

    @classmethod
    def from_edge_lists(cls, n, edge_lists, labels=()):
        """Build from one iterable of ``(u, v)`` pairs per snapshot."""
        return cls(n, tuple(SnapshotGraph(n, frozenset(e), t + 1) for t, e in enumerate(edge_lists)),
                   tuple(labels))

    @property
    def T(self) -> int:
        return len(self.snapshots)

    @property
    def n_temporal_edges(self) -> int:
        return sum(len(s.edges) for s in self.snapshots)

    @cached_property
    def adjacency(self):
        """Neighbour tuples indexed ``[t - 1][v]``."""
        return tuple(s.neighbours for s in self.snapshots)

    def check_interval(self, t_x, t_y):
        if not (1 <= t_x <= t_y <= self.T):
            raise BoundsError(f"interval [{t_x}, {t_y}] outside 1..{self.T}")

    def digest(self) -> str:
        return hashlib.sha256(dumps(self).encode("ascii")).hexdigest()


def aggregate(tg: TemporalGraph, t_x: int | None = None, t_y: int | None = None) -> AggregatedGraph:
    """Union of snapshot edge sets over the inclusive range ``[t_x, t_y]``."""
    t_x = 1 if t_x is None else t_x
    t_y = tg.T if t_y is None else t_y
    tg.check_interval(t_x, t_y)
    edges = frozenset().union(*(tg.snapshots[t].edges for t in range(t_x - 1, t_y)))
    return AggregatedGraph(tg.n, edges, (t_x, t_y))


def counts(tg: TemporalGraph) -> dict:
    """Vertex and edge counts for the whole temporal graph."""
    per_snapshot = [len(s.edges) for s in tg.snapshots]
    active = [sum(1 for a in s.neighbours if a) for s in tg.snapshots]
    return {
        "n_vertices": tg.n,
        "n_snapshots": tg.T,
        "n_aggregated_edges": len(aggregate(tg).edges),
        "n_temporal_edges": sum(per_snapshot),
        "edges_per_snapshot": per_snapshot,
        "active_vertices_per_snapshot": active,
    }


def dumps(tg: TemporalGraph) -> str:
    """Text form: ``T n`` header then one ``t u v`` line per temporal edge."""
    lines = [f"{tg.T} {tg.n}"]
    for s in tg.snapshots:
        lines.extend(f"{s.t_index} {u} {v}" for u, v in sorted(s.edges))
    return "\n".join(lines) + "\n"


def loads(text: str, labels=()) -> TemporalGraph:
    rows = text.splitlines()
    if not rows:
        raise TraceParseError("empty graph file", line=1)
    try:
        T, n = (int(x) for x in rows[0].split())
    except ValueError:
        raise TraceParseError("header must be 'T n'", line=1) from None
    if T < 1 or n < 0:
        raise TraceParseError("header must have T >= 1 and n >= 0", line=1)
    edge_lists = [[] for _ in range(T)]
    for lineno, row in enumerate(rows[1:], start=2):
        if not row.strip():
            continue
        try:
            t, u, v = (int(x) for x in row.split())
        except ValueError:
            raise TraceParseError("expected 't u v'", line=lineno) from None
        if not (1 <= t <= T and 0 <= u < n and 0 <= v < n) or u == v:
            raise TraceParseError(f"edge {row!r} out of range", line=lineno)
        edge_lists[t - 1].append((u, v))
    return TemporalGraph.from_edge_lists(n, edge_lists, labels)
