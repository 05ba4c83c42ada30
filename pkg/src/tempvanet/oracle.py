"""Exhaustive reference computations for small instances.

Nothing here shares code with the production path: temporal measures are
obtained by listing every vertex-simple time-respecting path explicitly.
A minimum-hop walk never revisits a vertex (cutting the loop keeps the
snapshot order non-decreasing and is shorter), so simple paths suffice.
Cost is exponential; keep n <= 7 and T <= 4.
"""
from __future__ import annotations

import itertools
from fractions import Fraction


def temporal_paths(edge_sets, source, start, stop):
    """Every simple time-respecting path from ``source`` within snapshots start..stop.

    ``edge_sets`` is a list of sets of ``(u, v)`` pairs, 0-based by snapshot.
    Yields paths as tuples of ``(u, v, t)`` hops.
    """
    hops = []
    for t in range(start, stop + 1):
        for u, v in edge_sets[t]:
            hops.append((u, v, t))
            hops.append((v, u, t))

    def extend(path, at, last_t, seen):
        for u, v, t in hops:
            if u == at and t >= last_t and v not in seen:
                new = path + ((u, v, t),)
                yield new
                yield from extend(new, v, t, seen | {v})

    yield from extend((), source, start, frozenset({source}))


def shortest_temporal_paths(edge_sets, source, start, stop):
    """Map target -> list of minimum-hop paths from ``source``."""
    best = {}
    for p in temporal_paths(edge_sets, source, start, stop):
        w = p[-1][1]
        if w not in best or len(p) < len(best[w][0]):
            best[w] = [p]
        elif len(p) == len(best[w][0]):
            best[w].append(p)
    return best


def temporal_measures(n, edge_sets, t_x, t_y):
    """Reference temporal degree, closeness and betweenness (raw) over 1-based [t_x, t_y].

    Also returns ``dist`` and ``sigma`` keyed by ``(i, source)`` for every
    sub-interval start i. Betweenness counts ordered pairs and halves, i.e.
    the average of both directions of each unordered pair.
    """
    degree = [0] * n
    for t in range(t_x - 1, t_y):
        for u, v in edge_sets[t]:
            degree[u] += 1
            degree[v] += 1
    closeness = [Fraction(0)] * n
    betweenness = [Fraction(0)] * n
    dist, sigma = {}, {}
    for i in range(t_x, t_y + 1):
        for s in range(n):
            best = shortest_temporal_paths(edge_sets, s, i - 1, t_y - 1)
            dist[(i, s)] = {s: 0, **{w: len(ps[0]) for w, ps in best.items()}}
            sigma[(i, s)] = {s: 1, **{w: len(ps) for w, ps in best.items()}}
            for w, ps in best.items():
                closeness[s] += Fraction(1, len(ps[0]))
                for v in range(n):
                    if v in (s, w):
                        continue
                    through = sum(1 for p in ps if any(h[1] == v for h in p[:-1]))
                    betweenness[v] += Fraction(through, len(ps))
    return {
        "degree": degree,
        "closeness": [float(c) for c in closeness],
        "betweenness": [float(b / 2) for b in betweenness],
        "dist": dist,
        "sigma": sigma,
    }


def static_measures(n, edges):
    """Reference degree, harmonic closeness and betweenness by simple-path enumeration."""
    nbrs = {v: set() for v in range(n)}
    for u, v in edges:
        nbrs[u].add(v)
        nbrs[v].add(u)

    def simple_paths(s):
        stack = [(s, (s,))]
        while stack:
            at, path = stack.pop()
            yield path
            for w in nbrs[at]:
                if w not in path:
                    stack.append((w, path + (w,)))

    degree = [len(nbrs[v]) for v in range(n)]
    closeness = [Fraction(0)] * n
    betweenness = [Fraction(0)] * n
    for s in range(n):
        best = {}
        for p in simple_paths(s):
            w = p[-1]
            if w == s:
                continue
            if w not in best or len(p) < len(best[w][0]):
                best[w] = [p]
            elif len(p) == len(best[w][0]):
                best[w].append(p)
        for w, ps in best.items():
            closeness[s] += Fraction(1, len(ps[0]) - 1)
            if s < w:
                for v in range(n):
                    if v not in (s, w):
                        betweenness[v] += Fraction(sum(v in p for p in ps), len(ps))
    return {
        "degree": degree,
        "closeness": [float(c) for c in closeness],
        "betweenness": [float(b) for b in betweenness],
    }


def mcttp_optimum(matrix, k, tau):
    """Best objective ``sum_j min(tau, sum_{i in S} T_ij)`` over all |S| <= k."""
    n_sites = len(matrix)
    n_veh = len(matrix[0]) if n_sites else 0
    best, best_set = 0.0, ()
    for size in range(1, min(k, n_sites) + 1):
        for subset in itertools.combinations(range(n_sites), size):
            value = sum(min(tau, sum(matrix[i][j] for i in subset)) for j in range(n_veh))
            if value > best:
                best, best_set = value, subset
    return best, best_set
