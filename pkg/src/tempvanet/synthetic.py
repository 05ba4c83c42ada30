"""Deterministic synthetic traces for tests and desk-scale experiments."""
from __future__ import annotations

import configparser
import math
from pathlib import Path

import numpy as np

from .errors import ParameterError
from .trace import SnapshotSpec, Trace, _build_trace

KINDS = ("line-road", "grid", "random-waypoint")

_COMMON = {"vehicles": 20, "duration": 300.0, "dt": 1.0, "interval": 10.0, "radius": 100.0}
_DEFAULTS = {
    "line-road": {"length": 2000.0, "speed": 15.0, "speed_jitter": 0.0},
    "grid": {"rows": 5, "cols": 5, "spacing": 200.0, "speed": 10.0},
    "random-waypoint": {"width": 1000.0, "height": 1000.0, "speed_min": 5.0,
                        "speed_max": 15.0, "pause": 0.0},
}
_INTEGER = {"vehicles", "rows", "cols"}
_POSITIVE = {"vehicles", "duration", "dt", "interval", "radius", "length", "rows", "cols",
             "spacing", "width", "height"}


def parse_params(text: str) -> dict:
    """Parse flat ``key=value`` lines (``#`` comments allowed) into a dict of strings."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    cp.read_string("[params]\n" + text)
    return dict(cp["params"])


def load_params(path) -> dict:
    return parse_params(Path(path).read_text())


def _resolve(kind, params):
    if kind not in KINDS:
        raise ParameterError(f"unknown generator kind {kind!r}; choose from {', '.join(KINDS)}")
    merged = {**_COMMON, **_DEFAULTS[kind]}
    extra = set(params) - set(merged) - {"kind", "seed"}
    if extra:
        raise ParameterError(f"unknown parameters for {kind}: {sorted(extra)}")
    out = {}
    for key, default in merged.items():
        raw = params.get(key, default)
        try:
            value = int(raw) if key in _INTEGER else float(raw)
        except (TypeError, ValueError):
            raise ParameterError(f"parameter {key} must be numeric, got {raw!r}") from None
        if key in _INTEGER and float(raw) != value:
            raise ParameterError(f"parameter {key} must be an integer")
        if not math.isfinite(value) or value < 0 or (key in _POSITIVE and value == 0):
            raise ParameterError(f"parameter {key} out of range: {raw!r}")
        out[key] = value
    if kind == "random-waypoint" and out["speed_max"] < out["speed_min"]:
        raise ParameterError("speed_max must be >= speed_min")
    return out


def _line_road(p, rng):
    times = np.arange(0.0, p["duration"], p["dt"])
    rows = []
    for v in range(p["vehicles"]):
        enter = rng.uniform(0.0, p["duration"])
        speed = max(0.0, p["speed"] + rng.uniform(-p["speed_jitter"], p["speed_jitter"]))
        for t in times[times >= enter]:
            x = speed * (t - enter)
            if x > p["length"]:
                break
            rows.append((f"veh{v}", float(t), float(x), 0.0))
    return rows


def _grid(p, rng):
    rows_n, cols_n, spacing = p["rows"], p["cols"], p["spacing"]
    times = np.arange(0.0, p["duration"], p["dt"])
    moves = ((1, 0), (-1, 0), (0, 1), (0, -1))

    def options(node):
        r, c = node
        return [(r + dr, c + dc) for dr, dc in moves if 0 <= r + dr < rows_n and 0 <= c + dc < cols_n]

    rows = []
    for v in range(p["vehicles"]):
        here = (int(rng.integers(rows_n)), int(rng.integers(cols_n)))
        nxt = None
        progress = 0.0
        for t in times:
            if nxt is None:
                x, y = here[1] * spacing, here[0] * spacing
            else:
                f = progress / spacing
                x = (here[1] + f * (nxt[1] - here[1])) * spacing
                y = (here[0] + f * (nxt[0] - here[0])) * spacing
            rows.append((f"veh{v}", float(t), float(x), float(y)))
            step = p["speed"] * p["dt"]
            while step > 0:
                if nxt is None:
                    opts = options(here)
                    if not opts:
                        break
                    nxt = opts[int(rng.integers(len(opts)))]
                    progress = 0.0
                if progress + step < spacing:
                    progress += step
                    step = 0.0
                else:
                    step -= spacing - progress
                    here, nxt = nxt, None
    return rows


def _random_waypoint(p, rng):
    w, h = p["width"], p["height"]
    times = np.arange(0.0, p["duration"], p["dt"])
    rows = []
    for v in range(p["vehicles"]):
        pos = np.array([rng.uniform(0, w), rng.uniform(0, h)])
        target = np.array([rng.uniform(0, w), rng.uniform(0, h)])
        speed = rng.uniform(p["speed_min"], p["speed_max"])
        wait = 0.0
        for t in times:
            rows.append((f"veh{v}", float(t), float(pos[0]), float(pos[1])))
            budget = p["dt"]
            while budget > 0:
                if wait > 0:
                    used = min(wait, budget)
                    wait -= used
                    budget -= used
                    continue
                gap = target - pos
                d = float(np.hypot(*gap))
                if speed == 0:
                    break
                if d <= speed * budget:
                    pos = target
                    budget -= d / speed
                    target = np.array([rng.uniform(0, w), rng.uniform(0, h)])
                    speed = rng.uniform(p["speed_min"], p["speed_max"])
                    wait = p["pause"]
                else:
                    pos = pos + gap / d * speed * budget
                    budget = 0.0
            pos = np.clip(pos, [0.0, 0.0], [w, h])
    return rows


def generate_synthetic(kind: str, params: dict | None = None, seed: int = 0) -> Trace:
    """Generate a trace of the given kind; identical for identical ``(params, seed)``."""
    p = _resolve(kind, params or {})
    rng = np.random.default_rng(seed)
    rows = {"line-road": _line_road, "grid": _grid, "random-waypoint": _random_waypoint}[kind](p, rng)
    spec = SnapshotSpec(0.0, p["duration"], p["interval"], p["radius"])
    return _build_trace(rows, spec)
