"""Distribution comparison between aggregated and temporal measures."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# two-sample KS critical constants c(alpha)
KS_CONSTANTS = {0.10: 1.22, 0.05: 1.36, 0.025: 1.48, 0.01: 1.63, 0.005: 1.73, 0.001: 1.95}
DEFAULT_BINS = 100


@dataclass(frozen=True)
class MeasureSample:
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size == 0:
            raise ValueError(f"sample {self.label!r} must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(vals)):
            raise ValueError(f"sample {self.label!r} has non-finite values")
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class KsResult:
    D: float
    delta: float
    alpha: float
    c_alpha: float

    @property
    def reject(self) -> bool:
        return self.D > self.delta


@dataclass(frozen=True)
class Histogram:
    bin_edges: np.ndarray
    proportions: np.ndarray

    @property
    def bins(self) -> int:
        return int(self.proportions.size)


@dataclass(frozen=True)
class HellingerResult:
    h: float
    h2: float
    bins: int


def _as_sample(s, label=""):
    return s if isinstance(s, MeasureSample) else MeasureSample(s, label)


def c_alpha(alpha: float) -> float:
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    for a, c in KS_CONSTANTS.items():
        if math.isclose(alpha, a):
            return c
    return math.sqrt(-math.log(alpha / 2) / 2)


def ks_threshold(m_a: int, m_b: int | None = None, alpha: float = 0.05) -> float:
    """Rejection threshold; ``c * sqrt(2 / M)`` when both samples have size M."""
    m_b = m_a if m_b is None else m_b
    return c_alpha(alpha) * math.sqrt((m_a + m_b) / (m_a * m_b))


def ks_statistic(a, b) -> float:
    """Largest gap between the two empirical CDFs."""
    a = np.sort(_as_sample(a).values)
    b = np.sort(_as_sample(b).values)
    grid = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, grid, side="right") / a.size
    cdf_b = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(cdf_a - cdf_b)))


def ks_two_sample(a, b, alpha: float = 0.05) -> KsResult:
    a, b = _as_sample(a), _as_sample(b)
    return KsResult(ks_statistic(a, b), ks_threshold(a.n, b.n, alpha), alpha, c_alpha(alpha))


def shared_range(*samples):
    lo = min(float(_as_sample(s).values.min()) for s in samples)
    hi = max(float(_as_sample(s).values.max()) for s in samples)
    return lo, hi


def histogram_proportions(s, bins: int = DEFAULT_BINS, value_range=None) -> Histogram:
    """Equal-width histogram of proportions over ``value_range`` (default: sample min/max).

    Bins are half-open except the last, which is closed. A zero-width range
    collapses to one bin holding the whole sample.
    """
    s = _as_sample(s)
    if bins < 1:
        raise ValueError("bins must be >= 1")
    lo, hi = value_range if value_range is not None else shared_range(s)
    if hi < lo:
        raise ValueError("histogram range must satisfy lo <= hi")
    if hi == lo:
        return Histogram(np.array([lo, hi], dtype=float), np.array([1.0]))
    counts, edges = np.histogram(s.values, bins=bins, range=(lo, hi))
    if counts.sum() != s.n:
        raise ValueError("sample has values outside the histogram range")
    return Histogram(edges, counts / s.n)


def hellinger(p: Histogram, q: Histogram) -> HellingerResult:
    """Hellinger distance ``sqrt(1/2 * sum (sqrt p - sqrt q)^2)`` on shared bins."""
    if p.bin_edges.shape != q.bin_edges.shape or not np.array_equal(p.bin_edges, q.bin_edges):
        raise ValueError("histograms must share bin edges")
    h2 = 0.5 * float(np.sum((np.sqrt(p.proportions) - np.sqrt(q.proportions)) ** 2))
    h2 = min(max(h2, 0.0), 1.0)
    return HellingerResult(math.sqrt(h2), h2, p.bins)


def pearson(a, b) -> float:
    x = np.asarray(a, dtype=float)
    y = np.asarray(b, dtype=float)
    if x.shape != y.shape:
        raise ValueError("samples must have the same length")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        return math.nan
    dx = x - x.mean()
    dy = y - y.mean()
    # sqrt(s * s) == s exactly in IEEE arithmetic, so pearson(a, a) is exactly 1
    r = float(dx @ dy) / math.sqrt(float(dx @ dx) * float(dy @ dy))
    return min(1.0, max(-1.0, r))


def scatter_export(a, b):
    """Rows ``(vertex, aggregated, temporal)`` and their Pearson correlation."""
    a, b = _as_sample(a), _as_sample(b)
    if a.n != b.n:
        raise ValueError(f"length mismatch: {a.n} vs {b.n}")
    rows = [(v, float(x), float(y)) for v, (x, y) in enumerate(zip(a.values, b.values))]
    return rows, pearson(a.values, b.values)


@dataclass(frozen=True)
class Comparison:
    measure: str
    ks: KsResult
    hellinger: HellingerResult
    pearson: float


def compare(aggregated, temporal, measure="", bins=DEFAULT_BINS, alpha=0.05) -> Comparison:
    """KS, Hellinger and Pearson between two per-vertex measure vectors."""
    a = _as_sample(aggregated, f"aggregated {measure}".strip())
    b = _as_sample(temporal, f"temporal {measure}".strip())
    rng = shared_range(a, b)
    hel = hellinger(histogram_proportions(a, bins, rng), histogram_proportions(b, bins, rng))
    r = pearson(a.values, b.values) if a.n == b.n else math.nan
    return Comparison(measure, ks_two_sample(a, b, alpha), hel, r)
