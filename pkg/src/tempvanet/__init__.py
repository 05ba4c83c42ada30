"""Temporal-graph modelling of vehicular traces."""
from .centrality import (
    CentralityReport,
    NormalizationSpec,
    compute_report,
    static_betweenness,
    static_closeness,
    static_degree,
    temporal_betweenness,
    temporal_bfs,
    temporal_closeness,
    temporal_degree,
)
from .graph import AggregatedGraph, SnapshotGraph, TemporalGraph, aggregate, counts
from .placement import (
    SiteSet,
    contact_matrix_aggregated,
    contact_matrix_temporal,
    evaluate_coverage,
    load_sites,
    mcttp_greedy,
    ranked_placement,
)
from .stats import hellinger, histogram_proportions, ks_two_sample, scatter_export
from .synthetic import generate_synthetic
from .trace import SnapshotSpec, Trace, TraceRecord, parse_csv, parse_fcd_xml, snapshot_graphs

__all__ = [
    "CentralityReport",
    "NormalizationSpec",
    "compute_report",
    "static_betweenness",
    "static_closeness",
    "static_degree",
    "temporal_betweenness",
    "temporal_bfs",
    "temporal_closeness",
    "temporal_degree",
    "AggregatedGraph",
    "SnapshotGraph",
    "TemporalGraph",
    "aggregate",
    "counts",
    "SiteSet",
    "contact_matrix_aggregated",
    "contact_matrix_temporal",
    "evaluate_coverage",
    "load_sites",
    "mcttp_greedy",
    "ranked_placement",
    "hellinger",
    "histogram_proportions",
    "ks_two_sample",
    "scatter_export",
    "generate_synthetic",
    "SnapshotSpec",
    "Trace",
    "TraceRecord",
    "parse_csv",
    "parse_fcd_xml",
    "snapshot_graphs",
]

__version__ = "0.1.0"
