"""Command-line entry point: ``tempvanet <subcommand> [options]``.

Exit codes: 0 success, 1 internal error, 2 bad user input.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
from pathlib import Path


from . import centrality, graph, oracle, placement, stats, synthetic, trace
from .errors import ParameterError, TempVanetError

OUT_ENV = "TEMPVANET_OUT"


class UserError(Exception):
    pass


def _csv_list(text):
    return [t.strip() for t in str(text).split(",") if t.strip()]


def _write_json(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n")


def _jsonable(x):
    return None if isinstance(x, float) and x != x else x


def _need(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise UserError(f"{args.command}: missing required option(s) {flags}")


def _existing(path, what):
    p = Path(path)
    if not p.is_file():
        raise UserError(f"{what} not found: {p}")
    return p


def _out_dir(args) -> Path:
    out = Path(args.out or os.environ.get(OUT_ENV) or "out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_trace(args) -> trace.Trace:
    _need(args, "input", "interval")
    path = _existing(args.input, "trace file")
    if (args.t_start is None) != (args.t_end is None):
        raise UserError("--t-start and --t-end must be given together")
    if args.t_start is not None:
        spec = trace.SnapshotSpec(args.t_start, args.t_end, args.interval, args.radius)
        return trace.read_trace(path, spec)
    return trace.read_trace(path, interval=args.interval, radius=args.radius)


def _add_trace_options(p):
    p.add_argument("--input", help="trace file (CSV vehicle_id,t,x,y or SUMO FCD XML)")
    p.add_argument("--t-start", type=float, help="start of the observation window [s]")
    p.add_argument("--t-end", type=float, help="end of the observation window (exclusive) [s]")
    p.add_argument("--interval", type=float, help="snapshot duration [s]")
    p.add_argument("--radius", type=float, default=100.0, help="V2V communication radius [m]")


def _load_graph(args):
    if args.graph:
        path = _existing(args.graph, "graph file")
        labels_path = path.with_suffix(".labels")
        labels = labels_path.read_text().splitlines() if labels_path.is_file() else ()
        return graph.loads(path.read_text(), labels)
    return trace.snapshot_graphs(_load_trace(args))


# --------------------------------------------------------------- commands ---

def cmd_ingest(args):
    tr = _load_trace(args)
    tg = trace.snapshot_graphs(tr)
    out = _out_dir(args)
    (out / "graph.txt").write_text(graph.dumps(tg))
    (out / "graph.labels").write_text("".join(f"{lab}\n" for lab in tg.labels))
    report = graph.counts(tg)
    report.update(records=len(tr.records), dropped_records=tr.dropped,
                  snapshot_spec=dataclasses.asdict(tr.spec), graph_sha256=tg.digest())
    _write_json(out / "counts.json", report)
    print(f"|V| = {report['n_vertices']}")
    print(f"|E| (aggregated) = {report['n_aggregated_edges']}")
    print(f"|E| (temporal) = {report['n_temporal_edges']}")
    print(f"snapshots = {report['n_snapshots']}, dropped records = {tr.dropped}")
    print("edges per snapshot: " + " ".join(map(str, report["edges_per_snapshot"])))
    print("active vertices per snapshot: " + " ".join(map(str, report["active_vertices_per_snapshot"])))


def cmd_gen(args):
    _need(args, "kind")
    params = synthetic.load_params(_existing(args.params, "parameter file")) if args.params else {}
    params.pop("kind", None)
    params.pop("seed", None)
    tr = synthetic.generate_synthetic(args.kind, params, args.seed)
    out = _out_dir(args)
    (out / "trace.csv").write_bytes(trace.write_csv(tr))
    spec = tr.spec
    (out / "trace.cfg").write_text(
        f"input={out / 'trace.csv'}\nt_start={spec.t_start!r}\nt_end={spec.t_end!r}\n"
        f"interval={spec.interval!r}\nradius={spec.radius!r}\n")
    print(f"{args.kind}: {tr.n_vehicles} vehicles, {len(tr.records)} records, "
          f"{spec.n_snapshots} snapshots -> {out / 'trace.csv'}")


def cmd_measure(args):
    tg = _load_graph(args)
    t_x = args.t_x or 1
    t_y = args.t_y or tg.T
    measures = _csv_list(args.measures)
    models = _csv_list(args.models)
    for m in measures:
        if m not in centrality.MEASURES:
            raise UserError(f"unknown measure {m!r}")
    for m in models:
        if m not in centrality.MODELS:
            raise UserError(f"unknown model {m!r}")
    tg.check_interval(t_x, t_y)
    out = _out_dir(args)
    for model in models:
        rep = centrality.compute_report(tg, model, (t_x, t_y), measures, args.threads,
                                        args.betweenness_norm)
        for m in measures:
            csv_path, _ = centrality.write_report(rep, out, m)
            print(f"wrote {csv_path}")
    if args.golden_update:
        _write_golden(tg, (t_x, t_y), Path(args.golden_update))


def _write_golden(tg, interval, path: Path):
    edge_sets = [set(s.edges) for s in tg.snapshots]
    ref_t = oracle.temporal_measures(tg.n, edge_sets, *interval)
    agg = graph.aggregate(tg, *interval)
    ref_a = oracle.static_measures(tg.n, agg.edges)
    golden = {
        "graph": graph.dumps(tg),
        "interval": list(interval),
        "temporal": {k: ref_t[k] for k in centrality.MEASURES},
        "aggregated": ref_a,
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    _write_json(path, golden)
    print(f"wrote golden {path}")


def _report_pairs(args, measures):
    if args.left or args.right:
        _need(args, "left", "right")
        if len(measures) != 1:
            raise UserError("--left/--right compare exactly one measure; pass --measures")
        return {measures[0]: (_existing(args.left, "report"), _existing(args.right, "report"))}
    _need(args, "reports")
    d = Path(args.reports)
    return {m: (_existing(d / f"aggregated_{m}.csv", "report"),
                _existing(d / f"temporal_{m}.csv", "report")) for m in measures}


def cmd_compare(args):
    measures = _csv_list(args.measures)
    pairs = _report_pairs(args, measures)
    out = _out_dir(args)
    rows = []
    for m, (left, right) in pairs.items():
        la, ra, na = centrality.read_report_csv(left)
        lb, rb, nb = centrality.read_report_csv(right)
        if la != lb:
            raise UserError(f"{m}: reports describe different vertex sets")
        a, b = (ra, rb) if args.raw else (na, nb)
        cmp_ = stats.compare(a, b, m, args.bins, args.alpha)
        scatter, r = stats.scatter_export(a, b)
        with open(out / f"scatter_{m}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("vertex", "x_aggregated", "y_temporal"))
            for v, x, y in scatter:
                w.writerow((v, repr(x), repr(y)))
        rows.append({
            "scenario": args.scenario, "measure": m, "M": len(a),
            "D": cmp_.ks.D, "delta": cmp_.ks.delta, "c_alpha": cmp_.ks.c_alpha,
            "alpha": cmp_.ks.alpha, "reject": cmp_.ks.reject,
            "h": cmp_.hellinger.h, "h2": cmp_.hellinger.h2, "bins": cmp_.hellinger.bins,
            "pearson": _jsonable(r),
        })
        print(f"{m}: D={cmp_.ks.D:.4f} delta={cmp_.ks.delta:.4f} reject={cmp_.ks.reject} "
              f"h={cmp_.hellinger.h:.4f} h2={cmp_.hellinger.h2:.4f} pearson={r:.4f}")
    with open(out / "compare.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        cols = ("scenario", "measure", "D", "delta", "reject", "h", "h2", "pearson")
        w.writerow(cols)
        for row in rows:
            w.writerow(tuple("" if row[c] is None else repr(row[c]) if isinstance(row[c], float)
                             else row[c] for c in cols))
    _write_json(out / "compare.json", {"raw_values": args.raw, "results": rows})


def _load_sites(args, tr):
    radius = args.site_radius if args.site_radius is not None else tr.spec.radius
    if args.sites:
        return placement.load_sites(_existing(args.sites, "sites file").read_bytes(), radius)
    if args.grid_spacing:
        return placement.grid_sites(tr, args.grid_spacing, radius)
    raise UserError(f"{args.command}: give --sites or --grid-spacing")


def cmd_place(args):
    _need(args, "k", "tau")
    if args.k < 1:
        raise ParameterError("k must be >= 1")
    tr = _load_trace(args)
    sites = _load_sites(args, tr)
    out = _out_dir(args)
    if args.strategy == "ranked":
        _need(args, "report")
        labels, raw, norm = centrality.read_report_csv(_existing(args.report, "report"))
        if labels != tr.vehicle_ids:
            raise UserError("report vertices do not match the trace vehicles")
        meta = Path(args.report).with_suffix(".json")
        model = json.loads(meta.read_text())["model"] if meta.is_file() else "unknown"
        measure = args.measure
        vals = centrality.MeasureValues(raw, norm)
        rep = centrality.CentralityReport(model, (1, 1), centrality.NormalizationSpec(len(labels)),
                                          tuple(labels), {measure: vals})
        skeleton = placement.ranked_placement(rep, tr, sites, args.k, measure, not args.raw)
        ev = placement.evaluate_coverage(tr, sites, skeleton.selected, args.tau)
        result = dataclasses.replace(skeleton, t_j=ev.t_j, tau=ev.tau)
    else:
        if args.model == "temporal":
            cm = placement.contact_matrix_temporal(tr, sites)
        else:
            cm = placement.contact_matrix_aggregated(tr, sites, args.window)
        (out / "contacts.csv").write_bytes(cm.to_triplets())
        result = placement.mcttp_greedy(cm, args.k, args.tau)
    (out / "sites.csv").write_bytes(placement.write_sites(sites))
    (out / "placement.json").write_text(result.to_json())
    print(f"{result.strategy}/{result.model}: selected {len(result.selected)} sites: "
          + " ".join(result.selected))
    if result.strategy == "greedy":
        print(f"matrix coverage: {result.covered_count}/{result.n_vehicles} vehicles")


def cmd_evaluate(args):
    _need(args, "placement")
    plan = json.loads(_existing(args.placement, "placement file").read_text())
    tau = args.tau if args.tau is not None else plan["parameters"]["tau"]
    if tau is None:
        raise UserError("evaluate: --tau required")
    tr = _load_trace(args)
    sites = _load_sites(args, tr)
    ev = placement.evaluate_coverage(tr, sites, plan["selected"], tau)
    out = _out_dir(args)
    d = ev.to_dict()
    d["parameters"].update(model=plan["parameters"].get("model"), window=plan["parameters"].get("window"),
                           k=plan["parameters"].get("k"))
    d["strategy"] = plan.get("strategy")
    _write_json(out / "coverage.json", d)
    print(f"coverage: {ev.covered_count}/{ev.n_vehicles} vehicles "
          f"({100 * ev.coverage:.2f}%), total covered time {ev.total_covered_time:g} s")


# ----------------------------------------------------------------- parser ---

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file supplying defaults for any option")
    common.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./out)")
    common.add_argument("--threads", type=int, default=0,
                        help="worker processes (default: all cores); output does not depend on it")

    parser = argparse.ArgumentParser(prog="tempvanet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="trace -> temporal graph + counts")
    _add_trace_options(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("gen", parents=[common], help="generate a synthetic trace")
    p.add_argument("--kind", choices=synthetic.KINDS)
    p.add_argument("--params", help="key=value generator parameters")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("measure", parents=[common], help="centrality reports per model")
    p.add_argument("--graph", help="graph.txt written by ingest (alternative to --input)")
    _add_trace_options(p)
    p.add_argument("--t-x", type=int, help="first snapshot (1-based, default 1)")
    p.add_argument("--t-y", type=int, help="last snapshot (default T)")
    p.add_argument("--measures", default="degree,closeness,betweenness")
    p.add_argument("--models", default="aggregated,temporal")
    p.add_argument("--betweenness-norm", choices=centrality.BETWEENNESS_MODES, default="global")
    p.add_argument("--golden-update", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("compare", parents=[common], help="KS / Hellinger / scatter between models")
    p.add_argument("--reports", help="directory holding aggregated_<m>.csv and temporal_<m>.csv")
    p.add_argument("--left", help="explicit aggregated report CSV")
    p.add_argument("--right", help="explicit temporal report CSV")
    p.add_argument("--measures", default="degree,closeness,betweenness")
    p.add_argument("--bins", type=int, default=stats.DEFAULT_BINS)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--raw", action="store_true", help="compare raw instead of normalized values")
    p.add_argument("--scenario", default="scenario")
    p.set_defaults(func=cmd_compare)

    for name, func, text in (("place", cmd_place, "choose RSU sites"),
                             ("evaluate", cmd_evaluate, "coverage of a placement")):
        p = sub.add_parser(name, parents=[common], help=text)
        _add_trace_options(p)
        p.add_argument("--sites", help="site_id,x,y CSV of candidate intersections")
        p.add_argument("--grid-spacing", type=float, help="generate grid candidates instead of --sites")
        p.add_argument("--site-radius", type=float, help="V2I radius [m] (default: --radius)")
        p.add_argument("--tau", type=float, help="coverage time threshold [s]")
        p.set_defaults(func=func)
    place = sub.choices["place"]
    place.add_argument("--k", type=int, help="number of RSUs")
    place.add_argument("--model", choices=centrality.MODELS, default="temporal")
    place.add_argument("--window", type=float, default=placement.DEFAULT_WINDOW,
                       help="aggregation window for the aggregated model [s]")
    place.add_argument("--strategy", choices=("greedy", "ranked"), default="greedy")
    place.add_argument("--report", help="centrality report CSV for --strategy ranked")
    place.add_argument("--measure", default="betweenness")
    place.add_argument("--raw", action="store_true", help="rank by raw instead of normalized values")
    sub.choices["evaluate"].add_argument("--placement", help="placement.json from 'place'")
    return parser


def _apply_config(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("command", nargs="?")
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config or known.command not in parser._subparsers._group_actions[0].choices:
        return
    path = Path(known.config)
    if not path.is_file():
        raise UserError(f"config file not found: {path}")
    choices = parser._subparsers._group_actions[0].choices
    sub = choices[known.command]
    actions = {a.dest: a for a in sub._actions}
    anywhere = {a.dest for p in choices.values() for a in p._actions}
    cfg = {}
    for key, value in synthetic.load_params(path).items():
        dest = key.replace("-", "_")
        if dest not in anywhere:
            raise UserError(f"{path}: unknown option {key!r}")
        if dest not in actions:
            continue  # belongs to another subcommand; one file can serve a whole pipeline
        if isinstance(actions[dest], argparse._StoreTrueAction):
            value = value.strip().lower() in ("1", "true", "yes", "on")
        cfg[dest] = value
    sub.set_defaults(**cfg)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        args.func(args)
    except (UserError, TempVanetError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:
        return int(exc.code or 0)
    except Exception as exc:  # invariant violations and bugs
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
