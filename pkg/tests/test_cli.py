import csv
import json

import numpy as np
import pytest

from tempvanet.cli import main
from tempvanet.centrality import read_report_csv

from test_trace import csv_bytes


def run(*argv):
    return main([str(a) for a in argv])


def write_report(path, values, model):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("vertex", "vehicle_id", "measure", "model", "raw", "normalized"))
        for i, v in enumerate(values):
            w.writerow((i, f"v{i}", "degree", model, repr(float(v)), repr(float(v))))


@pytest.fixture
def small_trace(tmp_path):
    rows = [("a", 0, 0, 0), ("b", 0, 50, 0), ("c", 0, 400, 0),
            ("a", 1, 0, 0), ("b", 1, 300, 0), ("c", 1, 390, 0)]
    p = tmp_path / "trace.csv"
    p.write_bytes(csv_bytes(rows))
    return p


def test_ingest(tmp_path, small_trace, capsys):
    out = tmp_path / "o"
    assert run("ingest", "--input", small_trace, "--interval", 1, "--out", out) == 0
    counts = json.loads((out / "counts.json").read_text())
    assert counts["n_vertices"] == 3 and counts["n_snapshots"] == 2
    assert counts["edges_per_snapshot"] == [1, 1]
    assert counts["n_aggregated_edges"] == 2 and counts["n_temporal_edges"] == 2
    assert (out / "graph.txt").read_text() == "2 3\n1 0 1\n2 1 2\n"
    assert "|V| = 3" in capsys.readouterr().out


def test_missing_file(tmp_path, capsys):
    missing = tmp_path / "nope.csv"
    assert run("ingest", "--input", missing, "--interval", 1, "--out", tmp_path) == 2
    assert str(missing) in capsys.readouterr().err


def test_missing_option(tmp_path, small_trace, capsys):
    assert run("ingest", "--input", small_trace, "--out", tmp_path) == 2
    assert "--interval" in capsys.readouterr().err


def test_malformed_trace_reports_line(tmp_path, capsys):
    p = tmp_path / "bad.csv"
    p.write_text("vehicle_id,t,x,y\na,0,0,0\nb,zero,0,0\n")
    assert run("ingest", "--input", p, "--interval", 1, "--out", tmp_path) == 2
    assert "line 3" in capsys.readouterr().err


def test_single_snapshot_models_agree(tmp_path):
    rng = np.random.default_rng(3)
    rows = [(f"v{i}", 0.0, *rng.uniform(0, 400, 2)) for i in range(15)]
    p = tmp_path / "t.csv"
    p.write_bytes(csv_bytes(rows))
    assert run("measure", "--input", p, "--interval", 10, "--out", tmp_path) == 0
    for m in ("degree", "closeness", "betweenness"):
        _, ra, _ = read_report_csv(tmp_path / f"aggregated_{m}.csv")
        _, rt, _ = read_report_csv(tmp_path / f"temporal_{m}.csv")
        assert np.allclose(ra, rt, rtol=0, atol=1e-12), m


def test_measure_matches_golden(tmp_path, fixtures_dir):
    golden = json.loads((fixtures_dir / "five_vertex_golden.json").read_text())
    assert run("measure", "--graph", fixtures_dir / "five_vertex.graph", "--out", tmp_path) == 0
    for model in ("aggregated", "temporal"):
        for m in ("degree", "closeness", "betweenness"):
            labels, raw, _ = read_report_csv(tmp_path / f"{model}_{m}.csv")
            assert labels == [f"v{i}" for i in range(1, 6)]
            assert np.allclose(raw, golden[model][m], rtol=0, atol=1e-9), (model, m)
    meta = json.loads((tmp_path / "temporal_betweenness.json").read_text())
    assert meta["interval"] == [1, 3] and meta["n"] == 5


def test_measure_subset(tmp_path, fixtures_dir):
    assert run("measure", "--graph", fixtures_dir / "five_vertex.graph", "--measures", "degree",
               "--out", tmp_path) == 0
    assert sorted(p.name for p in tmp_path.glob("*.csv")) == ["aggregated_degree.csv", "temporal_degree.csv"]


def test_measure_bad_interval(tmp_path, fixtures_dir):
    assert run("measure", "--graph", fixtures_dir / "five_vertex.graph", "--t-x", 2, "--t-y", 9,
               "--out", tmp_path) == 2


def test_compare_self(tmp_path, fixtures_dir):
    run("measure", "--graph", fixtures_dir / "five_vertex.graph", "--models", "temporal", "--out", tmp_path)
    rep = tmp_path / "temporal_closeness.csv"
    assert run("compare", "--left", rep, "--right", rep, "--measures", "closeness", "--out", tmp_path) == 0
    row = json.loads((tmp_path / "compare.json").read_text())["results"][0]
    assert row["D"] == 0.0 and row["h"] == 0.0 and row["pearson"] == 1.0 and not row["reject"]


def test_compare_threshold_printed(tmp_path, capsys):
    rng = np.random.default_rng(0)
    write_report(tmp_path / "aggregated_degree.csv", rng.normal(size=3558), "aggregated")
    write_report(tmp_path / "temporal_degree.csv", rng.normal(size=3558), "temporal")
    assert run("compare", "--reports", tmp_path, "--measures", "degree", "--out", tmp_path) == 0
    assert "delta=0.0322" in capsys.readouterr().out
    rows = list(csv.DictReader(open(tmp_path / "compare.csv")))
    assert float(rows[0]["delta"]) == pytest.approx(0.0322, abs=1e-4)


def test_place_rejects_k_zero(tmp_path, small_trace):
    sites = tmp_path / "s.csv"
    sites.write_text("site_id,x,y\nA,0,0\n")
    assert run("place", "--input", small_trace, "--interval", 1, "--sites", sites,
               "--k", 0, "--tau", 1, "--out", tmp_path) == 2


def divergence_args(fixtures_dir):
    return ["--config", fixtures_dir / "divergence.cfg", "--input", fixtures_dir / "divergence_trace.csv",
            "--sites", fixtures_dir / "divergence_sites.csv"]


def test_divergence_through_cli(tmp_path, fixtures_dir):
    cov = {}
    for model in ("temporal", "aggregated"):
        out = tmp_path / model
        assert run("place", *divergence_args(fixtures_dir), "--model", model, "--out", out) == 0
        assert run("evaluate", *divergence_args(fixtures_dir), "--placement", out / "placement.json",
                   "--out", out) == 0
        cov[model] = json.loads((out / "coverage.json").read_text())["coverage_percent"]
    assert cov["temporal"] > cov["aggregated"]


def test_coverage_grows_with_k(tmp_path):
    assert run("gen", "--kind", "grid", "--seed", 4, "--out", tmp_path) == 0
    cfg = tmp_path / "trace.cfg"
    prev = -1.0
    for k in (5, 10):
        out = tmp_path / f"k{k}"
        assert run("place", "--config", cfg, "--grid-spacing", 150, "--k", k, "--tau", 20,
                   "--out", out) == 0
        assert run("evaluate", "--config", cfg, "--grid-spacing", 150,
                   "--placement", out / "placement.json", "--out", out) == 0
        cov = json.loads((out / "coverage.json").read_text())
        assert cov["coverage_percent"] >= prev
        prev = cov["coverage_percent"]
    small = json.loads((tmp_path / "k5" / "placement.json").read_text())["selected"]
    large = json.loads((tmp_path / "k10" / "placement.json").read_text())["selected"]
    assert large[:len(small)] == small


def test_ranked_strategy(tmp_path, fixtures_dir):
    args = divergence_args(fixtures_dir)
    assert run("measure", "--config", fixtures_dir / "divergence.cfg", "--input",
               fixtures_dir / "divergence_trace.csv", "--measures", "degree", "--out", tmp_path) == 0
    assert run("place", *args, "--strategy", "ranked", "--report", tmp_path / "temporal_degree.csv",
               "--measure", "degree", "--out", tmp_path) == 0
    plan = json.loads((tmp_path / "placement.json").read_text())
    assert plan["strategy"] == "ranked" and len(plan["selected"]) == 3


def test_env_out_dir(tmp_path, small_trace, monkeypatch):
    monkeypatch.setenv("TEMPVANET_OUT", str(tmp_path / "env"))
    assert run("ingest", "--input", small_trace, "--interval", 1) == 0
    assert (tmp_path / "env" / "counts.json").is_file()


def test_config_unknown_key(tmp_path, small_trace):
    cfg = tmp_path / "c.cfg"
    cfg.write_text(f"input={small_trace}\ninterval=1\nbogus=3\n")
    assert run("ingest", "--config", cfg, "--out", tmp_path) == 2


def test_command_line_overrides_config(tmp_path, small_trace):
    cfg = tmp_path / "c.cfg"
    cfg.write_text(f"input={small_trace}\ninterval=1\nradius=10\n")
    assert run("ingest", "--config", cfg, "--radius", 500, "--out", tmp_path) == 0
    assert json.loads((tmp_path / "counts.json").read_text())["n_aggregated_edges"] == 3
