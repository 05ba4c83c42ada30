import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tempvanet.errors import EmptyTraceError, ParameterError, SchemaError, TraceParseError
from tempvanet.graph import aggregate
from tempvanet.synthetic import generate_synthetic, parse_params
from tempvanet.trace import (SnapshotSpec, parse_csv, parse_fcd_xml, read_trace,
                             snapshot_graphs, write_csv)

SPEC = SnapshotSpec(0.0, 3.0, 1.0, 100.0)


def csv_bytes(rows, header="vehicle_id,t,x,y"):
    return ("\n".join([header] + [",".join(map(str, r)) for r in rows]) + "\n").encode()


def fcd_bytes(rows):
    by_t = {}
    for vid, t, x, y in rows:
        by_t.setdefault(t, []).append(f'    <vehicle id="{vid}" x="{x}" y="{y}" speed="0"/>')
    parts = ['<?xml version="1.0" encoding="UTF-8"?>', "<fcd-export>"]
    for t in sorted(by_t):
        parts += [f'  <timestep time="{t}">', *by_t[t], "  </timestep>"]
    parts.append("</fcd-export>")
    return "\n".join(parts).encode()


class TestParseCsv:
    def test_header_only_is_empty(self):
        with pytest.raises(EmptyTraceError):
            parse_csv(b"vehicle_id,t,x,y\n", SPEC)

    def test_empty_file(self):
        with pytest.raises(EmptyTraceError):
            parse_csv(b"", SPEC)

    def test_two_vehicles_three_steps(self):
        rows = [(v, t, 10.0 * t, 0.0) for v in ("a", "b") for t in range(3)]
        tr = parse_csv(csv_bytes(rows), SPEC)
        assert tr.n_vehicles == 2
        assert len(tr.records) == 6
        assert tr.dropped == 0
        assert tr.vehicle_index == {"a": 0, "b": 1}

    def test_t_end_is_excluded(self):
        tr = parse_csv(csv_bytes([("a", 0, 0, 0), ("a", 2.5, 0, 0), ("a", 3.0, 0, 0)]), SPEC)
        assert len(tr.records) == 2
        assert tr.dropped == 1

    def test_duplicate_keeps_last(self):
        tr = parse_csv(csv_bytes([("a", 1, 0, 0), ("a", 1, 7, 8)]), SPEC)
        assert len(tr.records) == 1
        assert (tr.records[0].x, tr.records[0].y) == (7.0, 8.0)

    def test_sorted_by_vehicle_then_time(self):
        tr = parse_csv(csv_bytes([("v10", 2, 0, 0), ("v2", 1, 0, 0), ("v10", 0, 0, 0)]), SPEC)
        assert [(r.vehicle_id, r.t) for r in tr.records] == [("v2", 1.0), ("v10", 0.0), ("v10", 2.0)]

    @pytest.mark.parametrize("line", ["a,1,2", "a,x,0,0", "a,1,nan,0", "a,-1,0,0", ",1,0,0"])
    def test_malformed_line_reports_number(self, line):
        data = b"vehicle_id,t,x,y\nb,0,0,0\n" + line.encode() + b"\n"
        with pytest.raises(TraceParseError) as exc:
            parse_csv(data, SPEC)
        assert exc.value.line == 3

    def test_missing_column(self):
        with pytest.raises(SchemaError) as exc:
            parse_csv(b"vehicle_id,t,x\na,0,0\n", SPEC)
        assert exc.value.attribute == "y"

    def test_crlf(self):
        tr = parse_csv(b"vehicle_id,t,x,y\r\na,0,1.5,2\r\nb,1,3,4\r\n", SPEC)
        assert len(tr.records) == 2


class TestParseFcd:
    def test_one_vehicle(self):
        tr = parse_fcd_xml(fcd_bytes([("veh0", 0.0, 1.0, 2.0)]), SPEC)
        assert tr.n_vehicles == 1 and len(tr.records) == 1

    def test_matches_csv(self, rng):
        rows = [(f"v{rng.randrange(4)}", float(rng.randrange(3)), rng.uniform(0, 500), rng.uniform(0, 500))
                for _ in range(15)]
        rows = list({(r[0], r[1]): r for r in rows}.values())
        assert parse_csv(csv_bytes(rows), SPEC) == parse_fcd_xml(fcd_bytes(rows), SPEC)

    def test_empty_timestep(self):
        data = (b'<fcd-export><timestep time="0"><vehicle id="a" x="0" y="0"/></timestep>'
                b'<timestep time="1"></timestep></fcd-export>')
        assert len(parse_fcd_xml(data, SPEC).records) == 1

    def test_missing_attribute(self):
        with pytest.raises(SchemaError) as exc:
            parse_fcd_xml(b'<fcd-export><timestep time="0"><vehicle id="a" x="0"/></timestep></fcd-export>', SPEC)
        assert exc.value.attribute == "y"
        assert exc.value.offset is not None

    def test_structural_error_has_offset(self):
        data = b'<fcd-export><timestep time="0"><vehicle id="a" x="0" y="0"></timestep>'
        with pytest.raises(TraceParseError) as exc:
            parse_fcd_xml(data, SPEC)
        start = data.index(b"</timestep>")
        assert start <= exc.value.offset < start + len(b"</timestep>")


class TestSnapshotSpec:
    @pytest.mark.parametrize("kw", [dict(t_end=0.0), dict(interval=0.0), dict(radius=-1.0)])
    def test_invalid(self, kw):
        args = dict(t_start=0.0, t_end=10.0, interval=1.0, radius=100.0) | kw
        with pytest.raises(ParameterError):
            SnapshotSpec(**args)

    @pytest.mark.parametrize("t_end, interval, expected", [(10, 1, 10), (10, 3, 4), (0.7, 0.1, 7), (7200, 288, 25)])
    def test_snapshot_count(self, t_end, interval, expected):
        assert SnapshotSpec(0.0, t_end, interval).n_snapshots == expected

    def test_window_boundaries(self):
        spec = SnapshotSpec(0.0, 1.0, 0.1)
        assert list(spec.window_index([0.0, 0.1, 0.3, 0.7, 0.9999])) == [0, 1, 3, 7, 9]


def _brute_edges(positions, radius):
    out = set()
    for (u, pu), (v, pv) in itertools.combinations(sorted(positions.items()), 2):
        if math.dist(pu, pv) <= radius:
            out.add((u, v))
    return out


class TestSnapshotGraphs:
    def test_closed_radius(self):
        tr = parse_csv(csv_bytes([("a", 0, 0, 0), ("b", 0, 60, 80)]), SPEC)
        assert snapshot_graphs(tr).snapshots[0].edges == {(0, 1)}

    def test_just_outside_radius(self):
        tr = parse_csv(csv_bytes([("a", 0, 0, 0), ("b", 0, 100.000001, 0)]), SPEC)
        assert snapshot_graphs(tr).snapshots[0].edges == frozenset()

    def test_hand_placed_against_brute_force(self, rng):
        rows = []
        expected = []
        for k in range(3):
            pos = {v: (rng.uniform(0, 250), rng.uniform(0, 250)) for v in range(5)}
            if k == 1:
                del pos[2]  # absent in the middle window
            # two samples per window: only the later one counts
            for v, (x, y) in pos.items():
                rows.append((f"v{v}", k + 0.1, 9999.0, 9999.0))
                rows.append((f"v{v}", k + 0.6, x, y))
            expected.append(_brute_edges(pos, 100.0))
        tg = snapshot_graphs(parse_csv(csv_bytes(rows), SPEC))
        assert tg.n == 5 and tg.T == 3
        assert [set(s.edges) for s in tg.snapshots] == expected
        assert tg.snapshots[1].neighbours[2] == ()

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 9),
                              st.floats(0, 300), st.floats(0, 300)), min_size=1, max_size=40),
           st.randoms(use_true_random=False))
    def test_symmetric_loop_free_and_order_independent(self, raw, shuffler):
        rows = list({(f"v{v}", t): (f"v{v}", t, x, y) for v, t, x, y in raw}.values())
        spec = SnapshotSpec(0.0, 10.0, 2.5, 100.0)
        tg = snapshot_graphs(parse_csv(csv_bytes(rows), spec))
        shuffled = rows[:]
        shuffler.shuffle(shuffled)
        assert snapshot_graphs(parse_csv(csv_bytes(shuffled), spec)) == tg
        assert tg.T == spec.n_snapshots == 4
        for s in tg.snapshots:
            for u, v in s.edges:
                assert u < v
            for u, nb in enumerate(s.neighbours):
                for v in nb:
                    assert u in s.neighbours[v] and u != v
        assert len(aggregate(tg).edges) <= tg.n_temporal_edges


class TestSynthetic:
    @pytest.mark.parametrize("kind", ["line-road", "grid", "random-waypoint"])
    def test_deterministic(self, kind):
        a = generate_synthetic(kind, {"vehicles": 8, "duration": 60}, seed=11)
        b = generate_synthetic(kind, {"vehicles": 8, "duration": 60}, seed=11)
        assert write_csv(a) == write_csv(b)
        assert write_csv(a) != write_csv(generate_synthetic(kind, {"vehicles": 8, "duration": 60}, seed=12))

    def test_single_vehicle_line_has_no_edges(self):
        tg = snapshot_graphs(generate_synthetic("line-road", {"vehicles": 1}, seed=0))
        assert tg.n_temporal_edges == 0

    def test_stationary_grid_is_complete(self):
        tr = generate_synthetic("grid", {"vehicles": 6, "rows": 2, "cols": 2, "spacing": 50,
                                         "speed": 0, "radius": 100, "duration": 50}, seed=3)
        tg = snapshot_graphs(tr)
        complete = set(itertools.combinations(range(6), 2))
        assert all(set(s.edges) == complete for s in tg.snapshots)

    @pytest.mark.parametrize("kind, params", [
        ("line-road", {"vehicles": 0}), ("grid", {"speed": -1}), ("random-waypoint", {"width": 0}),
        ("grid", {"rows": 1.5}), ("line-road", {"lanes": 2}), ("random-waypoint", {"speed_min": 9, "speed_max": 1}),
        ("ring", {}),
    ])
    def test_invalid_params(self, kind, params):
        with pytest.raises(ParameterError):
            generate_synthetic(kind, params, seed=0)

    @pytest.mark.parametrize("kind, box", [
        ("line-road", (0, 0, 2000, 0)), ("grid", (0, 0, 800, 800)), ("random-waypoint", (0, 0, 1000, 1000))])
    def test_records_within_area_and_window(self, kind, box):
        tr = generate_synthetic(kind, {"vehicles": 10}, seed=5)
        for r in tr.records:
            assert box[0] <= r.x <= box[2] and box[1] <= r.y <= box[3]
            assert tr.spec.t_start <= r.t < tr.spec.t_end

    def test_params_file_format(self):
        assert parse_params("vehicles = 3  # comment\nspeed=2.5\n") == {"vehicles": "3", "speed": "2.5"}


def test_read_trace_infers_window(tmp_path):
    p = tmp_path / "t.csv"
    p.write_bytes(csv_bytes([("a", 5, 0, 0), ("a", 12, 0, 0)]))
    tr = read_trace(p, interval=4.0)
    assert (tr.spec.t_start, tr.spec.t_end) == (5.0, 16.0)
    assert len(tr.records) == 2 and tr.spec.n_snapshots == 3
    assert np.array_equal(tr.window_positions()[1][0], np.array([0]))
