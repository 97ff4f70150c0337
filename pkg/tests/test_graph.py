import gzip

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from mfrank.errors import CapacityError, EmptyGraphError, GraphParseError, UndefinedCorrelationError
from mfrank.graph import (DirectedGraph, class_partition, edge_degree_correlation, from_edge_list,
                          mean_in_degree, parse_edge_lines, read_edge_list, write_edge_list, write_mapping)
from mfrank.synth import GeneratorSpec, generate

edge_lists = st.lists(st.tuples(st.integers(0, 30), st.integers(0, 30)), max_size=120)


def test_cycle_degrees(cycle3):
    assert (cycle3.node_count, cycle3.edge_count) == (3, 3)
    assert cycle3.k_in.tolist() == [1, 1, 1]
    assert cycle3.k_out.tolist() == [1, 1, 1]


def test_single_edge_dangling(two_node):
    assert two_node.k_out[1] == 0 and two_node.k_in[1] == 1
    assert two_node.dangling.tolist() == [False, True]
    assert two_node.inv_out.tolist() == [1.0, 0.0]


def test_adjacency_views(star):
    assert star.predecessors(0).tolist() == [1, 2, 3]
    assert star.successors(2).tolist() == [0]
    assert star.successors(0).size == 0


def test_arrays_are_read_only(cycle3):
    with pytest.raises(ValueError):
        cycle3.k_in[0] = 5


def test_sample_file_keeps_duplicate(tmp_path):
    lines = ["# sample", "1 2", "2 3", "3 1", "1 2", "4 1", "", "5 4", "2 5", "3 4", "4 3", "5 1"]
    f = tmp_path / "sample.txt"
    f.write_text("\n".join(lines) + "\n")
    g, ids = read_edge_list(f)
    # counted by hand: ten edge lines, one of them repeated
    assert g.edge_count == 10
    assert ids.tolist() == [1, 2, 3, 4, 5]
    assert read_edge_list(f, dedup=True)[0].edge_count == 9


def test_dedup_and_self_loops():
    g = from_edge_list([(0, 0), (0, 1), (0, 1), (1, 0)], dedup=True, drop_self_loops=True)
    assert g.edge_count == 2
    assert from_edge_list([(0, 0), (0, 1), (0, 1)]).edge_count == 3


def test_parse_error_line_number():
    with pytest.raises(GraphParseError) as e:
        parse_edge_lines(["# header", "0 1", "2 x"])
    assert e.value.line_number == 3
    with pytest.raises(GraphParseError) as e:
        parse_edge_lines(["0 1 2"])
    assert e.value.line_number == 1
    with pytest.raises(GraphParseError):
        parse_edge_lines(["-1 2"])


def test_id_overflow():
    with pytest.raises(CapacityError):
        parse_edge_lines([f"{2**64} 1"])
    with pytest.raises(CapacityError):
        from_edge_list([(0, 2**31)])


def test_sparse_ids_and_gzip(tmp_path):
    f = tmp_path / "e.txt.gz"
    with gzip.open(f, "wt") as fh:
        fh.write("1000000000000 7\n7 42\n42 1000000000000\n")
    g, ids = read_edge_list(f)
    assert ids.tolist() == [7, 42, 1000000000000]
    assert g.edge_count == 3 and g.k_in.tolist() == [1, 1, 1]
    m = tmp_path / "map.txt"
    write_mapping(ids, m)
    rows = [ln.split() for ln in m.read_text().splitlines() if not ln.startswith("#")]
    assert rows == [["7", "0"], ["42", "1"], ["1000000000000", "2"]]


def test_round_trip_keeps_isolated_nodes(tmp_path):
    g = from_edge_list([(0, 1), (1, 3)], node_count=6)
    f = tmp_path / "g.txt"
    write_edge_list(g, f)
    h, _ = read_edge_list(f)
    assert h.node_count == 6
    assert np.array_equal(h.k_in, g.k_in) and np.array_equal(h.k_out, g.k_out)


def test_class_partition_examples(cycle3, star):
    t = class_partition(cycle3)
    assert t.as_dict() == {(1, 1): 3}
    assert t.probability.tolist() == [1.0]
    assert class_partition(star).as_dict() == {(3, 0): 1, (0, 1): 3}


def test_class_partition_matches_histogram():
    g = generate(GeneratorSpec(node_count=3000, seed=11))
    t = class_partition(g)
    assert t.as_dict() == oracles.class_histogram(g.k_in, g.k_out)
    assert t.counts.sum() == g.node_count
    for c in (0, len(t) // 2, len(t) - 1):
        assert np.all(t.class_of[t.members(c)] == c)


def test_mean_in_degree(cycle3, star):
    assert mean_in_degree(cycle3) == 1.0
    assert mean_in_degree(star) == 0.75
    with pytest.raises(EmptyGraphError):
        mean_in_degree(DirectedGraph(0, [], []))


def test_mean_in_degree_crawl_scale():
    # large-crawl ratio: 7.5e8 links over 8.1e7 pages
    g = DirectedGraph(810, np.zeros(7500, dtype=np.int64), np.zeros(7500, dtype=np.int64))
    assert mean_in_degree(g) == pytest.approx(9.259, abs=1e-3)


def test_edge_degree_correlation_undefined_on_cycle(cycle3):
    with pytest.raises(UndefinedCorrelationError):
        edge_degree_correlation(cycle3)


def test_edge_degree_correlation_two_blocks():
    # hubs 0..2 (out 4) link to sinks 3..4; light nodes 5..9 (out 1) link to 10..14
    edges = [(h, 3 + (i % 2)) for h in range(3) for i in range(4)]
    edges += [(5 + i, 10 + i) for i in range(5)]
    g = from_edge_list(edges)
    src, dst = g.edges()
    expected = oracles.pearson_mp(g.k_out[src], g.k_in[dst])
    r = edge_degree_correlation(g)
    assert r > 0.9
    assert r == pytest.approx(expected, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(edge_lists)
def test_degree_conservation(edges):
    g = from_edge_list(edges, node_count=31)
    assert g.k_in.sum() == g.k_out.sum() == g.edge_count == len(edges)
    kin, kout = oracles.degrees(31, edges)
    assert g.k_in.tolist() == kin and g.k_out.tolist() == kout
    assert np.all(g.out_indices < 31) and np.all(g.in_indices < 31)


@settings(max_examples=30, deadline=None)
@given(edge_lists)
def test_text_round_trip(tmp_path_factory, edges):
    g = from_edge_list(edges, node_count=31)
    f = tmp_path_factory.mktemp("rt") / "g.txt"
    write_edge_list(g, f)
    h, _ = read_edge_list(f)
    assert np.array_equal(h.k_in, g.k_in) and np.array_equal(h.k_out, g.k_out)
    assert np.array_equal(h.out_indices, g.out_indices)
