import json

import pytest
from hypothesis import given, settings, strategies as st

from helpers import mk_topo, toy_instance
from ipowdm.oracle import enumerate_simple_paths
from ipowdm.topology import (
    ChannelGrid,
    Link,
    Topology,
    TopologyError,
    k_shortest_paths,
    load_topology,
    parse_topology,
    shortest_path,
)


TRIANGLE = mk_topo("tri", [("A", "B", 1), ("B", "C", 1), ("A", "C", 3)])


class TestValidation:
    def test_self_loop_rejected(self):
        with pytest.raises(TopologyError, match="self-loop"):
            Link("x", "x", 1.0)

    def test_non_positive_length_rejected(self):
        with pytest.raises(TopologyError, match="non-positive"):
            Link("a", "b", 0.0)

    def test_link_endpoints_sorted(self):
        link = Link("b", "a", 5.0)
        assert link.key == ("a", "b")

    def test_duplicate_link_rejected(self):
        with pytest.raises(TopologyError, match="duplicate link"):
            mk_topo("t", [("a", "b", 1), ("b", "a", 2)])

    def test_unknown_endpoint_rejected(self):
        with pytest.raises(TopologyError, match="not in node list"):
            Topology("t", ("a", "b"), (Link("a", "c", 1.0),))

    def test_duplicate_nodes_rejected(self):
        with pytest.raises(TopologyError, match="duplicate node"):
            Topology("t", ("a", "a", "b"), (Link("a", "b", 1.0),))

    def test_isolated_node_rejected(self):
        with pytest.raises(TopologyError, match="degree 0"):
            Topology("t", ("a", "b", "c"), (Link("a", "b", 1.0),))

    def test_disconnected_graph_rejected(self):
        with pytest.raises(TopologyError, match="disconnected"):
            Topology(
                "t",
                ("a", "b", "c", "d"),
                (Link("a", "b", 1.0), Link("c", "d", 1.0)),
            )

    def test_grid_validation(self):
        with pytest.raises(TopologyError):
            ChannelGrid(0, 100)
        with pytest.raises(TopologyError):
            ChannelGrid(10, 0)

    def test_missing_field_rejected(self):
        with pytest.raises(TopologyError, match="missing required field"):
            parse_topology({"name": "t", "nodes": ["a"]})

    def test_invalid_json_rejected(self):
        with pytest.raises(TopologyError, match="invalid JSON"):
            parse_topology("{nope")

    def test_link_missing_field_named(self):
        doc = {"name": "t", "nodes": ["a", "b"], "links": [{"a": "a", "b": "b"}]}
        with pytest.raises(TopologyError, match="link #0"):
            parse_topology(doc)


class TestAccessors:
    def test_degree_and_neighbors(self):
        assert TRIANGLE.degree("A") == 2
        assert TRIANGLE.neighbors("A") == {"B": 1, "C": 3}

    def test_link_length_non_adjacent(self):
        topo = mk_topo("line", [("a", "b", 1), ("b", "c", 1)])
        with pytest.raises(TopologyError, match="not adjacent"):
            topo.link_length("a", "c")

    def test_directed_fibers_both_directions_sorted(self):
        fibers = TRIANGLE.directed_fibers()
        assert fibers == sorted(fibers)
        assert ("A", "B") in fibers and ("B", "A") in fibers
        assert len(fibers) == 2 * len(TRIANGLE.links)

    def test_path_lengths(self):
        assert TRIANGLE.path_length_km(["A", "B", "C"]) == 2
        assert TRIANGLE.path_link_lengths(["A", "B", "C"]) == [1, 1]
        assert TRIANGLE.path_length_km(["A"]) == 0.0


class TestSerialization:
    def test_round_trip_identity(self):
        raw = mk_topo("rt", [("a", "b", 10), ("b", "c", 20), ("a", "c", 15)])
        once = parse_topology(raw.to_json())
        twice = parse_topology(once.to_json())
        assert once == twice
        assert once.to_json() == raw.to_json()

    def test_load_topology_file(self, tmp_path):
        path = tmp_path / "net.json"
        path.write_text(TRIANGLE.to_json())
        assert load_topology(path).to_json() == TRIANGLE.to_json()

    def test_to_dict_links_sorted(self):
        d = mk_topo("s", [("b", "c", 1), ("a", "b", 1)]).to_dict()
        keys = [(l["a"], l["b"]) for l in d["links"]]
        assert keys == sorted(keys)


class TestShortestPaths:
    def test_two_hop_beats_longer_direct(self):
        paths = k_shortest_paths(TRIANGLE, "A", "C", 2)
        assert paths == [["A", "B", "C"], ["A", "C"]]

    def test_shortest_path_wrapper(self):
        assert shortest_path(TRIANGLE, "A", "C") == ["A", "B", "C"]

    def test_same_endpoints_rejected(self):
        with pytest.raises(TopologyError):
            k_shortest_paths(TRIANGLE, "A", "A", 1)

    def test_unknown_node_rejected(self):
        with pytest.raises(TopologyError):
            k_shortest_paths(TRIANGLE, "A", "Z", 1)

    def test_k_below_one_rejected(self):
        with pytest.raises(TopologyError):
            k_shortest_paths(TRIANGLE, "A", "B", 0)

    def test_k_saturates_at_simple_path_count(self):
        paths = k_shortest_paths(TRIANGLE, "A", "C", 50)
        assert len(paths) == len(enumerate_simple_paths(TRIANGLE, "A", "C"))

    def test_equal_lengths_break_ties_lexicographically(self):
        square = mk_topo(
            "sq", [("a", "b", 1), ("b", "d", 1), ("a", "c", 1), ("c", "d", 1)]
        )
        paths = k_shortest_paths(square, "a", "d", 2)
        assert paths == [["a", "b", "d"], ["a", "c", "d"]]

    @settings(deadline=None, max_examples=40)
    @given(st.integers(0, 10_000))
    def test_matches_exhaustive_enumeration(self, seed):
        topo, _ = toy_instance(seed)
        for src in topo.nodes:
            for dst in topo.nodes:
                if src == dst:
                    continue
                expected = enumerate_simple_paths(topo, src, dst)
                got = k_shortest_paths(topo, src, dst, len(expected) + 5)
                assert got == expected
