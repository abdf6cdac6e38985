import re

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from econkg.coref import CanonicalMap
from econkg.kgraph import (
    GraphError,
    build_graph,
    export_graph,
    linked_variables,
    load_graph_json,
    subgraph_around,
)
from econkg.triples import RdfTriple, dedup_triples, extract_triples


def random_triples(rng, n_nodes, n_edges):
    names = [f"node{i}" for i in range(n_nodes)]
    triples = []
    for _ in range(n_edges):
        a, b = rng.choice(n_nodes, size=2, replace=False)
        pol = ("increase", "decrease", "neutral")[rng.integers(3)]
        triples.append(RdfTriple(names[a], "kw", pol, names[b]))
    return dedup_triples(triples, CanonicalMap.identity())


def bfs_oracle(graph, center, hops):
    """Plain queue-based BFS over an undirected edge list."""
    edges = [(e.subject, e.object) for e in graph.edges.values()]
    dist = {center: 0}
    queue = [center]
    while queue:
        node = queue.pop(0)
        if dist[node] >= hops:
            continue
        for a, b in edges:
            for u, v in ((a, b), (b, a)):
                if u == node and v not in dist:
                    dist[v] = dist[node] + 1
                    queue.append(v)
    return dist


@pytest.fixture
def golden_graph(demo_corpus, demo_lexicon):
    sentence = demo_corpus.documents[0].sentences[0]
    triples = extract_triples(sentence, demo_lexicon)
    deduped = dedup_triples(triples, CanonicalMap.from_lexicon(demo_lexicon))
    return build_graph(deduped, centers=["inflation"])


class TestBuildGraph:
    def test_golden_chain(self, golden_graph):
        # four canonical entities linked in a chain of three increase edges
        assert len(golden_graph.nodes) == 4
        assert len(golden_graph.edges) == 3
        assert golden_graph.nodes["inflation"].is_center
        assert not golden_graph.nodes["food prices"].is_center
        assert all(e.polarity == "increase" for e in golden_graph.edges.values())

    def test_absent_center_still_created(self):
        graph = build_graph([], centers=["GDP"])
        assert list(graph.nodes) == ["GDP"]
        assert graph.nodes["GDP"].is_center
        assert graph.edges == {}
        assert any("GDP" in w for w in graph.warnings)

    def test_random_counts_match_set_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            triples = random_triples(rng, 12, 50)
            graph = build_graph(triples)
            expected_nodes = {t.subject for t in triples} | {t.object for t in triples}
            expected_edges = {(t.subject, t.polarity, t.object) for t in triples}
            assert set(graph.nodes) == expected_nodes
            assert set(graph.edges) == expected_edges

    def test_permutation_invariant(self):
        rng = np.random.default_rng(1)
        triples = random_triples(rng, 10, 30)
        g1 = build_graph(triples)
        shuffled = list(triples)
        rng.shuffle(shuffled)
        g2 = build_graph(dedup_triples(shuffled, CanonicalMap.identity()))
        assert set(g1.nodes) == set(g2.nodes)
        assert set(g1.edges) == set(g2.edges)

    def test_self_loop_rejected(self):
        with pytest.raises(GraphError):
            build_graph([RdfTriple("a", "kw", "increase", "a")])

    def test_endpoints_exist(self):
        rng = np.random.default_rng(3)
        graph = build_graph(random_triples(rng, 8, 20))
        for e in graph.edges.values():
            assert e.subject in graph.nodes
            assert e.object in graph.nodes


class TestSubgraphAround:
    def test_golden_one_hop(self, golden_graph):
        sub = subgraph_around(golden_graph, "inflation", 1)
        assert "food prices" in sub.nodes
        assert "migrant worker shortage" not in sub.nodes

    def test_saturation_is_component(self, golden_graph):
        sub = subgraph_around(golden_graph, "inflation", 99)
        assert set(sub.nodes) == set(golden_graph.nodes)
        assert set(sub.edges) == set(golden_graph.edges)

    def test_unknown_center(self, golden_graph):
        with pytest.raises(GraphError):
            subgraph_around(golden_graph, "nope", 1)

    def test_random_graphs_match_bfs_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(25):
            graph = build_graph(random_triples(rng, 20, 40))
            center = sorted(graph.nodes)[int(rng.integers(len(graph.nodes)))]
            hops = int(rng.integers(1, 5))
            sub = subgraph_around(graph, center, hops)
            assert set(sub.nodes) == set(bfs_oracle(graph, center, hops))

    @given(st.integers(0, 1000), st.integers(1, 6))
    @settings(max_examples=30, deadline=None)
    def test_monotone_in_hops(self, seed, hops):
        rng = np.random.default_rng(seed)
        graph = build_graph(random_triples(rng, 10, 15))
        center = sorted(graph.nodes)[0]
        smaller = set(subgraph_around(graph, center, hops).nodes)
        larger = set(subgraph_around(graph, center, hops + 1).nodes)
        assert smaller <= larger

    def test_saturation_equals_union_find_component(self):
        rng = np.random.default_rng(17)
        for _ in range(15):
            graph = build_graph(random_triples(rng, 25, 30))
            parent = {n: n for n in graph.nodes}

            def find(x):
                while parent[x] != x:
                    parent[x] = parent[parent[x]]
                    x = parent[x]
                return x

            for e in graph.edges.values():
                parent[find(e.subject)] = find(e.object)
            center = sorted(graph.nodes)[int(rng.integers(len(graph.nodes)))]
            component = {n for n in graph.nodes if find(n) == find(center)}
            saturated = set(subgraph_around(graph, center, 10 ** 6).nodes)
            assert saturated == component


class TestLinkedVariables:
    def test_isolated_center(self):
        graph = build_graph([], centers=["GDP"])
        assert linked_variables(graph, "GDP", 3) == []

    def test_golden_three_hops_reaches_shortage(self, golden_graph):
        names = linked_variables(golden_graph, "inflation", 3)
        assert "migrant worker shortage" in names
        assert names[0] == "food prices"  # hop-1 first

    def test_matches_bfs_oracle(self):
        rng = np.random.default_rng(13)
        for _ in range(20):
            graph = build_graph(random_triples(rng, 15, 30))
            center = sorted(graph.nodes)[int(rng.integers(len(graph.nodes)))]
            hops = int(rng.integers(1, 4))
            got = set(linked_variables(graph, center, hops))
            expected = set(bfs_oracle(graph, center, hops)) - {center}
            assert got == expected

    def test_ordering_by_hop_degree_name(self):
        triples = dedup_triples([
            RdfTriple("c", "kw", "increase", "a"),
            RdfTriple("c", "kw", "increase", "b"),
            RdfTriple("b", "kw", "increase", "d"),
            RdfTriple("b", "kw", "decrease", "e"),
        ], CanonicalMap.identity())
        graph = build_graph(triples)
        # hop 1: b (degree 3) before a (degree 1); hop 2: d, e by name
        assert linked_variables(graph, "c", 2) == ["b", "a", "d", "e"]


DOT_NODE = re.compile(r'^\s{2}"(?:[^"\\]|\\.)*"(?: \[[^\]]*\])?;$')
DOT_EDGE = re.compile(r'^\s{2}"(?:[^"\\]|\\.)*" -> "(?:[^"\\]|\\.)*" \[label="(?:[^"\\]|\\.)*"\];$')


def check_dot_grammar(text: str) -> tuple[int, int]:
    """Tiny structural validator for the exported subset of DOT."""
    lines = text.strip().split("\n")
    assert lines[0] == "digraph knowledge_graph {"
    assert lines[-1] == "}"
    nodes = edges = 0
    for line in lines[1:-1]:
        if DOT_EDGE.match(line):
            edges += 1
        elif DOT_NODE.match(line):
            nodes += 1
        else:
            raise AssertionError(f"unparseable DOT line: {line!r}")
    return nodes, edges


class TestExport:
    def test_empty_graph_both_formats(self):
        graph = build_graph([])
        assert load_graph_json(export_graph(graph, "graph-JSON")) == graph
        nodes, edges = check_dot_grammar(export_graph(graph, "DOT"))
        assert (nodes, edges) == (0, 0)

    def test_json_round_trip_golden(self, golden_graph):
        text = export_graph(golden_graph, "graph-JSON")
        assert load_graph_json(text) == golden_graph

    def test_json_round_trip_random(self):
        rng = np.random.default_rng(21)
        for _ in range(10):
            graph = build_graph(random_triples(rng, 10, 25))
            assert load_graph_json(export_graph(graph, "graph-JSON")) == graph

    def test_golden_dot_has_three_labeled_edges(self, golden_graph):
        nodes, edges = check_dot_grammar(export_graph(golden_graph, "DOT"))
        assert nodes == 4
        assert edges == 3

    def test_dot_quoting(self):
        triples = [RdfTriple('say "x"', "kw", "neutral", "back\\slash")]
        graph = build_graph(dedup_triples(triples, CanonicalMap.identity()))
        check_dot_grammar(export_graph(graph, "DOT"))

    def test_export_deterministic(self, golden_graph):
        assert export_graph(golden_graph, "graph-JSON") == export_graph(golden_graph, "graph-JSON")
        assert export_graph(golden_graph, "DOT") == export_graph(golden_graph, "DOT")

    def test_unknown_format(self, golden_graph):
        with pytest.raises(ValueError):
            export_graph(golden_graph, "gexf")
