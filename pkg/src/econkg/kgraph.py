"""Directed multigraph of canonical variable entities with polarity-typed edges.

The graph is built once from deduplicated triples and is immutable afterwards;
queries (hop expansion, linked variables) and exports (graph-JSON, DOT) are
read-only. Hop expansion ignores edge direction so upstream causes of a center
variable are reachable, while exported edges keep their direction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .triples import Provenance, RdfTriple

__all__ = ["GraphNode", "GraphEdge", "KnowledgeGraph", "build_graph",
           "export_graph", "load_graph_json"]


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class GraphNode:
    name: str
    is_center: bool = False
    frequency: int = 0


@dataclass(frozen=True)
class GraphEdge:
    subject: str
    polarity: str
    object: str
    keywords: tuple[str, ...] = ()
    provenance: tuple[Provenance, ...] = ()

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.subject, self.polarity, self.object)


@dataclass
class KnowledgeGraph:
    nodes: dict[str, GraphNode] = field(default_factory=dict)
    edges: dict[tuple[str, str, str], GraphEdge] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, KnowledgeGraph)
            and self.nodes == other.nodes
            and self.edges == other.edges
        )

    def degree(self, name: str) -> int:
        return sum(1 for e in self.edges.values() if name in (e.subject, e.object))

    def _adjacency(self) -> dict[str, set[str]]:
        adj: dict[str, set[str]] = {name: set() for name in self.nodes}
        for e in self.edges.values():
            adj[e.subject].add(e.object)
            adj[e.object].add(e.subject)
        return adj

    def hop_distances(self, center: str, hops: int) -> dict[str, int]:
        """Undirected BFS distances from center, cut off at ``hops``."""
        if center not in self.nodes:
            raise GraphError(f"unknown center {center!r}")
        adj = self._adjacency()
        dist = {center: 0}
        frontier = [center]
        depth = 0
        while frontier and depth < hops:
            depth += 1
            nxt = []
            for name in frontier:
                for neighbor in sorted(adj[name]):
                    if neighbor not in dist:
                        dist[neighbor] = depth
                        nxt.append(neighbor)
            frontier = nxt
        return dist


def build_graph(triples: list[RdfTriple], centers: list[str] | None = None) -> KnowledgeGraph:
    """Assemble the graph from canonicalized, deduplicated triples.

    A center absent from every triple is still created as an isolated node,
    with a warning recorded on the graph.
    """
    centers = centers or []
    center_set = set(centers)
    graph = KnowledgeGraph()

    freq: dict[str, int] = {}
    for t in triples:
        if t.subject == t.object:
            raise GraphError(f"self-loop triple on {t.subject!r}")
        weight = max(1, len(t.provenance))
        freq[t.subject] = freq.get(t.subject, 0) + weight
        freq[t.object] = freq.get(t.object, 0) + weight

    names = sorted(set(freq) | center_set)
    for name in names:
        graph.nodes[name] = GraphNode(
            name=name, is_center=name in center_set, frequency=freq.get(name, 0)
        )
    for center in centers:
        if center not in freq:
            graph.warnings.append(f"center {center!r} does not occur in any triple")

    for t in triples:
        key = (t.subject, t.polarity, t.object)
        existing = graph.edges.get(key)
        if existing is None:
            graph.edges[key] = GraphEdge(
                subject=t.subject,
                polarity=t.polarity,
                object=t.object,
                keywords=(t.relation_keyword,),
                provenance=t.provenance,
            )
        else:
            keywords = existing.keywords
            if t.relation_keyword not in keywords:
                keywords = keywords + (t.relation_keyword,)
            graph.edges[key] = GraphEdge(
                subject=existing.subject,
                polarity=existing.polarity,
                object=existing.object,
                keywords=keywords,
                provenance=existing.provenance + t.provenance,
            )
    return graph


def subgraph_around(graph: KnowledgeGraph, center: str, hops: int) -> KnowledgeGraph:
    """Induced subgraph on nodes within ``hops`` undirected steps of center."""
    if hops < 1:
        raise ValueError("hops must be >= 1")
    dist = graph.hop_distances(center, hops)
    sub = KnowledgeGraph()
    for name in sorted(dist):
        sub.nodes[name] = graph.nodes[name]
    for key, edge in graph.edges.items():
        if edge.subject in dist and edge.object in dist:
            sub.edges[key] = edge
    return sub


def linked_variables(graph: KnowledgeGraph, center: str, hops: int = 1) -> list[str]:
    """Entities reachable within ``hops`` of center, nearest and best-connected first."""
    dist = graph.hop_distances(center, hops)
    others = [name for name in dist if name != center]
    return sorted(others, key=lambda n: (dist[n], -graph.degree(n), n))


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_graph(graph: KnowledgeGraph, format: str = "graph-JSON") -> str:
    """Serialize deterministically to graph-JSON or DOT."""
    if format == "graph-JSON":
        payload = {
            "nodes": [
                {
                    "name": n.name,
                    "is_center": n.is_center,
                    "frequency": n.frequency,
                }
                for n in sorted(graph.nodes.values(), key=lambda n: n.name)
            ],
            "edges": [
                {
                    "subject": e.subject,
                    "polarity": e.polarity,
                    "object": e.object,
                    "keywords": list(e.keywords),
                    "provenance": [
                        {"doc": p.doc_id, "sent": p.sentence_index,
                         "span": list(p.keyword_span)}
                        for p in e.provenance
                    ],
                }
                for e in sorted(graph.edges.values(), key=lambda e: e.key)
            ],
        }
        return json.dumps(payload, indent=2, ensure_ascii=False, sort_keys=True) + "\n"
    if format == "DOT":
        lines = ["digraph knowledge_graph {"]
        for node in sorted(graph.nodes.values(), key=lambda n: n.name):
            style = ' [shape=doublecircle, style=filled, fillcolor="gold"]' if node.is_center else ""
            lines.append(f"  {_dot_quote(node.name)}{style};")
        for edge in sorted(graph.edges.values(), key=lambda e: e.key):
            lines.append(
                f"  {_dot_quote(edge.subject)} -> {_dot_quote(edge.object)} "
                f"[label={_dot_quote(edge.polarity)}];"
            )
        lines.append("}")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown export format {format!r}")


def load_graph_json(text: str) -> KnowledgeGraph:
    payload = json.loads(text)
    graph = KnowledgeGraph()
    for n in payload.get("nodes", []):
        graph.nodes[n["name"]] = GraphNode(
            name=n["name"],
            is_center=bool(n.get("is_center", False)),
            frequency=int(n.get("frequency", 0)),
        )
    for e in payload.get("edges", []):
        provenance = tuple(
            Provenance(p["doc"], p["sent"], tuple(p.get("span", (0, 0))))
            for p in e.get("provenance", [])
        )
        edge = GraphEdge(
            subject=e["subject"],
            polarity=e["polarity"],
            object=e["object"],
            keywords=tuple(e.get("keywords", ())),
            provenance=provenance,
        )
        for endpoint in (edge.subject, edge.object):
            if endpoint not in graph.nodes:
                raise GraphError(f"edge endpoint {endpoint!r} missing from nodes")
        graph.edges[edge.key] = edge
    return graph
