"""Physical network topologies: nodes, bidirectional fiber links, channel grid.

A topology file is a JSON document::

    {
      "name": "j14",
      "nodes": ["tokyo", "osaka", ...],
      "links": [{"a": "tokyo", "b": "osaka", "length_km": 400.0}, ...],
      "grid": {"channel_count": 50, "spacing_ghz": 100}
    }

Links are undirected in the file; the provisioning engine treats each as a
pair of directed fibers with independent spectrum occupancy.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from pathlib import Path


class TopologyError(ValueError):
    """Raised for schema violations or invariant failures, naming the offender."""


@dataclass(frozen=True)
class ChannelGrid:
    channel_count: int = 50
    spacing_ghz: int = 100

    def __post_init__(self):
        if self.channel_count < 1:
            raise TopologyError(f"channel_count must be >= 1, got {self.channel_count}")
        if self.spacing_ghz <= 0:
            raise TopologyError(f"spacing_ghz must be positive, got {self.spacing_ghz}")


@dataclass(frozen=True)
class Link:
    """Undirected fiber link; endpoints stored in sorted order."""

    a: str
    b: str
    length_km: float

    def __post_init__(self):
        if self.a == self.b:
            raise TopologyError(f"self-loop on node {self.a!r}")
        if self.length_km <= 0:
            raise TopologyError(
                f"non-positive length on link ({self.a!r},{self.b!r}): {self.length_km}"
            )
        if self.a > self.b:
            lo, hi = self.b, self.a
            object.__setattr__(self, "a", lo)
            object.__setattr__(self, "b", hi)

    @property
    def key(self) -> tuple[str, str]:
        return (self.a, self.b)


@dataclass(frozen=True)
class Topology:
    """Validated, immutable physical topology. Safe to share across runs."""

    name: str
    nodes: tuple[str, ...]
    links: tuple[Link, ...]
    grid: ChannelGrid = ChannelGrid()
    _adj: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        nodes = tuple(sorted(self.nodes))
        object.__setattr__(self, "nodes", nodes)
        if len(set(nodes)) != len(nodes):
            raise TopologyError("duplicate node identifiers")
        seen = set()
        adj: dict[str, dict[str, float]] = {n: {} for n in nodes}
        for link in self.links:
            for end in (link.a, link.b):
                if end not in adj:
                    raise TopologyError(f"link endpoint {end!r} not in node list")
            if link.key in seen:
                raise TopologyError(f"duplicate link ({link.a!r},{link.b!r})")
            seen.add(link.key)
            adj[link.a][link.b] = link.length_km
            adj[link.b][link.a] = link.length_km
        for n in nodes:
            if not adj[n]:
                raise TopologyError(f"node {n!r} has degree 0")
        # connectivity
        if nodes:
            reached = {nodes[0]}
            stack = [nodes[0]]
            while stack:
                for nbr in adj[stack.pop()]:
                    if nbr not in reached:
                        reached.add(nbr)
                        stack.append(nbr)
            if len(reached) != len(nodes):
                missing = sorted(set(nodes) - reached)
                raise TopologyError(f"graph is disconnected; unreachable: {missing}")
        object.__setattr__(self, "_adj", adj)

    def neighbors(self, node: str) -> dict[str, float]:
        return self._adj[node]

    def degree(self, node: str) -> int:
        return len(self._adj[node])

    def link_length(self, u: str, v: str) -> float:
        try:
            return self._adj[u][v]
        except KeyError:
            raise TopologyError(f"nodes {u!r} and {v!r} are not adjacent") from None

    def directed_fibers(self) -> list[tuple[str, str]]:
        out = []
        for link in self.links:
            out.append((link.a, link.b))
            out.append((link.b, link.a))
        return sorted(out)

    def path_length_km(self, path: list[str] | tuple[str, ...]) -> float:
        """Sum of link lengths along a node sequence; single-node path is 0."""
        total = 0.0
        for u, v in zip(path, path[1:]):
            total += self.link_length(u, v)
        return total

    def path_link_lengths(self, path) -> list[float]:
        return [self.link_length(u, v) for u, v in zip(path, path[1:])]

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "nodes": list(self.nodes),
            "links": [
                {"a": l.a, "b": l.b, "length_km": l.length_km}
                for l in sorted(self.links, key=lambda l: l.key)
            ],
            "grid": {
                "channel_count": self.grid.channel_count,
                "spacing_ghz": self.grid.spacing_ghz,
            },
        }
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def parse_topology(source: str | dict) -> Topology:
    """Parse and validate a topology from a JSON string or an already-decoded dict."""
    if isinstance(source, str):
        try:
            doc = json.loads(source)
        except json.JSONDecodeError as exc:
            raise TopologyError(f"invalid JSON: {exc}") from exc
    else:
        doc = source
    if not isinstance(doc, dict):
        raise TopologyError("topology document must be a JSON object")
    for key in ("name", "nodes", "links"):
        if key not in doc:
            raise TopologyError(f"missing required field {key!r}")
    grid_doc = doc.get("grid", {})
    grid = ChannelGrid(
        channel_count=grid_doc.get("channel_count", 50),
        spacing_ghz=grid_doc.get("spacing_ghz", 100),
    )
    links = []
    for i, entry in enumerate(doc["links"]):
        try:
            links.append(Link(entry["a"], entry["b"], float(entry["length_km"])))
        except KeyError as exc:
            raise TopologyError(f"link #{i} missing field {exc}") from exc
    return Topology(
        name=str(doc["name"]),
        nodes=tuple(str(n) for n in doc["nodes"]),
        links=tuple(links),
        grid=grid,
    )


def load_topology(path: str | Path) -> Topology:
    return parse_topology(Path(path).read_text())


def _dijkstra(topo: Topology, src: str, dst: str, removed_nodes: set, removed_edges: set):
    """Shortest path with deterministic lexicographic tie-break on node sequence.

    Heap entries are (distance, path) so equal-length paths pop in
    lexicographic order.
    """
    heap = [(0.0, (src,))]
    best_done = set()
    while heap:
        dist, path = heapq.heappop(heap)
        node = path[-1]
        if node == dst:
            return dist, list(path)
        if node in best_done:
            continue
        best_done.add(node)
        for nbr, length in sorted(topo.neighbors(node).items()):
            if nbr in removed_nodes or nbr in path:
                continue
            if (node, nbr) in removed_edges:
                continue
            heapq.heappush(heap, (dist + length, path + (nbr,)))
    return None


def shortest_path(topo: Topology, src: str, dst: str):
    """Shortest simple path src->dst, or None if unreachable."""
    res = _dijkstra(topo, src, dst, set(), set())
    return None if res is None else res[1]


def k_shortest_paths(topo: Topology, src: str, dst: str, k: int) -> list[list[str]]:
    """Up to k loop-free paths, ascending (length, lexicographic) via Yen's algorithm."""
    if src not in topo._adj or dst not in topo._adj:
        raise TopologyError(f"unknown node in pair ({src!r},{dst!r})")
    if src == dst:
        raise TopologyError("source and destination must differ")
    if k < 1:
        raise TopologyError(f"k must be >= 1, got {k}")

    first = _dijkstra(topo, src, dst, set(), set())
    if first is None:
        return []
    accepted = [first]
    candidates: list[tuple[float, tuple[str, ...]]] = []
    seen = {tuple(first[1])}
    while len(accepted) < k:
        _, prev_path = accepted[-1]
        for i in range(len(prev_path) - 1):
            spur = prev_path[i]
            root = prev_path[: i + 1]
            removed_edges = set()
            for _, p in accepted:
                if p[: i + 1] == root and len(p) > i + 1:
                    removed_edges.add((p[i], p[i + 1]))
            removed_nodes = set(root[:-1])
            res = _dijkstra(topo, spur, dst, removed_nodes, removed_edges)
            if res is None:
                continue
            spur_len, spur_path = res
            total = topo.path_length_km(root) + spur_len
            full = tuple(root[:-1]) + tuple(spur_path)
            if full not in seen:
                seen.add(full)
                heapq.heappush(candidates, (total, full))
        if not candidates:
            break
        length, path = heapq.heappop(candidates)
        accepted.append((length, list(path)))
    return [p for _, p in accepted]
