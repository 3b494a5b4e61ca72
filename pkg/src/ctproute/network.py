"""Road network model, JSON document IO, and shortest paths.

A network is a list of named nodes plus a list of edges with distinct
ids, strictly positive finite costs, and endpoints that must exist.
Parallel edges are allowed, self loops are not. Undirected by default;
a document level flag switches every edge to one way interpretation.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Mapping, Optional

from .errors import ParseError, UnknownNode, ValidationError

PassableFn = Callable[["Edge"], bool]

_DOC_KEYS = {"directed", "nodes", "edges"}
_EDGE_KEYS = {"id", "u", "v", "cost", "p"}


@dataclass(frozen=True)
class Edge:
    id: str
    u: str
    v: str
    cost: float

    def other(self, node: str) -> str:
        return self.v if node == self.u else self.u


@dataclass(frozen=True)
class PathResult:
    """A concrete path: node sequence plus its total cost."""

    nodes: tuple[str, ...]
    cost: float


@dataclass(frozen=True)
class RoadNetwork:
    nodes: tuple[str, ...]
    edges: tuple[Edge, ...]
    directed: bool = False

    def __post_init__(self) -> None:
        seen_nodes = set()
        for n in self.nodes:
            if not isinstance(n, str) or not n:
                raise ValidationError(f"node id must be a nonempty string: {n!r}")
            if n in seen_nodes:
                raise ValidationError(f"duplicate node id: {n!r}")
            seen_nodes.add(n)
        seen_edges = set()
        for e in self.edges:
            if not isinstance(e.id, str) or not e.id:
                raise ValidationError(f"edge id must be a nonempty string: {e.id!r}")
            if e.id in seen_edges:
                raise ValidationError(f"duplicate edge id: {e.id!r}")
            seen_edges.add(e.id)
            for endpoint in (e.u, e.v):
                if endpoint not in seen_nodes:
                    raise ValidationError(
                        f"edge {e.id!r} references unknown endpoint {endpoint!r}"
                    )
            if e.u == e.v:
                raise ValidationError(f"edge {e.id!r} is a self loop at {e.u!r}")
            if not isinstance(e.cost, (int, float)) or isinstance(e.cost, bool):
                raise ValidationError(f"edge {e.id!r} has non numeric cost")
            if not math.isfinite(e.cost) or e.cost <= 0:
                raise ValidationError(
                    f"edge {e.id!r} has nonpositive or non finite cost {e.cost!r}"
                )

    @cached_property
    def node_set(self) -> frozenset[str]:
        return frozenset(self.nodes)

    @cached_property
    def edge_by_id(self) -> dict[str, Edge]:
        return {e.id: e for e in self.edges}

    @cached_property
    def outgoing(self) -> dict[str, tuple[Edge, ...]]:
        """Edges traversable away from each node (both ways if undirected)."""
        adj: dict[str, list[Edge]] = {n: [] for n in self.nodes}
        for e in self.edges:
            adj[e.u].append(e)
            if not self.directed:
                adj[e.v].append(e)
        return {n: tuple(es) for n, es in adj.items()}

    @cached_property
    def incident(self) -> dict[str, tuple[Edge, ...]]:
        """Edges touching each node, regardless of direction."""
        adj: dict[str, list[Edge]] = {n: [] for n in self.nodes}
        for e in self.edges:
            adj[e.u].append(e)
            adj[e.v].append(e)
        return {n: tuple(es) for n, es in adj.items()}

    def require_node(self, node: str) -> None:
        if node not in self.node_set:
            raise UnknownNode(f"unknown node {node!r}")

    def total_cost(self) -> float:
        return sum(e.cost for e in self.edges)


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ValidationError(message)


def parse_graph_document(text: str) -> tuple[RoadNetwork, Optional[dict[str, float]]]:
    """Parse the JSON graph document.

    Returns the network and, when every edge carries one, the inline
    blockage probability map. Unknown keys anywhere are rejected so that
    typos fail loudly instead of being ignored.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"graph document is not valid JSON: {exc}") from exc
    _require(isinstance(doc, dict), "graph document must be a JSON object")
    extra = set(doc) - _DOC_KEYS
    _require(not extra, f"unknown graph document keys: {sorted(extra)}")
    _require("nodes" in doc and "edges" in doc, "graph document needs nodes and edges")
    directed = doc.get("directed", False)
    _require(isinstance(directed, bool), "directed flag must be a boolean")
    _require(isinstance(doc["nodes"], list), "nodes must be a list")
    _require(isinstance(doc["edges"], list), "edges must be a list")

    edges: list[Edge] = []
    probabilities: dict[str, float] = {}
    edges_with_p = 0
    for raw in doc["edges"]:
        _require(isinstance(raw, dict), "each edge must be a JSON object")
        extra = set(raw) - _EDGE_KEYS
        _require(not extra, f"unknown edge keys: {sorted(extra)}")
        for field in ("id", "u", "v", "cost"):
            _require(field in raw, f"edge missing required key {field!r}")
        cost = raw["cost"]
        _require(
            isinstance(cost, (int, float)) and not isinstance(cost, bool),
            f"edge {raw.get('id')!r} cost must be a number",
        )
        edges.append(Edge(id=raw["id"], u=raw["u"], v=raw["v"], cost=float(cost)))
        if "p" in raw:
            p = raw["p"]
            _require(
                isinstance(p, (int, float)) and not isinstance(p, bool),
                f"edge {raw['id']!r} p must be a number",
            )
            _require(0.0 <= float(p) <= 1.0, f"edge {raw['id']!r} p outside [0, 1]")
            probabilities[raw["id"]] = float(p)
            edges_with_p += 1

    net = RoadNetwork(nodes=tuple(doc["nodes"]), edges=tuple(edges), directed=directed)
    if edges_with_p == 0:
        return net, None
    _require(
        edges_with_p == len(edges),
        "inline probabilities must cover every edge or none",
    )
    return net, probabilities


def load_network(text: str) -> RoadNetwork:
    """Parse a graph document, ignoring any inline probabilities."""
    net, _ = parse_graph_document(text)
    return net


def dump_network(
    net: RoadNetwork, probabilities: Optional[Mapping[str, float]] = None
) -> str:
    """Serialize back to the document format. Round trips exactly."""
    edges = []
    for e in net.edges:
        item: dict = {"id": e.id, "u": e.u, "v": e.v, "cost": e.cost}
        if probabilities is not None:
            if e.id not in probabilities:
                raise ValidationError(f"no probability for edge {e.id!r}")
            item["p"] = float(probabilities[e.id])
        edges.append(item)
    doc = {"directed": net.directed, "nodes": list(net.nodes), "edges": edges}
    return json.dumps(doc, indent=2) + "\n"


def dijkstra_distances(
    net: RoadNetwork, source: str, passable: Optional[PassableFn] = None
) -> dict[str, float]:
    """Cheapest travel cost from source to every reachable node."""
    net.require_node(source)
    dist: dict[str, float] = {source: 0.0}
    heap: list[tuple[float, str]] = [(0.0, source)]
    done: set[str] = set()
    while heap:
        d, node = heapq.heappop(heap)
        if node in done:
            continue
        done.add(node)
        for e in net.outgoing[node]:
            if passable is not None and not passable(e):
                continue
            other = e.other(node)
            nd = d + e.cost
            if nd < dist.get(other, math.inf):
                dist[other] = nd
                heapq.heappush(heap, (nd, other))
    return dist


def shortest_path(
    net: RoadNetwork,
    source: str,
    target: str,
    passable: Optional[PassableFn] = None,
) -> Optional[PathResult]:
    """Cheapest path from source to target, or None if unreachable.

    Ties between equal cost paths are broken toward the lexicographically
    smallest node id sequence, which makes the result deterministic. The
    heap key is (cost, node sequence); with strictly positive costs the
    key grows along every extension, so plain Dijkstra settles each node
    with its lexicographically minimal cheapest path first.
    """
    net.require_node(source)
    net.require_node(target)
    heap: list[tuple[float, tuple[str, ...]]] = [(0.0, (source,))]
    done: set[str] = set()
    while heap:
        d, seq = heapq.heappop(heap)
        node = seq[-1]
        if node in done:
            continue
        done.add(node)
        if node == target:
            return PathResult(nodes=seq, cost=d)
        for e in net.outgoing[node]:
            if passable is not None and not passable(e):
                continue
            other = e.other(node)
            if other in done:
                continue
            heapq.heappush(heap, (d + e.cost, seq + (other,)))
    return None


def cheapest_edge(
    net: RoadNetwork,
    u: str,
    v: str,
    passable: Optional[PassableFn] = None,
) -> Optional[Edge]:
    """Cheapest passable edge from u to v; ties pick the smallest edge id."""
    best: Optional[Edge] = None
    for e in net.outgoing[u]:
        if e.other(u) != v:
            continue
        if passable is not None and not passable(e):
            continue
        if best is None or (e.cost, e.id) < (best.cost, best.id):
            best = e
    return best


def reachable_nodes(
    net: RoadNetwork, source: str, passable: Optional[PassableFn] = None
) -> set[str]:
    """Nodes reachable from source through passable edges."""
    net.require_node(source)
    seen = {source}
    stack = [source]
    while stack:
        node = stack.pop()
        for e in net.outgoing[node]:
            if passable is not None and not passable(e):
                continue
            other = e.other(node)
            if other not in seen:
                seen.add(other)
                stack.append(other)
    return seen


def path_cost(net: RoadNetwork, nodes: Iterable[str]) -> float:
    """Total cost of a node sequence using the cheapest edge per hop."""
    nodes = list(nodes)
    total = 0.0
    for a, b in zip(nodes, nodes[1:]):
        e = cheapest_edge(net, a, b)
        if e is None:
            raise ValidationError(f"no edge joins {a!r} and {b!r}")
        total += e.cost
    return total
