import heapq
import logging
from collections import Counter
from collections.abc import Iterable
from dataclasses import dataclass
from functools import cached_property

from graph_core import Edge, Graph, edge_key

logger = logging.getLogger(__name__)

Arc = tuple[int, int]


class OrientationError(ValueError):
    """Raised when an orientation does not cover exactly the edges of its graph"""


@dataclass(frozen=True)
class Orientation:
    """One (tail, head) arc per oriented edge, kept sorted"""
    arcs: tuple[Arc, ...] = ()

    @classmethod
    def from_arcs(cls, arcs: Iterable[Arc]) -> 'Orientation':
        return cls(tuple(sorted(arcs)))

    @cached_property
    def out_degree(self) -> Counter[int]:
        return Counter(tail for tail, _ in self.arcs)

    @cached_property
    def edges(self) -> frozenset[Edge]:
        return frozenset(edge_key(u, v) for u, v in self.arcs)

    def max_out_degree(self) -> int:
        return max(self.out_degree.values(), default=0)

    def union(self, arcs: Iterable[Arc]) -> 'Orientation':
        return Orientation.from_arcs([*self.arcs, *arcs])


@dataclass(frozen=True)
class PeelingOrder:
    """Vertex removal order; each vertex has at most bound neighbors later in it"""
    order: tuple[int, ...]
    bound: int


def degeneracy(g: Graph) -> tuple[int, PeelingOrder]:
    """Peel minimum-degree vertices (smallest id on ties).

    Returns:
        (d, order) where d is the largest degree seen at removal time
    """
    degree = {v: g.degree(v) for v in g.vertices}
    heap = [(deg, v) for v, deg in degree.items()]
    heapq.heapify(heap)
    removed: set[int] = set()
    order = []
    d = 0
    while heap:
        deg, v = heapq.heappop(heap)
        if v in removed or deg != degree[v]:
            continue  # stale entry
        removed.add(v)
        order.append(v)
        d = max(d, deg)
        for u in g.neighbors(v):
            if u not in removed:
                degree[u] -= 1
                heapq.heappush(heap, (degree[u], u))
    return d, PeelingOrder(tuple(order), d)


def is_d_degenerate(g: Graph, d: int) -> bool:
    """True iff every subgraph of g has a vertex of degree at most d"""
    if d < 0:
        raise ValueError(f'd must be non-negative, got {d}')
    return degeneracy(g)[0] <= d


def orient_by_order(g: Graph, order: Iterable[int]) -> Orientation:
    """Orient every edge from its earlier to its later endpoint in order"""
    position = {v: i for i, v in enumerate(order)}
    return Orientation.from_arcs((u, v) if position[u] < position[v] else (v, u) for u, v in g.edges)


def orient_bounded(g: Graph, d: int) -> Orientation | None:
    """Acyclic orientation with max out-degree <= d, or None if g is not d-degenerate"""
    k, peeling = degeneracy(g)
    if k > d:
        return None
    # a vertex peeled at degree <= d has at most d neighbors peeled after it
    return orient_by_order(g, peeling.order)


def is_acyclic(vertices: Iterable[int], arcs: Iterable[Arc]) -> bool:
    """Kahn-style check: repeatedly strip vertices with no outgoing arcs"""
    out_deg: dict[int, int] = {v: 0 for v in vertices}
    preds: dict[int, list[int]] = {v: [] for v in out_deg}
    for tail, head in arcs:
        out_deg[tail] += 1
        preds[head].append(tail)
    sinks = [v for v, k in out_deg.items() if k == 0]
    stripped = 0
    while sinks:
        v = sinks.pop()
        stripped += 1
        for u in preds[v]:
            out_deg[u] -= 1
            if out_deg[u] == 0:
                sinks.append(u)
    return stripped == len(out_deg)


def check_covers(g: Graph, o: Orientation) -> None:
    """Raise OrientationError unless o orients every edge of g exactly once"""
    seen = Counter(edge_key(u, v) for u, v in o.arcs)
    doubled = sorted(e for e, n in seen.items() if n > 1)
    if doubled:
        raise OrientationError(f'Edges oriented more than once: {doubled}')
    extra = sorted(set(seen) - g.edge_set)
    if extra:
        raise OrientationError(f'Arcs on non-edges: {extra}')
    missing = sorted(g.edge_set - set(seen))
    if missing:
        raise OrientationError(f'Unoriented edges: {missing}')


def verify_orientation(g: Graph, o: Orientation, d: int) -> bool:
    """True iff o is acyclic with max out-degree <= d.

    Raises:
        OrientationError: if o does not cover exactly the edges of g
    """
    check_covers(g, o)
    return o.max_out_degree() <= d and is_acyclic(g.vertices, o.arcs)
