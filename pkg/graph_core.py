import logging
from collections.abc import Iterable
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

import networkx as nx

logger = logging.getLogger(__name__)

Edge = tuple[int, int]
Dart = tuple[int, int]
Label = str | int


class GraphError(ValueError):
    """Raised when a graph or embedding violates its structural invariants"""


def edge_key(u: int, v: int) -> Edge:
    """Return the undirected edge {u, v} in normalized (min, max) form"""
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph over opaque integer vertex ids.

    adjacency maps every vertex to the frozenset of its neighbors. The
    mapping must not be mutated after construction.
    """
    adjacency: dict[int, frozenset[int]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for v, nbrs in self.adjacency.items():
            if v in nbrs:
                raise GraphError(f'Loop at vertex {v}')
            for u in nbrs:
                if u not in self.adjacency or v not in self.adjacency[u]:
                    raise GraphError(f'Adjacency is not symmetric on edge {v}-{u}')

    @classmethod
    def from_edges(cls, vertices: Iterable[int], edges: Iterable[tuple[int, int]]) -> 'Graph':
        """Build a graph from a vertex iterable and an edge iterable"""
        adj: dict[int, set[int]] = {v: set() for v in vertices}
        for u, v in edges:
            if u == v:
                raise GraphError(f'Loop at vertex {u}')
            if u not in adj or v not in adj:
                raise GraphError(f'Edge {u}-{v} references an unknown vertex')
            adj[u].add(v)
            adj[v].add(u)
        return cls({v: frozenset(n) for v, n in adj.items()})

    @classmethod
    def from_networkx(cls, g: nx.Graph) -> 'Graph':
        """Convert a networkx graph whose nodes are integers"""
        return cls.from_edges(g.nodes, g.edges)

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.vertices)
        g.add_edges_from(self.edges)
        return g

    @cached_property
    def vertices(self) -> tuple[int, ...]:
        return tuple(sorted(self.adjacency))

    @cached_property
    def edges(self) -> tuple[Edge, ...]:
        return tuple(sorted((u, v) for u, nbrs in self.adjacency.items() for v in nbrs if u < v))

    @cached_property
    def edge_set(self) -> frozenset[Edge]:
        return frozenset(self.edges)

    def __len__(self) -> int:
        return len(self.adjacency)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def neighbors(self, v: int) -> frozenset[int]:
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def has_edge(self, u: int, v: int) -> bool:
        return u in self.adjacency and v in self.adjacency[u]

    def max_degree(self) -> int:
        return max((len(n) for n in self.adjacency.values()), default=0)

    def min_degree(self) -> int:
        return min((len(n) for n in self.adjacency.values()), default=0)

    def without_vertices(self, removed: Iterable[int]) -> 'Graph':
        """Induced subgraph on V minus removed"""
        gone = set(removed)
        return Graph({v: nbrs - gone for v, nbrs in self.adjacency.items() if v not in gone})

    def without_edges(self, removed: Iterable[Edge]) -> 'Graph':
        adj = {v: set(n) for v, n in self.adjacency.items()}
        for u, v in removed:
            adj[u].discard(v)
            adj[v].discard(u)
        return Graph({v: frozenset(n) for v, n in adj.items()})

    def is_connected(self) -> bool:
        if not self.adjacency:
            return False
        return nx.is_connected(self.to_networkx())


@dataclass(frozen=True)
class Face:
    """A face traced from a rotation system.

    boundary starts at the lexicographically smallest dart, which also
    serves as the canonical face id.
    """
    boundary: tuple[Dart, ...]

    @property
    def key(self) -> Dart:
        return self.boundary[0]

    @property
    def size(self) -> int:
        return len(self.boundary)

    @cached_property
    def vertices(self) -> tuple[int, ...]:
        """Boundary vertices in walk order; repeated vertices appear repeatedly"""
        return tuple(u for u, _ in self.boundary)

    @cached_property
    def vertex_set(self) -> frozenset[int]:
        return frozenset(self.vertices)

    @cached_property
    def edge_set(self) -> frozenset[Edge]:
        return frozenset(edge_key(u, v) for u, v in self.boundary)

    def __lt__(self, other: 'Face') -> bool:
        return self.key < other.key


@dataclass(frozen=True)
class EmbeddedGraph:
    """Graph plus a rotation system (cyclic neighbor order per vertex).

    labels maps vertex ids back to the labels used by the input file.
    """
    graph: Graph
    rotation: dict[int, tuple[int, ...]]
    labels: dict[int, Label] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if set(self.rotation) != set(self.graph.adjacency):
            raise GraphError('Rotation system does not cover exactly the vertex set')
        for v, order in self.rotation.items():
            if len(order) != len(set(order)) or set(order) != self.graph.adjacency[v]:
                raise GraphError(f'Rotation at vertex {self.label(v)} is not a permutation of its neighbors')

    @classmethod
    def from_rotation(cls, rotation: dict[int, Iterable[int]],
                      labels: dict[int, Label] | None = None) -> 'EmbeddedGraph':
        """Build an embedded graph from rotations alone; adjacency is implied"""
        rot = {v: tuple(order) for v, order in rotation.items()}
        edges = [(u, v) for u, order in rot.items() for v in order if u < v]
        for u, order in rot.items():
            for v in order:
                if v not in rot:
                    raise GraphError(f'Rotation at vertex {u} references unknown vertex {v}')
        graph = Graph.from_edges(rot, edges)
        return cls(graph, rot, dict(labels) if labels else {})

    def label(self, v: int) -> Label:
        return self.labels.get(v, v)

    def labelled(self, vertices: Iterable[int]) -> list[Label]:
        return [self.label(v) for v in vertices]

    def successor(self, v: int, u: int) -> int:
        """Neighbor following u in the rotation at v"""
        order = self.rotation[v]
        return order[(order.index(u) + 1) % len(order)]

    @cached_property
    def faces(self) -> tuple[Face, ...]:
        return tuple(_trace(self))

    @cached_property
    def dart_face(self) -> dict[Dart, Face]:
        """Face lying to the side of each directed half-edge"""
        return {dart: face for face in self.faces for dart in face.boundary}

    @cached_property
    def corners(self) -> dict[int, tuple[Face, ...]]:
        """Faces around each vertex, one entry per incidence (corner), in rotation order"""
        result: dict[int, tuple[Face, ...]] = {}
        for v, order in self.rotation.items():
            # The corner between (u, v) and (v, succ_v(u)) belongs to the face of dart (u, v)
            result[v] = tuple(self.dart_face[(u, v)] for u in order)
        return result

    def edge_faces(self, u: int, v: int) -> tuple[Face, Face]:
        """The two faces on either side of edge uv (may be the same face)"""
        return self.dart_face[(u, v)], self.dart_face[(v, u)]


def _trace(eg: EmbeddedGraph) -> list[Face]:
    seen: set[Dart] = set()
    faces = []
    for start in sorted((u, v) for u in eg.rotation for v in eg.rotation[u]):
        if start in seen:
            continue
        walk = []
        dart = start
        while dart not in seen:
            seen.add(dart)
            walk.append(dart)
            u, v = dart
            dart = (v, eg.successor(v, u))
        # sorted iteration makes start the smallest dart of its face
        faces.append(Face(tuple(walk)))
    return faces


def face_trace(eg: EmbeddedGraph) -> list[Face]:
    """Trace all faces of the embedding.

    Each of the 2|E| darts lies on exactly one returned face, so the face
    sizes sum to 2|E|.
    """
    return list(eg.faces)


def euler_characteristic(eg: EmbeddedGraph) -> int:
    """Return |V| - |E| + |F| for a connected embedded graph.

    Raises:
        GraphError: if the graph is empty or disconnected
    """
    if not eg.graph.is_connected():
        raise GraphError('Euler characteristic requires a connected graph')
    # a lone vertex still bounds one (empty) face
    num_faces = len(eg.faces) if eg.graph.num_edges else 1
    return len(eg.graph) - eg.graph.num_edges + num_faces


def delete_vertices(eg: EmbeddedGraph, removed: Iterable[int]) -> EmbeddedGraph:
    """Induced embedded subgraph on V minus removed, rotations restricted in cyclic order

    Raises:
        GraphError: if a removed vertex id is unknown
    """
    gone = set(removed)
    unknown = gone - set(eg.rotation)
    if unknown:
        raise GraphError(f'Unknown vertices: {sorted(unknown)}')
    rotation = {v: tuple(u for u in order if u not in gone)
                for v, order in eg.rotation.items() if v not in gone}
    labels = {v: lbl for v, lbl in eg.labels.items() if v not in gone}
    return EmbeddedGraph(eg.graph.without_vertices(gone), rotation, labels)


def faces_normally_adjacent(f: Face, g: Face) -> bool:
    """True iff f and g are distinct and share exactly one edge and exactly two vertices"""
    if f.key == g.key:
        return False
    return len(f.edge_set & g.edge_set) == 1 and len(f.vertex_set & g.vertex_set) == 2


def faces_adjacent(f: Face, g: Face) -> bool:
    """True iff distinct faces f and g share at least one edge"""
    return f.key != g.key and bool(f.edge_set & g.edge_set)


def face_summary(eg: EmbeddedGraph) -> list[dict[str, Any]]:
    """JSON-ready description of every face, using input labels"""
    return [
        {'id': eg.labelled(face.key), 'size': face.size, 'vertices': eg.labelled(face.vertices)}
        for face in eg.faces
    ]
