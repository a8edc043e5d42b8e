import logging
from collections.abc import Iterator
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from graph_core import Edge, EmbeddedGraph, Face, Graph, edge_key

logger = logging.getLogger(__name__)

# (i, j) pairs whose classes are covered by the forbidden catalog
TIJ_PAIRS = ((3, 4), (3, 6), (4, 6), (4, 7))

LIGHT_QUAD = (3, 4, 4, 4)
LIGHT_PENTAGON = (3, 4, 3, 4, 4)


class PatternError(ValueError):
    """Raised on malformed patterns or out-of-contract search parameters"""


class ConstraintKind(Enum):
    EXACT = 'exact'
    AT_LEAST = 'at_least'
    ANY = 'any'


@dataclass(frozen=True)
class DegreeConstraint:
    """Constraint on the host degree of the vertex a pattern vertex maps to"""
    kind: ConstraintKind = ConstraintKind.ANY
    k: int = 0

    def admits(self, degree: int) -> bool:
        if self.kind is ConstraintKind.EXACT:
            return degree == self.k
        if self.kind is ConstraintKind.AT_LEAST:
            return degree >= self.k
        return True

    def __str__(self) -> str:
        if self.kind is ConstraintKind.EXACT:
            return f'={self.k}'
        if self.kind is ConstraintKind.AT_LEAST:
            return f'>={self.k}'
        return '*'


ANY = DegreeConstraint()


def exact(k: int) -> DegreeConstraint:
    return DegreeConstraint(ConstraintKind.EXACT, k)


def at_least(k: int) -> DegreeConstraint:
    return DegreeConstraint(ConstraintKind.AT_LEAST, k)


@dataclass(frozen=True)
class Pattern:
    """Small connected graph with per-vertex host-degree constraints.

    Pattern vertices are 0..n-1; names gives each one a readable label
    such as 'o' or 'v1'.
    """
    name: str
    skeleton: Graph
    constraints: dict[int, DegreeConstraint] = field(default_factory=dict)
    names: dict[int, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for v in self.skeleton.vertices:
            c = self.constraint(v)
            if c.kind is ConstraintKind.EXACT and self.skeleton.degree(v) > c.k:
                raise PatternError(f'{self.name}: vertex {self.vertex_name(v)} exceeds its exact degree {c.k}')
        if len(self.skeleton) > 1 and not self.skeleton.is_connected():
            raise PatternError(f'{self.name}: skeleton is not connected')

    def constraint(self, v: int) -> DegreeConstraint:
        return self.constraints.get(v, ANY)

    def vertex_name(self, v: int) -> str:
        return self.names.get(v, str(v))


@dataclass(frozen=True)
class MatchWitness:
    """Injective map from pattern vertices to host vertices"""
    pattern: str
    mapping: dict[int, int]

    def as_tuple(self) -> tuple[int, ...]:
        return tuple(self.mapping[v] for v in sorted(self.mapping))

    def to_dict(self, p: Pattern, eg: EmbeddedGraph | None = None) -> dict[str, Any]:
        label = eg.label if eg is not None else (lambda v: v)
        return {
            'pattern': self.pattern,
            'mapping': {p.vertex_name(v): label(h) for v, h in sorted(self.mapping.items())},
        }


def _pattern(name: str, names: list[str], edges: list[tuple[str, str]],
             degrees: dict[str, int] | None = None) -> Pattern:
    index = {n: i for i, n in enumerate(names)}
    skeleton = Graph.from_edges(range(len(names)), [(index[a], index[b]) for a, b in edges])
    constraints = {index[n]: exact(k) for n, k in (degrees or {}).items()}
    return Pattern(name, skeleton, constraints, dict(enumerate(names)))


def forbidden_catalog() -> list[Pattern]:
    """The six forbidden configurations, named 4a to 4f.

    Vertex numbering is breadth-first so every vertex after the first has
    an earlier neighbor, which keeps the matcher's candidate sets small.
    """
    return [
        # (a) 4-cycle E-N-W-S with chord N-S
        _pattern('4a', ['n', 'e', 's', 'w'],
                 [('e', 'n'), ('n', 'w'), ('w', 's'), ('s', 'e'), ('n', 's')]),
        # (b) triangle ne-h-nw glued to quadrilateral ne-nw-sw-se along ne-nw
        _pattern('4b', ['ne', 'nw', 'h', 'se', 'sw'],
                 [('ne', 'h'), ('h', 'nw'), ('nw', 'sw'), ('sw', 'se'), ('se', 'ne'), ('ne', 'nw')]),
        # (c) two quadrilaterals sharing the middle edge e-w
        _pattern('4c', ['e', 'w', 'ne', 'se', 'nw', 'sw'],
                 [('ne', 'nw'), ('nw', 'w'), ('w', 'sw'), ('sw', 'se'), ('se', 'e'), ('e', 'ne'), ('e', 'w')]),
        # (d) hexagon v1..v6 with apex n on edge v1v2
        _pattern('4d', ['v1', 'v2', 'v6', 'n', 'v3', 'v5', 'v4'],
                 [('v1', 'v2'), ('v2', 'v3'), ('v3', 'v4'), ('v4', 'v5'), ('v5', 'v6'), ('v6', 'v1'),
                  ('v1', 'n'), ('n', 'v2')]),
        # (e) pentagon v1..v5, triangle on v2v3, quadrilateral on v1v2
        _pattern('4e', ['v2', 'v1', 'v3', 'nw', 'ne2', 'v5', 'ne1', 'v4'],
                 [('v1', 'v2'), ('v2', 'v3'), ('v3', 'v4'), ('v4', 'v5'), ('v5', 'v1'),
                  ('v2', 'nw'), ('nw', 'v3'), ('v2', 'ne2'), ('ne2', 'ne1'), ('ne1', 'v1')]),
        # (f) pentagon v1..v5, triangle on v3v4, quadrilateral on v1v2
        _pattern('4f', ['v1', 'v2', 'v5', 'ne1', 'v3', 'ne2', 'v4', 'sw'],
                 [('v1', 'v2'), ('v2', 'v3'), ('v3', 'v4'), ('v4', 'v5'), ('v5', 'v1'),
                  ('v3', 'sw'), ('sw', 'v4'), ('v2', 'ne2'), ('ne2', 'ne1'), ('ne1', 'v1')]),
    ]


def reducible_catalog() -> list[Pattern]:
    """The three reducible configurations with their exact host degrees.

    Pendant stubs in the drawings are encoded only through the exact degree
    of their endpoint; stub endpoints are not required to be distinct.
    """
    return [
        # triangle o-v1-v2 with pendant edge o-v3
        _pattern('XA', ['o', 'v1', 'v2', 'v3'],
                 [('v2', 'o'), ('o', 'v1'), ('v1', 'v2'), ('o', 'v3')],
                 {'o': 4, 'v1': 4, 'v2': 3, 'v3': 3}),
        # pentagon v1..v5 with triangle v1-v2-h
        _pattern('XB', ['v1', 'v2', 'h', 'v5', 'v3', 'v4'],
                 [('v1', 'v2'), ('v2', 'v3'), ('v3', 'v4'), ('v4', 'v5'), ('v5', 'v1'),
                  ('v1', 'h'), ('v2', 'h')],
                 {'v1': 4, 'v2': 4, 'h': 4, 'v4': 4, 'v3': 3, 'v5': 3}),
        _pattern('XC', ['v1', 'v2', 'h', 'v5', 'v3', 'v4'],
                 [('v1', 'v2'), ('v2', 'v3'), ('v3', 'v4'), ('v4', 'v5'), ('v5', 'v1'),
                  ('v1', 'h'), ('v2', 'h')],
                 {'v1': 4, 'h': 4, 'v3': 4, 'v5': 4, 'v2': 3, 'v4': 3}),
    ]


def iter_matches(host: Graph, p: Pattern) -> Iterator[MatchWitness]:
    """Yield every subgraph match of p in host in lexicographic mapping order.

    Matching is not induced: extra host edges among mapped vertices are
    allowed. Degree constraints are checked against host degrees.
    """
    order = p.skeleton.vertices
    if not order:
        yield MatchWitness(p.name, {})
        return
    if len(order) > len(host):
        return
    host_vertices = host.vertices
    mapping: dict[int, int] = {}
    used: set[int] = set()

    def candidates(pv: int) -> list[int]:
        mapped_nbrs = [mapping[u] for u in p.skeleton.neighbors(pv) if u in mapping]
        if not mapped_nbrs:
            pool = host_vertices
        else:
            common = set(host.neighbors(mapped_nbrs[0]))
            for hv in mapped_nbrs[1:]:
                common &= host.neighbors(hv)
            pool = sorted(common)
        need = p.skeleton.degree(pv)
        c = p.constraint(pv)
        return [hv for hv in pool
                if hv not in used and host.degree(hv) >= need and c.admits(host.degree(hv))]

    # explicit stack of candidate iterators keeps deep searches off the call stack
    stack = [iter(candidates(order[0]))]
    while stack:
        depth = len(stack) - 1
        pv = order[depth]
        if pv in mapping:
            used.discard(mapping.pop(pv))
        hv = next(stack[-1], None)
        if hv is None:
            stack.pop()
            continue
        mapping[pv] = hv
        used.add(hv)
        if depth + 1 == len(order):
            yield MatchWitness(p.name, dict(mapping))
            continue
        stack.append(iter(candidates(order[depth + 1])))


def match_pattern(host: Graph, p: Pattern) -> MatchWitness | None:
    """First (lexicographically smallest) match of p in host, or None"""
    return next(iter_matches(host, p), None)


def validate_witness(host: Graph, p: Pattern, w: MatchWitness) -> bool:
    """Re-check a witness against the host: injective, edge-preserving, degree-feasible"""
    if set(w.mapping) != set(p.skeleton.vertices):
        return False
    images = list(w.mapping.values())
    if len(set(images)) != len(images) or any(h not in host.adjacency for h in images):
        return False
    if any(not host.has_edge(w.mapping[a], w.mapping[b]) for a, b in p.skeleton.edges):
        return False
    return all(p.constraint(v).admits(host.degree(h)) for v, h in w.mapping.items())


def iter_cycles_of_length(host: Graph, k: int) -> Iterator[tuple[int, ...]]:
    """Yield each k-cycle once, starting at its smallest vertex, smaller neighbor second"""
    if k < 3:
        raise PatternError(f'Cycle length must be at least 3, got {k}')
    for start in host.vertices:
        path = [start]
        # stack[i] iterates the candidates for path[i + 1]
        stack = [iter(sorted(u for u in host.neighbors(start) if u > start))]
        while stack:
            nxt = next(stack[-1], None)
            if nxt is None:
                stack.pop()
                path.pop()
                continue
            if len(path) == k - 1:
                # path[1] < last fixes the traversal direction
                if path[1] < nxt and host.has_edge(nxt, start):
                    yield (*path, nxt)
                continue
            path.append(nxt)
            stack.append(iter(sorted(u for u in host.neighbors(nxt) if u > start and u not in path)))


def find_cycle_of_length(host: Graph, k: int) -> tuple[int, ...] | None:
    """Return some k-cycle of host as a vertex sequence, or None.

    Raises:
        PatternError: if k < 3
    """
    return next(iter_cycles_of_length(host, k), None)


def in_class_tij(host: Graph, i: int, j: int) -> bool:
    """True iff host has neither an i-cycle nor a j-cycle"""
    return find_cycle_of_length(host, i) is None and find_cycle_of_length(host, j) is None


def is_forbidden_free(host: Graph) -> tuple[bool, MatchWitness | None]:
    """Check host against the forbidden catalog.

    Returns:
        (True, None) if no catalog entry occurs; otherwise (False, witness)
        for the first entry in catalog order that matches
    """
    for p in forbidden_catalog():
        witness = match_pattern(host, p)
        if witness is not None:
            logger.debug('Forbidden configuration %s found', p.name)
            return False, witness
    return True, None


def catalog_by_name() -> dict[str, Pattern]:
    return {p.name: p for p in forbidden_catalog() + reducible_catalog()}


def superclass_report() -> dict[str, dict[str, list[int]]]:
    """For each (i, j) pair and catalog entry, a witnessing i- or j-cycle.

    An entry maps to an empty list when it has neither cycle, which would
    refute the superclass claim.
    """
    report: dict[str, dict[str, list[int]]] = {}
    for i, j in TIJ_PAIRS:
        row = {}
        for p in forbidden_catalog():
            cycle = find_cycle_of_length(p.skeleton, i) or find_cycle_of_length(p.skeleton, j)
            row[p.name] = list(cycle) if cycle else []
        report[f'{i},{j}'] = row
    return report


def find_chorded_short_cycle(host: Graph, max_len: int = 5) -> tuple[tuple[int, ...], Edge] | None:
    """First cycle of length <= max_len that has a chord, with that chord"""
    return next(iter_chorded_short_cycles(host, max_len), None)


def iter_chorded_short_cycles(host: Graph, max_len: int = 5) -> Iterator[tuple[tuple[int, ...], Edge]]:
    for k in range(4, max_len + 1):
        for cycle in iter_cycles_of_length(host, k):
            chord = _first_chord(host, cycle)
            if chord is not None:
                yield cycle, chord


def _first_chord(host: Graph, cycle: tuple[int, ...]) -> Edge | None:
    k = len(cycle)
    for a in range(k):
        for b in range(a + 2, k):
            if a == 0 and b == k - 1:
                continue
            if host.has_edge(cycle[a], cycle[b]):
                return edge_key(cycle[a], cycle[b])
    return None


def canonical_cyclic(seq: tuple[int, ...]) -> tuple[int, ...]:
    """Smallest rotation of seq or of its reversal"""
    if not seq:
        return seq
    variants = []
    for s in (seq, tuple(reversed(seq))):
        variants.extend(s[i:] + s[:i] for i in range(len(s)))
    return min(variants)


def face_degree_signature(eg: EmbeddedGraph, face: Face) -> tuple[int, ...]:
    """Canonical degree sequence along a face boundary, up to rotation and reflection"""
    return canonical_cyclic(tuple(eg.graph.degree(v) for v in face.vertices))


def faces_matching(eg: EmbeddedGraph, degrees: tuple[int, ...]) -> list[Face]:
    """Faces whose boundary degree sequence equals degrees cyclically"""
    target = canonical_cyclic(degrees)
    return [f for f in eg.faces if f.size == len(target) and face_degree_signature(eg, f) == target]


def _distinct_corner_faces(eg: EmbeddedGraph, v: int) -> tuple[Face, ...] | None:
    corner_faces = eg.corners[v]
    if len({f.key for f in corner_faces}) != len(corner_faces):
        return None
    return corner_faces


def is_light_3vertex(eg: EmbeddedGraph, v: int) -> bool:
    if eg.graph.degree(v) != 3:
        return False
    corner_faces = _distinct_corner_faces(eg, v)
    if corner_faces is None:
        return False
    signatures = sorted(face_degree_signature(eg, f) for f in corner_faces)
    expected = sorted([canonical_cyclic(LIGHT_QUAD), canonical_cyclic(LIGHT_PENTAGON),
                       canonical_cyclic(LIGHT_PENTAGON)])
    return signatures == expected


def find_light_3vertices(eg: EmbeddedGraph) -> list[int]:
    """3-vertices on one (3,4,4,4)-face and two (3,4,3,4,4)-faces"""
    return [v for v in eg.graph.vertices if is_light_3vertex(eg, v)]


def find_minor_3vertices(eg: EmbeddedGraph) -> list[int]:
    """3-vertices incident to at least one 4-face"""
    return [v for v in eg.graph.vertices
            if eg.graph.degree(v) == 3 and any(f.size == 4 for f in eg.corners[v])]


def pattern_to_dict(p: Pattern) -> dict[str, Any]:
    """EGF-like description of a pattern for catalog dumps"""
    return {
        'name': p.name,
        'vertices': [p.vertex_name(v) for v in p.skeleton.vertices],
        'edges': [[p.vertex_name(a), p.vertex_name(b)] for a, b in p.skeleton.edges],
        'degrees': {p.vertex_name(v): str(p.constraint(v)) for v in p.skeleton.vertices},
    }
