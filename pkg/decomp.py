import logging
from collections import Counter
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any

from degeneracy import Orientation, degeneracy, is_acyclic, orient_by_order
from graph_core import Edge, Graph, Label, edge_key

logger = logging.getLogger(__name__)

# Clause names, in the order verify_decomposition checks them
H_DEGREE = 'H-degree'
COVERAGE = 'coverage'
ACYCLICITY = 'acyclicity'
OUT_DEGREE = 'out-degree'


class DecompositionError(ValueError):
    """Raised when a decomposition references edges outside its graph or fails verification"""

    def __init__(self, message: str, violations: list[str] | None = None):
        super().__init__(message)
        self.violations = violations or []


@dataclass(frozen=True)
class Decomposition:
    """(D, H): edge set H plus an orientation D of the remaining edges"""
    h_edges: frozenset[Edge] = frozenset()
    orientation: Orientation = field(default_factory=Orientation)
    d: int = 2
    h: int = 1

    def to_dict(self, labels: dict[int, Label] | None = None) -> dict[str, Any]:
        name = (lambda v: labels.get(v, v)) if labels else (lambda v: v)
        return {
            'd': self.d,
            'h': self.h,
            'H': [[name(u), name(v)] for u, v in sorted(self.h_edges)],
            'arcs': [[name(u), name(v)] for u, v in self.orientation.arcs],
        }


def from_dict(data: dict[str, Any], ids: dict[str, int] | None = None,
              d: int | None = None, h: int | None = None) -> Decomposition:
    """Rebuild a decomposition from its JSON form.

    Args:
        data: {"H": [[u, v], ...], "arcs": [[tail, head], ...]}
        ids: maps str(label) back to vertex ids; None means labels are ids
        d, h: override the parameters stored in data
    """
    def vid(label: Label) -> int:
        if ids is None:
            return int(label)
        if str(label) not in ids:
            raise DecompositionError(f'Unknown vertex label {label!r}')
        return ids[str(label)]

    try:
        h_edges = frozenset(edge_key(vid(u), vid(v)) for u, v in data.get('H', []))
        arcs = [(vid(u), vid(v)) for u, v in data.get('arcs', [])]
    except (TypeError, ValueError) as e:
        raise DecompositionError(f'Malformed decomposition: {e}') from e
    return Decomposition(h_edges, Orientation.from_arcs(arcs),
                         d if d is not None else int(data.get('d', 2)),
                         h if h is not None else int(data.get('h', 1)))


def verify_decomposition(g: Graph, dec: Decomposition) -> tuple[bool, list[str]]:
    """Check every Decomposition invariant against g.

    Returns:
        (ok, violations) with violations listed in clause order
        H-degree, coverage, acyclicity, out-degree

    Raises:
        DecompositionError: if an H edge or arc is not an edge of g
    """
    foreign = sorted(e for e in dec.h_edges if e not in g.edge_set)
    foreign += sorted(edge_key(u, v) for u, v in dec.orientation.arcs if edge_key(u, v) not in g.edge_set)
    if foreign:
        raise DecompositionError(f'Edges not in graph: {foreign}')

    violations = []
    h_degree = Counter(v for e in dec.h_edges for v in e)
    if any(k > dec.h for k in h_degree.values()):
        violations.append(H_DEGREE)

    oriented = Counter(edge_key(u, v) for u, v in dec.orientation.arcs)
    complement = g.edge_set - dec.h_edges
    if set(oriented) != complement or any(n > 1 for n in oriented.values()):
        violations.append(COVERAGE)

    if not is_acyclic(g.vertices, dec.orientation.arcs):
        violations.append(ACYCLICITY)

    if dec.orientation.max_out_degree() > dec.d:
        violations.append(OUT_DEGREE)

    return not violations, violations


def require_valid(g: Graph, dec: Decomposition, context: str) -> Decomposition:
    """Return dec unchanged or raise DecompositionError naming the failed clauses"""
    ok, violations = verify_decomposition(g, dec)
    if not ok:
        raise DecompositionError(f'{context}: invalid decomposition ({", ".join(violations)})', violations)
    return dec


def bounded_degree_subsets(edges: list[Edge], h: int, size: int) -> Iterator[tuple[Edge, ...]]:
    """Yield every size-element subset of edges with max degree <= h, lexicographically"""
    load: Counter[int] = Counter()
    chosen: list[Edge] = []

    def extend(start: int) -> Iterator[tuple[Edge, ...]]:
        if len(chosen) == size:
            yield tuple(chosen)
            return
        # leave room for the remaining picks
        for i in range(start, len(edges) - (size - len(chosen)) + 1):
            u, v = edges[i]
            if load[u] >= h or load[v] >= h:
                continue
            load[u] += 1
            load[v] += 1
            chosen.append(edges[i])
            yield from extend(i + 1)
            chosen.pop()
            load[u] -= 1
            load[v] -= 1

    yield from extend(0)


def h_candidates(g: Graph, h: int) -> Iterator[tuple[Edge, ...]]:
    """All subgraphs with max degree <= h, in increasing size order"""
    edges = list(g.edges)
    for size in range(len(edges) + 1):
        found = False
        for subset in bounded_degree_subsets(edges, h, size):
            found = True
            yield subset
        if not found:
            return  # no subset of this size means none larger either


@lru_cache(maxsize=65536)
def peel(vertices: tuple[int, ...], edges: frozenset[Edge]) -> tuple[int, tuple[int, ...]]:
    """Degeneracy and peeling order of (vertices, edges), memoized across solver calls"""
    k, order = degeneracy(Graph.from_edges(vertices, edges))
    return k, order.order


def solve_exact(g: Graph, d: int, h: int) -> Decomposition | None:
    """Exhaustive (d, h)-decomposition search.

    Tries every H with max degree <= h (for h = 1, every matching) from
    smallest to largest, returning the first whose complement is
    d-degenerate. A None result certifies that no decomposition exists.
    """
    candidates: Iterable[tuple[Edge, ...]] = h_candidates(g, h)
    tried = 0
    for subset in candidates:
        tried += 1
        k, order = peel(g.vertices, g.edge_set.difference(subset))
        if k <= d:
            orientation = orient_by_order(g.without_edges(subset), order)
            logger.debug('Exact solver: (%d,%d) found after %d candidates, |H|=%d', d, h, tried, len(subset))
            return require_valid(g, Decomposition(frozenset(subset), orientation, d, h), 'solve_exact')
    logger.debug('Exact solver: no (%d,%d)-decomposition among %d candidates', d, h, tried)
    return None


def decomposable_21(g: Graph) -> bool:
    """True iff g admits a (2, 1)-decomposition"""
    return solve_exact(g, 2, 1) is not None
