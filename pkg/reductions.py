"""Constructive (2, 1)-decomposition by reducible configurations.

Each rule finds a vertex set X, the graph minus X is decomposed, and the
rule's recipe extends that decomposition back across X: recipe edges go
into H, recipe arcs are added, and every other edge at X is oriented out
of X (or, inside X, along the recipe's label order).
"""
import heapq
import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any

import config
from decomp import Decomposition, DecompositionError, require_valid, solve_exact, verify_decomposition
from graph_core import EmbeddedGraph, Face, delete_vertices, edge_key, euler_characteristic
from patterns import (
    MatchWitness,
    Pattern,
    face_degree_signature,
    find_light_3vertices,
    forbidden_catalog,
    is_forbidden_free,
    match_pattern,
    reducible_catalog,
)

logger = logging.getLogger(__name__)

SCAN_ORDER = ('I', 'II', 'VIII', 'XA', 'XB', 'XC', 'IX')

LabelPair = tuple[str, str]


class ReductionError(RuntimeError):
    """Raised when a match is stale or a recipe fails post-verification"""

    def __init__(self, message: str, rule: str | None = None, violations: list[str] | None = None):
        super().__init__(message)
        self.rule = rule
        self.violations = violations or []


class ForbiddenConfigurationError(ReductionError):
    """Raised when the input contains a forbidden configuration"""

    def __init__(self, pattern: Pattern, witness: MatchWitness, graph: EmbeddedGraph | None = None):
        super().__init__(f'Input contains forbidden configuration {pattern.name}')
        self.pattern = pattern
        self.witness = witness
        self.graph = graph


class StuckError(ReductionError):
    """Raised when no rule applies and the exact fallback is unavailable"""

    def __init__(self, message: str, graph: EmbeddedGraph):
        super().__init__(message)
        self.graph = graph


def _label_order(labels: tuple[str, ...], arcs: tuple[LabelPair, ...]) -> tuple[str, ...]:
    """Topological order of labels under arcs, earliest-listed label first on ties"""
    rank = {lbl: i for i, lbl in enumerate(labels)}
    indegree = {lbl: 0 for lbl in labels}
    succ: dict[str, list[str]] = {lbl: [] for lbl in labels}
    for tail, head in arcs:
        succ[tail].append(head)
        indegree[head] += 1
    ready = [(rank[lbl], lbl) for lbl, k in indegree.items() if k == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        _, lbl = heapq.heappop(ready)
        order.append(lbl)
        for nxt in succ[lbl]:
            indegree[nxt] -= 1
            if indegree[nxt] == 0:
                heapq.heappush(ready, (rank[nxt], nxt))
    if len(order) != len(labels):
        raise ValueError(f'Recipe arcs are cyclic: {arcs}')
    return tuple(order)


@dataclass(frozen=True)
class Recipe:
    """Extension table over recipe-local labels.

    Boundary policy is always "orient outward": edges from X to the rest of
    the graph point away from X.
    """
    labels: tuple[str, ...]
    h_edges: tuple[LabelPair, ...] = ()
    arcs: tuple[LabelPair, ...] = ()
    boundary: str = 'outward'

    @property
    def order(self) -> tuple[str, ...]:
        return _label_order(self.labels, self.arcs)


def _index_recipe(labels: tuple[str, ...], edges: list[LabelPair], bold: list[LabelPair]) -> Recipe:
    """Recipe whose non-bold edges run from lower to higher label index"""
    rank = {lbl: i for i, lbl in enumerate(labels)}
    matched = {frozenset(e) for e in bold}
    arcs = tuple((a, b) if rank[a] < rank[b] else (b, a) for a, b in edges if frozenset((a, b)) not in matched)
    return Recipe(labels, tuple(bold), arcs)


@dataclass(frozen=True)
class ReductionMatch:
    """Where a rule applies: recipe labels mapped to host vertices"""
    rule: str
    labeling: dict[str, int]
    panel: str | None = None

    @property
    def X(self) -> frozenset[int]:
        return frozenset(self.labeling.values())

    def to_dict(self, eg: EmbeddedGraph) -> dict[str, Any]:
        return {
            'rule': self.rule,
            'panel': self.panel,
            'X': eg.labelled(sorted(self.X)),
            'labeling': {lbl: eg.label(v) for lbl, v in self.labeling.items()},
        }


@dataclass(frozen=True)
class ReductionRule:
    id: str
    description: str
    matcher: Callable[[EmbeddedGraph], ReductionMatch | None]
    recipes: dict[str | None, Recipe] = field(default_factory=dict)

    def recipe(self, panel: str | None = None) -> Recipe:
        if panel not in self.recipes:
            raise ReductionError(f'Rule {self.id} has no recipe for panel {panel!r}', self.id)
        return self.recipes[panel]


# --- light 3-vertex neighbourhood -------------------------------------------
#
# Roles: o is the light vertex; the two pentagons share edge o-hub and read
# o, hub, l1, l2, l3 and o, hub, r1, r2, r3; the quadrilateral is o, r3, bot, l3.
# In the identified panel l2 and r2 are one vertex, role m.

LIGHT_EDGES = [('o', 'hub'), ('o', 'l3'), ('o', 'r3'), ('hub', 'l1'), ('l1', 'l2'), ('l2', 'l3'),
               ('hub', 'r1'), ('r1', 'r2'), ('r2', 'r3'), ('r3', 'bot'), ('bot', 'l3')]

LIGHT_PANELS: dict[str, tuple[dict[str, str], list[LabelPair]]] = {
    # 3-vertices l1 and r1
    'a': ({'o': 'a5', 'hub': 'a4', 'l1': 'a3', 'l2': 'a7', 'l3': 'a6',
           'r1': 'a1', 'r2': 'a2', 'r3': 'a8', 'bot': 'a9'},
          [('l3', 'bot'), ('r3', 'r2'), ('r1', 'hub'), ('l1', 'l2')]),
    # 3-vertices l2 and r2
    'b': ({'o': 'a5', 'hub': 'a6', 'l1': 'a7', 'l2': 'a3', 'l3': 'a4',
           'r1': 'a2', 'r2': 'a1', 'r3': 'a8', 'bot': 'a9'},
          [('o', 'l3'), ('l1', 'l2'), ('hub', 'r1'), ('r2', 'r3')]),
    # 3-vertices l1 and r2 (the l2/r1 case is its mirror image)
    'c': ({'o': 'a5', 'hub': 'a4', 'l1': 'a3', 'l2': 'a7', 'l3': 'a6',
           'r1': 'a2', 'r2': 'a1', 'r3': 'a8', 'bot': 'a9'},
          [('l3', 'bot'), ('r3', 'r2'), ('r1', 'hub'), ('l1', 'l2')]),
    # 3-vertices l1 and r1 with l2 = r2 (wraps around the torus)
    'd': ({'o': 'a4', 'hub': 'a3', 'l1': 'a2', 'l2': 'a6', 'l3': 'a5',
           'r1': 'a1', 'r2': 'a6', 'r3': 'a7', 'bot': 'a8'},
          [('l3', 'bot'), ('r1', 'hub'), ('l1', 'l2')]),
}


def light_panel_recipe(panel: str) -> Recipe:
    roles, bold = LIGHT_PANELS[panel]
    labels = tuple(sorted(set(roles.values()), key=lambda s: int(s[1:])))
    edges = sorted({tuple(sorted((roles[a], roles[b]))) for a, b in LIGHT_EDGES})
    return _index_recipe(labels, edges, [(roles[a], roles[b]) for a, b in bold])


def _walk_from(face: Face, start: int, toward: int) -> list[int] | None:
    """Face boundary as a vertex list beginning start, toward, ..."""
    seq = list(face.vertices)
    if seq.count(start) != 1:
        return None
    i = seq.index(start)
    seq = seq[i:] + seq[:i]
    if seq[1] == toward:
        return seq
    if seq[-1] == toward:
        return [seq[0]] + seq[:0:-1]
    return None


def light_roles(eg: EmbeddedGraph, v: int) -> dict[str, int] | None:
    """Assign neighbourhood roles around a light 3-vertex v, or None if the faces do not fit"""
    faces = eg.corners[v]
    quads = [f for f in faces if f.size == 4]
    pents = sorted(f for f in faces if f.size == 5)
    if len(quads) != 1 or len(pents) != 2:
        return None
    quad = quads[0]
    quad_seq = list(quad.vertices)
    if len(set(quad_seq)) != 4 or quad_seq.count(v) != 1:
        return None
    i = quad_seq.index(v)
    x, bot, y = quad_seq[(i + 1) % 4], quad_seq[(i + 2) % 4], quad_seq[(i + 3) % 4]
    others = set(eg.graph.neighbors(v)) - {x, y}
    if len(others) != 1:
        return None
    hub = others.pop()
    left = _walk_from(pents[0], v, hub)
    right = _walk_from(pents[1], v, hub)
    if left is None or right is None or {left[4], right[4]} != {x, y}:
        return None
    return {'o': v, 'hub': hub, 'l1': left[2], 'l2': left[3], 'l3': left[4],
            'r1': right[2], 'r2': right[3], 'r3': right[4], 'bot': bot}


def select_light_panel(eg: EmbeddedGraph, roles: dict[str, int]) -> tuple[str, dict[str, int]]:
    """Pick the extension panel for a light-vertex neighbourhood.

    Returns:
        (panel, roles) where roles may be mirrored left-to-right

    Raises:
        ReductionError: if the degree pattern or vertex coincidences fit no panel
    """
    deg = eg.graph.degree
    distinct = len(set(roles.values()))
    if distinct == 8 and roles['l2'] == roles['r2'] and deg(roles['l1']) == 3 and deg(roles['r1']) == 3:
        return 'd', roles
    if distinct != 9:
        raise ReductionError(f'Light vertex {eg.label(roles["o"])}: unsupported vertex coincidences', 'IX')
    left3 = 'l1' if deg(roles['l1']) == 3 else 'l2'
    right3 = 'r1' if deg(roles['r1']) == 3 else 'r2'
    if (left3, right3) == ('l1', 'r1'):
        return 'a', roles
    if (left3, right3) == ('l2', 'r2'):
        return 'b', roles
    if (left3, right3) == ('l1', 'r2'):
        return 'c', roles
    mirrored = {'o': roles['o'], 'hub': roles['hub'], 'bot': roles['bot'],
                'l1': roles['r1'], 'l2': roles['r2'], 'l3': roles['r3'],
                'r1': roles['l1'], 'r2': roles['l2'], 'r3': roles['l3']}
    return 'c', mirrored


# --- matchers ----------------------------------------------------------------

def _match_small_vertex(eg: EmbeddedGraph) -> ReductionMatch | None:
    for v in eg.graph.vertices:
        if eg.graph.degree(v) <= 2:
            return ReductionMatch('I', {'v': v})
    return None


def _match_adjacent_3vertices(eg: EmbeddedGraph) -> ReductionMatch | None:
    g = eg.graph
    for u, v in g.edges:
        if g.degree(u) == 3 and g.degree(v) == 3:
            return ReductionMatch('II', {'u': u, 'v': v})
    return None


def _match_3434_face(eg: EmbeddedGraph) -> ReductionMatch | None:
    for face in eg.faces:
        if face.size != 4 or len(face.vertex_set) != 4:
            continue
        if face_degree_signature(eg, face) != (3, 4, 3, 4):
            continue
        seq = list(face.vertices)
        first = min(u for u in seq if eg.graph.degree(u) == 3)
        i = seq.index(first)
        seq = seq[i:] + seq[:i]
        return ReductionMatch('VIII', {'b1': seq[0], 'b2': seq[1], 'b3': seq[2], 'b4': seq[3]})
    return None


def _pattern_matcher(p: Pattern) -> Callable[[EmbeddedGraph], ReductionMatch | None]:
    def matcher(eg: EmbeddedGraph) -> ReductionMatch | None:
        witness = match_pattern(eg.graph, p)
        if witness is None:
            return None
        return ReductionMatch(p.name, {p.vertex_name(pv): hv for pv, hv in witness.mapping.items()})
    return matcher


def _match_light_vertex(eg: EmbeddedGraph) -> ReductionMatch | None:
    for v in find_light_3vertices(eg):
        roles = light_roles(eg, v)
        if roles is None:
            logger.warning('Light vertex %s: faces do not form the expected neighbourhood', eg.label(v))
            continue
        try:
            panel, roles = select_light_panel(eg, roles)
        except ReductionError as e:
            logger.warning('%s', e)
            continue
        panel_roles = LIGHT_PANELS[panel][0]
        labeling = {panel_roles[role]: host for role, host in roles.items()}
        return ReductionMatch('IX', labeling, panel)
    return None


def rule_catalog() -> list[ReductionRule]:
    """The seven reduction rules with their extension recipes"""
    patterns = {p.name: p for p in reducible_catalog()}
    return [
        ReductionRule('I', 'vertex of degree at most 2', _match_small_vertex,
                      {None: Recipe(('v',))}),
        ReductionRule('II', 'adjacent 3-vertices', _match_adjacent_3vertices,
                      {None: Recipe(('u', 'v'), h_edges=(('u', 'v'),))}),
        ReductionRule('VIII', '(3,4,3,4)-face', _match_3434_face,
                      {None: Recipe(('b1', 'b2', 'b3', 'b4'),
                                    h_edges=(('b1', 'b2'), ('b3', 'b4')),
                                    arcs=(('b1', 'b4'), ('b3', 'b2')))}),
        ReductionRule('IX', 'light 3-vertex', _match_light_vertex,
                      {panel: light_panel_recipe(panel) for panel in LIGHT_PANELS}),
        ReductionRule('XA', 'triangle with a pendant 3-vertex', _pattern_matcher(patterns['XA']),
                      {None: Recipe(('o', 'v1', 'v2', 'v3'),
                                    h_edges=(('v1', 'v2'), ('o', 'v3')),
                                    arcs=(('v2', 'o'), ('o', 'v1')))}),
        ReductionRule('XB', 'pentagon and triangle, 3-vertices v3 and v5', _pattern_matcher(patterns['XB']),
                      {None: Recipe(('v1', 'v2', 'h', 'v3', 'v4', 'v5'),
                                    h_edges=(('v1', 'h'), ('v2', 'v3'), ('v4', 'v5')),
                                    arcs=(('v3', 'v4'), ('v5', 'v1'), ('v1', 'v2'), ('v2', 'h')))}),
        ReductionRule('XC', 'pentagon and triangle, 3-vertices v2 and v4', _pattern_matcher(patterns['XC']),
                      {None: Recipe(('v1', 'v2', 'h', 'v3', 'v4', 'v5'),
                                    h_edges=(('v1', 'h'), ('v2', 'v3'), ('v4', 'v5')),
                                    arcs=(('v2', 'h'), ('v2', 'v1'), ('v1', 'v5'), ('v4', 'v3')))}),
    ]


RULES: dict[str, ReductionRule] = {rule.id: rule for rule in rule_catalog()}


def rules_by_id() -> dict[str, ReductionRule]:
    """The rule table, built once at import"""
    return RULES


def find_reduction(eg: EmbeddedGraph) -> ReductionMatch | None:
    """First applicable rule in scan order I, II, VIII, XA, XB, XC, IX"""
    rules = rules_by_id()
    for rule_id in SCAN_ORDER:
        m = rules[rule_id].matcher(eg)
        if m is not None:
            return m
    return None


def _check_fresh(eg: EmbeddedGraph, m: ReductionMatch, recipe: Recipe) -> None:
    missing = [lbl for lbl, v in m.labeling.items() if v not in eg.graph.adjacency]
    if missing:
        raise ReductionError(f'Stale {m.rule} match: labels {missing} are not in the graph', m.rule)
    absent = [(a, b) for a, b in (*recipe.h_edges, *recipe.arcs)
              if not eg.graph.has_edge(m.labeling[a], m.labeling[b])]
    if absent:
        raise ReductionError(f'Stale {m.rule} match: recipe edges {absent} are not in the graph', m.rule)


def apply_reduction(eg: EmbeddedGraph, m: ReductionMatch) -> EmbeddedGraph:
    """Delete the matched set X.

    Raises:
        ReductionError: if the match does not fit eg
    """
    _check_fresh(eg, m, rules_by_id()[m.rule].recipe(m.panel))
    return delete_vertices(eg, m.X)


def extend_decomposition(eg: EmbeddedGraph, m: ReductionMatch, sub: Decomposition) -> Decomposition:
    """Extend a (2, 1)-decomposition of eg - X across X by the rule's recipe.

    Vertices outside X keep their out-degree: every new arc either stays
    inside X or leaves it.

    Raises:
        ReductionError: if the match is stale or the result fails verification
    """
    recipe = rules_by_id()[m.rule].recipe(m.panel)
    _check_fresh(eg, m, recipe)
    lab = m.labeling
    X = m.X
    position = {lab[lbl]: i for i, lbl in enumerate(recipe.order)}

    h_new = {edge_key(lab[a], lab[b]) for a, b in recipe.h_edges}
    arcs = [(lab[a], lab[b]) for a, b in recipe.arcs]
    placed = h_new | {edge_key(u, v) for u, v in arcs}
    for x in sorted(X):
        for y in sorted(eg.graph.neighbors(x)):
            if edge_key(x, y) in placed:
                continue
            if y not in X or position[x] < position[y]:
                arcs.append((x, y))

    dec = Decomposition(sub.h_edges | h_new, sub.orientation.union(arcs), 2, 1)
    if config.load_config()['VERIFY_EXTENSIONS']:
        try:
            require_valid(eg.graph, dec, f'rule {m.rule}')
        except DecompositionError as e:
            raise ReductionError(str(e), m.rule, e.violations) from e
    return dec


def check_hypotheses(eg: EmbeddedGraph) -> dict[str, Any]:
    """Report whether the input is forbidden-free and embedded on the torus"""
    free, witness = is_forbidden_free(eg.graph)
    try:
        chi = euler_characteristic(eg)
    except ValueError:
        chi = None
    report: dict[str, Any] = {
        'forbidden_free': free,
        'witness': None,
        'euler_characteristic': chi,
        'toroidal': chi == 0,
    }
    if witness is not None:
        p = next(p for p in forbidden_catalog() if p.name == witness.pattern)
        report['witness'] = witness.to_dict(p, eg)
    return report


def solve_constructive(eg: EmbeddedGraph, trace: list[dict[str, Any]] | None = None,
                       check_forbidden: bool = True, fallback: bool | None = None,
                       max_exact_edges: int | None = None) -> Decomposition | None:
    """(2, 1)-decompose eg by reducing to the empty graph and extending back.

    Args:
        eg: embedded input graph
        trace: if given, receives one entry per reduction step
        check_forbidden: reject inputs containing a forbidden configuration
        fallback: use the exact solver when no rule applies (config default)
        max_exact_edges: edge limit for that fallback (config default)

    Returns:
        A verified decomposition, or None if the exact fallback proved the
        irreducible remainder (hence the input) not (2, 1)-decomposable

    Raises:
        ForbiddenConfigurationError: if check_forbidden and a configuration occurs
        StuckError: if no rule applies and the fallback is disabled or too large
    """
    cfg = config.load_config()
    if fallback is None:
        fallback = cfg['CONSTRUCTIVE_FALLBACK']
    if max_exact_edges is None:
        max_exact_edges = cfg['EXACT_MAX_EDGES']

    if check_forbidden:
        free, witness = is_forbidden_free(eg.graph)
        if not free:
            pattern = next(p for p in forbidden_catalog() if p.name == witness.pattern)
            raise ForbiddenConfigurationError(pattern, witness, eg)

    steps: list[tuple[EmbeddedGraph, ReductionMatch]] = []
    current = eg
    base = Decomposition()
    while current.graph.adjacency:
        m = find_reduction(current)
        if m is None:
            g = current.graph
            if not fallback or g.num_edges > max_exact_edges:
                raise StuckError(f'No reduction rule applies to a {len(g)}-vertex, {g.num_edges}-edge remainder',
                                 current)
            logger.warning('No reduction rule applies; exact fallback on %d vertices, %d edges',
                           len(g), g.num_edges)
            exact_dec = solve_exact(g, 2, 1)
            if exact_dec is None:
                logger.warning('Irreducible remainder is not (2,1)-decomposable')
                return None
            base = exact_dec
            if trace is not None:
                trace.append({'rule': 'exact', 'X': current.labelled(g.vertices), 'panel': None})
            break
        logger.debug('Rule %s removes %s', m.rule, current.labelled(sorted(m.X)))
        if trace is not None:
            trace.append(m.to_dict(current))
        steps.append((current, m))
        current = apply_reduction(current, m)

    dec = base
    for level, m in reversed(steps):
        dec = extend_decomposition(level, m, dec)
    ok, violations = verify_decomposition(eg.graph, dec)
    if not ok:
        raise ReductionError(f'Constructive result failed verification: {violations}', None, violations)
    logger.info('Constructive solver: %d reductions, |H|=%d', len(steps), len(dec.h_edges))
    return dec
