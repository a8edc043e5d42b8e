"""Embedded graph families and planted configurations.

Rotations list neighbors counterclockwise; faces are traced with
next(u, v) = (v, succ_v(u)).
"""
import logging
import random
from collections import Counter, defaultdict
from collections.abc import Iterable, Sequence

import networkx as nx

from decomp import Decomposition
from degeneracy import Orientation
from graph_core import EmbeddedGraph, GraphError, Label, edge_key
from patterns import reducible_catalog
from reductions import LIGHT_PANELS, ReductionMatch, rules_by_id

logger = logging.getLogger(__name__)

LIGHT_ROLES = ('o', 'hub', 'l1', 'l2', 'l3', 'r1', 'r2', 'r3', 'bot')


def embedding_from_faces(faces: Iterable[Sequence[int]], labels: dict[int, Label] | None = None) -> EmbeddedGraph:
    """Build the rotation system whose traced faces are exactly the given vertex walks.

    Each walk v0, v1, ..., vk-1 contributes darts (vi, vi+1) and sets
    succ_{vi+1}(vi) = vi+2.

    Raises:
        GraphError: if a dart repeats or some vertex's successors do not form one cycle
    """
    succ: dict[int, dict[int, int]] = defaultdict(dict)
    darts: set[tuple[int, int]] = set()
    for walk in faces:
        k = len(walk)
        for i in range(k):
            u, v, w = walk[i], walk[(i + 1) % k], walk[(i + 2) % k]
            if (u, v) in darts:
                raise GraphError(f'Dart ({u}, {v}) appears on two faces')
            darts.add((u, v))
            succ[v][u] = w
    rotation = {}
    for v, nxt in succ.items():
        start = min(nxt)
        order = [start]
        while (u := nxt[order[-1]]) != start:
            if u in order or u not in nxt:
                raise GraphError(f'Faces do not close up around vertex {v}')
            order.append(u)
        if len(order) != len(nxt):
            raise GraphError(f'Faces around vertex {v} form more than one cycle')
        rotation[v] = tuple(order)
    return EmbeddedGraph.from_rotation(rotation, labels)


def torus_grid(m: int, n: int) -> EmbeddedGraph:
    """m x n quadrangulation of the torus; vertex (i, j) has id i * n + j"""
    if m < 3 or n < 3:
        raise ValueError(f'torus grid needs m, n >= 3, got {m}x{n}')

    def vid(i: int, j: int) -> int:
        return (i % m) * n + (j % n)

    rotation = {vid(i, j): (vid(i - 1, j), vid(i, j + 1), vid(i + 1, j), vid(i, j - 1))
                for i in range(m) for j in range(n)}
    return EmbeddedGraph.from_rotation(rotation)


def honeycomb_torus(m: int, n: int) -> EmbeddedGraph:
    """Hexagonal tiling of the torus with m x n hexagons (3-regular)"""
    if m < 3 or n < 3:
        raise ValueError(f'honeycomb needs m, n >= 3, got {m}x{n}')

    def a(i: int, j: int) -> int:
        return 2 * ((i % m) * n + (j % n))

    def b(i: int, j: int) -> int:
        return a(i, j) + 1

    rotation = {}
    for i in range(m):
        for j in range(n):
            rotation[a(i, j)] = (b(i, j), b(i - 1, j), b(i, j - 1))
            rotation[b(i, j)] = (a(i + 1, j), a(i, j + 1), a(i, j))
    return EmbeddedGraph.from_rotation(rotation)


def k7_torus() -> EmbeddedGraph:
    """Triangular embedding of K7 on the torus"""
    offsets = (1, 3, 2, 6, 4, 5)
    return EmbeddedGraph.from_rotation({i: tuple((i + k) % 7 for k in offsets) for i in range(7)})


def cycle(n: int) -> EmbeddedGraph:
    if n < 3:
        raise ValueError(f'cycle needs n >= 3, got {n}')
    return EmbeddedGraph.from_rotation({i: ((i - 1) % n, (i + 1) % n) for i in range(n)})


def complete(n: int) -> EmbeddedGraph:
    """K_n; planar rotations for n <= 4, otherwise neighbors in id order"""
    if n == 4:
        return EmbeddedGraph.from_rotation({0: (1, 2, 3), 1: (0, 3, 2), 2: (0, 1, 3), 3: (0, 2, 1)})
    return EmbeddedGraph.from_rotation({i: tuple(j for j in range(n) if j != i) for i in range(n)})


def random_rotation(n: int, m: int, seed: int | None = None) -> EmbeddedGraph:
    """G(n, m) random graph with uniformly shuffled rotations"""
    rng = random.Random(seed)
    g = nx.gnm_random_graph(n, m, seed=seed)
    rotation = {}
    for v in g.nodes:
        order = sorted(g.neighbors(v))
        rng.shuffle(order)
        rotation[v] = tuple(order)
    return EmbeddedGraph.from_rotation(rotation)


def _with_stubs(walk: list[int], stubs: dict[int, list[int]]) -> list[int]:
    out = []
    for x in walk:
        out.append(x)
        for s in stubs.get(x, []):
            out.extend((s, x))
    return out


def light_neighborhood(left3: str = 'l1', right3: str = 'r1', wrapped: bool = False) -> tuple[EmbeddedGraph, dict[str, int]]:
    """Neighbourhood of a light 3-vertex o, padded with pendant stubs to its exact degrees.

    Args:
        left3: which of l1, l2 has degree 3
        right3: which of r1, r2 has degree 3
        wrapped: identify l2 with r2 (requires left3='l1', right3='r1')

    Returns:
        (embedded graph, role -> vertex id)
    """
    if left3 not in ('l1', 'l2') or right3 not in ('r1', 'r2'):
        raise ValueError(f'Unknown 3-vertex roles {left3}, {right3}')
    if wrapped and (left3, right3) != ('l1', 'r1'):
        raise ValueError('wrapped neighbourhood needs 3-vertices l1 and r1')
    roles = {role: i for i, role in enumerate(LIGHT_ROLES)}
    if wrapped:
        roles['r2'] = roles['l2']
    degree = {role: 4 for role in LIGHT_ROLES}
    degree.update({'o': 3, left3: 3, right3: 3})

    o, hub, l1, l2, l3, r1, r2, r3, bot = (roles[r] for r in LIGHT_ROLES)
    inner = [[o, l3, l2, l1, hub], [o, hub, r1, r2, r3], [o, r3, bot, l3]]
    outer = [[hub, l1, l2, r1], [l2, l3, bot, r3]] if wrapped else [[hub, l1, l2, l3, bot, r3, r2, r1]]

    skeleton = {edge_key(w[i], w[(i + 1) % len(w)]) for w in inner for i in range(len(w))}
    skeleton_degree = Counter(v for e in skeleton for v in e)

    next_id = len(LIGHT_ROLES)
    stubs: dict[int, list[int]] = {}
    for role in LIGHT_ROLES:
        v = roles[role]
        if v in stubs:
            continue
        count = degree[role] - skeleton_degree[v]
        stubs[v] = list(range(next_id, next_id + count))
        next_id += count

    labels: dict[int, Label] = {v: role for role, v in roles.items()}
    if wrapped:
        labels[roles['l2']] = 'm'
    labels.update({s: f's{s}' for ss in stubs.values() for s in ss})
    eg = embedding_from_faces(inner + [_with_stubs(walk, stubs) for walk in outer], labels)
    return eg, roles


def _planted_degrees(rule_id: str, panel: str | None, rng: random.Random) -> dict[str, int]:
    if rule_id == 'I':
        return {'v': rng.randint(0, 2)}
    if rule_id == 'II':
        return {'u': 3, 'v': 3}
    if rule_id == 'VIII':
        return {'b1': 3, 'b2': 4, 'b3': 3, 'b4': 4}
    if rule_id == 'IX':
        role_labels = LIGHT_PANELS[panel][0]
        three = {'a': ('l1', 'r1'), 'b': ('l2', 'r2'), 'c': ('l1', 'r2'), 'd': ('l1', 'r1')}[panel]
        return {lbl: 3 if role in ('o', *three) else 4 for role, lbl in role_labels.items()}
    p = next(p for p in reducible_catalog() if p.name == rule_id)
    return {p.vertex_name(v): p.constraint(v).k for v in p.skeleton.vertices}


def plant_configuration(rule_id: str, seed: int, panel: str | None = None,
                        outside: int = 12) -> tuple[EmbeddedGraph, ReductionMatch, Decomposition]:
    """Random host containing a rule's configuration X at its exact degrees.

    The rest of the host is built with a known (2, 1)-decomposition: each
    new outside vertex points at up to two earlier ones, and a random
    matching of extra outside edges forms H. Stubs from X go to outside
    vertices or, sometimes, become extra edges inside X.

    Returns:
        (host, match of the rule on X, decomposition of host minus X)
    """
    rng = random.Random(seed)
    recipe = rules_by_id()[rule_id].recipe(panel)
    degree = _planted_degrees(rule_id, panel, rng)
    labels = recipe.labels
    lab = {lbl: i for i, lbl in enumerate(labels)}
    edges = {edge_key(lab[a], lab[b]) for a, b in (*recipe.h_edges, *recipe.arcs)}

    free = {lbl: degree[lbl] - sum(1 for e in edges if lab[lbl] in e) for lbl in labels}
    # extra edges inside X, each consuming a stub at both ends
    for a in labels:
        for b in labels:
            e = edge_key(lab[a], lab[b])
            if a < b and e not in edges and free[a] > 0 and free[b] > 0 and rng.random() < 0.15:
                edges.add(e)
                free[a] -= 1
                free[b] -= 1

    n_out = outside + sum(free.values())
    base = len(labels)
    out = list(range(base, base + n_out))
    arcs = []
    for i, v in enumerate(out[1:], start=1):
        for u in rng.sample(out[:i], min(i, rng.randint(1, 2))):
            arcs.append((v, u))
    taken = {edge_key(u, v) for u, v in arcs}
    matched: set[int] = set()
    h_edges = set()
    for _ in range(n_out):
        u, v = rng.sample(out, 2)
        e = edge_key(u, v)
        if u in matched or v in matched or e in taken:
            continue
        h_edges.add(e)
        matched.update(e)

    for lbl in labels:
        targets = rng.sample(out, free[lbl])
        edges.update(edge_key(lab[lbl], t) for t in targets)

    all_edges = edges | taken | h_edges
    g = nx.Graph()
    g.add_nodes_from(range(base + n_out))
    g.add_edges_from(all_edges)
    rotation = {v: tuple(sorted(g.neighbors(v))) for v in g.nodes}
    names: dict[int, Label] = {i: lbl for lbl, i in lab.items()}
    eg = EmbeddedGraph.from_rotation(rotation, names)
    match = ReductionMatch(rule_id, dict(lab), panel)
    sub = Decomposition(frozenset(h_edges), Orientation.from_arcs(arcs), 2, 1)
    return eg, match, sub
