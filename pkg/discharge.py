"""Discharging on embedded graphs.

Every vertex and face z starts with charge deg(z) - 4. Three rules move
charge between them:

    R1  every 3-face gets 1/3 from each adjacent face (per shared edge)
    R2  a 3-vertex on a 4^- face h1 gets 1/2 from each of its other two
        faces; otherwise it gets 1/3 from each of its three faces
    R3  a 5^+ vertex gives 1/6 to each incident 4^+ face, and 1/6 through
        each incident 3-face [xyz] to the face across yz

All arithmetic is exact; every transfer is a positive multiple of 1/6.
"""
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from graph_core import Dart, EmbeddedGraph, Face, edge_key, faces_normally_adjacent
from patterns import (
    faces_matching,
    find_light_3vertices,
    find_minor_3vertices,
    iter_chorded_short_cycles,
    match_pattern,
    reducible_catalog,
)

logger = logging.getLogger(__name__)

THIRD = Fraction(1, 3)
HALF = Fraction(1, 2)
SIXTH = Fraction(1, 6)

# ('v', vertex id) or ('f', face key)
Element = tuple[str, Any]


def vertex_element(v: int) -> Element:
    return ('v', v)


def face_element(f: Face) -> Element:
    return ('f', f.key)


def fmt(x: Fraction) -> str:
    """Render a multiple of 1/6 as 'p/6'"""
    p = x * 6
    if p.denominator != 1:
        raise ValueError(f'{x} is not a multiple of 1/6')
    return f'{p.numerator}/6'


def face_name(eg: EmbeddedGraph, f: Face) -> str:
    return '[' + ' '.join(str(lbl) for lbl in eg.labelled(f.vertices)) + ']'


@dataclass(frozen=True)
class Transfer:
    rule: str
    source: Element
    sink: Element
    amount: Fraction
    via: str | None = None

    def __post_init__(self) -> None:
        if self.amount <= 0 or (self.amount * 6).denominator != 1:
            raise ValueError(f'Transfer amount {self.amount} is not a positive multiple of 1/6')


@dataclass
class ChargeLedger:
    """Charges per element plus the transfer log that produced them"""
    initial: dict[Element, Fraction] = field(default_factory=dict)
    charge: dict[Element, Fraction] = field(default_factory=dict)
    names: dict[Element, str] = field(default_factory=dict)
    log: list[Transfer] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def copy(self) -> 'ChargeLedger':
        return ChargeLedger(dict(self.initial), dict(self.charge), dict(self.names), list(self.log), list(self.notes))

    def transfer(self, rule: str, source: Element, sink: Element, amount: Fraction, via: str | None = None) -> None:
        t = Transfer(rule, source, sink, amount, via)
        self.log.append(t)
        self.charge[source] -= amount
        self.charge[sink] += amount

    def total(self) -> Fraction:
        return sum(self.charge.values(), Fraction(0))

    def initial_total(self) -> Fraction:
        return sum(self.initial.values(), Fraction(0))

    def replay(self) -> dict[Element, Fraction]:
        """Final charges recomputed from initial charges and the log"""
        result = dict(self.initial)
        for t in self.log:
            result[t.source] -= t.amount
            result[t.sink] += t.amount
        return result

    def history(self, el: Element) -> list[dict[str, str | None]]:
        return [
            {'rule': t.rule, 'from': self.names[t.source], 'to': self.names[t.sink],
             'amount': fmt(t.amount), 'via': t.via}
            for t in self.log if el in (t.source, t.sink)
        ]

    def name(self, el: Element) -> str:
        return self.names[el]


def initial_charges(eg: EmbeddedGraph) -> ChargeLedger:
    """deg(v) - 4 for vertices, size(f) - 4 for faces, empty log"""
    ledger = ChargeLedger()
    for v in eg.graph.vertices:
        el = vertex_element(v)
        ledger.initial[el] = Fraction(eg.graph.degree(v) - 4)
        ledger.names[el] = str(eg.label(v))
    for f in eg.faces:
        el = face_element(f)
        ledger.initial[el] = Fraction(f.size - 4)
        ledger.names[el] = face_name(eg, f)
    ledger.charge = dict(ledger.initial)
    return ledger


def _edge_name(eg: EmbeddedGraph, dart: Dart) -> str:
    u, v = edge_key(*dart)
    return f'{eg.label(u)}-{eg.label(v)}'


def _apply_r1(eg: EmbeddedGraph, ledger: ChargeLedger) -> None:
    for f in eg.faces:
        if f.size != 3:
            continue
        for u, v in f.boundary:
            other = eg.dart_face[(v, u)]
            if other.key != f.key:
                ledger.transfer('R1', face_element(other), face_element(f), THIRD, _edge_name(eg, (u, v)))


def _apply_r2(eg: EmbeddedGraph, ledger: ChargeLedger) -> None:
    for w in eg.graph.vertices:
        if eg.graph.degree(w) != 3:
            continue
        corner_faces = list(eg.corners[w])
        name = str(eg.label(w))
        if len({f.key for f in corner_faces}) < 3:
            ledger.notes.append(f'3-vertex {name} meets fewer than three distinct faces; R2 applied per incidence')
        small = sorted({f.key: f for f in corner_faces if f.size <= 4}.values())
        if not small:
            for f in corner_faces:
                ledger.transfer('R2', face_element(f), vertex_element(w), THIRD, name)
            continue
        h1 = small[0]
        if len(small) > 1:
            note = f'3-vertex {name} meets {len(small)} faces of size at most 4; h1 = {face_name(eg, h1)}'
            logger.warning('R2: %s', note)
            ledger.notes.append(note)
        rest = list(corner_faces)
        rest.remove(h1)
        for f in rest:
            ledger.transfer('R2', face_element(f), vertex_element(w), HALF, name)


def _apply_r3(eg: EmbeddedGraph, ledger: ChargeLedger) -> None:
    for x in eg.graph.vertices:
        if eg.graph.degree(x) < 5:
            continue
        name = str(eg.label(x))
        for u in eg.rotation[x]:
            g = eg.dart_face[(u, x)]
            if g.size >= 4:
                ledger.transfer('R3', vertex_element(x), face_element(g), SIXTH, name)
            elif g.size == 3:
                # g = [x y z] with dart (x, y) on g
                y = eg.successor(x, u)
                z = eg.successor(y, x)
                across = eg.dart_face[(z, y)]
                if across.key != g.key:
                    ledger.transfer('R3', vertex_element(x), face_element(across), SIXTH, face_name(eg, g))


def run_discharging(eg: EmbeddedGraph, ledger: ChargeLedger) -> ChargeLedger:
    """Apply R1, R2 and R3 once each to a copy of ledger"""
    result = ledger.copy()
    for rule, apply in (('R1', _apply_r1), ('R2', _apply_r2), ('R3', _apply_r3)):
        before = len(result.log)
        apply(eg, result)
        logger.debug('%s fired %d transfers', rule, len(result.log) - before)
    return result


def discharge(eg: EmbeddedGraph) -> ChargeLedger:
    return run_discharging(eg, initial_charges(eg))


def final_charge_report(ledger: ChargeLedger) -> dict[str, Any]:
    """Negative and positive elements with their transfer histories, plus totals"""
    def entries(pick: Any) -> list[dict[str, Any]]:
        return [
            {'element': ledger.name(el), 'charge': fmt(c), 'history': ledger.history(el)}
            for el, c in sorted(ledger.charge.items()) if pick(c)
        ]

    return {
        'total_initial': fmt(ledger.initial_total()),
        'total_final': fmt(ledger.total()),
        'initial': {ledger.name(el): fmt(c) for el, c in sorted(ledger.initial.items())},
        'final': {ledger.name(el): fmt(c) for el, c in sorted(ledger.charge.items())},
        'negatives': entries(lambda c: c < 0),
        'positives': entries(lambda c: c > 0),
        'notes': list(ledger.notes),
    }


def transfer_log(ledger: ChargeLedger) -> list[dict[str, str | None]]:
    return [
        {'rule': t.rule, 'from': ledger.name(t.source), 'to': ledger.name(t.sink), 'amount': fmt(t.amount), 'via': t.via}
        for t in ledger.log
    ]


def zero_charge_profile(ledger: ChargeLedger, eg: EmbeddedGraph) -> dict[str, Any]:
    """Structure of a discharged graph as seen by the all-zero closing argument.

    When every final charge is zero there should be no 5^+ vertices, no
    6^+ faces, some 5-faces, and two minor 3-vertices on each 5-face.
    """
    minor = set(find_minor_3vertices(eg))
    five_faces = [f for f in eg.faces if f.size == 5]
    return {
        'all_zero': all(c == 0 for c in ledger.charge.values()),
        'five_plus_vertices': eg.labelled(v for v in eg.graph.vertices if eg.graph.degree(v) >= 5),
        'six_plus_faces': [face_name(eg, f) for f in eg.faces if f.size >= 6],
        'five_faces': len(five_faces),
        'minor_on_five_faces': {
            face_name(eg, f): eg.labelled(sorted(f.vertex_set & minor)) for f in five_faces
        },
    }


# --- structural audit --------------------------------------------------------

@dataclass
class AuditReport:
    violations: list[tuple[str, dict[str, Any]]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def items(self) -> list[str]:
        return sorted({item for item, _ in self.violations}, key=AUDIT_ITEMS.index)

    def to_dict(self) -> dict[str, Any]:
        return {'ok': self.ok, 'violations': [{'item': item, 'witness': w} for item, w in self.violations]}


AUDIT_ITEMS = ('i', 'ii', 'iii', 'iv', 'v', 'vi', 'vii', 'viii', 'ix', 'x')


def _face_neighbors(eg: EmbeddedGraph) -> dict[Dart, dict[Dart, Face]]:
    nbrs: dict[Dart, dict[Dart, Face]] = defaultdict(dict)
    for f in eg.faces:
        for u, v in f.boundary:
            other = eg.dart_face[(v, u)]
            if other.key != f.key:
                nbrs[f.key][other.key] = other
    return nbrs


def audit_lemma_properties(eg: EmbeddedGraph) -> AuditReport:
    """Check the ten structural properties a minimal counterexample must have"""
    g = eg.graph
    report = AuditReport()
    add = report.violations.append
    faces = {f.key: f for f in eg.faces}
    nbrs = _face_neighbors(eg)
    fname = lambda f: face_name(eg, f)  # noqa: E731

    for v in g.vertices:
        if g.degree(v) < 3:
            add(('i', {'vertex': eg.label(v), 'degree': g.degree(v)}))

    for u, v in g.edges:
        if g.degree(u) == 3 and g.degree(v) == 3:
            add(('ii', {'edge': eg.labelled((u, v))}))

    for cyc, chord in iter_chorded_short_cycles(g, 5):
        add(('iii', {'cycle': eg.labelled(cyc), 'chord': eg.labelled(chord)}))

    for key, f in faces.items():
        for other_key, other in nbrs[key].items():
            if key < other_key and f.size <= 4 and other.size <= 4:
                add(('iv', {'faces': [fname(f), fname(other)]}))

    for key, f in faces.items():
        if f.size != 5:
            continue
        adjacent = list(nbrs[key].values())
        for other in adjacent:
            if other.size <= 4 and not faces_normally_adjacent(f, other):
                add(('v', {'face': fname(f), 'not_normally_adjacent': fname(other)}))
        triangles = [other for other in adjacent if other.size == 3]
        if len(triangles) > 1:
            add(('v', {'face': fname(f), 'adjacent_3faces': [fname(t) for t in triangles]}))
        quads = [other for other in adjacent if other.size == 4]
        if triangles and quads:
            add(('vi', {'face': fname(f), '3face': fname(triangles[0]), '4face': fname(quads[0])}))

    for key, f in faces.items():
        if f.size != 6:
            continue
        for other in nbrs[key].values():
            if other.size == 3:
                add(('vii', {'face': fname(f), '3face': fname(other)}))

    for f in faces_matching(eg, (3, 4, 3, 4)):
        add(('viii', {'face': fname(f)}))

    for v in find_light_3vertices(eg):
        add(('ix', {'vertex': eg.label(v)}))

    for p in reducible_catalog():
        witness = match_pattern(g, p)
        if witness is not None:
            add(('x', witness.to_dict(p, eg)))

    logger.debug('Audit: %d violations over items %s', len(report.violations), report.items())
    return report


# --- case arithmetic ---------------------------------------------------------

@dataclass(frozen=True)
class CaseRow:
    """One line of the final-charge case analysis.

    strict rows must come out positive, the others non-negative; a row
    with a bound also needs value >= bound > 0.
    """
    side: str
    case: str
    d: int
    t: int | None
    value: Fraction
    strict: bool = False
    bound: Fraction | None = None

    @property
    def ok(self) -> bool:
        holds = self.value > 0 if self.strict else self.value >= 0
        if self.bound is not None:
            holds = holds and self.value >= self.bound > 0
        return holds

    def to_dict(self) -> dict[str, Any]:
        return {
            'side': self.side, 'case': self.case, 'd': self.d, 't': self.t,
            'value': fmt(self.value), 'bound': None if self.bound is None else str(self.bound),
            'strict': self.strict, 'ok': self.ok,
        }


def large_face_value(d: int, t: int) -> Fraction:
    """Lower bound on the final charge of a d-face (d >= 7) with t 3-vertices"""
    return Fraction(d - 4) - Fraction(d - t, 3) - Fraction(t, 2)


def large_face_bound(d: int) -> Fraction:
    return Fraction(7 * d, 12) - 4


def vertex_rows(d_max: int) -> list[CaseRow]:
    rows = [
        CaseRow('vertex', '3-vertex on a 4^- face', 3, None, Fraction(-1) + 2 * HALF),
        CaseRow('vertex', '3-vertex on 5^+ faces only', 3, None, Fraction(-1) + 3 * THIRD),
        CaseRow('vertex', '4-vertex', 4, None, Fraction(0)),
    ]
    rows += [CaseRow('vertex', '5^+ vertex', d, None, Fraction(d - 4) - d * SIXTH, strict=True)
             for d in range(5, d_max + 1)]
    return rows


def face_rows(d_max: int) -> list[CaseRow]:
    """Face-side rows; for d >= 7 only the worst t = d // 2 is listed"""
    rows = [
        CaseRow('face', '3-face', 3, None, Fraction(-1) + 3 * THIRD),
        CaseRow('face', '4-face', 4, None, Fraction(0)),
        CaseRow('face', '5-face, no adjacent 3-face', 5, 2, Fraction(1) - 2 * HALF),
        CaseRow('face', '5-face, one adjacent 3-face', 5, 1, Fraction(1) - HALF - THIRD, strict=True),
        CaseRow('face', '5-face, one adjacent 3-face, 5^+ donor', 5, 2, Fraction(1) + SIXTH - THIRD - (THIRD + HALF)),
        CaseRow('face', '6-face', 6, None, Fraction(2) - 3 * HALF, strict=True),
    ]
    rows += [CaseRow('face', 'd-face', d, d // 2, large_face_value(d, d // 2), strict=True, bound=large_face_bound(d))
             for d in range(7, d_max + 1)]
    return rows


def case_table(d_max: int) -> list[CaseRow]:
    if d_max < 7:
        raise ValueError(f'd_max must be at least 7, got {d_max}')
    return vertex_rows(d_max) + face_rows(d_max)


def case_inequality_check(d_max: int) -> bool:
    """Check every case of the final-charge analysis up to face size d_max.

    Large faces are swept over all 0 <= t <= d // 2 in integers scaled by
    12: value = 8d - 48 - 2t and bound = 7d - 48.
    """
    if d_max < 7:
        raise ValueError(f'd_max must be at least 7, got {d_max}')
    for d in range(7, d_max + 1):
        bound = 7 * d - 48
        if bound <= 0:
            return False
        for t in range(d // 2 + 1):
            if 8 * d - 48 - 2 * t < bound:
                return False
    bad = [row for row in case_table(d_max) if not row.ok]
    for row in bad:
        logger.error('Case row fails: %s d=%d t=%s value=%s', row.case, row.d, row.t, row.value)
    return not bad
