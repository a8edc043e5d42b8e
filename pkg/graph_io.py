"""Reading and writing graphs: EGF JSON, graph6 and DOT"""
import json
import logging
import os
import tempfile
from collections.abc import Iterable
from contextlib import suppress
from dataclasses import dataclass, field
from typing import IO, Any

import networkx as nx

from graph_core import EmbeddedGraph, Graph, GraphError, Label

logger = logging.getLogger(__name__)


class ParseError(ValueError):
    """Raised when input is not valid EGF or graph6"""


def secure_write(filepath: str, text: str) -> None:
    """Replace filepath with text, readable only by the owner.

    The text goes to a 0o600 temp file next to the target, which then
    replaces it in one os.replace; the temp file is removed on failure.
    """
    dir_name = os.path.dirname(filepath) or '.'
    fd, tmp_path = tempfile.mkstemp(dir=dir_name, suffix='.tmp')
    try:
        with os.fdopen(fd, 'w', encoding='utf-8') as f:
            f.write(text)
        os.chmod(tmp_path, 0o600)
        os.replace(tmp_path, filepath)
    except BaseException:
        with suppress(OSError):
            os.unlink(tmp_path)
        raise


@dataclass(frozen=True)
class GraphInput:
    """A parsed input: always a graph, an embedding only when the source had rotations"""
    graph: Graph
    labels: dict[int, Label] = field(default_factory=dict)
    embedding: EmbeddedGraph | None = None

    def label(self, v: int) -> Label:
        return self.labels.get(v, v)

    def require_embedding(self, command: str) -> EmbeddedGraph:
        if self.embedding is None:
            raise ParseError(f'{command} needs an embedded graph (EGF with "rotation"); graph6 input has none')
        return self.embedding


def _label_index(labels: list[Label]) -> dict[str, int]:
    index: dict[str, int] = {}
    for i, lbl in enumerate(labels):
        if not isinstance(lbl, (str, int)) or isinstance(lbl, bool):
            raise ParseError(f'Vertex label {lbl!r} must be a string or integer')
        if str(lbl) in index:
            raise ParseError(f'Duplicate vertex label {lbl!r}')
        index[str(lbl)] = i
    return index


def _compact_labels(labels: list[Label]) -> dict[int, Label]:
    # labels equal to their ids carry no information
    return {i: lbl for i, lbl in enumerate(labels) if lbl != i}


def parse_egf(data: dict[str, Any]) -> GraphInput:
    """Parse an EGF document.

    {"vertices": [labels], "rotation": {label: [neighbor labels in cyclic order]}}
    An "edges": [[u, v], ...] list may replace "rotation" for abstract graphs.

    Raises:
        ParseError: naming the offending vertex when the rotation is malformed
    """
    if not isinstance(data, dict) or not isinstance(data.get('vertices'), list):
        raise ParseError('EGF document needs a "vertices" list')
    labels = data['vertices']
    index = _label_index(labels)
    names = _compact_labels(labels)

    def vid(lbl: Any, where: str) -> int:
        if str(lbl) not in index:
            raise ParseError(f'{where}: unknown vertex {lbl!r}')
        return index[str(lbl)]

    if 'rotation' not in data:
        edges = data.get('edges', [])
        try:
            pairs = [(vid(u, 'edges'), vid(v, 'edges')) for u, v in edges]
            graph = Graph.from_edges(range(len(labels)), pairs)
        except (TypeError, ValueError) as e:
            raise ParseError(f'Malformed edge list: {e}') from e
        return GraphInput(graph, names)

    rotation_data = data['rotation']
    if not isinstance(rotation_data, dict):
        raise ParseError('"rotation" must map vertex labels to neighbor lists')
    rotation: dict[int, tuple[int, ...]] = {i: () for i in range(len(labels))}
    for key, order in rotation_data.items():
        v = vid(key, 'rotation')
        if not isinstance(order, list):
            raise ParseError(f'Rotation at vertex {key!r} is not a list')
        rotation[v] = tuple(vid(u, f'rotation at vertex {key!r}') for u in order)

    for v, order in rotation.items():
        if len(set(order)) != len(order):
            raise ParseError(f'Rotation at vertex {labels[v]!r} is not a permutation of its neighbors')
        for u in order:
            if u == v:
                raise ParseError(f'Rotation at vertex {labels[v]!r} contains a loop')
            if v not in rotation[u]:
                raise ParseError(f'Rotation at vertex {labels[v]!r} is not a permutation of its neighbors: '
                                 f'{labels[u]!r} does not list it back')
    try:
        eg = EmbeddedGraph.from_rotation(rotation, names)
    except GraphError as e:
        raise ParseError(str(e)) from e
    return GraphInput(eg.graph, names, eg)


def to_egf(eg: EmbeddedGraph) -> dict[str, Any]:
    return {
        'vertices': eg.labelled(eg.graph.vertices),
        'rotation': {str(eg.label(v)): eg.labelled(eg.rotation[v]) for v in eg.graph.vertices},
    }


def parse_graph6(text: str) -> GraphInput:
    """Parse one graph6 line (an optional >>graph6<< header is accepted)"""
    try:
        g = nx.from_graph6_bytes(text.strip().encode('ascii'))
    except (ValueError, UnicodeEncodeError, nx.NetworkXError) as e:
        raise ParseError(f'Malformed graph6: {e}') from e
    return GraphInput(Graph.from_networkx(g))


def to_graph6(g: Graph) -> str:
    h = nx.convert_node_labels_to_integers(g.to_networkx(), ordering='sorted')
    return nx.to_graph6_bytes(h, header=False).decode('ascii').strip()


def parse_input(text: str) -> GraphInput:
    """EGF if the text is a JSON object, graph6 otherwise"""
    stripped = text.strip()
    if not stripped:
        raise ParseError('Empty input')
    if stripped.startswith('{'):
        try:
            data = json.loads(stripped)
        except json.JSONDecodeError as e:
            raise ParseError(f'Malformed JSON: {e}') from e
        return parse_egf(data)
    return parse_graph6(stripped.splitlines()[0])


def read_input(path: str | None, stdin: IO[str]) -> GraphInput:
    if path is None or path == '-':
        return parse_input(stdin.read())
    with open(path, 'r', encoding='utf-8') as f:
        return parse_input(f.read())


def _dot_id(label: Label) -> str:
    return json.dumps(str(label))


def to_dot(graph: Graph, labels: dict[int, Label] | None = None,
           h_edges: Iterable[tuple[int, int]] = (), arcs: Iterable[tuple[int, int]] | None = None,
           highlight: Iterable[int] = ()) -> str:
    """DOT text for external viewers.

    With arcs the output is a digraph: H edges are drawn bold without
    arrowheads and every other edge follows its arc. highlight fills the
    given vertices (detection witnesses, reduction sets).
    """
    labels = labels or {}
    name = lambda v: _dot_id(labels.get(v, v))  # noqa: E731
    directed = arcs is not None
    lines = ['digraph G {' if directed else 'graph G {']
    marked = set(highlight)
    for v in graph.vertices:
        style = ' [style=filled, fillcolor=lightblue]' if v in marked else ''
        lines.append(f'  {name(v)}{style};')
    bold = set(h_edges)
    if directed:
        for u, v in sorted(bold):
            lines.append(f'  {name(u)} -> {name(v)} [dir=none, style=bold, color=red];')
        for u, v in arcs:
            lines.append(f'  {name(u)} -> {name(v)};')
    else:
        for u, v in graph.edges:
            lines.append(f'  {name(u)} -- {name(v)};')
    lines.append('}')
    return '\n'.join(lines) + '\n'


def write_json(path: str, doc: Any) -> None:
    """JSON documents are written indented, with a trailing newline"""
    secure_write(path, json.dumps(doc, indent=2, ensure_ascii=False) + '\n')
