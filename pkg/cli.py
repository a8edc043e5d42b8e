import argparse
import json
import logging
import os
import sys
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import IO, Any

import config
import discharge
import generators
import graph_io
import patterns
import reductions
from decomp import DecompositionError, from_dict, solve_exact, verify_decomposition
from degeneracy import degeneracy
from graph_core import EmbeddedGraph, GraphError, euler_characteristic, face_summary
from graph_io import GraphInput, ParseError

logger = logging.getLogger(__name__)

COMMANDS = ('faces', 'degeneracy', 'decompose', 'verify', 'detect', 'member',
            'discharge', 'audit', 'gen', 'catalog', 'config')
FAMILIES = ('torus_grid', 'honeycomb_torus', 'random_rotation', 'cycle', 'complete', 'k7_torus')

EXIT_OK = 0
EXIT_IO = 1
EXIT_DOMAIN = 2

Result = tuple[dict[str, Any], int]


@dataclass(frozen=True)
class GeneratorSpec:
    family: str
    m: int | None = None
    n: int | None = None
    deg: int | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f'Unknown family {self.family!r}')
        needs = {'torus_grid': ('m', 'n'), 'honeycomb_torus': ('m', 'n'), 'random_rotation': ('n', 'deg'),
                 'cycle': ('n',), 'complete': ('n',), 'k7_torus': ()}[self.family]
        missing = [name for name in needs if getattr(self, name) is None]
        if missing:
            raise ValueError(f'{self.family} needs --{", --".join(missing)}')


def generate(spec: GeneratorSpec) -> EmbeddedGraph:
    """Build the requested family; random_rotation draws n * deg / 2 edges"""
    if spec.family == 'torus_grid':
        return generators.torus_grid(spec.m, spec.n)
    if spec.family == 'honeycomb_torus':
        return generators.honeycomb_torus(spec.m, spec.n)
    if spec.family == 'random_rotation':
        return generators.random_rotation(spec.n, spec.n * spec.deg // 2, spec.seed)
    if spec.family == 'cycle':
        return generators.cycle(spec.n)
    if spec.family == 'complete':
        return generators.complete(spec.n)
    return generators.k7_torus()


@dataclass(frozen=True)
class RunConfig:
    """One CLI invocation; flags override the loaded configuration"""
    command: str
    input: str | None = None
    output: str | None = None
    dot: str | None = None
    each: str | None = None
    d: int | None = None
    h: int | None = None
    i: int | None = None
    j: int | None = None
    method: str = 'exact'
    decomposition: str | None = None
    generator: GeneratorSpec | None = None
    trace: bool = False
    hypotheses: bool = False
    dump: bool = False
    superclass: bool = False
    cases: int | None = None
    fallback: bool | None = None
    max_exact_edges: int | None = None
    assignments: tuple[str, ...] = ()
    settings: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise ValueError(f'Unknown command {self.command!r}')
        if self.command == 'decompose':
            if self.d is None or self.h is None:
                raise ValueError('decompose needs --d and --h')
            if self.method not in ('exact', 'constructive'):
                raise ValueError(f'Unknown method {self.method!r}')
            if self.method == 'constructive' and (self.d, self.h) != (2, 1):
                raise ValueError('the constructive method only builds (2,1)-decompositions')
        if self.command == 'verify' and self.decomposition is None:
            raise ValueError('verify needs --decomposition')
        if self.command == 'member' and (self.i is None or self.j is None):
            raise ValueError('member needs --i and --j')
        if self.command == 'gen' and self.generator is None:
            raise ValueError('gen needs --family')
        if self.cases is not None and self.cases < 7:
            raise ValueError('--cases needs a maximum face size of at least 7')


def _error(kind: str, message: str, **extra: Any) -> dict[str, Any]:
    return {'status': 'error', 'kind': kind, 'message': message, **extra}


def _labels(src: GraphInput, vs: Any) -> list[Any]:
    return [src.label(v) for v in vs]


def _cmd_faces(cfg: RunConfig, src: GraphInput, trace: list[str]) -> Result:
    eg = src.require_embedding('faces')
    try:
        chi = euler_characteristic(eg)
    except GraphError:
        chi = None
    if cfg.dot:
        graph_io.secure_write(cfg.dot, graph_io.to_dot(eg.graph, eg.labels))
    return {'num_faces': len(eg.faces), 'euler_characteristic': chi, 'faces': face_summary(eg)}, EXIT_OK


def _cmd_degeneracy(cfg: RunConfig, src: GraphInput, trace: list[str]) -> Result:
    d, peeling = degeneracy(src.graph)
    return {'d': d, 'order': _labels(src, peeling.order)}, EXIT_OK


def _cmd_decompose(cfg: RunConfig, src: GraphInput, trace: list[str]) -> Result:
    if cfg.method == 'exact':
        dec = solve_exact(src.graph, cfg.d, cfg.h)
    else:
        eg = src.require_embedding('decompose --method constructive')
        steps: list[dict[str, Any]] = []
        try:
            dec = reductions.solve_constructive(eg, steps, fallback=cfg.fallback, max_exact_edges=cfg.max_exact_edges)
        finally:
            if cfg.trace:
                trace.extend(json.dumps(step, ensure_ascii=False) for step in steps)
    doc: dict[str, Any] = {'d': cfg.d, 'h': cfg.h, 'method': cfg.method, 'decomposable': dec is not None}
    if dec is not None:
        doc['decomposition'] = dec.to_dict(src.labels)
        if cfg.dot:
            graph_io.secure_write(cfg.dot, graph_io.to_dot(src.graph, src.labels, dec.h_edges, dec.orientation.arcs))
    return doc, EXIT_OK


def _cmd_verify(cfg: RunConfig, src: GraphInput, trace: list[str]) -> Result:
    with open(cfg.decomposition, 'r', encoding='utf-8') as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise ParseError(f'Malformed decomposition JSON: {e}') from e
    if isinstance(data, dict):
        data = data.get('decomposition', data)
    if not isinstance(data, dict):
        raise ParseError('Decomposition JSON must be an object with "H" and "arcs"')
    ids = {str(src.label(v)): v for v in src.graph.vertices}
    dec = from_dict(data, ids, cfg.d, cfg.h)
    ok, violations = verify_decomposition(src.graph, dec)
    if not ok:
        return _error('verification', f'Invalid ({dec.d},{dec.h})-decomposition', violations=violations), EXIT_DOMAIN
    return {'valid': True, 'd': dec.d, 'h': dec.h}, EXIT_OK


def _cmd_detect(cfg: RunConfig, src: GraphInput, trace: list[str]) -> Result:
    free, witness = patterns.is_forbidden_free(src.graph)
    doc: dict[str, Any] = {'forbidden_free': free, 'witness': None}
    if witness is not None:
        p = patterns.catalog_by_name()[witness.pattern]
        doc['witness'] = witness.to_dict(p, src.embedding)
        if src.embedding is None:
            doc['witness']['mapping'] = {k: src.label(v) for k, v in doc['witness']['mapping'].items()}
    if cfg.dot:
        marked = witness.mapping.values() if witness is not None else ()
        graph_io.secure_write(cfg.dot, graph_io.to_dot(src.graph, src.labels, highlight=marked))
    return doc, EXIT_OK


def _cmd_member(cfg: RunConfig, src: GraphInput, trace: list[str]) -> Result:
    cycle = patterns.find_cycle_of_length(src.graph, cfg.i) or patterns.find_cycle_of_length(src.graph, cfg.j)
    doc: dict[str, Any] = {'i': cfg.i, 'j': cfg.j, 'member': cycle is None,
                           'cycle': None if cycle is None else _labels(src, cycle)}
    if cfg.hypotheses:
        doc['hypotheses'] = reductions.check_hypotheses(src.require_embedding('member --hypotheses'))
    return doc, EXIT_OK


def _cmd_discharge(cfg: RunConfig, src: GraphInput, trace: list[str]) -> Result:
    eg = src.require_embedding('discharge')
    ledger = discharge.discharge(eg)
    doc = discharge.final_charge_report(ledger)
    doc['log'] = discharge.transfer_log(ledger)
    doc['zero_charge'] = discharge.zero_charge_profile(ledger, eg)
    return doc, EXIT_OK


def _cmd_audit(cfg: RunConfig, src: GraphInput, trace: list[str]) -> Result:
    return discharge.audit_lemma_properties(src.require_embedding('audit')).to_dict(), EXIT_OK


def _cmd_gen(cfg: RunConfig) -> Result:
    spec = cfg.generator
    eg = generate(spec)
    return {**graph_io.to_egf(eg), 'family': spec.family, 'seed': spec.seed}, EXIT_OK


def _cmd_catalog(cfg: RunConfig) -> Result:
    doc: dict[str, Any] = {}
    if cfg.dump or not (cfg.superclass or cfg.cases):
        doc['forbidden'] = [patterns.pattern_to_dict(p) for p in patterns.forbidden_catalog()]
        doc['reducible'] = [patterns.pattern_to_dict(p) for p in patterns.reducible_catalog()]
    if cfg.superclass:
        doc['superclass'] = patterns.superclass_report()
    if cfg.cases:
        doc['cases'] = {
            'd_max': cfg.cases,
            'ok': discharge.case_inequality_check(cfg.cases),
            'rows': [row.to_dict() for row in discharge.case_table(min(cfg.cases, 12))],
        }
    return doc, EXIT_OK


def _cmd_config(cfg: RunConfig) -> Result:
    """Show the effective settings; --set KEY=VALUE persists to the config file first"""
    changes = {}
    for item in cfg.assignments:
        key, sep, value = item.partition('=')
        if not sep:
            raise config.ConfigError(f'--set expects KEY=VALUE, got {item!r}')
        changes[key.strip().upper()] = value
    settings = config.save_config(changes) if changes else config.load_config()
    return {'config_file': config.config_file(), 'saved': sorted(changes), 'settings': settings}, EXIT_OK


HANDLERS: dict[str, Callable[[RunConfig, GraphInput, list[str]], Result]] = {
    'faces': _cmd_faces,
    'degeneracy': _cmd_degeneracy,
    'decompose': _cmd_decompose,
    'verify': _cmd_verify,
    'detect': _cmd_detect,
    'member': _cmd_member,
    'discharge': _cmd_discharge,
    'audit': _cmd_audit,
}

NO_INPUT_HANDLERS: dict[str, Callable[[RunConfig], Result]] = {
    'gen': _cmd_gen,
    'catalog': _cmd_catalog,
    'config': _cmd_config,
}


def execute(cfg: RunConfig, stdin: IO[str]) -> tuple[dict[str, Any], int, list[str]]:
    """Run one command against one input; never raises for expected failures.

    Returns:
        (document, exit status, trace lines)
    """
    trace: list[str] = []
    try:
        if cfg.command in NO_INPUT_HANDLERS:
            doc, status = NO_INPUT_HANDLERS[cfg.command](cfg)
        else:
            src = graph_io.read_input(cfg.input, stdin)
            doc, status = HANDLERS[cfg.command](cfg, src, trace)
    except reductions.ForbiddenConfigurationError as e:
        logger.error('%s', e)
        doc, status = _error('forbidden', str(e), witness=e.witness.to_dict(e.pattern, e.graph)), EXIT_DOMAIN
    except reductions.StuckError as e:
        logger.error('%s', e)
        doc, status = _error('stuck', str(e), remainder=graph_io.to_egf(e.graph)), EXIT_DOMAIN
    except reductions.ReductionError as e:
        logger.error('%s', e)
        doc, status = _error('reduction', str(e), rule=e.rule, violations=e.violations), EXIT_DOMAIN
    except ParseError as e:
        logger.error('Failed to parse input: %s', e)
        doc, status = _error('parse', str(e)), EXIT_IO
    except OSError as e:
        logger.error('I/O error: %s', e)
        doc, status = _error('io', str(e)), EXIT_IO
    except config.ConfigError as e:
        logger.error('%s', e)
        doc, status = _error('config', str(e)), EXIT_DOMAIN
    except DecompositionError as e:
        logger.error('%s', e)
        doc, status = _error('decomposition', str(e), violations=e.violations), EXIT_DOMAIN
    except (GraphError, ValueError) as e:
        logger.error('%s', e)
        doc, status = _error('graph', str(e)), EXIT_DOMAIN
    return doc, status, trace


def _batch_inputs(directory: str) -> list[str]:
    return sorted(name for name in os.listdir(directory) if name.endswith(('.json', '.g6')))


def run_batch(cfg: RunConfig, workers: int) -> tuple[dict[str, Any], int]:
    """Run cfg on every EGF/graph6 file in cfg.each; results keyed by sorted file name"""
    names = _batch_inputs(cfg.each)
    jobs = [replace(cfg, input=os.path.join(cfg.each, name), each=None, output=None, dot=None, trace=False)
            for name in names]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        outcomes = list(pool.map(lambda job: execute(job, sys.stdin), jobs))
    logger.info('Batch: %d files with %d workers', len(names), workers)
    results = {name: doc for name, (doc, _, _) in zip(names, outcomes)}
    status = max((code for _, code, _ in outcomes), default=EXIT_OK)
    return {'results': results}, status


def run(cfg: RunConfig, stdin: IO[str] | None = None, stdout: IO[str] | None = None) -> int:
    """Execute cfg, print trace lines then one JSON document, return the exit status"""
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    if cfg.each:
        if not os.path.isdir(cfg.each):
            doc, status, trace = _error('io', f'Not a directory: {cfg.each}'), EXIT_IO, []
        else:
            doc, status = run_batch(cfg, cfg.settings.get('BATCH_WORKERS', 4))
            trace = []
    else:
        doc, status, trace = execute(cfg, stdin)
    for line in trace:
        stdout.write(line + '\n')
    if cfg.output and status != EXIT_IO:
        try:
            graph_io.write_json(cfg.output, doc)
        except OSError as e:
            logger.error('Failed to write output: %s', e)
            doc, status = _error('io', str(e)), EXIT_IO
        else:
            return status
    stdout.write(json.dumps(doc, indent=2, ensure_ascii=False) + '\n')
    return status


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--input', help='EGF or graph6 file (default: standard input)')
    common.add_argument('--output', help='write the JSON document here instead of standard output')
    common.add_argument('--each', metavar='DIR', help='run on every *.json / *.g6 file in DIR')

    parser = argparse.ArgumentParser(prog='graphdecomp', description='(2,1)-decompositions of toroidal graphs')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('faces', parents=[common], help='trace faces of an embedded graph')
    p.add_argument('--dot')
    sub.add_parser('degeneracy', parents=[common], help='degeneracy and peeling order')

    p = sub.add_parser('decompose', parents=[common], help='find a (d,h)-decomposition')
    p.add_argument('--d', type=int, required=True)
    p.add_argument('--h', type=int, required=True)
    p.add_argument('--method', choices=('exact', 'constructive'), default='exact')
    p.add_argument('--trace', action='store_true', help='print reduction steps as JSON lines')
    p.add_argument('--no-fallback', dest='fallback', action='store_false', default=None)
    p.add_argument('--max-exact-edges', type=int)
    p.add_argument('--dot')

    p = sub.add_parser('verify', parents=[common], help='check a decomposition against a graph')
    p.add_argument('--decomposition', required=True)
    p.add_argument('--d', type=int)
    p.add_argument('--h', type=int)

    p = sub.add_parser('detect', parents=[common], help='search the forbidden configurations')
    p.add_argument('--dot')

    p = sub.add_parser('member', parents=[common], help='test for i-cycles and j-cycles')
    p.add_argument('--i', type=int, required=True)
    p.add_argument('--j', type=int, required=True)
    p.add_argument('--hypotheses', action='store_true')

    sub.add_parser('discharge', parents=[common], help='run the discharging rules')
    sub.add_parser('audit', parents=[common], help='check the structural properties')

    p = sub.add_parser('gen', help='generate an embedded graph as EGF')
    p.add_argument('--family', choices=FAMILIES, required=True)
    p.add_argument('--m', type=int)
    p.add_argument('--n', type=int)
    p.add_argument('--deg', type=int)
    p.add_argument('--seed', type=int)
    p.add_argument('--output')

    p = sub.add_parser('catalog', help='dump configuration catalogs and case arithmetic')
    p.add_argument('--dump', action='store_true')
    p.add_argument('--superclass', action='store_true')
    p.add_argument('--cases', type=int, metavar='D_MAX')
    p.add_argument('--output')

    p = sub.add_parser('config', help='show or change persistent settings')
    p.add_argument('--set', dest='assignments', action='append', default=[], metavar='KEY=VALUE',
                   help='save a setting to the config file (repeatable)')
    return parser


def config_from_args(args: argparse.Namespace, settings: dict[str, Any]) -> RunConfig:
    opt = lambda name, default=None: getattr(args, name, default)  # noqa: E731
    generator = None
    if args.command == 'gen':
        seed = args.seed if args.seed is not None else settings['DEFAULT_SEED']
        generator = GeneratorSpec(args.family, args.m, args.n, args.deg, seed)
    return RunConfig(
        command=args.command, input=opt('input'), output=opt('output'), dot=opt('dot'), each=opt('each'),
        d=opt('d'), h=opt('h'), i=opt('i'), j=opt('j'), method=opt('method', 'exact'),
        decomposition=opt('decomposition'), generator=generator, trace=opt('trace', False),
        hypotheses=opt('hypotheses', False), dump=opt('dump', False), superclass=opt('superclass', False),
        cases=opt('cases'), fallback=opt('fallback'), max_exact_edges=opt('max_exact_edges'),
        assignments=tuple(opt('assignments', ())), settings=settings,
    )


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    settings = config.load_config()
    try:
        cfg = config_from_args(args, settings)
    except ValueError as e:
        logger.error('%s', e)
        sys.stdout.write(json.dumps(_error('usage', str(e)), indent=2) + '\n')
        return EXIT_DOMAIN
    return run(cfg)
