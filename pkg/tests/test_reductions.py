"""Tests for reductions module"""
import pytest

import reductions
from decomp import Decomposition, solve_exact, verify_decomposition
from generators import (
    complete,
    cycle,
    embedding_from_faces,
    honeycomb_torus,
    light_neighborhood,
    plant_configuration,
    random_rotation,
    torus_grid,
)
from graph_core import delete_vertices
from patterns import is_forbidden_free
from reductions import (
    ForbiddenConfigurationError,
    Recipe,
    ReductionError,
    ReductionMatch,
    StuckError,
    apply_reduction,
    check_hypotheses,
    extend_decomposition,
    find_reduction,
    light_panel_recipe,
    rule_catalog,
    rules_by_id,
    solve_constructive,
)

RECIPES = [('I', None), ('II', None), ('VIII', None), ('XA', None), ('XB', None), ('XC', None),
           ('IX', 'a'), ('IX', 'b'), ('IX', 'c'), ('IX', 'd')]


@pytest.fixture(autouse=True)
def verified_extensions(monkeypatch):
    """Every extension step is post-verified"""
    monkeypatch.setenv('VERIFY_EXTENSIONS', 'true')
    monkeypatch.setenv('GRAPHDECOMP_CONFIG', '/nonexistent/config.json')


def _square_with_stubs():
    """4-face 0-1-2-3 with degrees 3, 4, 3, 4 made up by pendant vertices"""
    return embedding_from_faces([[0, 1, 2, 3], [0, 4, 0, 3, 8, 3, 9, 3, 2, 7, 2, 1, 5, 1, 6, 1]])


class TestCatalog:
    def test_seven_rules(self):
        assert [r.id for r in rule_catalog()] == ['I', 'II', 'VIII', 'IX', 'XA', 'XB', 'XC']

    def test_rule_table_built_once(self):
        assert rules_by_id() is rules_by_id()
        assert list(rules_by_id()) == [r.id for r in rule_catalog()]

    def test_scan_order(self):
        assert reductions.SCAN_ORDER == ('I', 'II', 'VIII', 'XA', 'XB', 'XC', 'IX')

    @pytest.mark.parametrize('rule_id,panel', RECIPES)
    def test_recipe_h_is_matching(self, rule_id, panel):
        recipe = rules_by_id()[rule_id].recipe(panel)
        ends = [lbl for edge in recipe.h_edges for lbl in edge]
        assert len(ends) == len(set(ends))
        assert set(ends) <= set(recipe.labels)

    @pytest.mark.parametrize('rule_id,panel', RECIPES)
    def test_recipe_order_respects_arcs(self, rule_id, panel):
        recipe = rules_by_id()[rule_id].recipe(panel)
        position = {lbl: i for i, lbl in enumerate(recipe.order)}
        assert sorted(position) == sorted(recipe.labels)
        assert all(position[a] < position[b] for a, b in recipe.arcs)

    def test_light_panel_edge_counts(self):
        """Nine-vertex panels have 11 edges, the wrapped one shares a vertex"""
        for panel in 'abc':
            recipe = light_panel_recipe(panel)
            assert len(recipe.labels) == 9
            assert (len(recipe.h_edges), len(recipe.arcs)) == (4, 7)
        recipe = light_panel_recipe('d')
        assert len(recipe.labels) == 8
        assert (len(recipe.h_edges), len(recipe.arcs)) == (3, 8)

    def test_cyclic_recipe_rejected(self):
        with pytest.raises(ValueError):
            Recipe(('a', 'b'), arcs=(('a', 'b'), ('b', 'a'))).order

    def test_unknown_panel(self):
        with pytest.raises(ReductionError):
            rules_by_id()['IX'].recipe('z')


class TestRecipeSoundness:
    @pytest.mark.parametrize('rule_id,panel', RECIPES)
    def test_extension_is_valid(self, rule_id, panel):
        """Extending a known decomposition of G - X always yields a valid decomposition of G"""
        for seed in range(1000):
            eg, match, sub = plant_configuration(rule_id, seed, panel, outside=8)
            rest = delete_vertices(eg, match.X)
            assert verify_decomposition(rest.graph, sub) == (True, [])
            dec = extend_decomposition(eg, match, sub)
            assert verify_decomposition(eg.graph, dec) == (True, []), (rule_id, panel, seed)

    def test_extension_keeps_outside_out_degrees(self):
        eg, match, sub = plant_configuration('XB', 7)
        dec = extend_decomposition(eg, match, sub)
        for v in eg.graph.vertices:
            if v not in match.X:
                assert dec.orientation.out_degree[v] == sub.orientation.out_degree[v]


class TestMatchers:
    def test_rule_i_on_cycle(self):
        m = find_reduction(cycle(5))
        assert m.rule == 'I'
        assert m.labeling == {'v': 0}

    def test_rule_ii_on_honeycomb(self):
        eg = honeycomb_torus(3, 3)
        m = find_reduction(eg)
        assert m.rule == 'II'
        u, v = m.labeling['u'], m.labeling['v']
        assert eg.graph.has_edge(u, v)
        assert (u, v) == eg.graph.edges[0]

    def test_rule_viii_on_square(self):
        eg = _square_with_stubs()
        m = rules_by_id()['VIII'].matcher(eg)
        assert m.labeling == {'b1': 0, 'b2': 1, 'b3': 2, 'b4': 3}

    @pytest.mark.parametrize('left3,right3,panel', [('l1', 'r1', 'a'), ('l2', 'r2', 'b'),
                                                    ('l1', 'r2', 'c'), ('l2', 'r1', 'c')])
    def test_rule_ix_panels(self, left3, right3, panel):
        eg, roles = light_neighborhood(left3, right3)
        m = rules_by_id()['IX'].matcher(eg)
        assert m.panel == panel
        assert m.X == frozenset(roles.values())

    def test_rule_ix_wrapped_panel(self):
        eg, roles = light_neighborhood(wrapped=True)
        m = rules_by_id()['IX'].matcher(eg)
        assert m.panel == 'd'
        assert len(m.X) == 8

    def test_no_rule_on_grid(self):
        assert find_reduction(torus_grid(4, 4)) is None


class TestExtension:
    def test_rule_viii_on_square(self):
        """The (3,4,3,4)-face recipe puts b1b2 and b3b4 in H"""
        eg = _square_with_stubs()
        m = ReductionMatch('VIII', {'b1': 0, 'b2': 1, 'b3': 2, 'b4': 3})
        sub = Decomposition()
        dec = extend_decomposition(eg, m, sub)
        assert dec.h_edges == frozenset({(0, 1), (2, 3)})
        assert {(0, 3), (2, 1)} <= set(dec.orientation.arcs)
        assert verify_decomposition(eg.graph, dec) == (True, [])

    def test_rule_ii_orients_outward(self):
        """Both 3-vertices point at their outside neighbours"""
        eg = honeycomb_torus(3, 3)
        m = find_reduction(eg)
        rest = apply_reduction(eg, m)
        sub = solve_constructive(rest, check_forbidden=False)
        dec = extend_decomposition(eg, m, sub)
        u, v = m.labeling['u'], m.labeling['v']
        assert dec.orientation.out_degree[u] == 2
        assert dec.orientation.out_degree[v] == 2
        assert (u, v) in dec.h_edges

    @pytest.mark.parametrize('left3,right3,wrapped', [('l1', 'r1', False), ('l2', 'r2', False),
                                                      ('l1', 'r2', False), ('l2', 'r1', False),
                                                      ('l1', 'r1', True)])
    def test_rule_ix_extends(self, left3, right3, wrapped):
        eg, _ = light_neighborhood(left3, right3, wrapped)
        m = rules_by_id()['IX'].matcher(eg)
        dec = extend_decomposition(eg, m, Decomposition())
        assert verify_decomposition(eg.graph, dec) == (True, [])

    def test_stale_match_rejected(self):
        eg = cycle(5)
        m = ReductionMatch('I', {'v': 9})
        with pytest.raises(ReductionError):
            apply_reduction(eg, m)
        with pytest.raises(ReductionError):
            extend_decomposition(eg, m, Decomposition())

    def test_bad_sub_decomposition_fails_verification(self):
        """An incomplete decomposition of G - X is caught after extension"""
        eg = cycle(5)
        m = find_reduction(eg)
        with pytest.raises(ReductionError) as exc:
            extend_decomposition(eg, m, Decomposition())
        assert exc.value.rule == 'I'
        assert 'coverage' in exc.value.violations


class TestSolveConstructive:
    def test_honeycomb(self):
        """A forbidden-free toroidal graph reduces completely"""
        eg = honeycomb_torus(4, 4)
        trace = []
        dec = solve_constructive(eg, trace)
        assert verify_decomposition(eg.graph, dec) == (True, [])
        assert trace[0]['rule'] == 'II'
        assert sum(len(step['X']) for step in trace) == len(eg.graph)

    @pytest.mark.parametrize('m', [3, 4, 5, 6])
    @pytest.mark.parametrize('n', [3, 4, 5, 6])
    def test_honeycomb_family(self, m, n):
        """Every trace step names a catalog rule"""
        eg = honeycomb_torus(m, n)
        trace = []
        dec = solve_constructive(eg, trace)
        assert verify_decomposition(eg.graph, dec) == (True, [])
        assert {step['rule'] for step in trace} <= set(reductions.SCAN_ORDER)

    def test_forbidden_input_rejected(self):
        with pytest.raises(ForbiddenConfigurationError) as exc:
            solve_constructive(complete(4))
        assert exc.value.pattern.name == '4a'

    def test_grid_3x3_rejected_with_witness(self):
        """The same witness is_forbidden_free reports"""
        eg = torus_grid(3, 3)
        with pytest.raises(ForbiddenConfigurationError) as exc:
            solve_constructive(eg)
        assert exc.value.pattern.name == '4b'
        assert exc.value.witness == is_forbidden_free(eg.graph)[1]

    def test_agrees_with_exact_solver(self):
        """On small forbidden-free inputs both solvers agree, and constructive output verifies"""
        checked = 0
        for seed in range(400):
            n = 6 + seed % 5
            eg = random_rotation(n, round(1.2 * n), seed)
            if not is_forbidden_free(eg.graph)[0]:
                continue
            checked += 1
            dec = solve_constructive(eg, check_forbidden=False, fallback=True, max_exact_edges=eg.graph.num_edges)
            exact = solve_exact(eg.graph, 2, 1)
            assert (dec is None) == (exact is None), seed
            if dec is not None:
                assert verify_decomposition(eg.graph, dec) == (True, []), seed
        assert checked >= 100

    def test_stuck_without_fallback(self):
        with pytest.raises(StuckError) as exc:
            solve_constructive(torus_grid(4, 4), check_forbidden=False, fallback=False)
        assert len(exc.value.graph.graph) == 16

    def test_stuck_when_too_large_for_fallback(self):
        with pytest.raises(StuckError):
            solve_constructive(torus_grid(4, 4), check_forbidden=False, fallback=True, max_exact_edges=20)

    def test_fallback_certifies_non_decomposable(self):
        """K5 has no applicable rule and no (2,1)-decomposition"""
        assert solve_constructive(complete(5), check_forbidden=False) is None

    def test_fallback_on_four_regular_remainder(self):
        """Removing a matching from a 4-regular graph leaves minimum degree 3"""
        assert solve_constructive(torus_grid(3, 3), check_forbidden=False, max_exact_edges=18) is None

    def test_planted_hosts(self):
        """Every planted host decomposes, whichever rules fire"""
        for seed in range(20):
            eg, _, _ = plant_configuration('XC', seed)
            dec = solve_constructive(eg, check_forbidden=False)
            if dec is not None:
                assert verify_decomposition(eg.graph, dec) == (True, [])


class TestHypotheses:
    def test_honeycomb(self):
        report = check_hypotheses(honeycomb_torus(4, 4))
        assert report['forbidden_free'] is True
        assert report['witness'] is None
        assert report['euler_characteristic'] == 0
        assert report['toroidal'] is True

    def test_k4(self):
        report = check_hypotheses(complete(4))
        assert report['forbidden_free'] is False
        assert report['witness']['pattern'] == '4a'
        assert report['toroidal'] is False
