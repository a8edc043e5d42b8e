"""Tests for decomp module"""
import networkx as nx
import pytest

from decomp import (
    ACYCLICITY,
    COVERAGE,
    H_DEGREE,
    OUT_DEGREE,
    Decomposition,
    DecompositionError,
    bounded_degree_subsets,
    decomposable_21,
    from_dict,
    h_candidates,
    peel,
    require_valid,
    solve_exact,
    verify_decomposition,
)
from degeneracy import Orientation, is_d_degenerate
from graph_core import Graph


def _graph(g):
    return Graph.from_networkx(g)


def _small_connected_graphs():
    return [g for g in nx.graph_atlas_g()[1:] if g.number_of_nodes() <= 6 and nx.is_connected(g)]


class TestVerify:
    def test_valid_decomposition(self):
        """A triangle with one H edge and a transitive path"""
        g = _graph(nx.cycle_graph(3))
        dec = Decomposition(frozenset({(0, 1)}), Orientation.from_arcs([(0, 2), (1, 2)]))
        assert verify_decomposition(g, dec) == (True, [])

    def test_h_degree_violation(self):
        """Two H edges at one vertex break h = 1"""
        g = _graph(nx.path_graph(3))
        dec = Decomposition(frozenset({(0, 1), (1, 2)}), Orientation())
        assert verify_decomposition(g, dec) == (False, [H_DEGREE])

    def test_coverage_violation(self):
        g = _graph(nx.path_graph(3))
        dec = Decomposition(frozenset({(0, 1)}), Orientation())
        assert verify_decomposition(g, dec) == (False, [COVERAGE])

    def test_edge_in_h_and_oriented(self):
        g = _graph(nx.path_graph(2))
        dec = Decomposition(frozenset({(0, 1)}), Orientation.from_arcs([(0, 1)]))
        assert verify_decomposition(g, dec) == (False, [COVERAGE])

    def test_acyclicity_violation(self):
        g = _graph(nx.cycle_graph(3))
        dec = Decomposition(frozenset(), Orientation.from_arcs([(0, 1), (1, 2), (2, 0)]))
        assert verify_decomposition(g, dec) == (False, [ACYCLICITY])

    def test_out_degree_violation(self):
        g = _graph(nx.star_graph(3))
        dec = Decomposition(frozenset(), Orientation.from_arcs([(0, 1), (0, 2), (0, 3)]))
        assert verify_decomposition(g, dec) == (False, [OUT_DEGREE])

    def test_violations_in_clause_order(self):
        """All four clauses can fail at once and are listed in order"""
        g = _graph(nx.complete_graph(4))
        dec = Decomposition(frozenset({(0, 1), (0, 2)}),
                            Orientation.from_arcs([(1, 2), (2, 3), (3, 1)]), d=0)
        ok, violations = verify_decomposition(g, dec)
        assert not ok
        assert violations == [H_DEGREE, COVERAGE, ACYCLICITY, OUT_DEGREE]

    def test_foreign_edge_raises(self):
        g = _graph(nx.path_graph(3))
        with pytest.raises(DecompositionError):
            verify_decomposition(g, Decomposition(frozenset({(0, 2)}), Orientation.from_arcs([(0, 1), (1, 2)])))

    def test_require_valid_carries_violations(self):
        g = _graph(nx.path_graph(3))
        with pytest.raises(DecompositionError) as exc:
            require_valid(g, Decomposition(), 'test')
        assert exc.value.violations == [COVERAGE]


class TestSubsets:
    def test_matchings_of_path(self):
        """Size-2 matchings of a 4-edge path, lexicographically"""
        edges = [(0, 1), (1, 2), (2, 3), (3, 4)]
        assert list(bounded_degree_subsets(edges, 1, 2)) == [((0, 1), (2, 3)), ((0, 1), (3, 4)), ((1, 2), (3, 4))]

    def test_h_candidates_increasing_size(self):
        sizes = [len(s) for s in h_candidates(_graph(nx.cycle_graph(4)), 1)]
        assert sizes == sorted(sizes)
        assert sizes[0] == 0
        assert max(sizes) == 2

    def test_h_zero_only_empty(self):
        assert list(h_candidates(_graph(nx.cycle_graph(4)), 0)) == [()]


class TestSolveExact:
    def test_k4_is_21_decomposable(self):
        assert decomposable_21(_graph(nx.complete_graph(4)))

    def test_k5_is_not_21_decomposable(self):
        assert not decomposable_21(_graph(nx.complete_graph(5)))
        assert solve_exact(_graph(nx.complete_graph(5)), 2, 1) is None

    def test_empty_h_first(self):
        """A 2-degenerate graph needs no H edges"""
        dec = solve_exact(_graph(nx.cycle_graph(5)), 2, 1)
        assert dec.h_edges == frozenset()

    @pytest.mark.parametrize('d', [1, 2, 3])
    def test_h0_agrees_with_degeneracy(self, d):
        """With h = 0 a decomposition exists exactly when the graph is d-degenerate"""
        for g in _small_connected_graphs():
            host = _graph(g)
            dec = solve_exact(host, d, 0)
            assert (dec is not None) == is_d_degenerate(host, d)
            if dec is not None:
                assert verify_decomposition(host, dec) == (True, [])

    def test_monotone_in_d_and_h(self):
        """A (d, h)-decomposition is also a (d+1, h)- and a (d, h+1)-decomposition"""
        graphs = [g for g in nx.graph_atlas_g()[1:] if g.number_of_nodes() <= 7][::9]
        for g in graphs:
            host = _graph(g)
            for d in (0, 1, 2):
                for h in (0, 1):
                    if solve_exact(host, d, h) is None:
                        continue
                    assert solve_exact(host, d + 1, h) is not None, (list(g.edges), d, h)
                    assert solve_exact(host, d, h + 1) is not None, (list(g.edges), d, h)

    def test_complements_are_memoized(self):
        """Solving again with a larger d peels no new complement"""
        host = _graph(nx.complete_graph(5))
        peel.cache_clear()
        assert solve_exact(host, 2, 1) is None
        misses = peel.cache_info().misses
        assert solve_exact(host, 3, 1) is not None
        assert peel.cache_info().misses == misses
        assert peel.cache_info().hits >= 2

    def test_every_result_verifies(self):
        for g in _small_connected_graphs():
            host = _graph(g)
            dec = solve_exact(host, 2, 1)
            if dec is not None:
                assert verify_decomposition(host, dec) == (True, [])


class TestSerialization:
    def test_to_dict_uses_labels(self):
        dec = Decomposition(frozenset({(0, 1)}), Orientation.from_arcs([(2, 0)]))
        doc = dec.to_dict({0: 'a', 1: 'b', 2: 'c'})
        assert doc == {'d': 2, 'h': 1, 'H': [['a', 'b']], 'arcs': [['c', 'a']]}

    def test_from_dict_with_labels(self):
        doc = {'d': 2, 'h': 1, 'H': [['a', 'b']], 'arcs': [['c', 'a']]}
        dec = from_dict(doc, {'a': 0, 'b': 1, 'c': 2})
        assert dec.h_edges == frozenset({(0, 1)})
        assert dec.orientation.arcs == ((2, 0),)

    def test_from_dict_unknown_label(self):
        with pytest.raises(DecompositionError):
            from_dict({'H': [['a', 'z']]}, {'a': 0})

    def test_from_dict_overrides_parameters(self):
        dec = from_dict({'d': 2, 'h': 1}, None, d=3, h=0)
        assert (dec.d, dec.h) == (3, 0)
