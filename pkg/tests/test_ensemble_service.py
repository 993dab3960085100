import pytest

from app.core.exceptions import InvalidChainError, InvalidDegreeError
from app.services.ensemble_service import (
    build_edge_graph,
    describe,
    design_rate,
    make_regular,
    make_sc,
    make_uncoupled
)


class TestRegular:
    @pytest.mark.parametrize("d_l,d_r,rate", [(3, 6, 0.5), (3, 9, 2.0 / 3.0), (4, 8, 0.5), (3, 12, 0.75)])
    def test_design_rate(self, d_l, d_r, rate):
        assert design_rate(make_regular(d_l, d_r)) == pytest.approx(rate)

    def test_non_integral_k_rejected(self):
        with pytest.raises(InvalidDegreeError):
            make_regular(3, 7)

    def test_non_integral_k_allowed_when_relaxed(self):
        ensemble = make_regular(3, 7, relaxed=True)
        assert not ensemble.sc_compatible
        assert ensemble.design_rate == pytest.approx(4.0 / 7.0)

    @pytest.mark.parametrize("d_l,d_r", [(1, 6), (3, 3), (6, 3)])
    def test_invalid_degrees(self, d_l, d_r):
        with pytest.raises(InvalidDegreeError):
            make_regular(d_l, d_r)


class TestCoupled:
    def test_counts_of_small_chain(self):
        protograph = make_sc(3, 6, 5)
        assert protograph.variable_count == 10
        assert protograph.check_count == 7
        assert list(protograph.checks) == [0, 1, 2, 3, 4, 5, 6]

    def test_boundary_and_interior_check_degrees(self):
        protograph = make_sc(3, 6, 5)
        assert protograph.check_degree(0) == 2
        assert [protograph.check_degree(a) for a in (2, 3, 4)] == [6, 6, 6]
        assert min(protograph.check_degree(a) for a in protograph.checks) == protograph.k

    def test_design_rate(self):
        assert design_rate(make_sc(3, 6, 5)) == pytest.approx(0.3)
        assert design_rate(make_sc(3, 6, 1_000_000)) == pytest.approx(0.5, abs=1e-5)

    def test_degenerate_chain_is_flagged(self):
        protograph = make_sc(3, 6, 1)
        assert design_rate(protograph) == pytest.approx(-0.5)
        assert protograph.is_degenerate

    @pytest.mark.parametrize("d_l", [3, 5])
    @pytest.mark.parametrize("ratio", [2, 3])
    @pytest.mark.parametrize("length", [1, 2, 7, 25, 100])
    def test_handshake_and_reflection(self, d_l, ratio, length):
        protograph = make_sc(d_l, d_l * ratio, length)
        degrees = [protograph.check_degree(a) for a in protograph.checks]
        assert sum(degrees) == protograph.variable_count * d_l
        assert degrees == degrees[::-1]

    def test_rate_approaches_uncoupled_from_below(self):
        rates = [design_rate(make_sc(3, 6, length)) for length in (5, 10, 25, 50, 100)]
        assert all(a < b for a, b in zip(rates, rates[1:]))
        assert all(rate < 0.5 for rate in rates)

    def test_even_variable_degree_rejected(self):
        with pytest.raises(InvalidDegreeError):
            make_sc(4, 8, 10)

    def test_empty_chain_rejected(self):
        with pytest.raises(InvalidChainError):
            make_sc(3, 6, 0)


class TestEdgeGraph:
    def test_regular_is_one_class(self):
        graph = build_edge_graph(make_regular(3, 6))
        assert len(graph.edges) == 1
        assert graph.check_inputs == (((0, 5),),)
        assert graph.variable_inputs == (((0, 2),),)
        assert graph.population_count == 4

    def test_coupled_class_count(self):
        graph = build_edge_graph(make_sc(3, 6, 5))
        assert len(graph.edges) == 15
        assert graph.population_count == 60

    def test_coupled_inputs_cover_every_socket(self):
        protograph = make_sc(3, 6, 25)
        graph = build_edge_graph(protograph)
        for e, edge in enumerate(graph.edges):
            sockets = sum(count for _, count in graph.check_inputs[e])
            assert sockets == protograph.check_degree(edge.check) - 1
            assert sum(count for _, count in graph.variable_inputs[e]) == protograph.d_l - 1

    def test_uncoupled_copies(self):
        graph = make_uncoupled(3, 6, copies=4)
        assert graph.positions == (1, 2, 3, 4)
        assert graph.check_inputs[2] == ((2, 5),)
        assert graph.variable_inputs[2] == ((2, 2),)
        assert graph.position_inputs[2] == ((2, 3),)


class TestDescribe:
    def test_coupled_description(self):
        info = describe(make_sc(3, 6, 5))
        assert info["kind"] == "spatially_coupled"
        assert info["check_count"] == 7
        assert info["design_rate"] == pytest.approx(0.3)
        assert info["checks"][0] == {"index": 0, "degree": 2, "bundles": [1]}
        assert info["bundles"][0]["checks"] == [0, 1, 2]

    def test_regular_description(self):
        info = describe(make_regular(3, 9))
        assert info == {
            "kind": "regular",
            "d_l": 3,
            "d_r": 9,
            "sc_compatible": True,
            "design_rate": pytest.approx(2.0 / 3.0),
        }
