"""Blockage centrality and the geodesic betweenness baseline."""

from __future__ import annotations

import math

import pytest

import oracles
from ctproute.centrality import (
    CSV_HEADER,
    CbcResult,
    GeodesicScore,
    canadian_betweenness,
    canadian_betweenness_all,
    geodesic_edge_betweenness,
    geodesic_scores,
    write_centrality_csv,
)
from ctproute.errors import (
    IncompatibleOptions,
    UnknownEdge,
    ValidationError,
)
from ctproute.fixtures import tb_fixture, tri_fixture
from ctproute.traveler import default_failure_cost
from helpers import make_network, make_model


class TestExactCentrality:
    def test_tri_direct_road_under_others_open(self):
        net, model = tri_fixture()
        row = canadian_betweenness(
            net, model, "S", "T", "d", mode="others_open"
        )
        assert row.e_t_blocked == pytest.approx(12.0, abs=1e-12)
        assert row.e_t_open == pytest.approx(10.0, abs=1e-12)
        assert row.cbc == pytest.approx(2.0, abs=1e-12)
        assert row.p_fail_blocked == 0.0 and row.p_fail_open == 0.0
        assert row.se_blocked is None and row.se_open is None

    def test_tri_detour_edges_are_neutral_under_others_open(self):
        net, model = tri_fixture()
        for edge_id in ("a", "b"):
            row = canadian_betweenness(
                net, model, "S", "T", edge_id, mode="others_open"
            )
            assert row.e_t_blocked == pytest.approx(10.0, abs=1e-12)
            assert row.e_t_open == pytest.approx(10.0, abs=1e-12)
            assert row.cbc == pytest.approx(0.0, abs=1e-12)

    def test_tb_gamble_edge(self):
        net, model = tb_fixture(0.25)
        for mode in ("others_stochastic", "others_open"):
            row = canadian_betweenness(net, model, "S", "T", "at", mode=mode)
            assert row.e_t_blocked == pytest.approx(6.0, abs=1e-12)
            assert row.e_t_open == pytest.approx(2.0, abs=1e-12)
            assert row.cbc == pytest.approx(4.0, abs=1e-12)

    def test_tri_detour_blockage_exposes_failure_risk(self):
        # blocking the certain detour edge leaves only the risky direct
        # road: the traveler fails whenever it is blocked too
        net, model = tri_fixture()
        row = canadian_betweenness(
            net, model, "S", "T", "a",
            mode="others_stochastic", failure_cost=100.0,
        )
        assert row.e_t_blocked == pytest.approx(37.0, abs=1e-12)
        assert row.e_t_open == pytest.approx(10.6, abs=1e-12)
        assert row.cbc == pytest.approx(26.4, abs=1e-12)
        assert row.p_fail_blocked == pytest.approx(0.3, abs=1e-15)
        assert row.p_fail_open == 0.0

    def test_edge_the_traveler_never_needs_scores_zero(self):
        net = make_network(
            [
                ("d", "S", "T", 10.0),
                ("a", "S", "M", 4.0),
                ("b", "M", "T", 8.0),
                ("spur", "M", "P", 5.0),
            ]
        )
        model = make_model(d=0.3, a=0.0, b=0.0, spur=0.5)
        row = canadian_betweenness(net, model, "S", "T", "spur")
        assert row.cbc == 0.0
        assert row.e_t_blocked == row.e_t_open

    def test_blocking_an_edge_can_reduce_expected_time(self):
        # with a finite failure penalty, an open edge can lure the
        # traveler into paying more travel before near-certain failure,
        # while its blocked twin fails sooner and cheaper; nonnegativity
        # of the score is a property of instance families where the sink
        # stays reachable, not of the recursion itself
        net, model, source, sink = oracles.random_instance(9)
        table = canadian_betweenness_all(
            net, model, source, sink, mode="others_stochastic"
        )
        by_edge = {row.edge_id: row for row in table.rows}
        row = by_edge["e1"]
        assert row.cbc == pytest.approx(-1.9841523604617706, abs=1e-9)
        assert row.p_fail_blocked > row.p_fail_open
        # the surprising sign is real: both conditioned values agree
        # with a full enumeration over worlds
        from ctproute.traveler import OptimalPolicy
        from ctproute.blockage import EdgeState

        fc = default_failure_cost(net)
        policy = OptimalPolicy(net, model, sink, fc)
        for state, want in (
            (EdgeState.BLOCKED, row.e_t_blocked),
            (EdgeState.OPEN, row.e_t_open),
        ):
            value, _ = oracles.policy_value_by_enumeration(
                net, model, policy, source, sink, fc,
                overrides={"e1": state},
            )
            assert want == pytest.approx(value, abs=1e-9)

    def test_nonnegative_on_instances_that_cannot_fail(self):
        for seed in range(10):
            net, model, source, sink = oracles.random_instance(
                seed, certain_tree=True
            )
            for mode in ("others_stochastic", "others_open"):
                table = canadian_betweenness_all(
                    net, model, source, sink, mode=mode
                )
                for row in table.rows:
                    assert row.cbc >= -1e-9, (seed, mode, row)

    def test_cost_scaling_equivariance(self):
        net, model, source, sink = oracles.random_instance(3)
        fc = default_failure_cost(net)
        base = canadian_betweenness_all(
            net, model, source, sink, failure_cost=fc
        )
        lam = 2.5
        scaled_net = make_network(
            [(e.id, e.u, e.v, e.cost * lam) for e in net.edges]
        )
        scaled = canadian_betweenness_all(
            scaled_net, model, source, sink, failure_cost=lam * fc
        )
        for a, b in zip(base.rows, scaled.rows):
            assert b.cbc == pytest.approx(lam * a.cbc, abs=1e-9)


class TestMonteCarloCentrality:
    def test_matches_exact_within_three_standard_errors(self):
        # a second uncertain edge keeps the conditioned runs stochastic
        net = make_network(
            [("d", "S", "T", 10.0), ("a", "S", "M", 4.0), ("b", "M", "T", 8.0)]
        )
        model = make_model(d=0.3, a=0.2, b=0.0)
        exact = canadian_betweenness(net, model, "S", "T", "d")
        mc = canadian_betweenness(
            net, model, "S", "T", "d",
            method="monte_carlo", replications=4000, seed=0,
        )
        assert mc.se_blocked > 0.0
        assert abs(mc.e_t_blocked - exact.e_t_blocked) <= 3 * mc.se_blocked
        assert abs(mc.e_t_open - exact.e_t_open) <= 3 * mc.se_open
        assert mc.replications == 4000

    def test_reruns_are_identical(self):
        net, model = tri_fixture()
        a = canadian_betweenness(
            net, model, "S", "T", "d",
            method="monte_carlo", replications=300, seed=11,
        )
        b = canadian_betweenness(
            net, model, "S", "T", "d",
            method="monte_carlo", replications=300, seed=11,
        )
        assert a == b

    def test_blocked_and_open_runs_use_common_random_numbers(self):
        # with one uncertain edge pinned either way, the other edges'
        # states coincide replicate by replicate, so on TRI the blocked
        # and open runs are deterministic transforms of the same worlds
        net, model = tri_fixture()
        row = canadian_betweenness(
            net, model, "S", "T", "d",
            method="monte_carlo", replications=500, seed=7,
        )
        assert row.e_t_blocked == 12.0  # every blocked-world walk is 12
        assert row.e_t_open == 10.0
        assert row.cbc == 2.0

    def test_conditional_failure_handling_drops_failed_walks(self):
        net, model = tri_fixture()
        row = canadian_betweenness(
            net, model, "S", "T", "a",
            method="monte_carlo", replications=2000, seed=1,
            failure_cost=100.0, failure_handling="conditional",
        )
        # surviving blocked-detour walks all ride the open direct road
        assert row.e_t_blocked == pytest.approx(10.0, abs=1e-12)
        assert abs(row.p_fail_blocked - 0.3) < 4 * math.sqrt(0.3 * 0.7 / 2000)
        assert 10.0 < row.e_t_open < 12.0

    def test_conditional_mean_is_nan_when_every_walk_fails(self):
        net = make_network([("st", "S", "T", 5.0)])
        row = canadian_betweenness(
            net, make_model(st=0.5), "S", "T", "st",
            method="monte_carlo", replications=50, seed=0,
            failure_handling="conditional",
        )
        assert math.isnan(row.e_t_blocked)
        assert row.p_fail_blocked == 1.0


class TestOptionValidation:
    def test_conditional_requires_monte_carlo(self):
        net, model = tri_fixture()
        with pytest.raises(IncompatibleOptions):
            canadian_betweenness(
                net, model, "S", "T", "d", failure_handling="conditional"
            )

    def test_unknown_options_rejected(self):
        net, model = tri_fixture()
        with pytest.raises(ValidationError, match="unknown mode"):
            canadian_betweenness(net, model, "S", "T", "d", mode="bogus")
        with pytest.raises(ValidationError, match="unknown method"):
            canadian_betweenness(net, model, "S", "T", "d", method="bogus")
        with pytest.raises(ValidationError, match="failure handling"):
            canadian_betweenness(
                net, model, "S", "T", "d", failure_handling="bogus"
            )

    def test_unknown_edge_and_bad_endpoints_rejected(self):
        net, model = tri_fixture()
        with pytest.raises(UnknownEdge):
            canadian_betweenness(net, model, "S", "T", "ghost")
        with pytest.raises(ValidationError, match="must differ"):
            canadian_betweenness(net, model, "S", "S", "d")


class TestWholeTable:
    def test_rows_cover_every_edge_in_id_order(self):
        net, model = tri_fixture()
        table = canadian_betweenness_all(net, model, "S", "T")
        assert [row.edge_id for row in table.rows] == ["a", "b", "d"]
        assert all(isinstance(row, CbcResult) for row in table.rows)
        assert table.source == "S" and table.sink == "T"

    def test_config_echoes_the_resolved_settings(self):
        net, model = tri_fixture()
        table = canadian_betweenness_all(
            net, model, "S", "T", mode="others_open", seed=5
        )
        assert table.config["mode"] == "others_open"
        assert table.config["failure_cost"] == 44.0
        assert table.config["seed"] == 5
        assert table.config["replications"] is None  # exact method

    def test_table_rows_match_single_edge_queries(self):
        # the whole-table call reuses one nominal policy across edges;
        # that optimization must not change any number
        net, model = tri_fixture()
        table = canadian_betweenness_all(net, model, "S", "T")
        for row in table.rows:
            single = canadian_betweenness(net, model, "S", "T", row.edge_id)
            assert single == row


PATH_GRAPH = make_network([("ab", "A", "B", 1.0), ("bc", "B", "C", 1.0)])
FOUR_CYCLE = make_network(
    [
        ("ab", "A", "B", 1.0),
        ("bc", "B", "C", 1.0),
        ("cd", "C", "D", 1.0),
        ("da", "D", "A", 1.0),
    ]
)


class TestGeodesicBaseline:
    def test_path_graph_scores(self):
        assert geodesic_scores(PATH_GRAPH) == {"ab": 2.0, "bc": 2.0}

    def test_four_cycle_scores(self):
        # each edge serves its own endpoint pair once and carries half
        # of each diagonal pair's two tied shortest paths: 1 + 0.5 + 0.5
        scores = geodesic_scores(FOUR_CYCLE)
        assert scores == {"ab": 2.0, "bc": 2.0, "cd": 2.0, "da": 2.0}

    def test_single_edge(self):
        net = make_network([("e", "A", "B", 1.0)])
        assert geodesic_scores(net) == {"e": 1.0}

    def test_parallel_edges_split_their_pair(self):
        net = make_network([("e1", "A", "B", 1.0), ("e2", "A", "B", 1.0)])
        assert geodesic_scores(net) == {"e1": 0.5, "e2": 0.5}

    def test_three_way_tie_splits_into_thirds(self):
        net = make_network(
            [("e1", "A", "B", 1.0), ("e2", "A", "B", 1.0), ("e3", "A", "B", 1.0)]
        )
        scores = geodesic_scores(net)
        assert scores["e1"] == scores["e2"] == scores["e3"]
        assert scores["e1"] == pytest.approx(1 / 3, abs=1e-15)

    def test_tri_fixture_scores(self):
        net, _ = tri_fixture()
        assert geodesic_scores(net) == {"a": 1.0, "b": 1.0, "d": 1.0}

    def test_directed_network_counts_ordered_pairs_without_halving(self):
        net = make_network(
            [("ab", "A", "B", 1.0), ("bc", "B", "C", 1.0), ("ac", "A", "C", 3.0)],
            directed=True,
        )
        assert geodesic_scores(net) == {"ab": 2.0, "bc": 2.0, "ac": 0.0}

    def test_disconnected_pairs_contribute_nothing(self):
        net = make_network(
            [("e", "A", "B", 1.0)], extra_nodes=("Z",)
        )
        assert geodesic_scores(net) == {"e": 1.0}

    def test_matches_path_enumeration_exactly_on_random_networks(self):
        for seed in range(20):
            net, _, _, _ = oracles.random_instance(seed)
            assert geodesic_scores(net) == oracles.geodesic_by_enumeration(net)

    def test_cube_many_way_ties_agree_to_float_rounding(self):
        # opposite corners of the 3-cube tie across six shortest paths;
        # 1/6 is not a binary fraction, so any two correct float
        # implementations can disagree in the last bit depending on
        # summation order (the enumeration oracle itself does). Exact
        # equality is asserted only where the splits are exact (unique
        # paths and power-of-two ties, as in the tests above).
        specs = []
        verts = [f"{a}{b}{c}" for a in "01" for b in "01" for c in "01"]
        for u in verts:
            for j in range(3):
                flipped = u[:j] + ("1" if u[j] == "0" else "0") + u[j + 1:]
                if u < flipped:
                    specs.append((f"c{u}{flipped}", u, flipped, 1.0))
        net = make_network(specs)
        got = geodesic_scores(net)
        want = oracles.geodesic_by_enumeration(net)
        for eid in want:
            assert got[eid] == pytest.approx(want[eid], rel=1e-12)

    def test_table_wrapper_sorts_rows(self):
        table = geodesic_edge_betweenness(FOUR_CYCLE)
        assert [row.edge_id for row in table.rows] == ["ab", "bc", "cd", "da"]
        assert all(isinstance(row, GeodesicScore) for row in table.rows)
        assert table.config == {"baseline": "geodesic"}


class TestCsvRendering:
    def test_exact_table_golden(self):
        net, model = tri_fixture()
        table = canadian_betweenness_all(net, model, "S", "T", mode="others_open")
        expected = (
            "edge_id,mode,method,e_t_blocked,e_t_open,cbc,"
            "p_fail_blocked,p_fail_open,se_blocked,se_open\n"
            "a,others_open,exact,10,10,0,0,0,,\n"
            "b,others_open,exact,10,10,0,0,0,,\n"
            "d,others_open,exact,12,10,2,0,0,,\n"
        )
        assert write_centrality_csv(table) == expected

    def test_geodesic_column_appended(self):
        net, model = tri_fixture()
        table = canadian_betweenness_all(net, model, "S", "T", mode="others_open")
        text = write_centrality_csv(table, geodesic=geodesic_scores(net))
        lines = text.splitlines()
        assert lines[0] == CSV_HEADER + ",geodesic"
        assert lines[1].endswith(",1")

    def test_monte_carlo_rows_fill_the_error_columns(self):
        net, model = tri_fixture()
        table = canadian_betweenness_all(
            net, model, "S", "T", method="monte_carlo", replications=50, seed=0
        )
        for line in write_centrality_csv(table).splitlines()[1:]:
            fields = line.split(",")
            assert fields[8] != "" and fields[9] != ""

    def test_geodesic_rows_are_not_renderable_as_cbc(self):
        with pytest.raises(ValidationError, match="centrality rows"):
            write_centrality_csv(geodesic_edge_betweenness(PATH_GRAPH))

    def test_missing_geodesic_score_rejected(self):
        net, model = tri_fixture()
        table = canadian_betweenness_all(net, model, "S", "T")
        with pytest.raises(UnknownEdge):
            write_centrality_csv(table, geodesic={"a": 1.0})
