import pytest

from pareto_recourse.costs import (
    Aggregation,
    CostSpec,
    CostVector,
    Criterion,
    LNorm,
    ParetoTable,
    PredLink,
    TableEntry,
    dominates,
    is_pareto_set,
)
from pareto_recourse.errors import ContractViolation
from pareto_recourse.fixtures import diamond_graph, diamond_spec
from pareto_recourse.generators import random_search_instance, raw_graph
from pareto_recourse.search import (
    backtrack,
    brute_force_oracle,
    costs_match,
    pareto_shortest_paths,
    path_cost,
    recourse_frontier,
    update,
)

SUM, MAX = Aggregation.SUM, Aggregation.MAX


def cv(*values):
    return CostVector(tuple(values))


def spec_of(*aggs):
    return CostSpec(tuple(Criterion(f"c{i}", LNorm(p=2), a) for i, a in enumerate(aggs)))


def cost_sets(result):
    return {v: tuple(tuple(c) for c in t.costs) for v, t in result.final_tables.items()}


# ---------------------------------------------------------------------------
# the diamond


def test_diamond_all_sum_frontier():
    res = pareto_shortest_paths(diamond_graph(), "s", 2, diamond_spec())
    assert cost_sets(res)["t"] == ((2, 8), (6, 2))


def test_diamond_max_sum_frontier():
    res = pareto_shortest_paths(diamond_graph(), "s", 2, spec_of(MAX, SUM))
    assert cost_sets(res)["t"] == ((1, 8), (3, 2))


def test_single_edge_graph():
    g = raw_graph({"s": False, "t": True}, {("s", "t"): cv(4, 7)})
    res = pareto_shortest_paths(g, "s", 1, spec_of(SUM, SUM))
    assert cost_sets(res)["t"] == ((4, 7),)


def test_source_table_always_contains_zeros():
    res = pareto_shortest_paths(diamond_graph(), "s", 2, diamond_spec())
    assert cost_sets(res)["s"] == ((0, 0),)


def test_eta_out_of_range():
    with pytest.raises(ContractViolation):
        pareto_shortest_paths(diamond_graph(), "s", 0, diamond_spec())
    with pytest.raises(ContractViolation):
        pareto_shortest_paths(diamond_graph(), "s", 99, diamond_spec())


def test_unknown_source():
    with pytest.raises(ContractViolation):
        pareto_shortest_paths(diamond_graph(), "nope", 2, diamond_spec())


# ---------------------------------------------------------------------------
# update


def test_update_dominated_existing_entry_is_dropped():
    spec = spec_of(SUM, SUM)
    d_v = ParetoTable((TableEntry(cv(5, 5), (), 1),))
    d_u = ParetoTable((TableEntry(cv(1, 1), (), 0),))
    out = update(d_v, d_u, cv(1, 1), spec, u_id="u", parent_hop=0)
    assert [tuple(e.cost) for e in out] == [(2, 2)]


def test_update_with_empty_neighbor_table_is_identity():
    spec = spec_of(SUM, SUM)
    d_v = ParetoTable((TableEntry(cv(5, 5), (), 1),))
    assert update(d_v, ParetoTable(()), cv(1, 1), spec, u_id="u") is d_v


def test_update_matching_cost_collects_both_links():
    spec = spec_of(SUM, SUM)
    d_v = ParetoTable((TableEntry(cv(2, 8), (PredLink("a", 0, 0),), 1),))
    d_u = ParetoTable((TableEntry(cv(1, 7), (), 0),))
    out = update(d_v, d_u, cv(1, 1), spec, u_id="b", parent_hop=0)
    assert len(out) == 1
    assert out.entries[0].predecessors == (PredLink("a", 0, 0), PredLink("b", 0, 0))


# ---------------------------------------------------------------------------
# frontier reporting


def test_frontier_reports_only_positive_reachable():
    res = pareto_shortest_paths(diamond_graph(), "s", 2, diamond_spec())
    fronts = recourse_frontier(res, diamond_graph())
    assert [v for v, _ in fronts] == ["t"]


def test_frontier_empty_when_no_positive_reachable():
    g = raw_graph({"s": False, "t": True}, {("t", "s"): cv(1, 1)})  # t unreachable
    res = pareto_shortest_paths(g, "s", 1, spec_of(SUM, SUM))
    assert recourse_frontier(res, g) == []


def test_two_positive_targets_both_reported_even_if_one_dominates():
    g = raw_graph(
        {"s": False, "m": False, "t1": True, "t2": True},
        {
            ("s", "m"): cv(1, 1),
            ("m", "t1"): cv(1, 1),
            ("m", "t2"): cv(50, 50),
        },
    )
    res = pareto_shortest_paths(g, "s", 3, spec_of(SUM, SUM))
    fronts = dict(recourse_frontier(res, g))
    assert set(fronts) == {"t1", "t2"}
    t1 = fronts["t1"].costs[0]
    t2 = fronts["t2"].costs[0]
    assert dominates(t1, t2)  # and t2 is still reported per target


# ---------------------------------------------------------------------------
# backtracking


def test_diamond_witness_paths():
    res = pareto_shortest_paths(diamond_graph(), "s", 2, diamond_spec())
    paths = backtrack(res, "t")
    got = {(p.vertices, tuple(p.cost)) for p in paths}
    assert (("s", "a", "t"), (2, 8)) in got
    assert (("s", "b", "t"), (6, 2)) in got


def test_backtrack_to_source_is_the_trivial_path():
    res = pareto_shortest_paths(diamond_graph(), "s", 2, diamond_spec())
    paths = backtrack(res, "s")
    assert [(p.vertices, tuple(p.cost), p.hops) for p in paths] == [(("s",), (0, 0), 0)]


def test_backtrack_unreachable_target():
    g = raw_graph({"s": False, "t": True}, {("t", "s"): cv(1, 1)})
    res = pareto_shortest_paths(g, "s", 1, spec_of(SUM, SUM))
    with pytest.raises(ContractViolation):
        backtrack(res, "t")


def test_every_entry_gets_a_witness_even_past_max_paths():
    res = pareto_shortest_paths(diamond_graph(), "s", 2, diamond_spec())
    paths = backtrack(res, "t", max_paths=1)
    costs = {tuple(p.cost) for p in paths}
    assert costs == {(2, 8), (6, 2)}  # one per entry beats the cap


def test_backtracked_paths_recompute_exactly():
    for seed in range(40):
        inst = random_search_instance(seed)
        res = pareto_shortest_paths(inst.graph, inst.source, inst.eta, inst.spec)
        for v, table in res.final_tables.items():
            if not table.entries:
                continue
            for p in backtrack(res, v, max_paths=8):
                rebuilt = path_cost(inst.graph, p.vertices, inst.spec)
                assert rebuilt.values == p.cost.values
                assert p.hops <= inst.eta


def test_duplicate_witnesses_are_not_emitted():
    res = pareto_shortest_paths(diamond_graph(), "s", 2, diamond_spec())
    paths = backtrack(res, "t", max_paths=50)
    seen = [p.vertices for p in paths]
    assert len(seen) == len(set(seen))


# ---------------------------------------------------------------------------
# oracle agreement and structural invariants


def test_matches_brute_force_on_seeded_instances():
    for seed in range(60):
        inst = random_search_instance(seed)
        res = pareto_shortest_paths(inst.graph, inst.source, inst.eta, inst.spec)
        want = brute_force_oracle(inst.graph, inst.source, inst.eta, inst.spec)
        got = cost_sets(res)
        for v in inst.graph.vertex_ids:
            assert got[v] == tuple(tuple(c) for c in want[v]), inst.describe()


def test_tables_refine_between_iterations():
    for seed in range(25):
        inst = random_search_instance(seed)
        res = pareto_shortest_paths(inst.graph, inst.source, inst.eta, inst.spec)
        for ell in range(inst.eta):
            cur, nxt = res.tables_by_hop[ell], res.tables_by_hop[ell + 1]
            for v in inst.graph.vertex_ids:
                nxt_costs = list(nxt[v].costs)
                for c in cur[v].costs:
                    assert any(
                        d.values == c.values or dominates(d, c) for d in nxt_costs
                    )


def test_final_tables_are_pareto_sets():
    for seed in range(25):
        inst = random_search_instance(seed)
        res = pareto_shortest_paths(inst.graph, inst.source, inst.eta, inst.spec)
        for v, table in res.final_tables.items():
            assert is_pareto_set(table.costs)


def test_two_cycle_walks_never_improve_sum_fronts():
    g = raw_graph(
        {"a": False, "b": False, "t": True},
        {
            ("a", "b"): cv(1, 1),
            ("b", "a"): cv(1, 1),
            ("a", "t"): cv(5, 5),
        },
    )
    spec = spec_of(SUM, SUM)
    res = pareto_shortest_paths(g, "a", 2, spec)
    want = brute_force_oracle(g, "a", 4, spec)  # longer walks revisit vertices
    assert cost_sets(res)["t"] == tuple(tuple(c) for c in want["t"])


def test_determinism_of_search_results():
    inst = random_search_instance(123)
    a = pareto_shortest_paths(inst.graph, inst.source, inst.eta, inst.spec)
    b = pareto_shortest_paths(inst.graph, inst.source, inst.eta, inst.spec)
    assert cost_sets(a) == cost_sets(b)
    pa = [p.vertices for v in a.final_tables for p in (backtrack(a, v) if a.final_tables[v].entries else [])]
    pb = [p.vertices for v in b.final_tables for p in (backtrack(b, v) if b.final_tables[v].entries else [])]
    assert pa == pb


def test_table_cap_flags_result_approximate():
    # a fan of incomparable 2-hop costs, capped to 2 entries
    edges = {}
    flags = {"s": False, "t": True}
    for i in range(6):
        mid = f"m{i}"
        flags[mid] = False
        edges[("s", mid)] = cv(i, 5 - i)
        edges[(mid, "t")] = cv(0, 0)
    g = raw_graph(flags, edges)
    spec = spec_of(SUM, SUM)
    exact = pareto_shortest_paths(g, "s", 2, spec)
    assert len(exact.final_tables["t"]) == 6
    capped = pareto_shortest_paths(g, "s", 2, spec, table_cap=2)
    assert capped.approximate
    t = capped.final_tables["t"]
    assert len(t) == 2
    assert t.entries[0].cost.values == (0, 5)
    assert t.entries[-1].cost.values == (5, 0)


def test_capped_results_still_backtrack_to_valid_witnesses():
    for seed in range(15):
        inst = random_search_instance(seed)
        res = pareto_shortest_paths(inst.graph, inst.source, inst.eta, inst.spec, table_cap=2)
        for v, table in res.final_tables.items():
            for p in (backtrack(res, v, max_paths=4) if table.entries else []):
                assert path_cost(inst.graph, p.vertices, inst.spec).values == p.cost.values
                assert p.hops <= inst.eta


def test_oracle_refuses_large_instances():
    flags = {f"v{i}": False for i in range(13)}
    g = raw_graph(flags, {("v0", "v1"): cv(1, 1)})
    with pytest.raises(ContractViolation):
        brute_force_oracle(g, "v0", 2, spec_of(SUM, SUM))
    with pytest.raises(ContractViolation):
        brute_force_oracle(diamond_graph(), "s", 7, diamond_spec())


def test_oracle_single_vertex_graph():
    g = raw_graph({"s": True}, {}, k=2)
    want = brute_force_oracle(g, "s", 1, spec_of(SUM, SUM))
    assert tuple(tuple(c) for c in want["s"]) == ((0, 0),)


def test_costs_match_tolerances():
    assert costs_match(cv(2, 8), cv(2, 8))
    assert not costs_match(cv(2, 8), cv(2, 9))
    assert costs_match(cv(1.0, 2.0), cv(1.0, 2.0 + 1e-12))
    assert not costs_match(cv(1.0, 2.0), cv(1.0, 2.1))
