import math

import pytest
from hypothesis import given, strategies as st

from pareto_recourse.costs import (
    Aggregation,
    CostSpec,
    CostVector,
    Criterion,
    LNorm,
    TableEntry,
    PredLink,
    apply_table_cap,
    combine,
    cost_spec_from_dict,
    dominates,
    is_pareto_set,
    prune,
)
from pareto_recourse.errors import ContractViolation, SchemaError


def cv(*values):
    return CostVector(tuple(values))


def spec_of(*aggs):
    return CostSpec(tuple(
        Criterion(f"c{i}", LNorm(p=2), a) for i, a in enumerate(aggs)
    ))


SUM, MAX = Aggregation.SUM, Aggregation.MAX


# ---------------------------------------------------------------------------
# dominates


def test_incomparable_pair_neither_dominates():
    assert not dominates(cv(2, 31), cv(5, 15))
    assert not dominates(cv(5, 15), cv(2, 31))


def test_zero_dominates_positive():
    assert dominates(cv(0, 0), cv(1, 1))


def test_equal_first_smaller_second_dominates():
    assert dominates(cv(6, 8.7), cv(6, 20))


def test_equal_vectors_do_not_dominate():
    assert not dominates(cv(3, 3), cv(3, 3))


def test_dominates_length_mismatch():
    with pytest.raises(ContractViolation):
        dominates(cv(1, 2), cv(1, 2, 3))


finite_vectors = st.integers(min_value=1, max_value=4).flatmap(
    lambda k: st.lists(
        st.tuples(*[st.floats(0, 100, allow_nan=False) for _ in range(k)]),
        min_size=3, max_size=3,
    )
)


@given(finite_vectors)
def test_dominates_is_a_strict_partial_order(triple):
    a, b, c = (cv(*t) for t in triple)
    assert not dominates(a, a)
    if dominates(a, b):
        assert not dominates(b, a)
    if dominates(a, b) and dominates(b, c):
        assert dominates(a, c)


# ---------------------------------------------------------------------------
# combine


def test_combine_max_sum_component_rules():
    assert combine(cv(2, 10), cv(4, 5), spec_of(MAX, SUM)).values == (4, 15)


def test_combine_zero_is_identity_for_sum():
    w = cv(3.5, 7)
    assert combine(cv(0, 0), w, spec_of(SUM, SUM)).values == w.values


def test_combine_all_sum_adds():
    assert combine(cv(1, 2), cv(3, 4), spec_of(SUM, SUM)).values == (4, 6)


def test_combine_length_mismatch():
    with pytest.raises(ContractViolation):
        combine(cv(1, 2, 3), cv(1, 2), spec_of(SUM, SUM))


@given(
    st.tuples(st.floats(0, 50, allow_nan=False), st.floats(0, 50, allow_nan=False)),
    st.tuples(st.floats(0, 50, allow_nan=False), st.floats(0, 50, allow_nan=False)),
    st.tuples(st.floats(0, 50, allow_nan=False), st.floats(0, 50, allow_nan=False)),
    st.tuples(st.sampled_from([SUM, MAX]), st.sampled_from([SUM, MAX])),
)
def test_combine_is_monotone_in_the_path_argument(a, a2, e, aggs):
    # if a <= a2 componentwise then combine(a, e) <= combine(a2, e)
    lo = cv(*(min(x, y) for x, y in zip(a, a2)))
    hi = cv(*(max(x, y) for x, y in zip(a, a2)))
    spec = spec_of(*aggs)
    got_lo = combine(lo, cv(*e), spec)
    got_hi = combine(hi, cv(*e), spec)
    assert all(x <= y for x, y in zip(got_lo, got_hi))


# ---------------------------------------------------------------------------
# prune


def entries(*costs):
    return [TableEntry(cv(*c)) for c in costs]


def test_prune_drops_dominated_keeps_front():
    table = prune(entries((2, 31), (6, 20), (5, 15), (6, 8.7)))
    assert [tuple(e.cost) for e in table] == [(2, 31), (5, 15), (6, 8.7)]


def test_prune_empty_input():
    assert len(prune([])) == 0


def test_prune_collapses_duplicates_to_one_entry():
    table = prune(entries((1, 1), (1, 1)))
    assert [tuple(e.cost) for e in table] == [(1, 1)]


def test_prune_merges_predecessor_links_on_duplicate_costs():
    a = TableEntry(cv(2, 8), (PredLink("a", 0, 0),), 1)
    b = TableEntry(cv(2, 8), (PredLink("b", 0, 1),), 2)
    table = prune([a, b])
    assert len(table) == 1
    entry = table.entries[0]
    assert entry.predecessors == (PredLink("a", 0, 0), PredLink("b", 0, 1))
    assert entry.first_reached_hop == 1


def test_prune_mixed_lengths_rejected():
    with pytest.raises(ContractViolation):
        prune([TableEntry(cv(1, 2)), TableEntry(cv(1, 2, 3))])


def naive_front(costs):
    keep = []
    unique = sorted(set(costs))
    for c in unique:
        if not any(d != c and all(x <= y for x, y in zip(d, c)) for d in unique):
            keep.append(c)
    return keep


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
@pytest.mark.parametrize("trial", range(4))
def test_prune_matches_all_pairs_filter(k, trial):
    import numpy as np

    rng = np.random.default_rng(1000 * k + trial)
    n = int(rng.integers(1, 201))
    costs = [tuple(int(x) for x in rng.integers(0, 12, size=k)) for _ in range(n)]
    table = prune([TableEntry(cv(*c)) for c in costs])
    assert [tuple(e.cost) for e in table] == naive_front(costs)


@pytest.mark.parametrize("k", [2, 3])
def test_prune_is_idempotent_and_pareto(k):
    import numpy as np

    rng = np.random.default_rng(k)
    costs = [tuple(int(x) for x in rng.integers(0, 10, size=k)) for _ in range(120)]
    once = prune([TableEntry(cv(*c)) for c in costs])
    twice = prune(list(once.entries))
    assert [e.cost for e in once] == [e.cost for e in twice]
    assert is_pareto_set(once.costs)


# ---------------------------------------------------------------------------
# is_pareto_set


def test_reported_front_is_pareto():
    assert is_pareto_set([cv(2, 31), cv(5, 15), cv(6, 8.7)])


def test_chain_is_not_pareto():
    assert not is_pareto_set([cv(1, 1), cv(2, 2)])


def test_empty_is_vacuously_pareto():
    assert is_pareto_set([])


# ---------------------------------------------------------------------------
# cost vector validation and the table cap


@pytest.mark.parametrize("bad", [-1.0, math.nan, math.inf])
def test_cost_vector_rejects_bad_components(bad):
    with pytest.raises(ContractViolation):
        CostVector((1.0, bad))


def test_cost_spec_requires_unique_names():
    with pytest.raises(SchemaError):
        CostSpec((
            Criterion("same", LNorm(p=2), SUM),
            Criterion("same", LNorm(p=1), SUM),
        ))


def test_table_cap_disabled_by_default():
    table = prune(entries(*[(i, 100 - i) for i in range(50)]))
    assert apply_table_cap(table, None) is table


def test_table_cap_keeps_extremes_at_equal_intervals():
    table = prune(entries(*[(i, 100 - i) for i in range(11)]))
    capped = apply_table_cap(table, 5)
    firsts = [e.cost[0] for e in capped]
    assert len(capped) == 5
    assert firsts[0] == 0 and firsts[-1] == 10
    gaps = [b - a for a, b in zip(firsts, firsts[1:])]
    assert max(gaps) - min(gaps) <= 1


def test_cost_spec_from_dict_round_trips_kinds():
    doc = {
        "criterion": [
            {"name": "steps", "kind": "label_abs_diff", "column": "label", "aggregation": "max"},
            {"name": "dist", "kind": "l_norm", "p": "inf", "aggregation": "sum"},
            {"name": "density", "kind": "kde_nll", "aggregation": "sum"},
        ]
    }
    spec = cost_spec_from_dict(doc)
    assert spec.k == 3
    assert spec.names == ("steps", "dist", "density")
    assert spec.criteria[1].kind.p == math.inf
