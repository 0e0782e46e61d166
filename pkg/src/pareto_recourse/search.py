"""Hop-bounded Pareto shortest paths over an actionability graph.

The solver runs Jacobi-style rounds: iteration l derives every vertex's
table exclusively from iteration l-1 tables, exactly as the superscripts
in the recurrence demand. Tables for all hops 0..eta are retained on the
result so predecessor links (which name the hop they point into) always
resolve, and so refinement between consecutive iterations can be audited.
"""

from __future__ import annotations

from dataclasses import dataclass

from .costs import (
    CostSpec,
    CostVector,
    ParetoTable,
    PredLink,
    TableEntry,
    apply_table_cap,
    combine,
    prune,
)
from .errors import ContractViolation
from .graph import ActionabilityGraph


@dataclass(frozen=True)
class RecoursePath:
    """A concrete vertex sequence witnessing one frontier cost."""

    vertices: tuple[str, ...]
    cost: CostVector
    hops: int


@dataclass(frozen=True)
class SearchResult:
    """Per-vertex Pareto tables for every hop count 0..eta.

    `tables_by_hop[l][v]` is the table of non-dominated path costs from the
    source to v over paths of at most l edges. The final tables sit at
    index eta. `approximate` is set when a table cap truncated anything,
    which voids the exactness guarantee.
    """

    source: str
    eta: int
    spec: CostSpec
    tables_by_hop: tuple[dict, ...]
    graph: ActionabilityGraph
    approximate: bool = False

    @property
    def final_tables(self) -> dict:
        return self.tables_by_hop[-1]


def update(
    d_v: ParetoTable,
    d_u: ParetoTable,
    w_uv: CostVector,
    spec: CostSpec,
    *,
    u_id: str = "u",
    parent_hop: int = 0,
    do_prune: bool = True,
) -> ParetoTable:
    """Merge one in-neighbor's extended costs into a table and re-prune.

    Every entry of `d_u` is combined with the edge cost and enters as a
    candidate carrying a link back to its parent entry; candidates whose
    cost matches an existing entry merge into it (links accumulate rather
    than multiply entries). `do_prune=False` keeps dominated candidates
    and exists only for fault-injection checks of the oracle harness.
    """
    if len(w_uv) != spec.k:
        raise ContractViolation(f"edge cost has length {len(w_uv)}, spec k={spec.k}")
    if not d_u.entries:
        return d_v
    candidates = list(d_v.entries)
    for i, e in enumerate(d_u.entries):
        candidates.append(
            TableEntry(
                cost=combine(e.cost, w_uv, spec),
                predecessors=(PredLink(u_id, parent_hop, i),),
                first_reached_hop=parent_hop + 1,
            )
        )
    return prune(candidates, keep_dominated=not do_prune)


def pareto_shortest_paths(
    g: ActionabilityGraph,
    source: str,
    eta: int,
    spec: CostSpec,
    table_cap: int | None = None,
    *,
    do_prune: bool = True,
) -> SearchResult:
    """Find all Pareto-optimal path costs from `source` within `eta` hops.

    Args:
        g: the graph to search; edge costs must have length spec.k.
        source: starting vertex id.
        eta: maximum number of edges in a path, at least 1.
        spec: criterion aggregation rules.
        table_cap: optional per-table entry limit; enabling it downsamples
            oversized tables and flags the result approximate.
        do_prune: fault-injection knob, see update().

    Returns:
        SearchResult with tables for every hop count; final tables at eta.
    """
    if source not in g:
        raise ContractViolation(f"unknown source vertex {source!r}")
    n = len(g.positive)
    if eta < 1 or (n > 1 and eta > n - 1):
        raise ContractViolation(f"eta must be in [1, |V|-1], got {eta} for |V|={n}")

    empty = ParetoTable(())
    zero_entry = TableEntry(CostVector.zeros(spec.k), (), 0)
    tables = [{v: (ParetoTable((zero_entry,)) if v == source else empty) for v in g.vertex_ids}]
    edge_list = list(g.edges())

    capped = False
    for ell in range(1, eta + 1):
        prev = tables[-1]
        cur = dict(prev)  # carry-over: same entry objects, links still valid
        for u, v, w in edge_list:
            cur[v] = update(
                cur[v], prev[u], w, spec, u_id=u, parent_hop=ell - 1, do_prune=do_prune
            )
        if table_cap is not None:
            for v in cur:
                before = cur[v]
                cur[v] = apply_table_cap(before, table_cap)
                if len(cur[v]) != len(before):
                    capped = True
        tables.append(cur)

    return SearchResult(
        source=source,
        eta=eta,
        spec=spec,
        tables_by_hop=tuple(tables),
        graph=g,
        approximate=capped,
    )


def recourse_frontier(result: SearchResult, g: ActionabilityGraph) -> list[tuple[str, ParetoTable]]:
    """Final tables of every positively classified, reachable vertex.

    Reported per target; fronts are never merged across targets.
    """
    out = []
    for v in g.vertex_ids:
        if g.positive[v] and len(result.final_tables[v]) > 0:
            out.append((v, result.final_tables[v]))
    return out


def merge_tables(tables) -> ParetoTable:
    """Pareto union of several tables (a derived, cross-target view)."""
    entries = [e for t in tables for e in t.entries]
    return prune([TableEntry(e.cost, (), e.first_reached_hop) for e in entries])


def backtrack(result: SearchResult, target: str, max_paths: int = 16) -> list[RecoursePath]:
    """Materialize witness paths for every entry of the target's final table.

    Follows predecessor links depth-first in deterministic order. Every
    entry contributes at least one path; additional witnesses are emitted
    while the total stays within max_paths (entries earlier in the table
    get the spare budget first).
    """
    if target not in result.graph:
        raise ContractViolation(f"unknown target vertex {target!r}")
    final = result.final_tables[target]
    if not final.entries:
        raise ContractViolation(f"target {target!r} is unreachable within eta hops")
    tables = result.tables_by_hop
    source = result.source
    zeros = CostVector.zeros(result.spec.k)

    def witnesses(vertex: str, hop: int, index: int):
        entry = tables[hop][vertex].entries[index]
        if vertex == source and entry.cost == zeros:
            yield (vertex,)
            return
        if not entry.predecessors:
            raise ContractViolation(f"entry at {vertex!r} has no predecessors and is not the source")
        for link in sorted(entry.predecessors):
            for prefix in witnesses(link.vertex, link.hop, link.index):
                yield prefix + (vertex,)

    n_entries = len(final.entries)
    paths: list[RecoursePath] = []
    for idx, entry in enumerate(final.entries):
        remaining_entries = n_entries - idx - 1
        seen: set[tuple[str, ...]] = set()
        for vs in witnesses(target, result.eta, idx):
            if vs in seen:  # one parent cost can be linked at several hops
                continue
            seen.add(vs)
            paths.append(RecoursePath(vertices=vs, cost=entry.cost, hops=len(vs) - 1))
            if len(paths) + remaining_entries >= max_paths:
                break
    return paths


def path_cost(g: ActionabilityGraph, vertices, spec: CostSpec) -> CostVector:
    """Aggregate edge costs along a vertex sequence from a zero start."""
    total = CostVector.zeros(spec.k)
    for u, v in zip(vertices, vertices[1:]):
        total = combine(total, g.edge_cost(u, v), spec)
    return total


def costs_match(a: CostVector, b: CostVector) -> bool:
    """Exact equality for integer components, 1e-9 relative for reals."""
    if len(a) != len(b):
        return False
    for x, y in zip(a, b):
        if isinstance(x, int) and isinstance(y, int):
            if x != y:
                return False
        elif x != y and abs(x - y) > 1e-9 * max(1.0, abs(x), abs(y)):
            return False
    return True


# ---------------------------------------------------------------------------
# Independent oracle


def _naive_front(costs: list[CostVector]) -> tuple[CostVector, ...]:
    """All-pairs dominance filter, kept separate from prune() on purpose."""
    unique = sorted({tuple(c) for c in costs})
    kept = []
    for c in unique:
        dominated = False
        for d in unique:
            if d != c and all(x <= y for x, y in zip(d, c)):
                dominated = True
                break
        if not dominated:
            kept.append(CostVector(c))
    return tuple(kept)


def brute_force_oracle(
    g: ActionabilityGraph, source: str, eta: int, spec: CostSpec
) -> dict[str, tuple[CostVector, ...]]:
    """Enumerate every walk of <= eta edges and filter per-endpoint fronts.

    Exponential by construction; refuses anything beyond |V| <= 12, eta <= 6.
    """
    if source not in g:
        raise ContractViolation(f"unknown source vertex {source!r}")
    if len(g.positive) > 12 or eta > 6:
        raise ContractViolation("oracle is limited to |V| <= 12 and eta <= 6")

    reached: dict[str, list[CostVector]] = {v: [] for v in g.vertex_ids}
    stack = [(source, CostVector.zeros(spec.k), 0)]
    while stack:
        vertex, cost, depth = stack.pop()
        reached[vertex].append(cost)
        if depth < eta:
            for v2, w in g.out(vertex):
                stack.append((v2, combine(cost, w, spec), depth + 1))
    return {v: _naive_front(costs) for v, costs in reached.items()}
