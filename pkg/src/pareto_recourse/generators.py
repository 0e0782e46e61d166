"""Seeded random problem instances for self-checks and acceptance runs.

Everything here is a pure function of its seed. The search instances pair
with the brute-force oracle; the shrink instances exercise merge replay and
the rerouting bound in the regime where the edge costs sandwich a metric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .costs import Aggregation, CostSpec, CostVector, Criterion, LNorm
from .graph import ActionabilityGraph


def _spec_with_aggregations(aggs) -> CostSpec:
    """A cost spec carrying only aggregation semantics (for raw graphs)."""
    return CostSpec(tuple(
        Criterion(name=f"c{i}", kind=LNorm(p=2), aggregation=a)
        for i, a in enumerate(aggs)
    ))


def raw_graph(vertex_flags: dict, edges: dict, k: int | None = None) -> ActionabilityGraph:
    """Assemble a graph directly from {id: positive} and {(u, v): CostVector}."""
    if k is None:
        k = len(next(iter(edges.values()))) if edges else 1
    out = {vid: {} for vid in vertex_flags}
    for (u, v), cost in edges.items():
        out[u][v] = cost
    return ActionabilityGraph(positive=dict(vertex_flags), out_edges=out, k=k)


@dataclass(frozen=True)
class SearchInstance:
    graph: ActionabilityGraph
    spec: CostSpec
    source: str
    eta: int
    seed: int

    def describe(self) -> str:
        edges = ", ".join(f"{u}->{v}:{list(c.values)}" for u, v, c in self.graph.edges())
        aggs = "/".join(a.value for a in self.spec.aggregations)
        return (
            f"seed={self.seed} n={len(self.graph.positive)} k={self.spec.k} "
            f"eta={self.eta} aggs={aggs} source={self.source} edges=[{edges}]"
        )


def random_search_instance(seed: int) -> SearchInstance:
    """Random small instance: |V| <= 10, out-degree <= 4, integer costs 0..9,
    k in {2,3}, eta in [2,5], each criterion randomly Sum or Max."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 11))
    k = int(rng.integers(2, 4))
    eta = int(rng.integers(2, min(5, n - 1) + 1))
    aggs = [Aggregation.SUM if rng.random() < 0.5 else Aggregation.MAX for _ in range(k)]
    ids = [f"v{i}" for i in range(n)]

    edges = {}
    for u in ids:
        degree = int(rng.integers(0, 5))
        others = [v for v in ids if v != u]
        if degree > len(others):
            degree = len(others)
        if degree == 0:
            continue
        targets = rng.choice(len(others), size=degree, replace=False)
        for t in targets:
            cost = tuple(int(c) for c in rng.integers(0, 10, size=k))
            edges[(u, others[int(t)])] = CostVector(cost)
    flags = {vid: bool(rng.random() < 0.5) for vid in ids}
    g = raw_graph(flags, edges, k=k)
    source = ids[int(rng.integers(0, n))]
    return SearchInstance(graph=g, spec=_spec_with_aggregations(aggs), source=source, eta=eta, seed=seed)


@dataclass(frozen=True)
class ShrinkInstance:
    graph: ActionabilityGraph
    kappa: float
    scope: int | None
    seed: int


def random_shrink_instance(seed: int) -> ShrinkInstance:
    """Random bipartite-flavored graph with enough cost slack to allow merges."""
    rng = np.random.default_rng(seed)
    n_src = int(rng.integers(2, 5))
    n_dst = int(rng.integers(3, 7))
    k = int(rng.integers(1, 3))
    kappa = float(np.round(rng.uniform(1.5, 3.0), 3))
    scope = None if k == 1 or rng.random() < 0.5 else int(rng.integers(0, k))
    sources = [f"p{i}" for i in range(n_src)]
    sinks = [f"q{i}" for i in range(n_dst)]
    edges = {}
    for p in sources:
        for q in sinks:
            if rng.random() < 0.8:
                cost = tuple(int(c) for c in rng.integers(1, 10, size=k))
                edges[(p, q)] = CostVector(cost)
    flags = {vid: False for vid in sources + sinks}
    g = raw_graph(flags, edges, k=k)
    return ShrinkInstance(graph=g, kappa=kappa, scope=scope, seed=seed)


@dataclass(frozen=True)
class SandwichInstance:
    """Cyclic layered graph whose edge costs sandwich the plane metric.

    Vertices sit on per-layer sites; vertices sharing a site are exact
    duplicates. Every consecutive-layer pair (cyclically) carries an edge
    with cost = distance * lambda, lambda uniform in [1, kappa], so
    dist <= cost <= kappa * dist holds edge by edge. Costs are a single
    Sum criterion.
    """

    graph: ActionabilityGraph
    kappa: float
    positions: dict
    layers: tuple[tuple[str, ...], ...]
    seed: int


def sandwich_instance(seed: int) -> SandwichInstance:
    rng = np.random.default_rng(seed)
    n_layers = int(rng.integers(2, 5))
    kappa = float(np.round(rng.uniform(1.5, 3.0), 3))
    radius = 10.0
    layers = []
    positions = {}
    total = 0
    count = 0
    for li in range(n_layers):
        angle = 2.0 * math.pi * li / n_layers + float(rng.uniform(-0.2, 0.2))
        site = np.array([radius * math.cos(angle), radius * math.sin(angle)])
        size = int(rng.integers(1, 4))
        if total + size > 10:
            size = max(1, 10 - total)
        members = []
        for _ in range(size):
            vid = f"n{count}"
            positions[vid] = site.copy()
            members.append(vid)
            count += 1
        total += size
        layers.append(tuple(members))

    edges = {}
    for li in range(n_layers):
        nxt = (li + 1) % n_layers
        if nxt == li:
            continue
        for u in layers[li]:
            for v in layers[nxt]:
                dist = float(np.linalg.norm(positions[u] - positions[v]))
                lam = float(rng.uniform(1.0, kappa))
                edges[(u, v)] = CostVector((dist * lam,))
    flags = {vid: False for vid in positions}
    g = raw_graph(flags, edges, k=1)
    return SandwichInstance(graph=g, kappa=kappa, positions=positions,
                            layers=tuple(layers), seed=seed)


def hop_bounded_shortest_paths(g: ActionabilityGraph, source: str):
    """Single-criterion exact (cost, hops) per vertex by hop-indexed DP.

    Returns {vertex: (cost, hops)} for reachable vertices, where cost is
    the minimum Sum cost over all paths and hops is the fewest edges among
    minimum-cost paths. Hop tables for every round are kept so the fewest
    hop count is read off exactly, with no float tolerance games.
    """
    rounds = max(1, len(g.positive) - 1)
    prev = {v: math.inf for v in g.vertex_ids}
    prev[source] = 0.0
    history = [dict(prev)]
    for _ in range(rounds):
        cur = dict(prev)
        for u, v, w in g.edges():
            if prev[u] == math.inf:
                continue
            cand = prev[u] + w[0]
            if cand < cur[v]:
                cur[v] = cand
        history.append(cur)
        prev = cur
    final = history[-1]
    out = {}
    for v in g.vertex_ids:
        if final[v] == math.inf:
            continue
        for hops, snap in enumerate(history):
            if snap[v] == final[v]:
                out[v] = (final[v], hops)
                break
    return out
