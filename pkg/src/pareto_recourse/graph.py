"""Actionability graph construction: KNN candidates, feasibility filter, edge costs.

Edges are directed. Neighbor candidates come from exact k-nearest-neighbor
search under L2 in the stored (standardized) feature space; an edge u -> v
survives only if the action predicate derived from the schema allows moving
from u to v. Each surviving edge carries the full k-dimensional cost vector.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .costs import (
    CostSpec,
    CostVector,
    FeatureDelta,
    KdeNll,
    LNorm,
    LabelAbsDiff,
    cost_spec_from_dict,
    spec_to_dict,
)
from .dataset import Classifier, Dataset, FeatureSchema, Instance, Mutability, classify, kde_nll_scores
from .errors import ContractViolation, SchemaError


@dataclass(frozen=True)
class ActionPredicate:
    """Feasibility test for a directed action u -> v, derived from the schema.

    Immutable columns must match exactly; monotone columns may only move in
    their declared direction. Label order constraints compare the numeric
    value of a label column (e.g. digit label strictly increasing).
    """

    immutable: tuple[int, ...] = ()
    monotone_up: tuple[int, ...] = ()
    monotone_down: tuple[int, ...] = ()
    label_orders: tuple[tuple[str, str], ...] = ()

    def __call__(self, u: Instance, v: Instance) -> bool:
        for j in self.immutable:
            if u.features[j] != v.features[j]:
                return False
        for j in self.monotone_up:
            if v.features[j] < u.features[j]:
                return False
        for j in self.monotone_down:
            if v.features[j] > u.features[j]:
                return False
        for column, mode in self.label_orders:
            a, b = u.label_number(column), v.label_number(column)
            if mode == "strict_up" and not a < b:
                return False
            if mode == "strict_down" and not a > b:
                return False
            if mode == "up" and not a <= b:
                return False
            if mode == "down" and not a >= b:
                return False
        return True


def predicate_from_schema(schema: FeatureSchema) -> ActionPredicate:
    """Build the actionability predicate the schema's mutability flags imply."""
    imm, up, down = [], [], []
    for j, c in enumerate(schema.feature_columns):
        if c.mutability is Mutability.IMMUTABLE:
            imm.append(j)
        elif c.mutability is Mutability.MONOTONE_UP:
            up.append(j)
        elif c.mutability is Mutability.MONOTONE_DOWN:
            down.append(j)
    orders = tuple(
        (c.name, c.order) for c in schema.columns if c.order is not None
    )
    return ActionPredicate(tuple(imm), tuple(up), tuple(down), orders)


TRUE_PREDICATE = ActionPredicate()


# ---------------------------------------------------------------------------
# Cost evaluation context


@dataclass(frozen=True)
class CostContext:
    """Dataset-level lookups needed to price an edge (KDE scores, raw features)."""

    schema: FeatureSchema
    raw_features: dict | None = None  # id -> tuple, original units
    kde_scores: dict | None = None  # id -> normalized NLL in [0, 100]


def cost_context(data: Dataset, spec: CostSpec) -> CostContext:
    """Precompute whatever the declared criteria need from the whole dataset."""
    needs_raw = any(
        isinstance(c.kind, FeatureDelta) or (isinstance(c.kind, LNorm) and c.kind.space == "raw")
        for c in spec.criteria
    )
    kde_rules = {c.kind.bandwidth for c in spec.criteria if isinstance(c.kind, KdeNll)}
    if len(kde_rules) > 1:
        raise SchemaError("all kde_nll criteria must agree on one bandwidth rule")

    for c in spec.criteria:
        kind = c.kind
        if isinstance(kind, LNorm) and kind.columns:
            for name in kind.columns:
                data.schema.feature_index(name)
        elif isinstance(kind, FeatureDelta):
            data.schema.feature_index(kind.column)
        elif isinstance(kind, LabelAbsDiff):
            if kind.column not in data.schema.label_names:
                raise SchemaError(f"criterion {c.name!r}: {kind.column!r} is not a label column")

    raw = None
    if needs_raw:
        mat = data.raw_feature_matrix()
        raw = {r.id: tuple(float(x) for x in mat[i]) for i, r in enumerate(data.rows)}
    scores = None
    if kde_rules:
        arr = kde_nll_scores(data, bandwidth=next(iter(kde_rules)))
        scores = {r.id: float(arr[i]) for i, r in enumerate(data.rows)}
    return CostContext(schema=data.schema, raw_features=raw, kde_scores=scores)


def _lp(diff: list[float], p: float) -> float:
    if p == 1:
        return sum(abs(d) for d in diff)
    if p == 2:
        return math.sqrt(sum(d * d for d in diff))
    return max((abs(d) for d in diff), default=0.0)


def evaluate_costs(u: Instance, v: Instance, spec: CostSpec, aux: CostContext) -> CostVector:
    """Price the directed edge u -> v under every declared criterion."""
    if u.id == v.id:
        raise ContractViolation("edges must join distinct instances")
    out = []
    for c in spec.criteria:
        kind = c.kind
        if isinstance(kind, LNorm):
            if kind.space == "raw":
                if aux.raw_features is None:
                    raise ContractViolation("cost context lacks raw features for a raw-space l_norm")
                fu, fv = aux.raw_features[u.id], aux.raw_features[v.id]
            else:
                fu, fv = u.features, v.features
            if kind.columns:
                idx = [aux.schema.feature_index(n) for n in kind.columns]
                diff = [fu[j] - fv[j] for j in idx]
            else:
                diff = [a - b for a, b in zip(fu, fv)]
            out.append(_lp(diff, kind.p))
        elif isinstance(kind, LabelAbsDiff):
            a, b = u.label_number(kind.column), v.label_number(kind.column)
            val = abs(a - b)
            out.append(int(val) if float(val).is_integer() else val)
        elif isinstance(kind, FeatureDelta):
            if aux.raw_features is None:
                raise ContractViolation("cost context lacks raw features for feature_delta")
            j = aux.schema.feature_index(kind.column)
            val = abs(aux.raw_features[v.id][j] - aux.raw_features[u.id][j])
            out.append(int(val) if float(val).is_integer() else val)
        elif isinstance(kind, KdeNll):
            if aux.kde_scores is None:
                raise ContractViolation("cost context lacks KDE scores for kde_nll")
            out.append(aux.kde_scores[v.id])
        else:
            raise ContractViolation(f"unknown criterion kind {kind!r}")
    return CostVector(tuple(out))


# ---------------------------------------------------------------------------
# The graph


@dataclass
class ActionabilityGraph:
    """Directed graph over instances with multi-cost edge weights.

    Treat as immutable after construction. `out_edges[u]` maps target id to
    the edge's CostVector; every cost has length k.
    """

    positive: dict
    out_edges: dict
    k: int
    _in_edges: dict | None = field(default=None, repr=False, compare=False)

    @property
    def vertex_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self.positive))

    def __contains__(self, vid: str) -> bool:
        return vid in self.positive

    def edge_cost(self, u: str, v: str) -> CostVector:
        return self.out_edges[u][v]

    def out(self, u: str):
        return sorted(self.out_edges.get(u, {}).items())

    def in_edges(self, v: str):
        if self._in_edges is None:
            incoming = {vid: [] for vid in self.positive}
            for u in sorted(self.out_edges):
                for v2 in sorted(self.out_edges[u]):
                    incoming[v2].append((u, self.out_edges[u][v2]))
            self._in_edges = incoming
        return self._in_edges[v]

    def edges(self):
        """All edges as (u, v, cost), sorted for deterministic sweeps."""
        for u in sorted(self.out_edges):
            for v in sorted(self.out_edges[u]):
                yield u, v, self.out_edges[u][v]

    @property
    def n_edges(self) -> int:
        return sum(len(t) for t in self.out_edges.values())


@dataclass(frozen=True)
class GraphStats:
    n_vertices: int
    n_edges: int
    gamma: int
    k: int


def graph_stats(g: ActionabilityGraph) -> GraphStats:
    """Vertex/edge counts plus gamma, the largest out- or in-degree observed."""
    out_deg = {v: len(g.out_edges.get(v, {})) for v in g.positive}
    in_deg = dict.fromkeys(g.positive, 0)
    for u, targets in g.out_edges.items():
        for v in targets:
            in_deg[v] += 1
    gamma = 0
    if g.positive:
        gamma = max(max(out_deg.values()), max(in_deg.values()))
    return GraphStats(len(g.positive), g.n_edges, gamma, g.k)


def build_knn_graph(
    data: Dataset,
    k_neighbors: int,
    predicate: ActionPredicate,
    spec: CostSpec,
    classifier: Classifier | None = None,
) -> ActionabilityGraph:
    """Build the directed actionability graph from KNN candidates.

    Each vertex gets candidate out-edges to its k_neighbors nearest
    neighbors (exact L2 on stored features, ties at equal distance broken
    by lower vertex id); candidates failing the predicate are dropped, the
    rest are weighted by evaluate_costs. Vertices are flagged positive via
    the classifier when one is given.
    """
    n = len(data)
    if n == 0:
        raise ContractViolation("cannot build a graph from an empty dataset")
    if not 1 <= k_neighbors < n:
        raise ContractViolation(f"k_neighbors must be in [1, |V|-1], got {k_neighbors} for n={n}")

    ctx = cost_context(data, spec)
    x = data.feature_matrix()
    ids = [r.id for r in data.rows]
    # Rank of each row's id in sorted order, for deterministic tie-breaking.
    id_rank = np.argsort(np.argsort(np.array(ids, dtype=object), kind="stable"))

    positive = {}
    for r in data.rows:
        positive[r.id] = bool(classify(classifier, r)) if classifier is not None else False

    out_edges = {vid: {} for vid in ids}
    sq = np.sum(x * x, axis=1)
    block = 512
    for start in range(0, n, block):
        stop = min(start + block, n)
        d2 = sq[start:stop, None] + sq[None, :] - 2.0 * (x[start:stop] @ x.T)
        d2 = np.maximum(d2, 0.0)
        for i in range(start, stop):
            row = d2[i - start].copy()
            row[i] = np.inf
            order = np.lexsort((id_rank, row))
            u = data.rows[i]
            for j in order[:k_neighbors]:
                v = data.rows[int(j)]
                if predicate(u, v):
                    out_edges[u.id][v.id] = evaluate_costs(u, v, spec, ctx)
    return ActionabilityGraph(positive=positive, out_edges=out_edges, k=spec.k)


# ---------------------------------------------------------------------------
# Serialization (lossless JSON round-trip)


def graph_to_dict(g: ActionabilityGraph, spec: CostSpec | None = None) -> dict:
    doc = {
        "vertices": [{"id": v, "positive": g.positive[v]} for v in g.vertex_ids],
        "edges": [
            {"from": u, "to": v, "cost": list(c.values)} for u, v, c in g.edges()
        ],
        "k": g.k,
    }
    if spec is not None:
        doc["cost_spec"] = spec_to_dict(spec)
    return doc


def graph_to_json(g: ActionabilityGraph, spec: CostSpec | None = None) -> str:
    return json.dumps(graph_to_dict(g, spec), sort_keys=True, indent=2) + "\n"


def graph_from_dict(doc: dict) -> tuple[ActionabilityGraph, CostSpec | None]:
    positive = {v["id"]: bool(v["positive"]) for v in doc["vertices"]}
    k = int(doc["k"])
    out_edges = {vid: {} for vid in positive}
    for e in doc["edges"]:
        u, v = e["from"], e["to"]
        if u not in positive or v not in positive:
            raise ContractViolation(f"edge {u!r}->{v!r} references unknown vertices")
        if u == v:
            raise ContractViolation(f"self-loop on {u!r}")
        cost = CostVector(tuple(e["cost"]))
        if len(cost) != k:
            raise ContractViolation(f"edge {u!r}->{v!r} cost has length {len(cost)}, expected {k}")
        out_edges[u][v] = cost
    spec = cost_spec_from_dict(doc["cost_spec"]) if "cost_spec" in doc else None
    return ActionabilityGraph(positive=positive, out_edges=out_edges, k=k), spec


def graph_from_json(text: str) -> tuple[ActionabilityGraph, CostSpec | None]:
    return graph_from_dict(json.loads(text))
