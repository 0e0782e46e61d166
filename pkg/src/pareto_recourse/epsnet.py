"""Scalability layer: graph shrinking, sample-size bounds, epsilon-net sampling.

Shrinking merges vertices whose incoming cost structure another vertex can
reproduce within a factor kappa; the epsilon-net sampler replaces the full
vertex set by a random subset whose size the Haussler-Welzl bound certifies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .errors import ContractViolation
from .graph import ActionabilityGraph


@dataclass(frozen=True)
class ShrinkConfig:
    """Shrinking parameters: factor kappa and which criteria must hold.

    `scope` is a single criterion index, or None to require the edge
    inequality on all k criteria simultaneously (one merge order then fits
    every cost function at once).
    """

    kappa: float
    scope: int | None = None

    def __post_init__(self):
        if not (math.isfinite(self.kappa) and self.kappa >= 1):
            raise ContractViolation(f"kappa must be >= 1, got {self.kappa!r}")


@dataclass(frozen=True)
class NetSample:
    """A random vertex subset plus its sampling certificate."""

    ids: tuple[str, ...]
    seed: int
    m: int
    epsilon: float | None = None
    delta: float | None = None
    vc_dim: int | None = None


@dataclass(frozen=True)
class ShrinkReport:
    """Outcome of one shrinking run.

    `merges` is chronological (vertex, representative) pairs; `order` is
    the vertex processing order that produced them. Representatives are
    always survivors, so the mapping is acyclic by construction.
    """

    survivors: tuple[str, ...]
    mapping: dict
    merges: tuple[tuple[str, str], ...]
    order: tuple[str, ...]
    kappa: float
    scope: int | None

    def representative(self, vid: str) -> str:
        return self.mapping.get(vid, vid)


def _scope_indices(cfg: ShrinkConfig, k: int) -> range | tuple:
    if cfg.scope is None:
        return range(k)
    if not 0 <= cfg.scope < k:
        raise ContractViolation(f"criterion index {cfg.scope} out of range for k={k}")
    return (cfg.scope,)


def _shrinkable(in_edges, out_edges, alive, i, j, kappa, indices) -> bool:
    """Shrinkability of i into j on the subgraph induced by `alive`."""
    for p, cost_pi in in_edges[i]:
        if p not in alive:
            continue
        cost_pj = out_edges[p].get(j)
        if cost_pj is None:
            return False
        if any(cost_pj[c] > kappa * cost_pi[c] for c in indices):
            return False
    return True


def is_shrinkable(g: ActionabilityGraph, i: str, j: str, cfg: ShrinkConfig) -> bool:
    """True iff every in-edge of i has a counterpart into j within factor kappa.

    A vertex with no in-edges is vacuously shrinkable to anything. An
    in-edge from j itself can never be matched (that would need a self-loop
    on j), so such a pair is not shrinkable.
    """
    if i not in g or j not in g:
        raise ContractViolation(f"unknown vertices {i!r}, {j!r}")
    if i == j:
        raise ContractViolation("a vertex cannot shrink into itself")
    in_edges = {v: g.in_edges(v) for v in g.vertex_ids}
    return _shrinkable(in_edges, g.out_edges, set(g.vertex_ids), i, j, cfg.kappa,
                       _scope_indices(cfg, g.k))


def shrink_graph(g: ActionabilityGraph, cfg: ShrinkConfig, order) -> ShrinkReport:
    """Iteratively merge shrinkable vertices until a full pass changes nothing.

    Vertices are visited in `order` (distinct vertex ids; vertices left out
    are never merged away, though they can still absorb others); each one
    merges into the lowest-id surviving vertex it is currently shrinkable
    to, if any. A vertex that has absorbed others is pinned as a
    representative and never merged away itself, so every recorded mapping
    stays within a single factor-kappa approximation. The result depends
    on the order; any order yields a valid shrunk graph. Note that a
    vertex with no in-edges is vacuously shrinkable to anything, so orders
    containing such roots will merge them away.
    """
    order = tuple(order)
    if len(set(order)) != len(order):
        raise ContractViolation("order must not repeat vertices")
    unknown = [v for v in order if v not in g.positive]
    if unknown:
        raise ContractViolation(f"order references unknown vertices {unknown}")
    indices = _scope_indices(cfg, g.k)
    in_edges = {v: list(g.in_edges(v)) for v in g.vertex_ids}
    out_edges = {v: dict(g.out_edges.get(v, {})) for v in g.vertex_ids}

    alive = set(g.vertex_ids)
    pinned: set[str] = set()
    mapping: dict[str, str] = {}
    merges: list[tuple[str, str]] = []

    changed = True
    while changed:
        changed = False
        for v in order:
            if v not in alive or v in pinned:
                continue
            target = None
            for u in sorted(alive):
                if u != v and _shrinkable(in_edges, out_edges, alive, v, u, cfg.kappa, indices):
                    target = u
                    break
            if target is not None:
                alive.remove(v)
                mapping[v] = target
                merges.append((v, target))
                pinned.add(target)
                changed = True

    return ShrinkReport(
        survivors=tuple(sorted(alive)),
        mapping=mapping,
        merges=tuple(merges),
        order=order,
        kappa=cfg.kappa,
        scope=cfg.scope,
    )


def replay_shrink(g: ActionabilityGraph, cfg: ShrinkConfig, report: ShrinkReport):
    """Re-check that every recorded merge was valid when it happened.

    Returns (ok, first_bad_merge_or_None). Replays the merge sequence on a
    fresh copy of the graph, verifying shrinkability against the subgraph
    induced by the vertices still alive at that step.
    """
    indices = _scope_indices(cfg, g.k)
    in_edges = {v: list(g.in_edges(v)) for v in g.vertex_ids}
    out_edges = {v: dict(g.out_edges.get(v, {})) for v in g.vertex_ids}
    alive = set(g.vertex_ids)
    for v, rep in report.merges:
        if v not in alive or rep not in alive:
            return False, (v, rep)
        if not _shrinkable(in_edges, out_edges, alive, v, rep, cfg.kappa, indices):
            return False, (v, rep)
        alive.remove(v)
    if tuple(sorted(alive)) != report.survivors:
        return False, None
    return True, None


# ---------------------------------------------------------------------------
# Sampling


def sample_size(epsilon: float, delta: float, vc_dim: int) -> int:
    """Haussler-Welzl sample size with the classical explicit constants.

    ceil(max((4/eps) ln(4/delta), (8 vc / eps) ln(16/eps))). A uniform
    random sample of this size is an epsilon-net with probability > 1-delta
    for any range family of the given VC dimension.
    """
    if not 0 < epsilon < 1:
        raise ContractViolation(f"epsilon must be in (0,1), got {epsilon!r}")
    if not 0 < delta < 1:
        raise ContractViolation(f"delta must be in (0,1), got {delta!r}")
    if not (isinstance(vc_dim, int) and vc_dim >= 1):
        raise ContractViolation(f"vc_dim must be a positive integer, got {vc_dim!r}")
    a = (4.0 / epsilon) * math.log(4.0 / delta)
    b = (8.0 * vc_dim / epsilon) * math.log(16.0 / epsilon)
    return math.ceil(max(a, b))


def sample_epsilon_net(
    data: Dataset,
    m: int,
    seed: int,
    *,
    epsilon: float | None = None,
    delta: float | None = None,
    vc_dim: int | None = None,
) -> NetSample:
    """Uniform sample of min(m, |V|) distinct vertex ids, reproducible by seed.

    The optional epsilon/delta/vc_dim fields record the certificate the
    sample size was computed from; they do not change the draw.
    """
    if m < 1:
        raise ContractViolation(f"sample size must be >= 1, got {m}")
    ids = sorted(data.ids)
    take = min(m, len(ids))
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(ids), size=take, replace=False)
    chosen = tuple(sorted(ids[int(i)] for i in picks))
    return NetSample(ids=chosen, seed=seed, m=m, epsilon=epsilon, delta=delta, vc_dim=vc_dim)


def verify_ball_net(data: Dataset, sample: NetSample, radius: float):
    """Check the net property for balls centered at every data point.

    For each center whose radius-ball holds more than epsilon * n points,
    some sampled point must fall inside it. Centers only range over data
    points, a finite proxy for the continuous ball family; that is
    adequate at desk scale and stated as a limitation.

    Returns (holds, first_violating_center_id).
    """
    n = len(data)
    if n > 5000:
        raise ContractViolation("ball verification is desk-scale only (|V| <= 5000)")
    if sample.epsilon is None:
        raise ContractViolation("sample carries no epsilon certificate")
    x = data.feature_matrix()
    ids = [r.id for r in data.rows]
    in_sample = np.array([vid in set(sample.ids) for vid in ids])
    threshold = sample.epsilon * n
    r2 = radius * radius

    sq = np.sum(x * x, axis=1)
    block = 512
    for start in range(0, n, block):
        stop = min(start + block, n)
        d2 = sq[start:stop, None] + sq[None, :] - 2.0 * (x[start:stop] @ x.T)
        inside = d2 <= r2 + 1e-12
        counts = inside.sum(axis=1)
        hit = (inside & in_sample[None, :]).any(axis=1)
        for i in range(stop - start):
            if counts[i] > threshold and not hit[i]:
                return False, ids[start + i]
    return True, None
