"""Command-line harness wiring ingestion, graph build, search, and sampling.

Every command is seeded and writes a deterministic report: repeated runs
with the same flags produce byte-identical files. Wall-clock numbers are
therefore never put in the main report; scalability timings go into a
separate ``.timings.json`` sidecar.
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .costs import CostSpec, CostVector, is_pareto_set, load_cost_spec
from .dataset import Dataset, load_csv, load_schema, standardize
from .epsnet import (
    ShrinkConfig,
    replay_shrink,
    sample_epsilon_net,
    sample_size,
    shrink_graph,
    verify_ball_net,
)
from .errors import ContractViolation, RecourseError
from .generators import random_search_instance
from .graph import (
    ActionabilityGraph,
    build_knn_graph,
    graph_from_dict,
    graph_to_dict,
    graph_stats,
    predicate_from_schema,
)
from .search import (
    backtrack,
    brute_force_oracle,
    costs_match,
    merge_tables,
    pareto_shortest_paths,
    path_cost,
    recourse_frontier,
)


@dataclass
class RunConfig:
    """Parsed command-line options for one run."""

    command: str
    data: Path | None = None
    schema: Path | None = None
    costs: Path | None = None
    graph: Path | None = None
    out: Path | None = None
    knn: int = 4
    source: str | None = None
    max_hops: int = 5
    max_paths: int = 16
    table_cap: int | None = None
    seed: int = 0
    trials: int = 200
    sizes: tuple[int, ...] = (128, 256, 512, 1024)
    kappa: float = 2.0
    scope: str = "all"
    shuffle_order: bool = False
    epsilon: float | None = None
    delta: float | None = None
    vc_dim: int | None = None
    size: int | None = None
    verify_radius: float | None = None
    inject_fault: str | None = None


def derive_seed(*parts: int) -> int:
    """Deterministic child seed from a root seed and trial coordinates."""
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


def write_json(path: Path, doc: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Input loading


def _load_tabular(cfg: RunConfig):
    """Dataset route: returns (standardized dataset, classifier, spec, predicate)."""
    if cfg.data is None or cfg.schema is None or cfg.costs is None:
        raise ContractViolation("this command needs --data, --schema and --costs")
    schema, classifier = load_schema(cfg.schema)
    data = load_csv(cfg.data, schema)
    data = standardize(data)
    spec = load_cost_spec(cfg.costs)
    return data, classifier, spec, predicate_from_schema(schema)


def _load_graph_route(cfg: RunConfig, *, require_spec: bool = True):
    text = Path(cfg.graph).read_text(encoding="utf-8")
    g, spec = graph_from_dict(json.loads(text))
    if spec is None and cfg.costs is not None:
        spec = load_cost_spec(cfg.costs)
    if spec is None and require_spec:
        raise ContractViolation("graph file carries no cost spec; pass --costs")
    if spec is not None and spec.k != g.k:
        raise ContractViolation(f"cost spec has k={spec.k} but graph edges carry k={g.k}")
    return g, spec


def _problem(cfg: RunConfig) -> tuple[ActionabilityGraph, CostSpec]:
    if cfg.graph is not None:
        return _load_graph_route(cfg)
    data, classifier, spec, predicate = _load_tabular(cfg)
    g = build_knn_graph(data, cfg.knn, predicate, spec, classifier)
    return g, spec


# ---------------------------------------------------------------------------
# solve / build-graph


def _entry_dict(entry) -> dict:
    return {"cost": list(entry.cost.values), "first_reached_hop": entry.first_reached_hop}


def _path_dict(p) -> dict:
    return {"vertices": list(p.vertices), "cost": list(p.cost.values), "hops": p.hops}


def solve_report(g: ActionabilityGraph, spec: CostSpec, cfg: RunConfig) -> dict:
    result = pareto_shortest_paths(g, cfg.source, cfg.max_hops, spec, table_cap=cfg.table_cap)
    fronts = recourse_frontier(result, g)
    targets = []
    for vid, table in fronts:
        paths = backtrack(result, vid, max_paths=cfg.max_paths)
        targets.append({
            "id": vid,
            "entries": [_entry_dict(e) for e in table.entries],
            "paths": [_path_dict(p) for p in paths],
        })
    merged = merge_tables([t for _, t in fronts])
    stats = graph_stats(g)
    return {
        "command": "solve",
        "source": cfg.source,
        "max_hops": cfg.max_hops,
        "max_paths": cfg.max_paths,
        "table_cap": cfg.table_cap,
        "approximate": result.approximate,
        "criteria": list(spec.names),
        "aggregations": [a.value for a in spec.aggregations],
        "graph": graph_to_dict(g, spec),
        "stats": {"vertices": stats.n_vertices, "edges": stats.n_edges,
                  "gamma": stats.gamma, "k": stats.k},
        "targets": targets,
        "merged_frontier": [list(e.cost.values) for e in merged.entries],
    }


def validate_solve_report(doc: dict) -> list[str]:
    """Re-check the invariants a solve report embeds, from the document alone."""
    problems = []
    g, spec = graph_from_dict(doc["graph"])
    if spec is None:
        return ["report graph carries no cost spec"]
    for t in doc["targets"]:
        costs = [CostVector(tuple(e["cost"])) for e in t["entries"]]
        if not is_pareto_set(costs):
            problems.append(f"target {t['id']}: entries are not a Pareto set")
        for p in t["paths"]:
            rebuilt = path_cost(g, p["vertices"], spec)
            if not costs_match(rebuilt, CostVector(tuple(p["cost"]))):
                problems.append(
                    f"target {t['id']}: path {p['vertices']} recomputes to "
                    f"{list(rebuilt.values)}, report says {p['cost']}"
                )
    merged = [CostVector(tuple(c)) for c in doc["merged_frontier"]]
    if not is_pareto_set(merged):
        problems.append("merged frontier is not a Pareto set")
    return problems


def _frontier_csv(doc: dict) -> str:
    lines = ["target," + ",".join(doc["criteria"])]
    for t in doc["targets"]:
        for e in t["entries"]:
            lines.append(t["id"] + "," + ",".join(repr(v) for v in e["cost"]))
    return "\n".join(lines) + "\n"


def cmd_solve(cfg: RunConfig) -> int:
    if cfg.source is None:
        raise ContractViolation("solve needs --source")
    g, spec = _problem(cfg)
    doc = solve_report(g, spec, cfg)
    problems = validate_solve_report(doc)
    out = cfg.out or Path("solve_report.json")
    write_json(out, doc)
    Path(out).with_suffix(".frontier.csv").write_text(_frontier_csv(doc), encoding="utf-8")
    for msg in problems:
        print(f"self-check failed: {msg}", file=sys.stderr)
    n_paths = sum(len(t["paths"]) for t in doc["targets"])
    print(f"solve: {len(doc['targets'])} target(s), {n_paths} path(s) -> {out}")
    return 1 if problems else 0


def cmd_build_graph(cfg: RunConfig) -> int:
    data, classifier, spec, predicate = _load_tabular(cfg)
    g = build_knn_graph(data, cfg.knn, predicate, spec, classifier)
    out = cfg.out or Path("graph.json")
    write_json(out, graph_to_dict(g, spec))
    stats = graph_stats(g)
    print(f"build-graph: |V|={stats.n_vertices} |E|={stats.n_edges} gamma={stats.gamma} -> {out}")
    return 0


# ---------------------------------------------------------------------------
# oracle-check


def cmd_oracle_check(cfg: RunConfig) -> int:
    if cfg.trials < 1:
        raise ContractViolation("oracle-check needs --trials >= 1")
    do_prune = cfg.inject_fault != "skip-prune"
    failures = []
    for trial in range(cfg.trials):
        inst = random_search_instance(derive_seed(cfg.seed, trial))
        result = pareto_shortest_paths(
            inst.graph, inst.source, inst.eta, inst.spec, do_prune=do_prune
        )
        got = {v: tuple(t.costs) for v, t in result.final_tables.items()}
        want = brute_force_oracle(inst.graph, inst.source, inst.eta, inst.spec)
        for v in inst.graph.vertex_ids:
            if tuple(tuple(c) for c in got[v]) != tuple(tuple(c) for c in want[v]):
                failures.append({
                    "trial": trial,
                    "seed": inst.seed,
                    "vertex": v,
                    "got": [list(c) for c in got[v]],
                    "want": [list(c) for c in want[v]],
                    "instance": inst.describe(),
                })
                break
    doc = {
        "command": "oracle-check",
        "trials": cfg.trials,
        "seed": cfg.seed,
        "prune_disabled": not do_prune,
        "agreed": not failures,
        "failures": failures,
    }
    out = cfg.out or Path("oracle_report.json")
    write_json(out, doc)
    for f in failures[:5]:
        print(f"disagreement at seed {f['seed']} vertex {f['vertex']}: {f['instance']}",
              file=sys.stderr)
    print(f"oracle-check: {cfg.trials} trials, {len(failures)} disagreement(s) -> {out}")
    return 0 if not failures else 1


# ---------------------------------------------------------------------------
# scalability


def _best_within_budget(frontier: list, budget) -> float | None:
    vals = [f[1] for f in frontier if f[0] <= budget]
    return min(vals) if vals else None


def scalability_records(cfg: RunConfig):
    """Run the size x trial grid; returns (records, timings, spec, source)."""
    data, classifier, spec, predicate = _load_tabular(cfg)
    if spec.k < 2:
        raise ContractViolation("scalability reporting needs at least 2 criteria")
    sizes = list(cfg.sizes)
    if sizes != sorted(sizes):
        raise ContractViolation("--sizes must be ascending")
    if cfg.trials < 2:
        raise ContractViolation("scalability needs --trials >= 2")
    if len(data) < max(sizes):
        raise ContractViolation(
            f"dataset has {len(data)} rows, smaller than the largest size {max(sizes)}"
        )
    source = cfg.source or data.rows[0].id
    if all(r.id != source for r in data.rows):
        raise ContractViolation(f"unknown source vertex {source!r}")

    records, timings = [], []
    for size in sizes:
        for trial in range(cfg.trials):
            tseed = derive_seed(cfg.seed, size, trial)
            sample = sample_epsilon_net(data, size, tseed)
            keep = set(sample.ids) | {source}
            rows = tuple(r for r in data.rows if r.id in keep)
            sub = Dataset(rows=rows, schema=data.schema, standardization=data.standardization)
            start = time.perf_counter()
            knn = min(cfg.knn, len(rows) - 1)
            g = build_knn_graph(sub, knn, predicate, spec, classifier)
            result = pareto_shortest_paths(g, source, cfg.max_hops, spec)
            fronts = recourse_frontier(result, g)
            merged = merge_tables([t for _, t in fronts])
            elapsed_ms = (time.perf_counter() - start) * 1000.0
            records.append({
                "size": size,
                "trial": trial,
                "seed": tseed,
                "targets": len(fronts),
                "frontier": [list(e.cost.values) for e in merged.entries],
            })
            timings.append({"size": size, "trial": trial, "wall_ms": elapsed_ms})
    return records, timings, spec, source


def summarize_scalability(records: list, sizes) -> tuple[list, dict]:
    """Per-size median/quartiles of the second criterion at each first-criterion budget."""
    budgets = sorted({f[0] for r in records for f in r["frontier"]})
    summary = {}
    for size in sizes:
        rows = [r for r in records if r["size"] == size]
        per_budget = {}
        for b in budgets:
            vals = [v for v in (_best_within_budget(r["frontier"], b) for r in rows)
                    if v is not None]
            if not vals:
                continue
            vals.sort()
            q = statistics.quantiles(vals, n=4, method="inclusive") if len(vals) > 1 else [vals[0]] * 3
            per_budget[str(b)] = {
                "defined": len(vals),
                "trials": len(rows),
                "median": statistics.median(vals),
                "q1": q[0],
                "q3": q[2],
            }
        summary[str(size)] = per_budget
    return budgets, summary


def cmd_scalability(cfg: RunConfig) -> int:
    records, timings, spec, source = scalability_records(cfg)
    budgets, summary = summarize_scalability(records, cfg.sizes)
    problems = []
    for r in records:
        if not is_pareto_set([CostVector(tuple(f)) for f in r["frontier"]]):
            problems.append(f"size {r['size']} trial {r['trial']}: frontier not a Pareto set")
    doc = {
        "command": "scalability",
        "seed": cfg.seed,
        "source": source,
        "sizes": list(cfg.sizes),
        "trials": cfg.trials,
        "knn": cfg.knn,
        "max_hops": cfg.max_hops,
        "criteria": list(spec.names),
        "budgets": budgets,
        "records": records,
        "summary": summary,
    }
    out = cfg.out or Path("scalability_report.json")
    write_json(out, doc)

    crit2 = spec.names[1]
    lines = [f"size,trial,budget,best_{crit2}"]
    for r in records:
        for b in budgets:
            best = _best_within_budget(r["frontier"], b)
            if best is not None:
                lines.append(f"{r['size']},{r['trial']},{b},{best!r}")
    Path(out).with_suffix(".boxplot.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    write_json(Path(str(out) + ".timings.json"), {"timings": timings})

    for msg in problems:
        print(f"self-check failed: {msg}", file=sys.stderr)
    print(f"scalability: {len(records)} runs over sizes {list(cfg.sizes)} -> {out}")
    return 1 if problems else 0


# ---------------------------------------------------------------------------
# shrink / sample


def cmd_shrink(cfg: RunConfig) -> int:
    if cfg.graph is not None:
        g, _ = _load_graph_route(cfg, require_spec=False)
    else:
        g, _ = _problem(cfg)
    scope = None if cfg.scope == "all" else int(cfg.scope)
    shrink_cfg = ShrinkConfig(kappa=cfg.kappa, scope=scope)
    order = list(g.vertex_ids)
    if cfg.shuffle_order:
        rng = np.random.default_rng(cfg.seed)
        order = [order[int(i)] for i in rng.permutation(len(order))]
    report = shrink_graph(g, shrink_cfg, order)
    ok, bad = replay_shrink(g, shrink_cfg, report)
    doc = {
        "command": "shrink",
        "kappa": cfg.kappa,
        "scope": cfg.scope,
        "order": list(report.order),
        "survivors": list(report.survivors),
        "mapping": {v: r for v, r in sorted(report.mapping.items())},
        "merges": [list(m) for m in report.merges],
        "vertices": len(g.positive),
        "reduction_ratio": len(report.survivors) / len(g.positive),
        "replay_ok": ok,
    }
    out = cfg.out or Path("shrink_report.json")
    write_json(out, doc)
    if not ok:
        print(f"self-check failed: merge {bad} did not replay", file=sys.stderr)
    print(f"shrink: {len(g.positive)} -> {len(report.survivors)} vertices "
          f"({len(report.merges)} merges) -> {out}")
    return 0 if ok else 1


def cmd_sample(cfg: RunConfig) -> int:
    if cfg.data is None or cfg.schema is None:
        raise ContractViolation("sample needs --data and --schema")
    schema, _ = load_schema(cfg.schema)
    data = load_csv(cfg.data, schema)
    data = standardize(data)
    if cfg.size is not None:
        m = cfg.size
    else:
        if cfg.epsilon is None or cfg.delta is None or cfg.vc_dim is None:
            raise ContractViolation("sample needs --size, or --epsilon, --delta and --vc-dim")
        m = sample_size(cfg.epsilon, cfg.delta, cfg.vc_dim)
    sample = sample_epsilon_net(data, m, cfg.seed, epsilon=cfg.epsilon,
                                delta=cfg.delta, vc_dim=cfg.vc_dim)
    doc = {
        "command": "sample",
        "seed": cfg.seed,
        "m": m,
        "epsilon": cfg.epsilon,
        "delta": cfg.delta,
        "vc_dim": cfg.vc_dim,
        "n": len(data),
        "ids": list(sample.ids),
    }
    code = 0
    if cfg.verify_radius is not None:
        holds, violator = verify_ball_net(data, sample, cfg.verify_radius)
        doc["verify_radius"] = cfg.verify_radius
        doc["net_holds"] = holds
        doc["first_violation"] = violator
        code = 0 if holds else 1
    out = cfg.out or Path("sample_report.json")
    write_json(out, doc)
    print(f"sample: {len(sample.ids)} of {len(data)} ids (m={m}) -> {out}")
    return code


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pareto-recourse",
        description="Pareto-optimal recourse paths under multiple cost criteria",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, files=True):
        p.add_argument("--seed", type=int, default=0, help="root seed for all randomness")
        p.add_argument("--out", type=Path, default=None, help="report file path")
        if files:
            p.add_argument("--data", type=Path, help="dataset CSV")
            p.add_argument("--schema", type=Path, help="schema TOML")
            p.add_argument("--costs", type=Path, help="cost-spec TOML")

    p = sub.add_parser("solve", help="find Pareto recourse paths from a source")
    common(p)
    p.add_argument("--graph", type=Path, help="serialized graph JSON (skips the dataset route)")
    p.add_argument("--source", required=True)
    p.add_argument("--knn", type=int, default=4)
    p.add_argument("--max-hops", type=int, default=5, help="eta, the hop budget")
    p.add_argument("--max-paths", type=int, default=16)
    p.add_argument("--table-cap", type=int, default=None, help="tau_max (voids exactness)")

    p = sub.add_parser("build-graph", help="build and serialize the actionability graph")
    common(p)
    p.add_argument("--knn", type=int, default=4)

    p = sub.add_parser("oracle-check", help="compare the solver against brute-force enumeration")
    common(p, files=False)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--inject-fault", choices=["skip-prune"], default=None,
                   help=argparse.SUPPRESS)

    p = sub.add_parser("scalability", help="frontier quality across sample sizes")
    common(p)
    p.add_argument("--source", default=None)
    p.add_argument("--knn", type=int, default=4)
    p.add_argument("--max-hops", type=int, default=5)
    p.add_argument("--sizes", type=lambda s: tuple(int(x) for x in s.split(",")),
                   default=(128, 256, 512, 1024))
    p.add_argument("--trials", type=int, default=32)

    p = sub.add_parser("shrink", help="merge kappa-shrinkable vertices")
    common(p)
    p.add_argument("--graph", type=Path)
    p.add_argument("--knn", type=int, default=4)
    p.add_argument("--kappa", type=float, default=2.0)
    p.add_argument("--scope", default="all", help="criterion index or 'all'")
    p.add_argument("--shuffle-order", action="store_true",
                   help="process vertices in seed-shuffled order")

    p = sub.add_parser("sample", help="draw a certified epsilon-net sample")
    common(p)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--vc-dim", type=int, default=None)
    p.add_argument("--size", type=int, default=None, help="explicit m (skips the bound)")
    p.add_argument("--verify-radius", type=float, default=None,
                   help="also verify the ball net property at this radius")
    return parser


COMMANDS = {
    "solve": cmd_solve,
    "build-graph": cmd_build_graph,
    "oracle-check": cmd_oracle_check,
    "scalability": cmd_scalability,
    "shrink": cmd_shrink,
    "sample": cmd_sample,
}


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command)
    for name in vars(args):
        if name != "command" and hasattr(cfg, name):
            setattr(cfg, name, getattr(args, name))
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = config_from_args(args)
    try:
        return COMMANDS[cfg.command](cfg)
    except (RecourseError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
