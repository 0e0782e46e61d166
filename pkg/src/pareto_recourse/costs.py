"""Cost vectors, the dominance relation, and Pareto-table pruning.

All types here are immutable values; the operations are pure functions, so
everything is safe to share between threads. Comparisons are exact: integer
criteria (label steps, years) should be passed as Python ints, which survive
Sum/Max aggregation unchanged, so frontier membership never depends on a
floating-point tolerance.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .errors import ContractViolation, SchemaError


class Aggregation(enum.Enum):
    """How a criterion accumulates edge costs along a path.

    Both operators are monotone non-decreasing in each argument, which is
    what makes dominance pruning safe during the search.
    """

    SUM = "sum"
    MAX = "max"


@dataclass(frozen=True)
class CostVector:
    """An ordered tuple of k non-negative, finite criterion values."""

    values: tuple[float, ...]

    def __post_init__(self):
        values = tuple(self.values)
        object.__setattr__(self, "values", values)
        for x in values:
            if not math.isfinite(x) or x < 0:
                raise ContractViolation(f"cost component must be finite and >= 0, got {x!r}")

    @classmethod
    def zeros(cls, k: int) -> "CostVector":
        return cls((0,) * k)

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]


def dominates(a: CostVector, b: CostVector) -> bool:
    """True iff `a` is componentwise <= `b` and differs in at least one spot."""
    if len(a) != len(b):
        raise ContractViolation(f"cost length mismatch: {len(a)} vs {len(b)}")
    return all(x <= y for x, y in zip(a, b)) and a.values != b.values


# ---------------------------------------------------------------------------
# Criterion kinds and the cost spec


@dataclass(frozen=True)
class LNorm:
    """L_p distance between feature vectors, optionally on a column subset.

    `space` selects which feature representation the distance is taken in:
    "standardized" uses the dataset's stored (post-standardization) features,
    "raw" inverse-maps back to original units first.
    """

    p: float  # 1, 2, or math.inf
    columns: tuple[str, ...] | None = None
    space: str = "standardized"

    def __post_init__(self):
        if self.p not in (1, 2, math.inf):
            raise SchemaError(f"l_norm p must be 1, 2 or inf, got {self.p!r}")
        if self.space not in ("standardized", "raw"):
            raise SchemaError(f"l_norm space must be 'standardized' or 'raw', got {self.space!r}")
        if self.columns is not None:
            object.__setattr__(self, "columns", tuple(self.columns))


@dataclass(frozen=True)
class LabelAbsDiff:
    """Absolute difference of a numeric label column between endpoints."""

    column: str


@dataclass(frozen=True)
class FeatureDelta:
    """Absolute change of one feature column, in raw (original) units."""

    column: str


@dataclass(frozen=True)
class KdeNll:
    """Destination's normalized negative log-likelihood under a Gaussian KDE.

    `bandwidth` is either the string "scott" or a positive float.
    """

    bandwidth: str | float = "scott"


CriterionKind = LNorm | LabelAbsDiff | FeatureDelta | KdeNll


@dataclass(frozen=True)
class Criterion:
    name: str
    kind: CriterionKind
    aggregation: Aggregation


@dataclass(frozen=True)
class CostSpec:
    """Ordered list of the k criteria; the unit of agreement for all cost math."""

    criteria: tuple[Criterion, ...]

    def __post_init__(self):
        criteria = tuple(self.criteria)
        object.__setattr__(self, "criteria", criteria)
        if len(criteria) < 1:
            raise SchemaError("a cost spec needs at least one criterion")
        names = [c.name for c in criteria]
        if len(set(names)) != len(names):
            raise SchemaError(f"criterion names must be unique, got {names}")

    @property
    def k(self) -> int:
        return len(self.criteria)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.criteria)

    @property
    def aggregations(self) -> tuple[Aggregation, ...]:
        return tuple(c.aggregation for c in self.criteria)


def combine(path_cost: CostVector, edge_cost: CostVector, spec: CostSpec) -> CostVector:
    """Extend a path cost by one edge, componentwise per each criterion's aggregation."""
    if len(path_cost) != spec.k or len(edge_cost) != spec.k:
        raise ContractViolation(
            f"cost length mismatch: path {len(path_cost)}, edge {len(edge_cost)}, spec k={spec.k}"
        )
    out = []
    for p, e, agg in zip(path_cost, edge_cost, spec.aggregations):
        out.append(p + e if agg is Aggregation.SUM else max(p, e))
    return CostVector(tuple(out))


# ---------------------------------------------------------------------------
# Pareto tables


@dataclass(frozen=True, order=True)
class PredLink:
    """Back-reference to the table entry a cost was extended from.

    `hop` names the iteration whose table the link indexes into, so links
    stay resolvable even after later iterations shuffle or prune entries.
    """

    vertex: str
    hop: int
    index: int


@dataclass(frozen=True)
class TableEntry:
    """One non-dominated cost vector plus the links needed to rebuild paths."""

    cost: CostVector
    predecessors: tuple[PredLink, ...] = ()
    first_reached_hop: int = 0


@dataclass(frozen=True)
class ParetoTable:
    """Mutually non-dominated entries, lexicographically sorted by cost."""

    entries: tuple[TableEntry, ...] = ()

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def costs(self) -> tuple[CostVector, ...]:
        return tuple(e.cost for e in self.entries)


def is_pareto_set(entries: Iterable[CostVector]) -> bool:
    """True iff no vector in the collection dominates another."""
    vs = list(entries)
    for i, a in enumerate(vs):
        for j, b in enumerate(vs):
            if i != j and dominates(a, b):
                return False
    return True


def prune(candidates: Sequence[TableEntry], *, keep_dominated: bool = False) -> ParetoTable:
    """Collapse duplicates and drop dominated entries, returning a sorted table.

    Entries with identical cost vectors merge into one entry holding the
    union of their predecessor links and the smallest first_reached_hop.
    For two criteria a single sorted scan suffices (the second component
    only has to beat the best seen so far); for any other k a sort-then-
    filter pass is used. `keep_dominated` skips the dominance filter and is
    only meant for fault-injection harness runs.
    """
    entries = list(candidates)
    if not entries:
        return ParetoTable(())
    k = len(entries[0].cost)
    for e in entries:
        if len(e.cost) != k:
            raise ContractViolation("prune candidates must share one cost length")

    merged: dict[tuple, TableEntry] = {}
    for e in entries:
        key = tuple(e.cost)
        prev = merged.get(key)
        if prev is None:
            merged[key] = e
        else:
            merged[key] = TableEntry(
                cost=prev.cost,
                predecessors=tuple(sorted(set(prev.predecessors) | set(e.predecessors))),
                first_reached_hop=min(prev.first_reached_hop, e.first_reached_hop),
            )
    ordered = [merged[key] for key in sorted(merged)]
    for i, e in enumerate(ordered):
        if e.predecessors != tuple(sorted(set(e.predecessors))):
            ordered[i] = TableEntry(e.cost, tuple(sorted(set(e.predecessors))), e.first_reached_hop)

    if keep_dominated:
        return ParetoTable(tuple(ordered))

    if k == 2:
        kept = []
        best_second = math.inf
        for e in ordered:
            if e.cost[1] < best_second:
                kept.append(e)
                best_second = e.cost[1]
    else:
        # Lexicographic order puts every dominator before what it dominates.
        kept = []
        for e in ordered:
            if not any(dominates(f.cost, e.cost) for f in kept):
                kept.append(e)
    return ParetoTable(tuple(kept))


def apply_table_cap(table: ParetoTable, cap: int | None) -> ParetoTable:
    """Downsample an oversized table at equal index intervals.

    Keeps both extreme points of the first-criterion sort. Using a cap
    forfeits frontier exactness; it exists purely as a size control.
    """
    if cap is None or len(table) <= cap:
        return table
    if cap < 1:
        raise ContractViolation(f"table cap must be >= 1, got {cap}")
    n = len(table)
    if cap == 1:
        picks = [0]
    else:
        picks = [round(i * (n - 1) / (cap - 1)) for i in range(cap)]
    return ParetoTable(tuple(table.entries[i] for i in picks))


# ---------------------------------------------------------------------------
# Config parsing


_AGGREGATIONS = {"sum": Aggregation.SUM, "max": Aggregation.MAX}


def _parse_kind(entry: dict) -> CriterionKind:
    kind = entry.get("kind")
    if kind == "l_norm":
        p = entry.get("p", 2)
        if p == "inf":
            p = math.inf
        columns = entry.get("columns")
        return LNorm(p=p, columns=tuple(columns) if columns else None,
                     space=entry.get("space", "standardized"))
    if kind == "label_abs_diff":
        return LabelAbsDiff(column=_required(entry, "column"))
    if kind == "feature_delta":
        return FeatureDelta(column=_required(entry, "column"))
    if kind == "kde_nll":
        return KdeNll(bandwidth=entry.get("bandwidth", "scott"))
    raise SchemaError(f"unknown criterion kind {kind!r}")


def _required(entry: dict, key: str) -> str:
    if key not in entry:
        raise SchemaError(f"criterion {entry.get('name', '?')!r} is missing key {key!r}")
    return entry[key]


def cost_spec_from_dict(doc: dict) -> CostSpec:
    """Build a CostSpec from a parsed config mapping (see cost config format)."""
    raw = doc.get("criterion")
    if not raw:
        raise SchemaError("cost config must declare at least one [[criterion]] block")
    criteria = []
    for entry in raw:
        name = entry.get("name")
        if not name:
            raise SchemaError("every criterion needs a name")
        agg = entry.get("aggregation")
        if agg not in _AGGREGATIONS:
            raise SchemaError(f"criterion {name!r}: aggregation must be 'sum' or 'max', got {agg!r}")
        criteria.append(Criterion(name=name, kind=_parse_kind(entry), aggregation=_AGGREGATIONS[agg]))
    return CostSpec(tuple(criteria))


def load_cost_spec(path) -> CostSpec:
    """Parse a TOML cost config file into a CostSpec."""
    with open(path, "rb") as fh:
        try:
            doc = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise SchemaError(f"cost config {path}: {exc}") from exc
    return cost_spec_from_dict(doc)


def kind_to_dict(kind: CriterionKind) -> dict:
    """JSON-friendly encoding of a criterion kind (inverse of _parse_kind)."""
    if isinstance(kind, LNorm):
        return {
            "kind": "l_norm",
            "p": "inf" if kind.p == math.inf else kind.p,
            "columns": list(kind.columns) if kind.columns else None,
            "space": kind.space,
        }
    if isinstance(kind, LabelAbsDiff):
        return {"kind": "label_abs_diff", "column": kind.column}
    if isinstance(kind, FeatureDelta):
        return {"kind": "feature_delta", "column": kind.column}
    if isinstance(kind, KdeNll):
        return {"kind": "kde_nll", "bandwidth": kind.bandwidth}
    raise SchemaError(f"unknown kind {kind!r}")


def spec_to_dict(spec: CostSpec) -> dict:
    return {
        "criterion": [
            {"name": c.name, "aggregation": c.aggregation.value, **kind_to_dict(c.kind)}
            for c in spec.criteria
        ]
    }
