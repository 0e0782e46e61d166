"""Tabular dataset loading, standardization, classification, and KDE scores.

A Dataset is immutable once loaded; standardize/destandardize return new
datasets, so concurrent readers never see partial state.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, replace

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .errors import ContractViolation, DataError, SchemaError


class Role(enum.Enum):
    FEATURE = "feature"
    LABEL = "label"
    ID = "id"


class Mutability(enum.Enum):
    FREE = "free"
    IMMUTABLE = "immutable"
    MONOTONE_UP = "monotone_up"
    MONOTONE_DOWN = "monotone_down"


# Order constraints available on label columns ("strict_up" is the digit
# scenario: the label must strictly increase across every edge).
LABEL_ORDERS = ("strict_up", "strict_down", "up", "down")


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    role: Role = Role.FEATURE
    mutability: Mutability = Mutability.FREE
    standardize: bool = False
    order: str | None = None

    def __post_init__(self):
        if self.order is not None and self.order not in LABEL_ORDERS:
            raise SchemaError(f"column {self.name!r}: unknown order {self.order!r}")
        if self.order is not None and self.role is not Role.LABEL:
            raise SchemaError(f"column {self.name!r}: order constraints apply to label columns")


@dataclass(frozen=True)
class FeatureSchema:
    """Per-column roles, mutability, and standardization flags."""

    columns: tuple[ColumnSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise SchemaError(f"duplicate column names in schema: {names}")
        ids = [c for c in self.columns if c.role is Role.ID]
        if len(ids) > 1:
            raise SchemaError("at most one id column allowed")
        if not any(c.role is Role.FEATURE for c in self.columns):
            raise SchemaError("schema needs at least one feature column")

    @property
    def feature_columns(self) -> tuple[ColumnSpec, ...]:
        return tuple(c for c in self.columns if c.role is Role.FEATURE)

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.feature_columns)

    @property
    def label_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns if c.role is Role.LABEL)

    @property
    def id_column(self) -> str | None:
        for c in self.columns:
            if c.role is Role.ID:
                return c.name
        return None

    def column(self, name: str) -> ColumnSpec:
        for c in self.columns:
            if c.name == name:
                return c
        raise SchemaError(f"schema has no column {name!r}")

    def feature_index(self, name: str) -> int:
        for i, c in enumerate(self.feature_columns):
            if c.name == name:
                return i
        raise SchemaError(f"{name!r} is not a feature column")


@dataclass(frozen=True)
class Instance:
    """One dataset row: an opaque id, a feature vector, and raw label values."""

    id: str
    features: tuple[float, ...]
    labels: dict

    def label_number(self, column: str) -> float:
        try:
            return float(self.labels[column])
        except KeyError:
            raise SchemaError(f"instance {self.id!r} has no label column {column!r}")
        except (TypeError, ValueError):
            raise DataError(
                f"label {column!r} of instance {self.id!r} is not numeric: {self.labels[column]!r}"
            )


@dataclass(frozen=True)
class Standardization:
    """Per-column (mean, std) pairs used to map features to z-scores.

    Population convention: std uses 1/n, not 1/(n-1).
    """

    columns: tuple[str, ...]
    means: tuple[float, ...]
    stds: tuple[float, ...]


@dataclass(frozen=True)
class Dataset:
    rows: tuple[Instance, ...]
    schema: FeatureSchema
    standardization: Standardization | None = None

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(r.id for r in self.rows)

    def by_id(self, vid: str) -> Instance:
        try:
            return self._index[vid]
        except AttributeError:
            object.__setattr__(self, "_index", {r.id: r for r in self.rows})
            return self._index[vid]

    def feature_matrix(self) -> np.ndarray:
        """Features as stored (standardized when standardize() was applied)."""
        return np.array([r.features for r in self.rows], dtype=float)

    def raw_feature_matrix(self) -> np.ndarray:
        """Features mapped back to original units."""
        x = self.feature_matrix()
        if self.standardization is None:
            return x
        names = self.schema.feature_names
        for col, mean, std in zip(*_std_fields(self.standardization)):
            j = names.index(col)
            x[:, j] = x[:, j] * std + mean
        return x


def _std_fields(s: Standardization):
    return s.columns, s.means, s.stds


# ---------------------------------------------------------------------------
# Classifier


@dataclass(frozen=True)
class LabelColumn:
    """h(x) = 1 iff the named label column equals the positive value."""

    column: str
    positive: str


@dataclass(frozen=True)
class LinearScorer:
    """h(x) = 1 iff w . features + bias >= threshold."""

    weights: tuple[float, ...]
    bias: float = 0.0
    threshold: float = 0.0


Classifier = LabelColumn | LinearScorer


def classify(h: Classifier, x: Instance) -> bool:
    """Deterministic boolean decision for one instance."""
    if isinstance(h, LabelColumn):
        if h.column not in x.labels:
            raise SchemaError(f"instance {x.id!r} has no label column {h.column!r}")
        return str(x.labels[h.column]) == str(h.positive)
    if isinstance(h, LinearScorer):
        if len(h.weights) != len(x.features):
            raise ContractViolation(
                f"scorer expects {len(h.weights)} features, instance has {len(x.features)}"
            )
        score = sum(w * f for w, f in zip(h.weights, x.features)) + h.bias
        return score >= h.threshold
    raise ContractViolation(f"unknown classifier {h!r}")


# ---------------------------------------------------------------------------
# Loading and standardization


def load_csv(path, schema: FeatureSchema) -> Dataset:
    """Load an RFC-4180 CSV with a header row into a Dataset.

    Rows keep file order. A malformed row (non-numeric feature value) is
    rejected with its 1-based data row number. Columns present in the file
    but absent from the schema are ignored.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: file is empty")
        missing = [c.name for c in schema.columns if c.name not in header]
        if missing:
            raise SchemaError(f"{path}: header is missing schema columns {missing}")
        col_pos = {name: header.index(name) for name in (c.name for c in schema.columns)}

        rows = []
        id_col = schema.id_column
        for rownum, record in enumerate(reader, start=1):
            if len(record) != len(header):
                raise DataError(f"{path}: row {rownum} has {len(record)} fields, expected {len(header)}")
            feats = []
            for c in schema.feature_columns:
                raw = record[col_pos[c.name]]
                try:
                    feats.append(float(raw))
                except ValueError:
                    raise DataError(
                        f"{path}: row {rownum}: non-numeric value {raw!r} in feature column {c.name!r}"
                    )
            labels = {name: record[col_pos[name]] for name in schema.label_names}
            vid = record[col_pos[id_col]] if id_col else None
            rows.append((vid, tuple(feats), labels))
        if not rows:
            raise DataError(f"{path}: no data rows")

    pad = max(3, len(str(len(rows) - 1)))
    instances = []
    for i, (vid, feats, labels) in enumerate(rows):
        instances.append(Instance(id=vid if vid is not None else f"{i:0{pad}d}",
                                  features=feats, labels=labels))
    ids = [r.id for r in instances]
    if len(set(ids)) != len(ids):
        raise DataError(f"{path}: duplicate instance ids")
    return Dataset(rows=tuple(instances), schema=schema)


def standardize(data: Dataset) -> Dataset:
    """Map each flagged feature column to (x - mean) / std, population std.

    The stats are stored on the returned dataset so destandardize() can
    invert the mapping. Standardizing an already standardized dataset
    composes the transforms, so the stored stats always map back to the
    original raw units.
    """
    if not data.rows:
        raise DataError("cannot standardize an empty dataset")
    flagged = [c for c in data.schema.feature_columns if c.standardize]
    if not flagged:
        return data
    x = data.feature_matrix()
    names = data.schema.feature_names
    cols, means, stds = [], [], []
    for c in flagged:
        j = names.index(c.name)
        mean = float(np.mean(x[:, j]))
        std = float(np.std(x[:, j]))  # population (1/n) convention
        if std == 0.0:
            raise DataError(f"column {c.name!r} is flagged standardize but has zero variance")
        x[:, j] = (x[:, j] - mean) / std
        cols.append(c.name)
        means.append(mean)
        stds.append(std)

    stats = Standardization(tuple(cols), tuple(means), tuple(stds))
    if data.standardization is not None:
        stats = _compose(data.standardization, stats)
    rows = tuple(
        replace(r, features=tuple(float(v) for v in x[i]))
        for i, r in enumerate(data.rows)
    )
    return Dataset(rows=rows, schema=data.schema, standardization=stats)


def _compose(outer: Standardization, inner: Standardization) -> Standardization:
    """Combined stats for standardizing already-standardized data."""
    cols, means, stds = [], [], []
    o = {c: (m, s) for c, m, s in zip(outer.columns, outer.means, outer.stds)}
    for c, m2, s2 in zip(inner.columns, inner.means, inner.stds):
        m1, s1 = o.get(c, (0.0, 1.0))
        # x'' = ((x - m1)/s1 - m2)/s2  =>  x = x'' * (s1 s2) + (m1 + m2 s1)
        cols.append(c)
        means.append(m1 + m2 * s1)
        stds.append(s1 * s2)
    for c, (m1, s1) in o.items():
        if c not in inner.columns:
            cols.append(c)
            means.append(m1)
            stds.append(s1)
    return Standardization(tuple(cols), tuple(means), tuple(stds))


def destandardize(data: Dataset) -> Dataset:
    """Inverse of standardize(); returns features in original units."""
    if data.standardization is None:
        return data
    x = data.raw_feature_matrix()
    rows = tuple(
        replace(r, features=tuple(float(v) for v in x[i]))
        for i, r in enumerate(data.rows)
    )
    return Dataset(rows=rows, schema=data.schema, standardization=None)


# ---------------------------------------------------------------------------
# Kernel density scores


def kde_nll_scores(data: Dataset, bandwidth: str | float = "scott") -> np.ndarray:
    """Leave-one-out Gaussian-KDE negative log-likelihood per instance.

    Scores are min-max normalized to [0, 100]: 0 marks the densest point,
    100 the most isolated one. Lower is denser. Bandwidth is per dimension:
    Scott's factor n**(-1/(d+4)) times the column's population std (columns
    with zero spread fall back to the bare factor), or a fixed positive
    float applied to every dimension.

    The point's own kernel is excluded from its density, so a score never
    rewards a point merely for existing.
    """
    n = len(data)
    if n < 2:
        raise DataError("KDE scores need at least 2 instances")
    x = data.feature_matrix()
    d = x.shape[1]

    if bandwidth == "scott":
        factor = n ** (-1.0 / (d + 4))
        stds = np.std(x, axis=0)
        h = np.where(stds > 0, stds * factor, factor)
    else:
        try:
            bw = float(bandwidth)
        except (TypeError, ValueError):
            raise DataError(f"bandwidth must be 'scott' or a positive number, got {bandwidth!r}")
        if not math.isfinite(bw) or bw <= 0:
            raise DataError(f"degenerate bandwidth {bandwidth!r}")
        h = np.full(d, bw)

    z = x / h
    sq = np.sum(z * z, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (z @ z.T)
    np.fill_diagonal(d2, np.inf)
    d2 = np.maximum(d2, 0.0)

    # log density via the log-sum-exp trick; constant terms are shared.
    logk = -0.5 * d2
    m = np.max(logk, axis=1)
    logsum = m + np.log(np.sum(np.exp(logk - m[:, None]), axis=1))
    lognorm = math.log(n - 1) + d * 0.5 * math.log(2.0 * math.pi) + float(np.sum(np.log(h)))
    nll = -(logsum - lognorm)

    lo, hi = float(np.min(nll)), float(np.max(nll))
    if hi - lo <= 0.0:
        return np.zeros(n)
    return (nll - lo) / (hi - lo) * 100.0


# ---------------------------------------------------------------------------
# Schema config parsing


_RESERVED_SECTIONS = ("classifier",)


def schema_from_dict(doc: dict) -> tuple[FeatureSchema, Classifier | None]:
    """Build (FeatureSchema, optional Classifier) from a parsed config mapping."""
    columns = []
    for name, body in doc.items():
        if name in _RESERVED_SECTIONS:
            continue
        if not isinstance(body, dict):
            raise SchemaError(f"schema section {name!r} must be a table")
        try:
            role = Role(body.get("role", "feature"))
        except ValueError:
            raise SchemaError(f"column {name!r}: unknown role {body.get('role')!r}")
        try:
            mutability = Mutability(body.get("mutability", "free"))
        except ValueError:
            raise SchemaError(f"column {name!r}: unknown mutability {body.get('mutability')!r}")
        columns.append(ColumnSpec(
            name=name,
            role=role,
            mutability=mutability,
            standardize=bool(body.get("standardize", False)),
            order=body.get("order"),
        ))
    schema = FeatureSchema(tuple(columns))

    classifier = None
    if "classifier" in doc:
        body = doc["classifier"]
        kind = body.get("kind")
        if kind == "label_column":
            classifier = LabelColumn(column=body["column"], positive=str(body["positive"]))
            if classifier.column not in schema.label_names:
                raise SchemaError(f"classifier column {classifier.column!r} is not a label column")
        elif kind == "linear":
            classifier = LinearScorer(
                weights=tuple(float(w) for w in body["weights"]),
                bias=float(body.get("bias", 0.0)),
                threshold=float(body.get("threshold", 0.0)),
            )
        else:
            raise SchemaError(f"unknown classifier kind {kind!r}")
    return schema, classifier


def load_schema(path) -> tuple[FeatureSchema, Classifier | None]:
    """Parse a TOML schema file: one table per column, optional [classifier]."""
    with open(path, "rb") as fh:
        try:
            doc = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise SchemaError(f"schema config {path}: {exc}") from exc
    return schema_from_dict(doc)
