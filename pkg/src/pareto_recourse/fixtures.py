"""Deterministic desk-scale fixture datasets shipped with the repo.

Three fixtures back the offline test and acceptance runs:

* a four-vertex diamond graph with hand-picked edge costs,
* a 256-point synthetic digit-vector table (10 classes on an arc, so
  bigger label jumps travel shorter total distance),
* a two-cluster table with a discrete progress level, sized for the
  sampling experiments.

Run ``python -m pareto_recourse.fixtures <dir>`` to (re)write the files.
"""

from __future__ import annotations

import csv
import math
import sys
from pathlib import Path

import numpy as np

from .costs import Aggregation, CostSpec, CostVector, Criterion, LNorm
from .graph import ActionabilityGraph, graph_to_json

DIGITS_SEED = 7
TWO_CLUSTER_SEED = 11


def diamond_graph() -> ActionabilityGraph:
    """s -> {a, b} -> t with costs chosen so both s-t paths are incomparable."""
    edges = {
        ("s", "a"): CostVector((1, 4)),
        ("s", "b"): CostVector((3, 1)),
        ("a", "t"): CostVector((1, 4)),
        ("b", "t"): CostVector((3, 1)),
    }
    positive = {"s": False, "a": False, "b": False, "t": True}
    out = {vid: {} for vid in positive}
    for (u, v), cost in edges.items():
        out[u][v] = cost
    return ActionabilityGraph(positive=positive, out_edges=out, k=2)


def diamond_spec() -> CostSpec:
    """Two Sum criteria, matching the diamond's embedded cost spec."""
    return CostSpec((
        Criterion("effort", LNorm(p=2), Aggregation.SUM),
        Criterion("time", LNorm(p=2), Aggregation.SUM),
    ))


DIAMOND_COSTS_TOML = """\
[[criterion]]
name = "effort"
kind = "l_norm"
p = 2
aggregation = "sum"

[[criterion]]
name = "time"
kind = "l_norm"
p = 2
aggregation = "sum"
"""


def digit_vector_table(n: int = 256, dims: int = 16, n_classes: int = 10,
                       seed: int = DIGITS_SEED):
    """Synthetic flattened digit vectors: one cluster per class on an arc.

    Class prototypes sit on a circular arc, so the straight-line distance
    between classes grows sublinearly with the label gap; paths that jump
    more labels per step cover less total distance, which is what creates
    a non-trivial frontier between max-label-step and total-L2 criteria.
    """
    rng = np.random.default_rng(seed)
    arc_step = math.pi / 12
    radius = 2.0
    noise = 0.45

    raw = rng.normal(size=(dims, 2))
    q, _ = np.linalg.qr(raw)
    basis = q[:, :2].T  # 2 x dims, orthonormal rows

    labels = np.repeat(np.arange(n_classes), math.ceil(n / n_classes))[:n]
    rng.shuffle(labels)
    angles = labels * arc_step
    proto2 = radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    x = proto2 @ basis + rng.normal(scale=noise, size=(n, dims))

    # Put a canonical "2" first so the fixture has a stable source row.
    two_rows = np.flatnonzero(labels == 2)
    center = radius * np.array([math.cos(2 * arc_step), math.sin(2 * arc_step)]) @ basis
    anchor = two_rows[int(np.argmin(np.linalg.norm(x[two_rows] - center, axis=1)))]
    order = [anchor] + [i for i in range(n) if i != anchor]
    return x[order], labels[order]


def write_digit_fixture(directory: Path, **kwargs) -> None:
    x, labels = digit_vector_table(**kwargs)
    n, dims = x.shape
    with open(directory / "digits.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"px{j:02d}" for j in range(dims)] + ["label"])
        for i in range(n):
            writer.writerow([f"{v:.6f}" for v in x[i]] + [int(labels[i])])

    cols = "\n\n".join(
        f"[px{j:02d}]\nrole = \"feature\"\nstandardize = true" for j in range(dims)
    )
    schema = f"""{cols}

[label]
role = "label"
order = "strict_up"

[classifier]
kind = "label_column"
column = "label"
positive = "8"
"""
    (directory / "digits_schema.toml").write_text(schema, encoding="utf-8")
    (directory / "digits_costs.toml").write_text(
        """\
[[criterion]]
name = "label_step"
kind = "label_abs_diff"
column = "label"
aggregation = "max"

[[criterion]]
name = "travel_l2"
kind = "l_norm"
p = 2
aggregation = "sum"
""",
        encoding="utf-8",
    )


def two_cluster_table(n: int = 1280, dims: int = 10, seed: int = TWO_CLUSTER_SEED):
    """Two heavy clusters joined by a ladder of sparser stepping-stone sites.

    Sites for levels 0..7 sit on a gentle arc in a 2-D subspace of `dims`
    dimensions; levels 0-1 and 6-7 carry most of the mass (the two
    clusters), the bridge levels are thin. Isotropic noise keeps
    nearest-neighbor distances nearly size-independent, so KNN graphs on
    subsamples of any size route through the same ladder, just with fewer
    stepping stones to choose from. Level 6+ points are the positives.
    """
    rng = np.random.default_rng(seed)
    n_levels = 8
    weights = np.array([0.20, 0.14, 0.07, 0.07, 0.07, 0.07, 0.14, 0.24])
    arc_step = math.pi / 10
    radius = 2.5
    noise = 0.5

    raw = rng.normal(size=(dims, 2))
    q, _ = np.linalg.qr(raw)
    basis = q[:, :2].T

    counts = np.floor(weights * n).astype(int)
    counts[-1] += n - counts.sum()
    level = np.repeat(np.arange(n_levels), counts)
    rng.shuffle(level)
    angles = level * arc_step
    proto2 = radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    x = proto2 @ basis + rng.normal(scale=noise, size=(n, dims))
    outcome = (level >= 6).astype(int)

    # Stable source: a canonical level-0 point leads the table.
    zeros = np.flatnonzero(level == 0)
    center = radius * np.array([1.0, 0.0]) @ basis
    anchor = zeros[int(np.argmin(np.linalg.norm(x[zeros] - center, axis=1)))]
    order = [anchor] + [i for i in range(n) if i != anchor]
    return x[order], level[order], outcome[order]


def write_two_cluster_fixture(directory: Path, **kwargs) -> None:
    x, level, outcome = two_cluster_table(**kwargs)
    n, dims = x.shape
    with open(directory / "two_cluster.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"f{j:02d}" for j in range(dims)] + ["level", "outcome"])
        for i in range(n):
            writer.writerow([f"{v:.6f}" for v in x[i]] + [int(level[i]), int(outcome[i])])

    cols = "\n\n".join(
        f"[f{j:02d}]\nrole = \"feature\"\nstandardize = true" for j in range(dims)
    )
    (directory / "two_cluster_schema.toml").write_text(
        f"""{cols}

[level]
role = "label"
order = "up"

[outcome]
role = "label"

[classifier]
kind = "label_column"
column = "outcome"
positive = "1"
""",
        encoding="utf-8",
    )
    (directory / "two_cluster_costs.toml").write_text(
        """\
[[criterion]]
name = "level_step"
kind = "label_abs_diff"
column = "level"
aggregation = "max"

[[criterion]]
name = "travel_l2"
kind = "l_norm"
p = 2
aggregation = "sum"
""",
        encoding="utf-8",
    )


def write_all(directory) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "diamond.json").write_text(
        graph_to_json(diamond_graph(), diamond_spec()), encoding="utf-8"
    )
    (directory / "diamond_costs.toml").write_text(DIAMOND_COSTS_TOML, encoding="utf-8")
    write_digit_fixture(directory)
    write_two_cluster_fixture(directory)


if __name__ == "__main__":
    write_all(sys.argv[1] if len(sys.argv) > 1 else "fixtures")
