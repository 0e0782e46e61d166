"""Pareto-optimal recourse paths on actionability graphs under multi-cost criteria."""

from .costs import (
    Aggregation,
    CostSpec,
    CostVector,
    Criterion,
    CriterionKind,
    FeatureDelta,
    KdeNll,
    LNorm,
    LabelAbsDiff,
    ParetoTable,
    PredLink,
    TableEntry,
    apply_table_cap,
    combine,
    dominates,
    is_pareto_set,
    load_cost_spec,
    prune,
)
from .dataset import (
    Classifier,
    ColumnSpec,
    Dataset,
    FeatureSchema,
    Instance,
    LabelColumn,
    LinearScorer,
    Mutability,
    Role,
    classify,
    destandardize,
    kde_nll_scores,
    load_csv,
    load_schema,
    standardize,
)
from .epsnet import (
    NetSample,
    ShrinkConfig,
    ShrinkReport,
    is_shrinkable,
    replay_shrink,
    sample_epsilon_net,
    sample_size,
    shrink_graph,
    verify_ball_net,
)
from .errors import ContractViolation, DataError, RecourseError, SchemaError
from .graph import (
    ActionPredicate,
    ActionabilityGraph,
    build_knn_graph,
    evaluate_costs,
    graph_from_json,
    graph_stats,
    graph_to_json,
    predicate_from_schema,
)
from .search import (
    RecoursePath,
    SearchResult,
    backtrack,
    brute_force_oracle,
    costs_match,
    merge_tables,
    pareto_shortest_paths,
    path_cost,
    recourse_frontier,
    update,
)

__version__ = "0.1.0"
