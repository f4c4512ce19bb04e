"""Multiclass decision trees grown by maximizing a balanced-and-pure
split objective, with tree-level impurity tracking, closed-form split
budgets and randomized verification of every guarantee."""

__version__ = "0.1.0"

from .bounds import (
    BoundQuery,
    EtaConstants,
    SplitBudget,
    admissible_range,
    empirical_gamma,
    eta_constants,
    recurrence_envelope,
    splits_required,
)
from .criteria import (
    GINI,
    SHANNON,
    Criterion,
    SplitDecomposition,
    criterion_bounds,
    leaf_criterion,
    modified_gini,
    objective_to_delta_bound,
    split_delta,
    strong_concavity_lower_bound,
    tree_criterion,
)
from .data import (
    DataFormatError,
    Dataset,
    Example,
    SplitSpec,
    parse_sparse_file,
    split_dataset,
    synthetic_hierarchical,
    write_sparse_file,
)
from .learner import (
    TraceRecord,
    TrainConfig,
    check_boosting_envelope,
    normalize_trace,
    split_next,
    train,
)
from .objective import (
    ClassDistribution,
    SplitStatistics,
    balance_interval,
    balancing_factor,
    objective_value,
    purity_factor,
    purity_upper_bound,
)
from .tree import (
    NodeModel,
    Tree,
    TreeNode,
    dump_tree,
    evaluate,
    load_tree,
    node_update,
    predict,
    route,
    routing_target,
)

__all__ = [
    "BoundQuery",
    "ClassDistribution",
    "Criterion",
    "DataFormatError",
    "Dataset",
    "EtaConstants",
    "Example",
    "GINI",
    "NodeModel",
    "SHANNON",
    "SplitBudget",
    "SplitDecomposition",
    "SplitSpec",
    "SplitStatistics",
    "TraceRecord",
    "TrainConfig",
    "Tree",
    "TreeNode",
    "admissible_range",
    "balance_interval",
    "balancing_factor",
    "check_boosting_envelope",
    "criterion_bounds",
    "dump_tree",
    "empirical_gamma",
    "eta_constants",
    "evaluate",
    "leaf_criterion",
    "load_tree",
    "modified_gini",
    "node_update",
    "normalize_trace",
    "objective_to_delta_bound",
    "objective_value",
    "parse_sparse_file",
    "predict",
    "purity_factor",
    "purity_upper_bound",
    "recurrence_envelope",
    "route",
    "routing_target",
    "split_dataset",
    "split_delta",
    "split_next",
    "splits_required",
    "strong_concavity_lower_bound",
    "synthetic_hierarchical",
    "train",
    "tree_criterion",
    "write_sparse_file",
]
