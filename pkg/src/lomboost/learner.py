"""Online top-down tree construction.

Training repeatedly splits the heaviest splittable leaf: the leaf's
linear router is trained by per-example SGD against targets chosen to
widen the gap between each class's routing mean and the marginal mean
(the direction that increases the split objective), the leaf's examples
are partitioned by the trained router, and the tree-level criteria are
re-measured.  A split is committed only when both children receive at
least one example; otherwise the leaf is marked unsplittable and the
next-heaviest leaf is tried.  Every committed split must decrease every
criterion (splitting replaces a leaf impurity by a mixture of its
children's, and the impurities are concave); this is asserted after
each split.

Training mutates a single tree and is single-writer; the returned tree
is a finished snapshot, safe to read concurrently.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .bounds import empirical_gamma, eta_constants, recurrence_envelope
from .criteria import (
    GINI,
    SHANNON,
    Criterion,
    criterion_bounds,
    modified_gini,
    tree_criterion,
)
from .data import Dataset
from .objective import ClassDistribution, SplitStatistics, objective_value
from .tree import NodeModel, Tree

# Criteria are non-increasing along a training run up to float noise.
MONOTONE_TOL = 1e-9


@dataclass(frozen=True)
class TrainConfig:
    """Knobs for one training run; identical config and data reproduce
    the run bit for bit."""

    max_splits: int = 31
    epochs_per_split: int = 20
    learning_rate: float = 0.5
    seed: int = 1
    criterion_C: float = 4.0
    min_node_examples: int = 2

    def __post_init__(self):
        if self.max_splits < 0:
            raise ValueError(f"max_splits must be non-negative, got {self.max_splits}")
        if self.epochs_per_split < 1:
            raise ValueError(
                f"epochs_per_split must be positive, got {self.epochs_per_split}"
            )
        if not self.learning_rate > 0.0:
            raise ValueError(
                f"learning_rate must be positive, got {self.learning_rate}"
            )
        if not self.criterion_C > 2.0:
            raise ValueError(f"criterion_C must exceed 2, got {self.criterion_C}")
        if self.min_node_examples < 1:
            raise ValueError(
                f"min_node_examples must be positive, got {self.min_node_examples}"
            )


@dataclass(frozen=True)
class TraceRecord:
    """Snapshot taken after split ``t`` (``t`` = 0 is the pre-split tree).

    ``j_value`` and ``gamma_hat`` describe the committed split; the
    ``g_*`` fields are the tree-level entropy, gini and mgini criteria of
    the whole tree at that point.
    """

    t: int
    node_id: int
    j_value: float
    gamma_hat: float
    g_e: float
    g_g: float
    g_m: float
    test_error: float | None = None


def split_next(tree: Tree, min_examples: int = 2) -> int | None:
    """Heaviest splittable leaf, ties broken by smallest node id.

    A leaf is splittable when it is not marked unsplittable, holds at
    least ``min_examples`` examples and at least two distinct labels.
    Returns None when no leaf qualifies, which ends training cleanly.
    """
    best_id = None
    best_n = -1
    for leaf_id in tree.leaf_ids():
        node = tree.nodes[leaf_id]
        if node.unsplittable or node.n_examples < min_examples:
            continue
        if np.count_nonzero(node.class_counts) < 2:
            continue
        if node.n_examples > best_n:
            best_id, best_n = leaf_id, node.n_examples
    return best_id


class _Rows:
    """Per-example sparse rows as flat arrays (0-based feature indices)."""

    def __init__(self, data: Dataset):
        self.labels = np.array([ex.label - 1 for ex in data.examples], dtype=np.intp)
        self.index = []
        self.value = []
        self.sq_norm = np.empty(len(data))
        for i, ex in enumerate(data.examples):
            items = sorted(ex.features.items())
            idx = np.array([j - 1 for j, _ in items], dtype=np.intp)
            val = np.array([v for _, v in items], dtype=float)
            self.index.append(idx)
            self.value.append(val)
            self.sq_norm[i] = float(val @ val)

    def __len__(self) -> int:
        return self.labels.size

    def scores(self, rows: np.ndarray, weights: np.ndarray, bias: float) -> np.ndarray:
        out = np.empty(rows.size)
        for pos, i in enumerate(rows):
            out[pos] = weights[self.index[i]] @ self.value[i] + bias
        return out


def _train_node(
    rows: np.ndarray,
    data: _Rows,
    num_classes: int,
    num_features: int,
    config: TrainConfig,
    rng: np.random.Generator,
) -> tuple[np.ndarray, float, NodeModel]:
    """SGD passes over one leaf's examples; same update rule as
    :func:`lomboost.tree.node_update`, vectorized per example."""
    weights = np.zeros(num_features)
    bias = 0.0
    class_count = np.zeros(num_classes, dtype=np.int64)
    class_mean = np.zeros(num_classes)
    marginal_mean = 0.0
    total = 0
    lr = config.learning_rate
    diverged = False
    for _ in range(config.epochs_per_split):
        if diverged:
            break
        for pos in rng.permutation(rows.size):
            i = rows[pos]
            idx = data.index[i]
            val = data.value[i]
            label = data.labels[i]
            score = weights[idx] @ val + bias
            # Oversized learning rates (the top of the sweep grid) can make
            # the updates diverge; abandon the node before overflow, which
            # fails the split attempt and disqualifies the rate.
            if not abs(score) < 1e150:
                diverged = True
                break
            if total == 0:
                target = 1.0
            else:
                target = 1.0 if class_mean[label] >= marginal_mean else -1.0
            step = lr * (score - target)
            weights[idx] -= step * val
            bias -= step
            after = score - step * (data.sq_norm[i] + 1.0)
            indicator = 1.0 if after > 0.0 else 0.0
            class_count[label] += 1
            class_mean[label] += (indicator - class_mean[label]) / class_count[label]
            total += 1
            marginal_mean += (indicator - marginal_mean) / total
    seen = np.nonzero(class_count)[0]
    model = NodeModel(
        weights={int(j) + 1: float(w) for j, w in enumerate(weights) if w != 0.0},
        bias=float(bias),
        class_counts={int(y) + 1: int(class_count[y]) for y in seen},
        class_means={int(y) + 1: float(class_mean[y]) for y in seen},
        marginal_mean=float(marginal_mean),
        total_count=int(total),
    )
    return weights, bias, model


def _criteria(tree: Tree, kinds: tuple[Criterion, ...]) -> tuple[float, ...]:
    leaves = tree.weighted_leaves()
    return tuple(tree_criterion(leaves, kind) for kind in kinds)


def _majority_error(
    tree: Tree, eval_rows: dict[int, np.ndarray], eval_labels: np.ndarray
) -> float:
    total = eval_labels.size
    correct = 0
    for leaf_id, rows in eval_rows.items():
        if rows.size == 0:
            continue
        majority = tree.nodes[leaf_id].majority_label() - 1
        correct += int(np.sum(eval_labels[rows] == majority))
    return 1.0 - correct / total


def train(
    data: Dataset, config: TrainConfig, eval_data: Dataset | None = None
) -> tuple[Tree, list[TraceRecord]]:
    """Grow a tree by heaviest-leaf splitting; returns it with its trace.

    The trace starts with a record for the initial single-leaf tree and
    gains one record per committed split.  When ``eval_data`` is given,
    each record carries the majority-vote error on it.  A dataset with a
    single observed class yields the trivial root tree and a warning.
    """
    if len(data) == 0:
        raise ValueError("cannot train on an empty dataset")
    if eval_data is not None and eval_data.num_classes > data.num_classes:
        raise ValueError("eval_data has labels outside the training label space")
    k = data.num_classes
    rows_data = _Rows(data)
    counts = np.bincount(rows_data.labels, minlength=k)
    tree = Tree.root_only(counts, data.num_features)
    leaf_rows: dict[int, np.ndarray] = {0: np.arange(len(data), dtype=np.intp)}

    eval_rows_data = None
    eval_rows: dict[int, np.ndarray] = {}
    if eval_data is not None and len(eval_data) > 0:
        eval_rows_data = _Rows(eval_data)
        eval_rows = {0: np.arange(len(eval_data), dtype=np.intp)}

    kinds = (SHANNON, GINI, modified_gini(config.criterion_C))
    criteria_now = _criteria(tree, kinds)
    error_now = (
        _majority_error(tree, eval_rows, eval_rows_data.labels)
        if eval_rows_data is not None
        else None
    )
    records = [
        TraceRecord(0, tree.root_id, 0.0, 0.0, *criteria_now, test_error=error_now)
    ]

    if np.count_nonzero(counts) < 2:
        warnings.warn("dataset has a single observed class; returning the root-only tree")
        return tree, records

    rng = np.random.default_rng(config.seed)
    committed = 0
    while committed < config.max_splits:
        leaf_id = split_next(tree, config.min_node_examples)
        if leaf_id is None:
            break
        rows = leaf_rows[leaf_id]
        weights, bias, model = _train_node(
            rows, rows_data, k, data.num_features, config, rng
        )
        go_right = rows_data.scores(rows, weights, bias) > 0.0
        if go_right.all() or not go_right.any():
            # Degenerate split: one child would be empty.  Roll back.
            tree.nodes[leaf_id].unsplittable = True
            continue
        left_rows = rows[~go_right]
        right_rows = rows[go_right]
        parent_counts = tree.nodes[leaf_id].class_counts
        right_counts = np.bincount(rows_data.labels[right_rows], minlength=k)
        left_counts = parent_counts - right_counts
        left_id, right_id = tree.attach_children(
            leaf_id, model, left_counts, right_counts
        )
        del leaf_rows[leaf_id]
        leaf_rows[left_id] = left_rows
        leaf_rows[right_id] = right_rows
        if eval_rows_data is not None:
            pending = eval_rows.pop(leaf_id, np.empty(0, dtype=np.intp))
            eval_right = eval_rows_data.scores(pending, weights, bias) > 0.0
            eval_rows[left_id] = pending[~eval_right]
            eval_rows[right_id] = pending[eval_right]
        committed += 1

        parent_dist = ClassDistribution(parent_counts / parent_counts.sum())
        conditionals = np.divide(
            right_counts,
            parent_counts,
            out=np.zeros(k),
            where=parent_counts > 0,
        )
        stats = SplitStatistics.from_conditionals(parent_dist, conditionals)
        j_value = objective_value(parent_dist, stats)
        gamma_hat = empirical_gamma(parent_dist, stats)

        criteria_prev = criteria_now
        criteria_now = _criteria(tree, kinds)
        heaviest = max(w for _, w in tree.leaf_weights())
        for kind, before, after in zip(kinds, criteria_prev, criteria_now):
            if after > before + MONOTONE_TOL:
                raise RuntimeError(
                    f"criterion {kind} increased across split {committed}: "
                    f"{before:.12g} -> {after:.12g}"
                )
            lo, hi = criterion_bounds(committed, k, heaviest, kind)
            if not lo - MONOTONE_TOL <= after <= hi + MONOTONE_TOL:
                raise RuntimeError(
                    f"criterion {kind} left its guaranteed range at split "
                    f"{committed}: {after:.12g} not in [{lo:.12g}, {hi:.12g}]"
                )
        error_now = (
            _majority_error(tree, eval_rows, eval_rows_data.labels)
            if eval_rows_data is not None
            else None
        )
        records.append(
            TraceRecord(
                committed,
                leaf_id,
                j_value,
                gamma_hat,
                *criteria_now,
                test_error=error_now,
            )
        )
    return tree, records


def normalize_trace(records: list[TraceRecord]) -> list[TraceRecord]:
    """Scale each criterion series (and the error series) by its first value.

    The first record maps to 1.0 in every scaled series; a series whose
    first value is 0 is reported as identically 0.
    """
    if not records:
        raise ValueError("empty trace")

    def scaler(first: float):
        if first == 0.0:
            return lambda value: 0.0
        return lambda value: value / first

    scale_e = scaler(records[0].g_e)
    scale_g = scaler(records[0].g_g)
    scale_m = scaler(records[0].g_m)
    first_error = records[0].test_error
    scale_err = scaler(first_error) if first_error is not None else None
    out = []
    for record in records:
        error = record.test_error
        if scale_err is not None and error is not None:
            error = scale_err(error)
        out.append(
            replace(
                record,
                g_e=scale_e(record.g_e),
                g_g=scale_g(record.g_g),
                g_m=scale_m(record.g_m),
                test_error=error,
            )
        )
    return out


def check_boosting_envelope(
    records: list[TraceRecord], num_classes: int, tol: float = 1e-9
) -> bool:
    """Whether the realized entropy trace sits under its guaranteed envelope.

    Uses the run's own worst split advantage gamma0 = min over splits of
    gamma_hat: with eta = eta_e(gamma0, k), every record at t splits must
    satisfy g_e <= g_1 * exp(-eta^2 * log2(t) / 32), where g_1 is the
    entropy criterion after the first split.
    """
    splits = [r for r in records if r.t >= 1]
    if len(splits) <= 1:
        return True
    g1 = splits[0].g_e
    gamma0 = min(r.gamma_hat for r in splits)
    eta = eta_constants(gamma0, num_classes).eta_e if gamma0 > 0.0 else 0.0
    return all(
        r.g_e <= recurrence_envelope(g1, eta, r.t - 1) + tol for r in splits
    )
