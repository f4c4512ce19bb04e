"""Impurity criteria over tree leaves and their per-split decrease.

Three leaf impurities are supported, each summed over classes:

    entropy   sum_i p_i * ln(1 / p_i)          (0 * ln(1/0) := 0)
    gini      sum_i p_i * (1 - p_i)
    mgini     sum_i sqrt(p_i * (c - p_i))      with constant c > 2

A tree-level criterion is the leaf-weight average of leaf impurities.
Splitting a leaf replaces its impurity by the mixture of its children's,
so by concavity every split decreases the tree criterion; the decrease
is a Jensen gap and is lower-bounded through strong concavity:

    entropy   gap >= 0.5 * beta * (1 - beta) * ||p_left - p_right||_1^2
    gini      gap >=       beta * (1 - beta) * ||p_left - p_right||_2^2
    mgini     gap >= ((c - 2)^2 / c^3) * beta * (1 - beta) * ||p_left - p_right||_2^2

All functions are pure and thread-safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .objective import CONSISTENCY_TOL, ClassDistribution

# Jensen gaps are non-negative in exact arithmetic; gaps within this
# tolerance of zero are floating-point residue and are clamped.
_GAP_EPS = 1e-12


@dataclass(frozen=True)
class Criterion:
    """Tag selecting one of the impurity criteria.

    ``name`` is one of ``"entropy"``, ``"gini"``, ``"mgini"``; the
    constant ``c`` is required for ``mgini`` and must exceed 2 strictly.
    """

    name: str
    c: float | None = None

    def __post_init__(self):
        if self.name not in ("entropy", "gini", "mgini"):
            raise ValueError(f"unknown criterion {self.name!r}")
        if self.name == "mgini":
            if self.c is None:
                raise ValueError("mgini requires a constant c")
            object.__setattr__(self, "c", float(self.c))
            if not self.c > 2.0:
                raise ValueError(f"mgini constant must exceed 2, got {self.c}")
        elif self.c is not None:
            raise ValueError(f"criterion {self.name!r} takes no constant")

    def __str__(self) -> str:
        if self.name == "mgini":
            return f"mgini(c={self.c:g})"
        return self.name


SHANNON = Criterion("entropy")
GINI = Criterion("gini")

# Default mgini constant: must exceed 2; 4 keeps the strong-concavity
# factor (c - 2)^2 / c^3 = 1/16 well away from the c -> 2 degeneracy.
DEFAULT_MGINI_C = 4.0


def modified_gini(c: float = DEFAULT_MGINI_C) -> Criterion:
    return Criterion("mgini", c)


def _entropy(probs: np.ndarray) -> float:
    positive = probs[probs > 0.0]
    return float(-np.dot(positive, np.log(positive)))


def leaf_criterion(dist: ClassDistribution, kind: Criterion) -> float:
    """Impurity of a single leaf distribution under ``kind``."""
    probs = dist.probs
    if kind.name == "entropy":
        return _entropy(probs)
    if kind.name == "gini":
        return float(np.dot(probs, 1.0 - probs))
    return float(np.sum(np.sqrt(probs * (kind.c - probs))))


def tree_criterion(
    leaves: list[tuple[float, ClassDistribution]], kind: Criterion
) -> float:
    """Leaf-weight average of leaf impurities.

    ``leaves`` is a list of (weight, distribution) pairs; weights must be
    non-negative and sum to one within tolerance.
    """
    if not leaves:
        raise ValueError("at least one leaf is required")
    weights = np.array([w for w, _ in leaves], dtype=float)
    if weights.min() < 0.0:
        raise ValueError("leaf weights must be non-negative")
    if abs(float(weights.sum()) - 1.0) > CONSISTENCY_TOL:
        raise ValueError(f"leaf weights must sum to 1, got {float(weights.sum()):.12g}")
    return float(sum(w * leaf_criterion(d, kind) for w, d in leaves))


def criterion_bounds(
    splits: int, num_classes: int, max_weight: float, kind: Criterion
) -> tuple[float, float]:
    """Range guaranteed for the tree criterion of any tree.

    ``splits`` is the number of internal nodes (the tree has splits + 1
    leaves), ``max_weight`` the weight of the heaviest leaf.  Entropy and
    gini are bounded below by 0; mgini is bounded below by sqrt(c - 1),
    attained when every leaf is a point mass.
    """
    if splits < 1:
        raise ValueError(f"splits must be a positive integer, got {splits}")
    if num_classes < 2:
        raise ValueError(f"at least 2 classes are required, got {num_classes}")
    if not 0.0 < max_weight <= 1.0:
        raise ValueError(f"max_weight must lie in (0, 1], got {max_weight}")
    leaves = splits + 1
    if kind.name == "entropy":
        return 0.0, leaves * max_weight * math.log(num_classes)
    if kind.name == "gini":
        return 0.0, leaves * max_weight * (1.0 - 1.0 / num_classes)
    return (
        math.sqrt(kind.c - 1.0),
        leaves * max_weight * math.sqrt(num_classes * kind.c - 1.0),
    )


@dataclass(frozen=True)
class SplitDecomposition:
    """A node distribution split into left and right child distributions.

    ``beta`` is the fraction routed right, so the parent must equal
    (1 - beta) * left + beta * right entrywise within tolerance.  The
    degenerate values beta = 0 and beta = 1 are accepted so that the
    split gap can be defined by continuity (it is 0 there); the learner
    never commits such splits.
    """

    parent: ClassDistribution
    beta: float
    left: ClassDistribution
    right: ClassDistribution

    def __post_init__(self):
        if not len(self.parent) == len(self.left) == len(self.right):
            raise ValueError("parent and children must have equal length")
        beta = float(self.beta)
        if not 0.0 <= beta <= 1.0:
            raise ValueError(f"beta must lie in [0, 1], got {beta}")
        object.__setattr__(self, "beta", beta)
        mixture = (1.0 - beta) * self.left.probs + beta * self.right.probs
        error = float(np.max(np.abs(self.parent.probs - mixture)))
        if error > CONSISTENCY_TOL:
            raise ValueError(
                f"parent is not the beta-mixture of the children (max error {error:.3g})"
            )

    @classmethod
    def from_children(
        cls, beta: float, left: ClassDistribution, right: ClassDistribution
    ) -> "SplitDecomposition":
        if not 0.0 <= beta <= 1.0:
            raise ValueError(f"beta must lie in [0, 1], got {beta}")
        parent = ClassDistribution((1.0 - beta) * left.probs + beta * right.probs)
        return cls(parent, beta, left, right)


def split_delta(split: SplitDecomposition, kind: Criterion) -> float:
    """Node-local criterion decrease caused by the split (Jensen gap).

    Returns leaf(parent) - (1 - beta) * leaf(left) - beta * leaf(right),
    without any node-weight factor; callers multiply by the node weight
    to obtain the tree-level decrease.  Non-negative by concavity.
    """
    beta = split.beta
    if beta in (0.0, 1.0):
        return 0.0
    gap = (
        leaf_criterion(split.parent, kind)
        - (1.0 - beta) * leaf_criterion(split.left, kind)
        - beta * leaf_criterion(split.right, kind)
    )
    if gap < 0.0 and gap > -_GAP_EPS:
        return 0.0
    return gap


def strong_concavity_lower_bound(split: SplitDecomposition, kind: Criterion) -> float:
    """Lower bound on :func:`split_delta` from strong concavity.

    Entropy is strongly concave with modulus 1 in the l1 norm; gini with
    modulus 2 in the l2 norm; mgini with modulus 2 * (c - 2)^2 / c^3 in
    the l2 norm.  Each modulus sigma yields the guaranteed gap
    (sigma / 2) * beta * (1 - beta) * ||left - right||^2.
    """
    beta = split.beta
    scale = beta * (1.0 - beta)
    diff = split.left.probs - split.right.probs
    if kind.name == "entropy":
        norm1 = float(np.sum(np.abs(diff)))
        return 0.5 * scale * norm1 * norm1
    sq_norm2 = float(np.dot(diff, diff))
    if kind.name == "gini":
        return scale * sq_norm2
    c = kind.c
    return (c - 2.0) ** 2 / c**3 * scale * sq_norm2


def objective_to_delta_bound(
    objective: float,
    advantage: float,
    criterion_value: float,
    splits: int,
    num_classes: int,
    kind: Criterion,
) -> float:
    """Guaranteed tree-level criterion decrease of the next split.

    ``advantage`` is the weak-learning advantage gamma in (0, 0.5]: every
    committed split has objective >= 2 * gamma and balancing factor in
    [gamma, 1 - gamma].  ``criterion_value`` is the current tree-level
    criterion and ``splits`` the current number of internal nodes.  Under
    heaviest-leaf scheduling the next split decreases the criterion by at
    least the returned amount.
    """
    if not 0.0 < advantage <= 0.5:
        raise ValueError(f"advantage must lie in (0, 0.5], got {advantage}")
    if objective < 2.0 * advantage - 1e-12:
        raise ValueError(
            f"objective {objective} is below the weak-learning floor {2.0 * advantage}"
        )
    if criterion_value < 0.0:
        raise ValueError(f"criterion_value must be non-negative, got {criterion_value}")
    if splits < 1:
        raise ValueError(f"splits must be a positive integer, got {splits}")
    if num_classes < 2:
        raise ValueError(f"at least 2 classes are required, got {num_classes}")
    shrink = advantage**2 / (1.0 - advantage) ** 2 / (splits + 1)
    if kind.name == "entropy":
        return shrink * criterion_value / (2.0 * math.log(num_classes))
    if kind.name == "gini":
        return shrink * criterion_value / (num_classes - 1)
    c = kind.c
    stiffness = c**3 / (c - 2.0) ** 2
    return shrink * criterion_value / (
        stiffness * num_classes * math.sqrt(num_classes * c - 1.0)
    )
