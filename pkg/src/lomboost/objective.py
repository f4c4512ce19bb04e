"""Split quality objective for binary partitions of a multiclass node.

A binary hypothesis at a tree node routes each example left or right.
Writing ``pi`` for the class proportions at the node, ``P_i`` for the
fraction of class ``i`` routed right and ``beta`` for the marginal
fraction routed right, the split objective is

    J = 2 * sum_i pi_i * |beta - P_i|

J lives in [0, 1].  J = 1 exactly when the split is maximally pure
(every ``P_i`` is 0 or 1) and maximally balanced (``beta`` = 0.5), and
larger J values force the split to be both more balanced and more pure:
``beta`` is confined to an interval shrinking around 0.5 and the purity
factor ``alpha = sum_i pi_i * min(P_i, 1 - P_i)`` is capped by a bound
decreasing to 0.  This module implements the objective, both factors
and the two analytic bounds.  All functions are pure and thread-safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Absolute tolerance for "sums to one" and "marginal matches conditionals"
# checks.  Inputs are validated, never silently renormalized: a violation
# indicates a bookkeeping bug upstream.
CONSISTENCY_TOL = 1e-9


def _as_unit_vector(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float, copy=True)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-d vector")
    # Negated comparison so NaN entries fail the check too.
    if not (arr.min() >= 0.0 and arr.max() <= 1.0):
        raise ValueError(f"{name} entries must lie in [0, 1] and be finite")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class ClassDistribution:
    """Probability vector over the class labels at a tree node.

    Entries are proportions in [0, 1] and must sum to one within
    ``CONSISTENCY_TOL``.  Zero-mass classes are permitted; they simply
    contribute nothing to the objective or to any criterion.
    """

    probs: np.ndarray

    def __post_init__(self):
        probs = _as_unit_vector(self.probs, "probs")
        if abs(float(probs.sum()) - 1.0) > CONSISTENCY_TOL:
            raise ValueError(f"probs must sum to 1, got {float(probs.sum()):.12g}")
        object.__setattr__(self, "probs", probs)

    def __len__(self) -> int:
        return self.probs.size

    @classmethod
    def uniform(cls, num_classes: int) -> "ClassDistribution":
        return cls(np.full(num_classes, 1.0 / num_classes))

    @classmethod
    def point_mass(cls, index: int, num_classes: int) -> "ClassDistribution":
        probs = np.zeros(num_classes)
        probs[index] = 1.0
        return cls(probs)


@dataclass(frozen=True)
class SplitStatistics:
    """Routing statistics of a hypothesis at a node.

    ``marginal`` is the overall fraction routed right; ``conditionals[i]``
    is the fraction of class ``i`` routed right.  When built from a class
    distribution via :meth:`from_conditionals` the marginal is the mixture
    of the conditionals, and consumers that rely on that identity check it.
    """

    marginal: float
    conditionals: np.ndarray

    def __post_init__(self):
        cond = _as_unit_vector(self.conditionals, "conditionals")
        marginal = float(self.marginal)
        if not 0.0 <= marginal <= 1.0:
            raise ValueError(f"marginal must lie in [0, 1], got {marginal}")
        object.__setattr__(self, "marginal", marginal)
        object.__setattr__(self, "conditionals", cond)

    def __len__(self) -> int:
        return self.conditionals.size

    @classmethod
    def from_conditionals(cls, dist: ClassDistribution, conditionals) -> "SplitStatistics":
        cond = np.asarray(conditionals, dtype=float)
        if cond.ndim != 1 or cond.size != len(dist):
            raise ValueError(
                f"length mismatch: {len(dist)} classes vs {cond.size} conditionals"
            )
        return cls(float(np.dot(dist.probs, cond)), cond)

    def complement(self) -> "SplitStatistics":
        """Statistics of the same hypothesis with left and right swapped."""
        return SplitStatistics(1.0 - self.marginal, 1.0 - self.conditionals)


def _check_paired(dist: ClassDistribution, stats: SplitStatistics) -> None:
    if len(dist) != len(stats):
        raise ValueError(
            f"length mismatch: {len(dist)} classes vs {len(stats)} conditionals"
        )
    if len(dist) < 2:
        raise ValueError("at least 2 classes are required")


def _check_consistent(dist: ClassDistribution, stats: SplitStatistics) -> None:
    mixture = float(np.dot(dist.probs, stats.conditionals))
    if abs(mixture - stats.marginal) > CONSISTENCY_TOL:
        raise ValueError(
            "inconsistent statistics: marginal "
            f"{stats.marginal:.12g} != mixture of conditionals {mixture:.12g}"
        )


def objective_value(dist: ClassDistribution, stats: SplitStatistics) -> float:
    """Balanced-and-pure split objective, 2 * sum_i pi_i * |beta - P_i|.

    Rejects statistics whose marginal is not the mixture of the
    conditionals under ``dist`` (beyond ``CONSISTENCY_TOL``).
    """
    _check_paired(dist, stats)
    _check_consistent(dist, stats)
    return float(2.0 * np.dot(dist.probs, np.abs(stats.marginal - stats.conditionals)))


def purity_factor(dist: ClassDistribution, stats: SplitStatistics) -> float:
    """Expected minority routing mass, sum_i pi_i * min(P_i, 1 - P_i).

    0 means every class is routed entirely to one side; 0.5 means every
    class is split evenly.
    """
    _check_paired(dist, stats)
    cond = stats.conditionals
    return float(np.dot(dist.probs, np.minimum(cond, 1.0 - cond)))


def balancing_factor(stats: SplitStatistics) -> float:
    """Marginal probability of routing right; 0.5 is maximally balanced."""
    return stats.marginal


def balance_interval(objective: float) -> tuple[float, float]:
    """Interval guaranteed to contain the balancing factor at objective J.

    Returns (0.5 * (1 - sqrt(1 - J)), 0.5 * (1 + sqrt(1 - J))); the
    interval shrinks to the single point 0.5 as J approaches 1.
    """
    if not 0.0 <= objective <= 1.0:
        raise ValueError(f"objective must lie in [0, 1], got {objective}")
    # Clamp before the square root to absorb floating-point excess.
    root = math.sqrt(min(max(1.0 - objective, 0.0), 1.0))
    return 0.5 * (1.0 - root), 0.5 * (1.0 + root)


def purity_upper_bound(objective: float, balance: float) -> float:
    """Upper bound on the purity factor: min((2 - J) / (4 * beta) - beta, 0.5).

    The bound holds with ``balance`` taken as the minority routing side:
    the purity factor and the objective are invariant under swapping left
    and right while the balancing factor flips to its complement, so
    callers pass min(beta, 1 - beta) when the hypothesis may route the
    majority right.  Degenerate splits (``balance`` 0 or 1) are rejected;
    callers handle them separately.
    """
    if not 0.0 <= objective <= 1.0:
        raise ValueError(f"objective must lie in [0, 1], got {objective}")
    if not 0.0 < balance < 1.0:
        raise ValueError(f"balance must lie strictly inside (0, 1), got {balance}")
    return min((2.0 - objective) / (4.0 * balance) - balance, 0.5)
