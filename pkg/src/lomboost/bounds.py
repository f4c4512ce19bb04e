"""Split budgets sufficient to drive a tree criterion below a target.

Under the weak hypothesis assumption (every node admits a split with
objective >= 2 * gamma, gamma <= min(beta, 1 - beta)), heaviest-leaf
splitting shrinks each tree criterion at a guaranteed geometric-ish rate

    G_{t+1} <= G_1 * exp(-eta^2 * log2(t + 1) / 32)

with a criterion-specific rate constant eta.  Inverting the envelope
gives a closed-form budget: t + 1 >= (G_1 / alpha)^(32 / (eta^2 * log2(e)))
splits suffice to reach criterion value alpha.  The budget exponent is
logarithmic in the class count for entropy, linear for gini, and roughly
k^(3/2) for mgini; for moderate class counts the gini and mgini budgets
overflow any integer type, so budgets are computed in log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .criteria import Criterion, criterion_bounds
from .objective import ClassDistribution, SplitStatistics, objective_value

# Budgets whose log2 exceeds this are not materialized as integers.
_MAX_EXACT_LOG2 = 63.0

_LOG2_E = math.log2(math.e)


def admissible_range(kind: Criterion, num_classes: int) -> tuple[float, float]:
    """Target range for which a split budget is defined.

    Equals the criterion range of a two-leaf tree with unit max weight:
    no tree can start above the high end, and mgini can never be pushed
    below sqrt(c - 1).
    """
    return criterion_bounds(1, num_classes, 1.0, kind)


@dataclass(frozen=True)
class EtaConstants:
    """Envelope rate constants for the three criteria at one (gamma, k, c)."""

    eta_e: float
    eta_g: float
    eta_m: float


def eta_constants(advantage: float, num_classes: int, c: float = 4.0) -> EtaConstants:
    """Rate constants eta for entropy, gini and mgini.

    eta_e = 2 * sqrt(2) * g / ((1 - g) * sqrt(ln k))
    eta_g = 4 * g / ((1 - g) * sqrt(k - 1))
    eta_m = 4 * g / ((1 - g) * sqrt(c^3 / (c - 2)^2 * k * sqrt(k * c - 1)))
    """
    if not 0.0 < advantage <= 0.5:
        raise ValueError(f"advantage must lie in (0, 0.5], got {advantage}")
    if num_classes < 2:
        raise ValueError(f"at least 2 classes are required, got {num_classes}")
    if not c > 2.0:
        raise ValueError(f"mgini constant must exceed 2, got {c}")
    ratio = advantage / (1.0 - advantage)
    stiffness = c**3 / (c - 2.0) ** 2
    return EtaConstants(
        eta_e=2.0 * math.sqrt(2.0) * ratio / math.sqrt(math.log(num_classes)),
        eta_g=4.0 * ratio / math.sqrt(num_classes - 1),
        eta_m=4.0
        * ratio
        / math.sqrt(stiffness * num_classes * math.sqrt(num_classes * c - 1.0)),
    )


def _eta_for(kind: Criterion, advantage: float, num_classes: int) -> float:
    etas = eta_constants(advantage, num_classes, kind.c if kind.c is not None else 4.0)
    return {"entropy": etas.eta_e, "gini": etas.eta_g, "mgini": etas.eta_m}[kind.name]


@dataclass(frozen=True)
class BoundQuery:
    """A split-budget question: criterion, class count, advantage, target."""

    kind: Criterion
    num_classes: int
    advantage: float
    target: float

    def __post_init__(self):
        if self.num_classes < 2:
            raise ValueError(f"at least 2 classes are required, got {self.num_classes}")
        if not 0.0 < self.advantage <= 0.5:
            raise ValueError(f"advantage must lie in (0, 0.5], got {self.advantage}")
        lo, hi = admissible_range(self.kind, self.num_classes)
        # Tiny relative slack so targets written as e.g. 2 * math.log(k)
        # are accepted at the interval ends.
        slack = 1e-12 * max(1.0, hi)
        if self.target < lo - slack or self.target > hi + slack:
            raise ValueError(
                f"target {self.target:.9g} outside admissible range "
                f"[{lo:.9g}, {hi:.9g}] for {self.kind}"
            )


@dataclass(frozen=True)
class SplitBudget:
    """A split count, possibly too large to materialize.

    ``log2`` is always meaningful: log2 of the budget, infinite when the
    target is unreachable (target 0 for entropy or gini).  ``splits`` is
    the exact integer when the budget fits comfortably in 63 bits, else
    None ("astronomical").
    """

    log2: float
    splits: int | None

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.log2)

    @property
    def is_astronomical(self) -> bool:
        return self.splits is None and not self.is_infinite

    def __str__(self) -> str:
        if self.is_infinite:
            return "infinite"
        if self.splits is None:
            return f"astronomical: log2(t) = {self.log2:.9g}"
        return str(self.splits)


def splits_required(query: BoundQuery) -> SplitBudget:
    """Number of splits sufficient to push the tree criterion to the target.

    Computed in log space as ceil((G_1 / target)^(32 / (eta^2 * log2 e)))
    with G_1 the worst-case starting value (the admissible-range high
    end), minimum 1.  A target of 0 yields an infinite budget.
    """
    lo, hi = admissible_range(query.kind, query.num_classes)
    if query.target <= 0.0:
        return SplitBudget(math.inf, None)
    eta = _eta_for(query.kind, query.advantage, query.num_classes)
    exponent = 32.0 / (eta * eta * _LOG2_E)
    log2_budget = exponent * math.log2(hi / query.target)
    if log2_budget <= 0.0:
        return SplitBudget(0.0, 1)
    if log2_budget > _MAX_EXACT_LOG2:
        return SplitBudget(log2_budget, None)
    splits = max(1, math.ceil(2.0**log2_budget))
    return SplitBudget(math.log2(splits), splits)


def recurrence_envelope(initial_value: float, eta: float, splits: int) -> float:
    """Guaranteed criterion value after ``splits`` further splits.

    Returns initial_value * exp(-eta^2 * log2(splits + 1) / 32): the
    envelope the realized criterion trace must stay under when every
    committed split meets the weak-learning advantage behind ``eta``.
    Monotone non-increasing in ``splits``.
    """
    if initial_value < 0.0:
        raise ValueError(f"initial_value must be non-negative, got {initial_value}")
    return initial_value * math.exp(-eta * eta * math.log2(splits + 1) / 32.0)


def empirical_gamma(dist: ClassDistribution, stats: SplitStatistics) -> float:
    """Realized weak-learning advantage of a split: min(J / 2, beta, 1 - beta).

    The objective contributes J / 2; the balancing factor caps the
    advantage because the assumption requires gamma <= min(beta, 1 - beta).
    Always in [0, 0.5].
    """
    half_objective = 0.5 * objective_value(dist, stats)
    return min(half_objective, stats.marginal, 1.0 - stats.marginal)
