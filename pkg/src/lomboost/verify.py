"""Randomized numerical verification of the library's guarantees.

Each suite draws seeded random instances and checks one family of
claims, reported under the claim numbering used throughout this
project:

    Lemma1      objective range and its extreme case
    Lemma2      balancing factor confined to the balance interval
    Lemma3      purity factor under its upper bound
    Lemma4/6/7  tree-criterion range for entropy / gini / mgini
    Corollary1  mean inequality behind the gini and mgini ranges
    Lemma8/10/12  strong-concavity floor under the split gap
    Theorem1/2/3  split budgets: envelope consistency, monotonicity,
                  and budget-exponent scaling in the class count

Suites return :class:`VerifyResult` values carrying a serialized
counterexample on failure; they never raise on a property violation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import BoundQuery, admissible_range, eta_constants, splits_required
from .criteria import (
    GINI,
    SHANNON,
    Criterion,
    SplitDecomposition,
    criterion_bounds,
    leaf_criterion,
    modified_gini,
    split_delta,
    strong_concavity_lower_bound,
    tree_criterion,
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

DEFAULT_TRIALS = 100_000
DEFAULT_CLASS_COUNTS = (2, 3, 5, 10, 50)
DEFAULT_MGINI_CONSTANTS = (2.5, 3.0, 4.0, 10.0)

# Floating-point guard for inequalities that are tight in exact arithmetic.
_FLOAT_SLACK = 1e-12
# Tolerance for the purity bound, and for deciding that an objective value
# is at its extreme and must certify purity and balance.
_PURITY_TOL = 1e-9
_EXTREME_TOL = 1e-6


@dataclass
class VerifyResult:
    name: str
    trials: int
    passed: bool
    counterexample: dict | None = None

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{self.name}: {status} ({self.trials} trials)"


class _Recorder:
    """Collects the first counterexample per property."""

    def __init__(self, names: list[str]):
        self.failures: dict[str, dict] = {}
        self.names = names

    def record(self, name: str, **payload) -> None:
        if name not in self.failures:
            self.failures[name] = {
                key: (value.tolist() if isinstance(value, np.ndarray) else value)
                for key, value in payload.items()
            }

    def results(self, trials: int) -> list[VerifyResult]:
        return [
            VerifyResult(name, trials, name not in self.failures,
                         self.failures.get(name))
            for name in self.names
        ]


def _pure_split(rng: np.random.Generator, k: int, mass: float):
    """Maximally pure instance routing class mass ``mass`` right."""
    size = int(rng.integers(1, k))
    side = rng.permutation(k)[:size]
    probs = np.empty(k)
    probs[side] = rng.dirichlet(np.ones(size)) * mass
    mask = np.ones(k, dtype=bool)
    mask[side] = False
    probs[mask] = rng.dirichlet(np.ones(k - size)) * (1.0 - mass)
    conditionals = np.zeros(k)
    conditionals[side] = 1.0
    return probs, conditionals


class _InstanceSampler:
    """Streams (distribution, statistics, variant) triples for one k.

    Most draws are generic (Dirichlet class masses, uniform conditionals,
    drawn in batches).  Three targeted families probe the objective's
    extreme: maximally pure and balanced splits (which must reach 1),
    maximally pure but unbalanced splits, and splits forced to leave a
    heavy class visibly impure (which must both stay clear of 1).
    """

    BATCH = 4096

    def __init__(self, rng: np.random.Generator, k: int):
        self.rng = rng
        self.k = k
        self.alpha = np.ones(k)
        self.count = 0
        self.pos = self.BATCH

    def _generic(self):
        if self.pos >= self.BATCH:
            self.batch_probs = self.rng.dirichlet(self.alpha, size=self.BATCH)
            self.batch_cond = self.rng.uniform(0.0, 1.0, size=(self.BATCH, self.k))
            self.pos = 0
        row = self.pos
        self.pos += 1
        return self.batch_probs[row], self.batch_cond[row]

    def draw(self):
        variant = self.count % 10
        self.count += 1
        rng = self.rng
        if variant >= 3:
            probs, conditionals = self._generic()
        elif variant == 0:
            probs, conditionals = _pure_split(rng, self.k, 0.5)
        elif variant == 1:
            mass = float(rng.uniform(0.05, 0.45))
            if rng.integers(2):
                mass = 1.0 - mass
            probs, conditionals = _pure_split(rng, self.k, mass)
        else:
            # Impure: give the heaviest class at least 0.1 mass and an
            # interior conditional, which caps the objective below 1.
            probs, conditionals = (arr.copy() for arr in self._generic())
            heavy = int(np.argmax(probs))
            probs *= 0.9
            probs[heavy] += 0.1
            conditionals[heavy] = rng.uniform(0.2, 0.8)
        dist = ClassDistribution(probs)
        return dist, SplitStatistics.from_conditionals(dist, conditionals), variant


def objective_suite(
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    class_counts: tuple[int, ...] = DEFAULT_CLASS_COUNTS,
) -> list[VerifyResult]:
    """Check the objective range, the balance interval and the purity bound."""
    rng = np.random.default_rng(seed)
    recorder = _Recorder(["Lemma1", "Lemma2", "Lemma3"])
    samplers = {k: _InstanceSampler(rng, int(k)) for k in class_counts}
    for trial in range(trials):
        k = int(class_counts[trial % len(class_counts)])
        dist, stats, variant = samplers[k].draw()
        objective = objective_value(dist, stats)
        beta = balancing_factor(stats)
        purity = purity_factor(dist, stats)

        if not -_FLOAT_SLACK <= objective <= 1.0 + _FLOAT_SLACK:
            recorder.record(
                "Lemma1", violation="objective outside [0, 1]",
                k=k, pi=dist.probs, conditionals=stats.conditionals,
                objective=objective,
            )
        if variant == 0 and abs(objective - 1.0) > _EXTREME_TOL:
            recorder.record(
                "Lemma1", violation="pure balanced split did not reach objective 1",
                k=k, pi=dist.probs, conditionals=stats.conditionals,
                objective=objective,
            )
        if variant == 1 and objective >= 1.0 - _EXTREME_TOL:
            recorder.record(
                "Lemma1", violation="unbalanced split reached objective 1",
                k=k, pi=dist.probs, conditionals=stats.conditionals,
                objective=objective, beta=beta,
            )
        if variant == 2 and objective >= 1.0 - _EXTREME_TOL:
            recorder.record(
                "Lemma1", violation="impure split reached objective 1",
                k=k, pi=dist.probs, conditionals=stats.conditionals,
                objective=objective, beta=beta,
            )
        if objective >= 1.0 - _PURITY_TOL:
            cond = stats.conditionals
            pure = bool(np.all(np.minimum(cond, 1.0 - cond) <= _EXTREME_TOL))
            if not pure or abs(beta - 0.5) > _EXTREME_TOL:
                recorder.record(
                    "Lemma1", violation="objective 1 without purity and balance",
                    k=k, pi=dist.probs, conditionals=stats.conditionals,
                    objective=objective, beta=beta,
                )

        lo, hi = balance_interval(min(objective, 1.0))
        if not lo - _FLOAT_SLACK <= beta <= hi + _FLOAT_SLACK:
            recorder.record(
                "Lemma2", violation="balancing factor outside the interval",
                k=k, pi=dist.probs, conditionals=stats.conditionals,
                objective=objective, beta=beta, interval=[lo, hi],
            )

        if 0.0 < beta < 1.0:
            # The bound applies to the minority routing side (see
            # purity_upper_bound); alpha and J are swap-invariant.
            bound = purity_upper_bound(min(objective, 1.0), min(beta, 1.0 - beta))
            if purity > bound + _PURITY_TOL:
                recorder.record(
                    "Lemma3", violation="purity factor above its bound",
                    k=k, pi=dist.probs, conditionals=stats.conditionals,
                    objective=objective, beta=beta, purity=purity, bound=bound,
                )
    return recorder.results(trials)


def concavity_suite(
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    mgini_constants: tuple[float, ...] = DEFAULT_MGINI_CONSTANTS,
    modulus_scale: float = 1.0,
) -> list[VerifyResult]:
    """Check split gaps against the strong-concavity floors.

    ``modulus_scale`` inflates the floors; it exists as a failure-path
    hook so the counterexample machinery itself can be exercised.
    """
    rng = np.random.default_rng(seed)
    recorder = _Recorder(["Lemma8", "Lemma10", "Lemma12"])
    checks = [("Lemma8", SHANNON), ("Lemma10", GINI)]
    checks.extend(("Lemma12", modified_gini(c)) for c in mgini_constants)
    class_counts = rng.integers(2, 51, size=trials)
    betas = rng.uniform(0.01, 0.99, size=trials)
    for trial in range(trials):
        k = int(class_counts[trial])
        beta = float(betas[trial])
        pair = rng.dirichlet(np.ones(k), size=2)
        left = ClassDistribution(pair[0])
        right = ClassDistribution(pair[1])
        split = SplitDecomposition.from_children(beta, left, right)
        for name, kind in checks:
            gap = split_delta(split, kind)
            floor = strong_concavity_lower_bound(split, kind) * modulus_scale
            if gap < 0.0:
                recorder.record(
                    name, violation="negative split gap",
                    k=k, beta=beta, left=left.probs, right=right.probs,
                    criterion=str(kind), gap=gap,
                )
            if gap < floor - _PURITY_TOL:
                recorder.record(
                    name, violation="split gap below the strong-concavity floor",
                    k=k, beta=beta, left=left.probs, right=right.probs,
                    criterion=str(kind), gap=gap, floor=floor,
                )
    return recorder.results(trials)


def tree_bounds_suite(
    trials: int = 10_000,
    seed: int = 0,
    max_leaves: int = 64,
    max_classes: int = 50,
    mgini_c: float = 4.0,
) -> list[VerifyResult]:
    """Check the tree-criterion range on random trees.

    A random tree is a random leaf count, Dirichlet leaf weights and
    Dirichlet leaf distributions; the range is evaluated with the
    heaviest leaf's weight.  The mgini leaf floor sqrt(c - 1) is checked
    per leaf as well.
    """
    rng = np.random.default_rng(seed)
    recorder = _Recorder(["Lemma4", "Lemma6", "Lemma7"])
    kinds = [("Lemma4", SHANNON), ("Lemma6", GINI), ("Lemma7", modified_gini(mgini_c))]
    mgini_floor = math.sqrt(mgini_c - 1.0)
    for _ in range(trials):
        k = int(rng.integers(2, max_classes + 1))
        leaves = int(rng.integers(2, max_leaves + 1))
        weights = rng.dirichlet(np.ones(leaves))
        dists = [ClassDistribution(p) for p in rng.dirichlet(np.ones(k), size=leaves)]
        pairs = list(zip(weights, dists))
        heaviest = float(weights.max())
        splits = leaves - 1
        for name, kind in kinds:
            value = tree_criterion(pairs, kind)
            lo, hi = criterion_bounds(splits, k, heaviest, kind)
            if not lo - _FLOAT_SLACK <= value <= hi + _FLOAT_SLACK:
                recorder.record(
                    name, violation="tree criterion outside its range",
                    k=k, leaves=leaves, weights=weights, criterion=str(kind),
                    value=value, range=[lo, hi],
                )
        for dist in dists:
            if leaf_criterion(dist, kinds[2][1]) < mgini_floor - _FLOAT_SLACK:
                recorder.record(
                    "Lemma7", violation="mgini leaf value below its floor",
                    k=k, pi=dist.probs, floor=mgini_floor,
                )
    return recorder.results(trials)


def mean_inequality_suite(trials: int = DEFAULT_TRIALS, seed: int = 0) -> list[VerifyResult]:
    """Check sum(x^2) >= (sum x)^2 / k for non-negative vectors."""
    rng = np.random.default_rng(seed)
    recorder = _Recorder(["Corollary1"])
    for _ in range(trials):
        k = int(rng.integers(2, 51))
        x = rng.uniform(0.0, 10.0, size=k)
        lhs = float(np.dot(x, x))
        rhs = float(x.sum()) ** 2 / k
        if lhs < rhs - _PURITY_TOL:
            recorder.record("Corollary1", violation="mean inequality violated",
                            k=k, x=x, lhs=lhs, rhs=rhs)
    return recorder.results(trials)


def _log2_budget(kind: Criterion, k: int, gamma: float, target: float) -> float:
    return splits_required(BoundQuery(kind, k, gamma, target)).log2


def _fit_slope(kind: Criterion, k: int, gamma: float) -> float:
    """Least-squares slope of ln(budget) against ln(1 / target)."""
    lo, hi = admissible_range(kind, k)
    targets = lo + (hi - lo) * np.array([0.5, 0.25, 0.125, 0.0625])
    x = np.log(1.0 / targets)
    y = np.array(
        [_log2_budget(kind, k, gamma, t) * math.log(2.0) for t in targets]
    )
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def theorem_suite(
    gammas: tuple[float, ...] = (0.05, 0.1, 0.2, 0.3, 0.4, 0.5),
    class_counts: tuple[int, ...] = (2, 3, 5, 10, 20, 50, 100),
    target_fractions: tuple[float, ...] = (0.999, 0.9, 0.75, 0.5, 0.25, 0.1),
    mgini_c: float = 4.0,
    slope_rtol: float = 0.1,
) -> list[VerifyResult]:
    """Check the split budgets for each criterion.

    Per criterion: the decrease envelope evaluated at the returned budget
    reaches the target; budgets are non-increasing in the advantage and
    the target and non-decreasing in the class count; and the fitted
    budget exponent scales with the class count as expected (log k for
    entropy, k - 1 for gini, k * sqrt(k * c - 1) for mgini).
    """
    entries = [
        ("Theorem1", SHANNON, lambda k: math.log(k)),
        ("Theorem2", GINI, lambda k: float(k - 1)),
        ("Theorem3", modified_gini(mgini_c),
         lambda k: k * math.sqrt(k * mgini_c - 1.0)),
    ]
    recorder = _Recorder([name for name, _, _ in entries])
    trials = 0
    for name, kind, exponent_scale in entries:
        for k in class_counts:
            lo, hi = admissible_range(kind, k)
            for gamma in gammas:
                etas = eta_constants(gamma, k, mgini_c)
                eta = {"Theorem1": etas.eta_e, "Theorem2": etas.eta_g,
                       "Theorem3": etas.eta_m}[name]
                previous = None
                for fraction in target_fractions:
                    target = lo + fraction * (hi - lo)
                    budget = splits_required(BoundQuery(kind, k, gamma, target))
                    trials += 1
                    # Envelope at the budget reaches the target:
                    # hi * exp(-eta^2 * log2(budget) / 32) <= target.
                    envelope = hi * math.exp(-eta * eta * budget.log2 / 32.0)
                    if envelope > target * (1.0 + 1e-9):
                        recorder.record(
                            name, violation="envelope at the budget misses the target",
                            k=k, gamma=gamma, target=target,
                            budget_log2=budget.log2, envelope=envelope,
                        )
                    # Budgets are non-increasing in the target; targets
                    # descend here, so budgets must not descend.
                    if previous is not None and budget.log2 < previous - _FLOAT_SLACK:
                        recorder.record(
                            name, violation="budget not monotone in the target",
                            k=k, gamma=gamma, target=target,
                        )
                    previous = budget.log2

            # Non-increasing in the advantage at a fixed mid-range target.
            target = lo + 0.5 * (hi - lo)
            curve = [_log2_budget(kind, k, g, target) for g in sorted(gammas)]
            if any(b > a + _FLOAT_SLACK for a, b in zip(curve, curve[1:])):
                recorder.record(
                    name, violation="budget not monotone in the advantage",
                    k=k, target=target, budgets_log2=curve,
                )

        # Non-decreasing in the class count at a fixed target valid for all k.
        lo2, hi2 = admissible_range(kind, min(class_counts))
        shared_target = lo2 + 0.6 * (hi2 - lo2)
        for gamma in gammas:
            curve = [
                _log2_budget(kind, k, gamma, shared_target) for k in sorted(class_counts)
            ]
            if any(b < a - _FLOAT_SLACK for a, b in zip(curve, curve[1:])):
                recorder.record(
                    name, violation="budget not monotone in the class count",
                    gamma=gamma, target=shared_target, budgets_log2=curve,
                )

        # Budget-exponent scaling in the class count, via log-log slopes.
        fit_k = (4, 16, 64)
        slopes = {k: _fit_slope(kind, k, 0.1) for k in fit_k}
        base = fit_k[0]
        for k in fit_k[1:]:
            measured = slopes[k] / slopes[base]
            expected = exponent_scale(k) / exponent_scale(base)
            if abs(measured - expected) > slope_rtol * expected:
                recorder.record(
                    name, violation="budget exponent scales wrongly with classes",
                    k=k, measured_ratio=measured, expected_ratio=expected,
                )
    return recorder.results(trials)


def run_all(
    trials: int = DEFAULT_TRIALS, seed: int = 0, modulus_scale: float = 1.0
) -> list[VerifyResult]:
    """Run every suite; trial counts scale from ``trials`` where sensible."""
    results = []
    results.extend(objective_suite(trials, seed))
    results.extend(tree_bounds_suite(max(1, trials // 10), seed + 1))
    results.extend(mean_inequality_suite(trials, seed + 2))
    results.extend(concavity_suite(trials, seed + 3, modulus_scale=modulus_scale))
    results.extend(theorem_suite())
    order = {
        "Lemma1": 0, "Lemma2": 1, "Lemma3": 2, "Lemma4": 3, "Lemma6": 4,
        "Lemma7": 5, "Corollary1": 6, "Lemma8": 7, "Lemma10": 8, "Lemma12": 9,
        "Theorem1": 10, "Theorem2": 11, "Theorem3": 12,
    }
    results.sort(key=lambda r: order[r.name])
    return results
