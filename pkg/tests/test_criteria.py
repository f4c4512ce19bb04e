"""Unit and property tests for the impurity criteria and split gaps."""

import math

import numpy as np
import pytest

from lomboost import (
    GINI,
    SHANNON,
    ClassDistribution,
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


def dist(*probs):
    return ClassDistribution(list(probs))


def test_criterion_tags():
    assert str(SHANNON) == "entropy"
    assert str(modified_gini(4.0)) == "mgini(c=4)"
    with pytest.raises(ValueError, match="exceed 2"):
        modified_gini(2.0)
    with pytest.raises(ValueError, match="exceed 2"):
        modified_gini(1.5)
    with pytest.raises(ValueError, match="requires a constant"):
        Criterion("mgini")
    with pytest.raises(ValueError, match="no constant"):
        Criterion("gini", 3.0)
    with pytest.raises(ValueError, match="unknown"):
        Criterion("misclassification")


def test_leaf_criterion_examples():
    assert leaf_criterion(dist(0.5, 0.5), SHANNON) == pytest.approx(math.log(2))
    assert leaf_criterion(dist(1.0, 0.0), modified_gini(4)) == pytest.approx(
        math.sqrt(3)
    )
    assert leaf_criterion(dist(0.25, 0.75), GINI) == pytest.approx(0.375)
    assert leaf_criterion(dist(0.5, 0.5), modified_gini(4)) == pytest.approx(
        math.sqrt(7)
    )


def test_leaf_criterion_zero_mass_convention():
    full = leaf_criterion(dist(0.4, 0.6), SHANNON)
    padded = leaf_criterion(dist(0.4, 0.6, 0.0), SHANNON)
    assert padded == pytest.approx(full)


def test_tree_criterion_examples():
    uniform4 = ClassDistribution.uniform(4)
    assert tree_criterion([(1.0, uniform4)], SHANNON) == pytest.approx(math.log(4))
    pure = [(0.5, dist(1.0, 0.0)), (0.5, dist(0.0, 1.0))]
    assert tree_criterion(pure, GINI) == pytest.approx(0.0)
    mixed = [(0.25, dist(0.5, 0.5)), (0.75, dist(1.0, 0.0))]
    assert tree_criterion(mixed, GINI) == pytest.approx(0.125)


def test_tree_criterion_validates_weights():
    with pytest.raises(ValueError, match="sum to 1"):
        tree_criterion([(0.5, dist(1.0, 0.0)), (0.4, dist(0.0, 1.0))], GINI)
    with pytest.raises(ValueError, match="non-negative"):
        tree_criterion([(1.5, dist(1.0, 0.0)), (-0.5, dist(0.0, 1.0))], GINI)
    with pytest.raises(ValueError, match="at least one leaf"):
        tree_criterion([], GINI)


def test_criterion_bounds_examples():
    assert criterion_bounds(1, 10, 1.0, SHANNON) == pytest.approx(
        (0.0, 2 * math.log(10))
    )
    assert criterion_bounds(1, 10, 1.0, GINI) == pytest.approx((0.0, 1.8))
    lo, hi = criterion_bounds(3, 4, 0.5, modified_gini(3))
    assert lo == pytest.approx(math.sqrt(2))
    assert hi == pytest.approx(4 * 0.5 * math.sqrt(11))
    with pytest.raises(ValueError):
        criterion_bounds(0, 10, 1.0, SHANNON)
    with pytest.raises(ValueError):
        criterion_bounds(1, 10, 0.0, SHANNON)


def balanced_pure_split():
    return SplitDecomposition.from_children(0.5, dist(1.0, 0.0), dist(0.0, 1.0))


def test_split_delta_examples():
    split = balanced_pure_split()
    assert split_delta(split, SHANNON) == pytest.approx(math.log(2))
    assert split_delta(split, GINI) == pytest.approx(0.5)
    same = SplitDecomposition.from_children(0.3, dist(0.2, 0.8), dist(0.2, 0.8))
    for kind in (SHANNON, GINI, modified_gini(4)):
        assert split_delta(same, kind) == pytest.approx(0.0, abs=1e-12)


def test_split_decomposition_validates_mixture():
    with pytest.raises(ValueError, match="mixture"):
        SplitDecomposition(dist(0.5, 0.5), 0.5, dist(1.0, 0.0), dist(0.4, 0.6))
    with pytest.raises(ValueError, match="beta"):
        SplitDecomposition.from_children(1.2, dist(1.0, 0.0), dist(0.0, 1.0))


def test_split_delta_degenerate_beta_is_zero():
    for beta in (0.0, 1.0):
        split = SplitDecomposition.from_children(beta, dist(1.0, 0.0), dist(0.0, 1.0))
        for kind in (SHANNON, GINI, modified_gini(4)):
            assert split_delta(split, kind) == 0.0
            assert strong_concavity_lower_bound(split, kind) == 0.0


def test_strong_concavity_examples():
    split = balanced_pure_split()
    # l1 distance between the children is 2, l2 squared distance is 2.
    assert strong_concavity_lower_bound(split, SHANNON) == pytest.approx(0.5)
    assert strong_concavity_lower_bound(split, GINI) == pytest.approx(0.5)
    assert strong_concavity_lower_bound(split, modified_gini(4)) == pytest.approx(
        0.03125
    )
    zero = SplitDecomposition.from_children(0.4, dist(0.3, 0.7), dist(0.3, 0.7))
    for kind in (SHANNON, GINI, modified_gini(4)):
        assert strong_concavity_lower_bound(zero, kind) == pytest.approx(0.0)


def test_gap_dominates_floor_property():
    rng = np.random.default_rng(42)
    kinds = [SHANNON, GINI] + [modified_gini(c) for c in (2.5, 3.0, 4.0, 10.0)]
    for _ in range(3000):
        k = int(rng.integers(2, 51))
        beta = float(rng.uniform(0.01, 0.99))
        left = ClassDistribution(rng.dirichlet(np.ones(k)))
        right = ClassDistribution(rng.dirichlet(np.ones(k)))
        split = SplitDecomposition.from_children(beta, left, right)
        for kind in kinds:
            gap = split_delta(split, kind)
            assert gap >= 0.0
            assert gap >= strong_concavity_lower_bound(split, kind) - 1e-9


def test_mgini_floor_and_entropy_peak():
    rng = np.random.default_rng(5)
    for _ in range(1000):
        k = int(rng.integers(2, 51))
        d = ClassDistribution(rng.dirichlet(np.ones(k)))
        for c in (2.5, 4.0, 10.0):
            assert leaf_criterion(d, modified_gini(c)) >= math.sqrt(c - 1.0) - 1e-12
        assert leaf_criterion(d, SHANNON) <= math.log(k) + 1e-12


def test_tree_criterion_within_bounds_property():
    rng = np.random.default_rng(9)
    kinds = (SHANNON, GINI, modified_gini(4))
    for _ in range(300):
        k = int(rng.integers(2, 51))
        leaves = int(rng.integers(2, 65))
        weights = rng.dirichlet(np.ones(leaves))
        dists = [ClassDistribution(p) for p in rng.dirichlet(np.ones(k), size=leaves)]
        pairs = list(zip(weights, dists))
        for kind in kinds:
            value = tree_criterion(pairs, kind)
            lo, hi = criterion_bounds(leaves - 1, k, float(weights.max()), kind)
            assert lo - 1e-12 <= value <= hi + 1e-12


def test_mean_inequality_oracle():
    rng = np.random.default_rng(21)
    for _ in range(5000):
        k = int(rng.integers(2, 51))
        x = rng.uniform(0.0, 10.0, size=k)
        assert np.dot(x, x) >= x.sum() ** 2 / k - 1e-9


def test_objective_to_delta_bound_examples():
    value = objective_to_delta_bound(0.5, 0.25, 2 * math.log(10), 1, 10, SHANNON)
    assert value == pytest.approx(1.0 / 18.0)
    assert objective_to_delta_bound(1.0, 0.5, 0.0, 1, 2, SHANNON) == 0.0
    assert objective_to_delta_bound(1.0, 0.5, 1.0, 1, 2, GINI) == pytest.approx(0.5)


def test_objective_to_delta_bound_validation():
    with pytest.raises(ValueError, match="advantage"):
        objective_to_delta_bound(1.0, 0.7, 1.0, 1, 2, GINI)
    with pytest.raises(ValueError, match="advantage"):
        objective_to_delta_bound(1.0, 0.0, 1.0, 1, 2, GINI)
    with pytest.raises(ValueError, match="floor"):
        objective_to_delta_bound(0.3, 0.4, 1.0, 1, 2, GINI)
