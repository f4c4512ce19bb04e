"""Binary tree of linear node routers with leaf class histograms.

Each internal node holds a linear model routing examples right when its
score is positive; each node keeps the training-class histogram of the
examples that reached it.  Leaves predict the majority label of their
histogram.  Trees are mutated only while training; a finished tree is
treated as an immutable snapshot and may be read from many threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, Example
from .objective import ClassDistribution

LEFT = "left"
RIGHT = "right"

TREE_MAGIC = "lomboost-tree"
TREE_FORMAT_VERSION = 1


@dataclass
class NodeModel:
    """Linear router plus the running routing statistics used to train it.

    ``class_means[y]`` is the running mean of the 0/1 routing indicator
    over all updates with label y; ``marginal_mean`` is the running mean
    over all updates.  The marginal always equals the count-weighted
    average of the class means (both are plain means of the same stream).
    """

    weights: dict[int, float] = field(default_factory=dict)
    bias: float = 0.0
    class_counts: dict[int, int] = field(default_factory=dict)
    class_means: dict[int, float] = field(default_factory=dict)
    marginal_mean: float = 0.0
    total_count: int = 0

    def score(self, example: Example) -> float:
        weights = self.weights
        total = self.bias
        for index in sorted(example.features):
            total += weights.get(index, 0.0) * example.features[index]
        return total


def route(model: NodeModel, example: Example) -> str:
    """Routing direction for one example: right iff the score is positive."""
    return RIGHT if model.score(example) > 0.0 else LEFT


def routing_target(model: NodeModel, label: int) -> float:
    """Regression target for the next update of an example with ``label``.

    +1 when the class-conditional routing mean is at least the marginal
    mean (ties and the cold start go right, unseen classes default to a
    mean of 0): each class is pushed toward the side it already favors
    relative to the marginal, which widens |marginal - class mean| and
    therefore the split objective.
    """
    if model.total_count == 0:
        return 1.0
    return 1.0 if model.class_means.get(label, 0.0) >= model.marginal_mean else -1.0


def node_update(model: NodeModel, example: Example, label: int, lr: float) -> NodeModel:
    """One online step: squared-loss SGD toward the routing target.

    Updates the model in place and returns it.  The routing indicator
    recorded in the statistics is the post-update score sign clamped to
    {0, 1}.
    """
    target = routing_target(model, label)
    score = model.score(example)
    step = lr * (score - target)
    sq_norm = 0.0
    weights = model.weights
    for index, value in example.features.items():
        weights[index] = weights.get(index, 0.0) - step * value
        sq_norm += value * value
    model.bias -= step
    # The post-update score in closed form: the update shifts the score
    # by -step * (||x||^2 + 1), the +1 from the bias coordinate.
    after = score - step * (sq_norm + 1.0)
    indicator = 1.0 if after > 0.0 else 0.0
    count = model.class_counts.get(label, 0) + 1
    model.class_counts[label] = count
    mean = model.class_means.get(label, 0.0)
    model.class_means[label] = mean + (indicator - mean) / count
    model.total_count += 1
    model.marginal_mean += (indicator - model.marginal_mean) / model.total_count
    return model


@dataclass
class TreeNode:
    """One tree node: class histogram, and a router plus children if internal."""

    node_id: int
    class_counts: np.ndarray
    model: NodeModel | None = None
    left: int | None = None
    right: int | None = None
    unsplittable: bool = False

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    @property
    def n_examples(self) -> int:
        return int(self.class_counts.sum())

    def distribution(self) -> ClassDistribution:
        total = self.class_counts.sum()
        if total == 0:
            raise ValueError(f"node {self.node_id} holds no examples")
        return ClassDistribution(self.class_counts / total)

    def majority_label(self) -> int:
        # argmax returns the first maximum, so ties break to the smallest label.
        return int(np.argmax(self.class_counts)) + 1


class Tree:
    """Arena of nodes with a designated root.

    Node ids are arbitrary but unique; training assigns them
    sequentially.  Invariants: every internal node has exactly two
    children, leaf weights sum to one, and a tree with t internal nodes
    has t + 1 leaves.
    """

    def __init__(self, num_classes: int, num_features: int):
        self.num_classes = num_classes
        self.num_features = num_features
        self.nodes: dict[int, TreeNode] = {}
        self.root_id: int | None = None

    @classmethod
    def root_only(cls, class_counts, num_features: int) -> "Tree":
        counts = np.asarray(class_counts, dtype=np.int64)
        tree = cls(counts.size, num_features)
        tree.root_id = 0
        tree.nodes[0] = TreeNode(0, counts)
        return tree

    @property
    def root(self) -> TreeNode:
        if self.root_id is None:
            raise ValueError("tree has no nodes")
        return self.nodes[self.root_id]

    def node(self, node_id: int) -> TreeNode:
        return self.nodes[node_id]

    def leaf_ids(self) -> list[int]:
        return sorted(nid for nid, node in self.nodes.items() if node.is_leaf)

    def internal_ids(self) -> list[int]:
        return sorted(nid for nid, node in self.nodes.items() if not node.is_leaf)

    @property
    def num_splits(self) -> int:
        return len(self.nodes) - len(self.leaf_ids()) if self.nodes else 0

    def leaf_weights(self) -> list[tuple[int, float]]:
        total = self.root.n_examples
        return [(nid, self.nodes[nid].n_examples / total) for nid in self.leaf_ids()]

    def weighted_leaves(self) -> list[tuple[float, ClassDistribution]]:
        """(weight, distribution) pairs for tree-level criteria."""
        return [(w, self.nodes[nid].distribution()) for nid, w in self.leaf_weights()]

    def attach_children(
        self,
        leaf_id: int,
        model: NodeModel,
        left_counts,
        right_counts,
        left_id: int | None = None,
        right_id: int | None = None,
    ) -> tuple[int, int]:
        """Turn a leaf into an internal node with two fresh child leaves."""
        node = self.nodes[leaf_id]
        if not node.is_leaf:
            raise ValueError(f"node {leaf_id} is not a leaf")
        next_id = max(self.nodes) + 1
        if left_id is None:
            left_id = next_id
        if right_id is None:
            right_id = max(next_id, left_id + 1)
        if left_id in self.nodes or right_id in self.nodes or left_id == right_id:
            raise ValueError("child ids collide with existing nodes")
        left = np.asarray(left_counts, dtype=np.int64)
        right = np.asarray(right_counts, dtype=np.int64)
        if not np.array_equal(left + right, node.class_counts):
            raise ValueError("child histograms must partition the parent histogram")
        self.nodes[left_id] = TreeNode(left_id, left)
        self.nodes[right_id] = TreeNode(right_id, right)
        node.model = model
        node.left = left_id
        node.right = right_id
        return left_id, right_id

    def leaf_for(self, example: Example) -> TreeNode:
        node = self.root
        while not node.is_leaf:
            side = route(node.model, example)
            node = self.nodes[node.right if side == RIGHT else node.left]
        return node


def predict(tree: Tree, example: Example) -> int:
    """Route the example to a leaf and return its majority label."""
    return tree.leaf_for(example).majority_label()


def evaluate(tree: Tree, data: Dataset) -> float:
    """Fraction of examples the tree misclassifies."""
    if tree.root_id is None:
        raise ValueError("tree has no nodes")
    if len(data) == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    wrong = sum(1 for ex in data.examples if predict(tree, ex) != ex.label)
    return wrong / len(data)


def _model_to_json(model: NodeModel | None):
    if model is None:
        return None
    return {
        "weights": {str(i): w for i, w in sorted(model.weights.items())},
        "bias": model.bias,
        "class_counts": {str(y): c for y, c in sorted(model.class_counts.items())},
        "class_means": {str(y): m for y, m in sorted(model.class_means.items())},
        "marginal_mean": model.marginal_mean,
        "total_count": model.total_count,
    }


def _model_from_json(payload) -> NodeModel | None:
    if payload is None:
        return None
    return NodeModel(
        weights={int(i): float(w) for i, w in payload["weights"].items()},
        bias=float(payload["bias"]),
        class_counts={int(y): int(c) for y, c in payload["class_counts"].items()},
        class_means={int(y): float(m) for y, m in payload["class_means"].items()},
        marginal_mean=float(payload["marginal_mean"]),
        total_count=int(payload["total_count"]),
    )


def dump_tree(tree: Tree) -> str:
    """Versioned text dump: a magic header line followed by a JSON body."""
    body = {
        "num_classes": tree.num_classes,
        "num_features": tree.num_features,
        "root_id": tree.root_id,
        "nodes": [
            {
                "id": node.node_id,
                "class_counts": [int(c) for c in node.class_counts],
                "left": node.left,
                "right": node.right,
                "unsplittable": node.unsplittable,
                "model": _model_to_json(node.model),
            }
            for _, node in sorted(tree.nodes.items())
        ],
    }
    header = f"{TREE_MAGIC} {TREE_FORMAT_VERSION}"
    return header + "\n" + json.dumps(body, sort_keys=True) + "\n"


def load_tree(text: str) -> Tree:
    """Parse a dump produced by :func:`dump_tree`, checking the header."""
    header, _, rest = text.partition("\n")
    fields = header.split()
    if len(fields) != 2 or fields[0] != TREE_MAGIC:
        raise ValueError(f"not a tree dump (bad header {header!r})")
    version = int(fields[1])
    if version != TREE_FORMAT_VERSION:
        raise ValueError(f"unsupported tree format version {version}")
    body = json.loads(rest)
    tree = Tree(int(body["num_classes"]), int(body["num_features"]))
    tree.root_id = body["root_id"]
    for entry in body["nodes"]:
        tree.nodes[int(entry["id"])] = TreeNode(
            node_id=int(entry["id"]),
            class_counts=np.asarray(entry["class_counts"], dtype=np.int64),
            model=_model_from_json(entry["model"]),
            left=entry["left"],
            right=entry["right"],
            unsplittable=bool(entry["unsplittable"]),
        )
    return tree
