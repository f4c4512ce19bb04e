"""Sparse dataset ingestion, deterministic splitting and synthetic data.

The on-disk format is one example per line, UTF-8, LF or CRLF:

    LABEL INDEX:VALUE INDEX:VALUE ...

Labels are integers starting at 1; feature indices are positive integers
and appear in strictly increasing order in serialized output (parsing
accepts any order).  Class and feature counts are inferred as maxima, so
gap labels are allowed and carry zero mass.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DataFormatError(ValueError):
    """A data file does not conform to the sparse example format."""


@dataclass(frozen=True)
class Example:
    """One labeled example with a sparse feature map (1-based indices)."""

    features: dict[int, float]
    label: int

    def __post_init__(self):
        if self.label < 1:
            raise ValueError(f"label must be a positive integer, got {self.label}")
        for index in self.features:
            if index < 1:
                raise ValueError(f"feature indices must be positive, got {index}")


@dataclass
class Dataset:
    """A list of examples together with its class and feature dimensions."""

    examples: list[Example]
    num_classes: int
    num_features: int

    def __post_init__(self):
        for example in self.examples:
            if example.label > self.num_classes:
                raise ValueError(
                    f"label {example.label} exceeds num_classes {self.num_classes}"
                )
            for index in example.features:
                if index > self.num_features:
                    raise ValueError(
                        f"feature index {index} exceeds num_features {self.num_features}"
                    )

    def __len__(self) -> int:
        return len(self.examples)

    @classmethod
    def from_examples(cls, examples: list[Example]) -> "Dataset":
        """Build a dataset inferring the dimensions as maxima."""
        if not examples:
            raise DataFormatError("no examples")
        num_classes = max(example.label for example in examples)
        num_features = max(
            (max(example.features, default=0) for example in examples), default=0
        )
        return cls(list(examples), num_classes, num_features)

    def label_counts(self) -> np.ndarray:
        """Per-class example counts, indexed by label - 1."""
        counts = np.zeros(self.num_classes, dtype=np.int64)
        for example in self.examples:
            counts[example.label - 1] += 1
        return counts


def _parse_line(line: str, line_number: int) -> Example:
    tokens = line.split()
    try:
        label = int(tokens[0])
    except ValueError:
        raise DataFormatError(
            f"line {line_number}: label {tokens[0]!r} is not an integer"
        ) from None
    if label < 1:
        raise DataFormatError(f"line {line_number}: non-positive label {label}")
    features: dict[int, float] = {}
    for token in tokens[1:]:
        index_text, sep, value_text = token.partition(":")
        if not sep:
            raise DataFormatError(
                f"line {line_number}: malformed feature {token!r} (expected INDEX:VALUE)"
            )
        try:
            index = int(index_text)
            value = float(value_text)
        except ValueError:
            raise DataFormatError(
                f"line {line_number}: non-numeric feature {token!r}"
            ) from None
        if index < 1:
            raise DataFormatError(
                f"line {line_number}: non-positive feature index {index}"
            )
        if not np.isfinite(value):
            raise DataFormatError(f"line {line_number}: non-finite value in {token!r}")
        if index in features:
            raise DataFormatError(f"line {line_number}: duplicate feature index {index}")
        features[index] = value
    return Example(features, label)


def parse_sparse_lines(lines) -> Dataset:
    """Parse an iterable of text lines into a dataset."""
    examples = []
    for line_number, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        examples.append(_parse_line(stripped, line_number))
    if not examples:
        raise DataFormatError("no examples")
    return Dataset.from_examples(examples)


def parse_sparse_file(path) -> Dataset:
    """Parse a sparse-format text file into a dataset."""
    with open(path, "r", encoding="utf-8") as handle:
        return parse_sparse_lines(handle)


def serialize_example(example: Example) -> str:
    parts = [str(example.label)]
    for index in sorted(example.features):
        parts.append(f"{index}:{example.features[index]!r}")
    return " ".join(parts)


def write_sparse_file(dataset: Dataset, path) -> None:
    """Write a dataset in the sparse format; parse(write(d)) round-trips."""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for example in dataset.examples:
            handle.write(serialize_example(example))
            handle.write("\n")


@dataclass(frozen=True)
class SplitSpec:
    """Deterministic train/valid/test partition sizes and seed.

    ``train_frac`` of the data (after a seeded shuffle) is the training
    pool and the rest is test; ``valid_frac_of_train`` of the pool is
    carved out for validation.
    """

    seed: int
    train_frac: float = 0.9
    valid_frac_of_train: float = 0.1

    def __post_init__(self):
        if not 0.0 < self.train_frac < 1.0:
            raise ValueError(f"train_frac must lie in (0, 1), got {self.train_frac}")
        if not 0.0 < self.valid_frac_of_train < 1.0:
            raise ValueError(
                f"valid_frac_of_train must lie in (0, 1), got {self.valid_frac_of_train}"
            )


def split_dataset(data: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset, Dataset]:
    """Shuffle with the spec seed and cut into (train, valid, test).

    The parts are disjoint, cover the input, and keep the parent's class
    and feature dimensions.  Deterministic for a fixed seed.
    """
    n = len(data)
    if n < 10:
        raise ValueError(f"dataset too small to split: {n} examples (need >= 10)")
    order = np.random.default_rng(spec.seed).permutation(n)
    n_pool = int(n * spec.train_frac)
    n_valid = int(n_pool * spec.valid_frac_of_train)
    n_train = n_pool - n_valid

    def take(indices) -> Dataset:
        examples = [data.examples[i] for i in indices]
        return Dataset(examples, data.num_classes, data.num_features)

    return (
        take(order[:n_train]),
        take(order[n_train:n_pool]),
        take(order[n_pool:]),
    )


def synthetic_hierarchical(
    num_classes: int, num_features: int, n: int, noise: float, seed: int
) -> Dataset:
    """Balanced synthetic dataset: class i is one-hot on coordinate i.

    Each example of class i has value 1 on coordinate i plus Gaussian
    noise of scale ``noise`` on every coordinate (with noise 0 the
    feature maps are exactly one-hot and duplicate within a class).  At
    zero noise any subset of classes is perfectly separable from the
    rest by a coordinate-sum threshold, so maximally pure and balanced
    splits exist at every node.
    """
    if num_classes < 2:
        raise ValueError(f"at least 2 classes are required, got {num_classes}")
    if num_classes > num_features:
        raise ValueError(
            f"num_classes {num_classes} exceeds num_features {num_features}"
        )
    if n < num_classes:
        raise ValueError(f"need at least one example per class, got n={n}")
    if noise < 0.0:
        raise ValueError(f"noise must be non-negative, got {noise}")
    rng = np.random.default_rng(seed)
    examples = []
    for row in range(n):
        label = row % num_classes + 1
        if noise == 0.0:
            features = {label: 1.0}
        else:
            values = noise * rng.standard_normal(num_features)
            values[label - 1] += 1.0
            features = {i + 1: float(values[i]) for i in range(num_features)}
        examples.append(Example(features, label))
    return Dataset(examples, num_classes, num_features)
