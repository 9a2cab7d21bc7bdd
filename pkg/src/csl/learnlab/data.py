"""Training data: labelled examples, ordered training sets, replace-one
and leave-one-out perturbations, CSV import/export (header x0,...,xd,y).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from ..errors import IndexOutOfRange


@dataclass(frozen=True)
class Example:
    """One labelled example z = (x, y) with a stable integer id."""

    x: np.ndarray
    y: float
    id: int

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if not (np.all(np.isfinite(x)) and np.isfinite(self.y)):
            raise ValueError(f"Example {self.id}: entries must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", float(self.y))


class TrainingSet:
    """Ordered, immutable collection of examples with unique ids."""

    def __init__(self, examples):
        examples = tuple(examples)
        if not examples:
            raise ValueError("TrainingSet: needs at least one example")
        ids = [ex.id for ex in examples]
        if len(set(ids)) != len(ids):
            raise ValueError("TrainingSet: example ids must be unique")
        dims = {ex.x.shape for ex in examples}
        if len(dims) != 1:
            raise ValueError("TrainingSet: examples have mixed feature dimensions")
        self._examples = examples
        self._features = None
        self._labels = None

    @property
    def examples(self) -> tuple[Example, ...]:
        return self._examples

    @property
    def n(self) -> int:
        return len(self._examples)

    @property
    def dim(self) -> int:
        return len(self._examples[0].x)

    @property
    def features(self) -> np.ndarray:
        """n x d matrix of feature rows (cached, do not mutate)."""
        if self._features is None:
            self._features = np.stack([ex.x for ex in self._examples])
        return self._features

    @property
    def labels(self) -> np.ndarray:
        if self._labels is None:
            self._labels = np.array([ex.y for ex in self._examples])
        return self._labels

    def __iter__(self):
        return iter(self._examples)

    def __len__(self) -> int:
        return self.n


def replace_one(S: TrainingSet, i: int, z_new: Example) -> TrainingSet:
    """Training set with example i replaced by z_new; S is unchanged."""
    if not 0 <= i < S.n:
        raise IndexOutOfRange(f"replace_one: index {i} outside [0, {S.n})")
    examples = list(S.examples)
    examples[i] = z_new
    return TrainingSet(examples)


def leave_one_out(S: TrainingSet, i: int) -> TrainingSet:
    """Training set with example i removed (n - 1 examples, ids preserved)."""
    if not 0 <= i < S.n:
        raise IndexOutOfRange(f"leave_one_out: index {i} outside [0, {S.n})")
    if S.n == 1:
        raise ValueError("leave_one_out: cannot empty a singleton training set")
    examples = list(S.examples)
    del examples[i]
    return TrainingSet(examples)


def load_training_set(path) -> TrainingSet:
    """Read examples from CSV with header x0,...,xd,y."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[-1] != "y" or not all(h == f"x{k}" for k, h in enumerate(header[:-1])):
            raise ValueError(f"load_training_set: unexpected header {header}")
        examples = [
            Example(x=np.array([float(v) for v in row[:-1]]), y=float(row[-1]), id=k)
            for k, row in enumerate(reader)
        ]
    return TrainingSet(examples)


def save_training_set(S: TrainingSet, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{k}" for k in range(S.dim)] + ["y"])
        for ex in S:
            writer.writerow([repr(float(v)) for v in ex.x] + [repr(ex.y)])
