"""Labeled sample matrices (samples as columns, class ids ``1..K``)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix

__all__ = ["LabeledDataset", "normalize_columns"]


def normalize_columns(x):
    """Scale every column of ``x`` to unit l2 norm. Zero columns are rejected."""
    x = as_matrix(x, "features")
    norms = np.linalg.norm(x, axis=0)
    if np.any(norms == 0.0):
        raise ValueError("cannot normalize a zero column")
    return x / norms


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Feature matrix ``features`` (n x N) with one class id per column.

    ``class_count`` defaults to the largest label; every id in ``1..K`` must
    occur at least once.
    """

    features: np.ndarray
    labels: np.ndarray
    class_count: int = 0

    def __post_init__(self):
        x = as_matrix(self.features, "features")
        y = np.asarray(self.labels)
        if y.ndim != 1 or y.shape[0] != x.shape[1]:
            raise ValueError(f"need one label per column: {y.shape} labels for {x.shape[1]} columns")
        if not np.issubdtype(y.dtype, np.integer):
            if not np.all(np.equal(np.mod(y, 1), 0)):
                raise ValueError("labels must be integers")
        y = y.astype(np.int64)
        k = int(self.class_count) if self.class_count else int(y.max())
        if y.min() < 1 or y.max() > k:
            raise ValueError(f"labels must lie in 1..{k}")
        missing = sorted(set(range(1, k + 1)) - set(np.unique(y).tolist()))
        if missing:
            raise ValueError(f"classes without samples: {missing}")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "class_count", k)

    @property
    def ambient_dim(self) -> int:
        return self.features.shape[0]

    @property
    def n_samples(self) -> int:
        return self.features.shape[1]

    @property
    def classes(self):
        return range(1, self.class_count + 1)

    def class_features(self, k):
        return self.features[:, self.labels == k]

    def complement_features(self, k):
        return self.features[:, self.labels != k]

    def counts(self):
        return np.bincount(self.labels, minlength=self.class_count + 1)[1:]

    def normalized(self) -> "LabeledDataset":
        """Copy with every column rescaled to unit l2 norm."""
        return LabeledDataset(normalize_columns(self.features), self.labels, self.class_count)

    def is_normalized(self, atol=1e-10) -> bool:
        return bool(np.all(np.abs(np.linalg.norm(self.features, axis=0) - 1.0) <= atol))

    def subset(self, index) -> "LabeledDataset":
        index = np.asarray(index)
        return LabeledDataset(self.features[:, index], self.labels[index], self.class_count)

    def with_features(self, features) -> "LabeledDataset":
        return LabeledDataset(features, self.labels, self.class_count)
