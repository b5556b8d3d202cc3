"""Train/test evaluation of projections on labeled data.

The classifier used by default is a ridge (collaborative representation)
residual rule: code every test sample once over the whole training
dictionary, then pick the class whose part of the code reconstructs it best.
It stands in for l1 sparse-coding classification.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .baselines import fit_pca, fit_random_projection
from .dataset import LabeledDataset
from .ispp import FitConfig, ProjectionModel, fit_algorithm1, transform
from .linalg import as_matrix, orthonormalize, thin_svd

__all__ = [
    "SplitSpec",
    "MethodConfig",
    "EvalReport",
    "SeparationMatrix",
    "split",
    "classify_ridge_residual",
    "classify_nearest_subspace",
    "separation_matrix",
    "fit_method",
    "run_experiment",
]

CLASSIFIER_NOTE = "ridge residual classifier substitutes l1 sparse coding"
METHODS = ("ispp", "pca", "rp")
CLASSIFIERS = ("ridge", "nearest_subspace")


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.5
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")


def split(data: LabeledDataset, spec: SplitSpec = SplitSpec()):
    """Partition into ``(train, test)``.

    Stratified splits put ``floor(fraction * count)`` samples of each class in
    train (clamped so both sides keep at least one) and the rest in test.
    """
    rng = np.random.default_rng(spec.seed)
    counts = data.counts()
    if np.any(counts < 2):
        small = [k for k, c in zip(data.classes, counts) if c < 2]
        raise ValueError(f"classes with fewer than 2 samples cannot be split: {small}")
    if spec.stratified:
        train = []
        for k in data.classes:
            idx = np.flatnonzero(data.labels == k)
            idx = idx[rng.permutation(idx.size)]
            ntr = min(max(int(np.floor(spec.train_fraction * idx.size)), 1), idx.size - 1)
            train.append(idx[:ntr])
        train = np.sort(np.concatenate(train))
    else:
        perm = rng.permutation(data.n_samples)
        train = np.sort(perm[: int(np.floor(spec.train_fraction * data.n_samples))])
    test = np.setdiff1d(np.arange(data.n_samples), train)
    for name, idx in (("train", train), ("test", test)):
        present = np.unique(data.labels[idx])
        if present.size != data.class_count:
            raise ValueError(f"{name} side lost a class; use a stratified split")
    return data.subset(train), data.subset(test)


def _check_dims(train, test_features):
    y = as_matrix(test_features, "test_features")
    if y.shape[0] != train.ambient_dim:
        raise ValueError(f"test features have {y.shape[0]} rows, training data has {train.ambient_dim}")
    return y


def classify_ridge_residual(train: LabeledDataset, test_features, lam=1e-3) -> np.ndarray:
    """Labels by minimal class-wise residual of a joint ridge code.

    Solves ``(X^T X + lam I) W = X^T Y`` once over the full training
    dictionary ``X``; the residual of class ``k`` is ``||y - X_k W_k||``.
    Ties go to the lowest class id. ``lam = 0`` uses the minimum-norm
    least-squares code.
    """
    y = _check_dims(train, test_features)
    x = train.features
    if lam > 0:
        gram = x.T @ x + lam * np.eye(x.shape[1])
        w = scipy.linalg.solve(gram, x.T @ y, assume_a="pos")
    else:
        w = np.linalg.lstsq(x, y, rcond=None)[0]
    res = np.empty((train.class_count, y.shape[1]))
    for i, k in enumerate(train.classes):
        mask = train.labels == k
        res[i] = np.linalg.norm(y - x[:, mask] @ w[mask], axis=0)
    return np.argmin(res, axis=0) + 1


def classify_nearest_subspace(train: LabeledDataset, test_features, tol=1e-8) -> np.ndarray:
    """Labels by minimal distance to the span of each class's training samples."""
    y = _check_dims(train, test_features)
    res = np.empty((train.class_count, y.shape[1]))
    for i, k in enumerate(train.classes):
        q = orthonormalize(train.class_features(k), tol)
        res[i] = np.linalg.norm(y - q @ (q.T @ y), axis=0)
    return np.argmin(res, axis=0) + 1


@dataclass(frozen=True, eq=False)
class SeparationMatrix:
    z: np.ndarray
    gram: np.ndarray


def separation_matrix(model: ProjectionModel, data: LabeledDataset) -> SeparationMatrix:
    """Cosines between the top (uncentered) principal directions of the projected classes."""
    projected = transform(model, data.features)
    z = np.empty((projected.shape[0], data.class_count))
    for i, k in enumerate(data.classes):
        block = projected[:, data.labels == k]
        if block.shape[1] == 0:
            raise ValueError(f"class {k} is empty")
        z[:, i] = thin_svd(block).u[:, 0]
    gram = np.clip(z.T @ z, -1.0, 1.0)
    return SeparationMatrix(z, gram)


@dataclass(frozen=True)
class MethodConfig:
    """Which reduction to fit and how to classify afterwards.

    ``dim`` is ignored for ``ispp`` (its dimension is 2K or less).
    """

    method: str = "ispp"
    dim: int | None = None
    fit: FitConfig = FitConfig()
    classifier: str = "ridge"
    classifier_lam: float = 1e-3

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.classifier not in CLASSIFIERS:
            raise ValueError(f"unknown classifier {self.classifier!r}; choose from {CLASSIFIERS}")
        if self.method != "ispp" and (self.dim is None or self.dim < 1):
            raise ValueError(f"method {self.method} needs a positive dim")

    @property
    def randomized(self) -> bool:
        return self.method in ("ispp", "rp")


@dataclass
class EvalReport:
    method: str
    dim: int
    runs: int
    accuracies: list
    per_class_accuracy: list
    classifier: str = "ridge"
    note: str = CLASSIFIER_NOTE
    seeds: list = field(default_factory=list)

    @property
    def accuracy(self) -> float:
        return self.accuracy_mean

    @property
    def accuracy_mean(self) -> float:
        return float(np.mean(self.accuracies))

    @property
    def accuracy_std(self) -> float:
        return float(np.std(self.accuracies))

    def to_text(self) -> str:
        lines = [
            f"method={self.method}",
            f"dim={self.dim}",
            f"runs={self.runs}",
            f"classifier={self.classifier}",
            f"accuracy_mean={self.accuracy_mean:.10f}",
            f"accuracy_std={self.accuracy_std:.10f}",
            "per_class_accuracy=" + ",".join(f"{a:.10f}" for a in self.per_class_accuracy),
            f"note={self.note}",
        ]
        return "\n".join(lines) + "\n"

    def csv_rows(self):
        header = ["method", "dim", "run", "seed", "classifier", "accuracy"]
        rows = [
            [self.method, self.dim, i + 1, self.seeds[i] if self.seeds else "", self.classifier, f"{a:.10f}"]
            for i, a in enumerate(self.accuracies)
        ]
        return header, rows

    def to_csv(self) -> str:
        header, rows = self.csv_rows()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        return buf.getvalue()


def fit_method(train: LabeledDataset, config: MethodConfig, seed) -> ProjectionModel:
    if config.method == "ispp":
        fit = FitConfig(**{**config.fit.__dict__, "seed": seed})
        return fit_algorithm1(train, fit)
    if config.method == "pca":
        return fit_pca(train.features, config.dim)
    return fit_random_projection(train.ambient_dim, config.dim, seed)


def _classify(config, train, test_features):
    if config.classifier == "ridge":
        return classify_ridge_residual(train, test_features, config.classifier_lam)
    return classify_nearest_subspace(train, test_features)


def _one_run(train, test, config, seed):
    model = fit_method(train, config, seed)
    ptrain = train.with_features(transform(model, train.features))
    pred = _classify(config, ptrain, transform(model, test.features))
    hit = pred == test.labels
    per_class = [float(hit[test.labels == k].mean()) for k in test.classes]
    return float(hit.mean()), per_class, model.dim


def run_experiment(data: LabeledDataset, config: MethodConfig, split_spec: SplitSpec = SplitSpec(), runs=1, workers=1) -> EvalReport:
    """Split once, then fit/transform/classify ``runs`` times.

    Randomized methods (ispp, rp) get per-run seeds spawned from
    ``config.fit.seed``; deterministic ones run once whatever ``runs`` says.
    Threaded runs reproduce the sequential report exactly.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    train, test = split(data, split_spec)
    if config.randomized:
        seeds = [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(config.fit.seed).spawn(runs)]
    else:
        seeds = [config.fit.seed]
    if workers > 1 and len(seeds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda s: _one_run(train, test, config, s), seeds))
    else:
        results = [_one_run(train, test, config, s) for s in seeds]
    return EvalReport(
        method=config.method,
        dim=results[0][2],
        runs=len(results),
        accuracies=[r[0] for r in results],
        per_class_accuracy=np.mean([r[1] for r in results], axis=0).tolist(),
        classifier=config.classifier,
        note=CLASSIFIER_NOTE if config.classifier == "ridge" else "nearest subspace classifier",
        seeds=seeds,
    )
