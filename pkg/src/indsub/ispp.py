"""Independence-preserving projections onto 2K directions.

Two constructors produce the same kind of :class:`ProjectionModel`:

* :func:`oracle_projection` uses known subspace bases. For every class ``k``
  it takes a principal vector pair between ``S_k`` and the sum of the other
  subspaces and keeps the plane they span.
* :func:`fit_algorithm1` estimates those pairs from labeled samples by
  alternating two ridge regressions per class.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dataset import LabeledDataset
from .linalg import RANK_TOL, as_matrix, orthonormalize, ridge_solve_cg
from .subspace import PrincipalPair, Subspace, is_independent, principal_pairs, sum_subspace

__all__ = [
    "FitConfig",
    "ProjectionModel",
    "RankDeficiencyWarning",
    "DegenerateIterateError",
    "oracle_projection",
    "fit_algorithm1",
    "transform",
    "stationarity_residual",
]

MAX_RESTARTS = 3
_ZERO = 1e-12


class RankDeficiencyWarning(UserWarning):
    """The stacked class planes were linearly dependent; columns were dropped."""


class DegenerateIterateError(RuntimeError):
    """A class kept producing a zero reconstruction after all restarts."""

    def __init__(self, klass, message):
        super().__init__(f"class {klass}: {message}")
        self.klass = klass


@dataclass(frozen=True)
class FitConfig:
    lam: float = 0.0
    iter_max: int = 200
    gamma_tol: float = 1e-8
    seed: int = 0
    cg_tol: float = 1e-10
    cg_max_iter: int = 1000

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lam must be >= 0")
        if self.iter_max < 1:
            raise ValueError("iter_max must be >= 1")
        if not self.gamma_tol > 0:
            raise ValueError("gamma_tol must be > 0")
        if not self.cg_tol > 0:
            raise ValueError("cg_tol must be > 0")
        if self.cg_max_iter < 1:
            raise ValueError("cg_max_iter must be >= 1")


@dataclass(eq=False)
class ProjectionModel:
    """An ``n x m`` projection with orthonormal columns plus how it was made.

    ``pairs`` keeps the unit-normalized per-class vectors ``[a_1, b_1, ...,
    a_K, b_K]`` before the final orthonormalization (oracle and algorithm1
    only). ``mean`` is subtracted before projecting (pca only).
    """

    matrix: np.ndarray
    method: str
    lam: float = 0.0
    per_class_cosine: tuple = ()
    iterations_used: tuple = ()
    converged: tuple = ()
    seed: int | None = None
    mean: np.ndarray | None = None
    pairs: np.ndarray | None = None
    rank_deficient: bool = False
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.matrix = as_matrix(self.matrix, "matrix")
        m = self.matrix.shape[1]
        if not np.allclose(self.matrix.T @ self.matrix, np.eye(m), rtol=0.0, atol=1e-8):
            raise ValueError("projection matrix columns are not orthonormal")

    @property
    def ambient_dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def block(self, k) -> np.ndarray:
        """Orthonormal basis of class ``k``'s plane (1-based)."""
        if self.pairs is None:
            raise ValueError(f"{self.method} models have no per-class planes")
        return orthonormalize(self.pairs[:, 2 * (k - 1) : 2 * k])


def _finish(pairs, method, **kw):
    p = orthonormalize(pairs, RANK_TOL)
    deficient = p.shape[1] < pairs.shape[1]
    if deficient:
        warnings.warn(
            f"{method}: stacked planes have rank {p.shape[1]} < {pairs.shape[1]}; "
            "dependent columns dropped",
            RankDeficiencyWarning,
            stacklevel=3,
        )
    return ProjectionModel(p, method, pairs=pairs, rank_deficient=deficient, **kw)


def oracle_projection(subspaces, pair_index=1) -> ProjectionModel:
    """2K-column projection built from known, independent subspaces.

    For each ``k`` the ``pair_index``-th (1-based) principal pair between
    ``S_k`` and the sum of the others is taken; all pairs are then stacked and
    orthonormalized. Duplicate planes (K = 2 gives the same plane twice) are
    dropped, so ``dim`` can be less than 2K.
    """
    subspaces = list(subspaces)
    if len(subspaces) < 2:
        raise ValueError("need at least two subspaces")
    if not is_independent(subspaces):
        raise ValueError("subspaces are not independent")
    cols, cosines = [], []
    for k, s in enumerate(subspaces):
        rest = sum_subspace(subspaces[:k] + subspaces[k + 1 :])
        pp = principal_pairs(s, rest)
        if not 1 <= pair_index <= len(pp):
            raise ValueError(f"pair_index {pair_index} out of range 1..{len(pp)} for class {k + 1}")
        pair = pp[pair_index - 1]
        cols += [pair.u, pair.v]
        cosines.append(pair.cosine)
    return _finish(
        np.column_stack(cols),
        "oracle",
        per_class_cosine=tuple(cosines),
        extra={"pair_index": pair_index},
    )


def _mutually_orthogonal(xk, xbar, tol=1e-12):
    cross = xk.T @ xbar
    scale = np.linalg.norm(xk, axis=0)[:, None] * np.linalg.norm(xbar, axis=0)[None, :]
    return bool(np.all(np.abs(cross) <= tol * scale))


def _fit_class(xk, xbar, config, seed_seq, klass):
    """Alternating ridge estimate of one principal pair between span(xk) and span(xbar)."""
    rng = np.random.default_rng(seed_seq)
    solve = dict(lam=config.lam, tol=config.cg_tol, max_iter=config.cg_max_iter, full_output=True)
    for _ in range(MAX_RESTARTS + 1):
        w2 = rng.standard_normal(xbar.shape[1])
        b = xbar @ w2
        nb = np.linalg.norm(b)
        if nb <= _ZERO:
            continue
        w2 /= nb
        b /= nb
        w1 = None
        gamma_prev = None
        degenerate = False
        converged = False
        it = 0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            while it < config.iter_max:
                it += 1
                w1, _ = ridge_solve_cg(xk, b / np.linalg.norm(b), x0=w1, **solve)
                a = xk @ w1
                na = np.linalg.norm(a)
                if na <= _ZERO:
                    degenerate = True
                    break
                w2, _ = ridge_solve_cg(xbar, a / na, x0=w2, **solve)
                b = xbar @ w2
                nb = np.linalg.norm(b)
                if nb <= _ZERO:
                    degenerate = True
                    break
                gamma = abs(a @ b) / (na * nb)
                if gamma_prev is not None and abs(gamma - gamma_prev) < config.gamma_tol:
                    converged = True
                    break
                gamma_prev = gamma
        if degenerate:
            if _mutually_orthogonal(xk, xbar):
                # every unit pair is principal with cosine 0
                a_unit = xk[:, 0] / np.linalg.norm(xk[:, 0])
                b_unit = xbar[:, 0] / np.linalg.norm(xbar[:, 0])
                return a_unit, b_unit, 0.0, it, True
            continue
        a_unit = a / na
        b_unit = np.sign(a @ b or 1.0) * b / nb
        return a_unit, b_unit, float(a_unit @ b_unit), it, converged
    raise DegenerateIterateError(klass, f"zero reconstruction after {MAX_RESTARTS} restarts")


def fit_algorithm1(data: LabeledDataset, config: FitConfig = FitConfig(), workers=1) -> ProjectionModel:
    """Estimate the 2K-column projection from labeled data.

    For each class ``k`` with samples ``X_k`` and complement ``Xbar_k``, start
    from a random combination of ``Xbar_k`` and alternate

        w1 <- argmin ||X_k w1 - t2||^2 + lam ||w1||^2,     t2 = unit(Xbar_k w2)
        w2 <- argmin ||t1 - Xbar_k w2||^2 + lam ||w2||^2,  t1 = unit(X_k w1)

    until the cosine between ``X_k w1`` and ``Xbar_k w2`` changes by less
    than ``config.gamma_tol`` or ``config.iter_max`` rounds have run. The
    class plane is ``[X_k w1, Xbar_k w2]``; all planes are orthonormalized
    together.

    Classes use independent RNG streams spawned from ``config.seed``, so
    ``workers > 1`` (threads) gives exactly the sequential result.
    """
    if data.class_count < 2:
        raise ValueError("need at least two classes")
    streams = np.random.SeedSequence(config.seed).spawn(data.class_count)

    def run(k):
        return _fit_class(
            data.class_features(k), data.complement_features(k), config, streams[k - 1], k
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, data.classes))
    else:
        results = [run(k) for k in data.classes]

    cols = []
    for a, b, *_ in results:
        cols += [a, b]
    return _finish(
        np.column_stack(cols),
        "algorithm1",
        lam=config.lam,
        per_class_cosine=tuple(r[2] for r in results),
        iterations_used=tuple(r[3] for r in results),
        converged=tuple(r[4] for r in results),
        seed=config.seed,
    )


def transform(model: ProjectionModel, features) -> np.ndarray:
    """Project samples (columns, or a single vector) with ``P^T (x - mean)``."""
    x = np.asarray(features, dtype=np.float64)
    vector = x.ndim == 1
    x = as_matrix(x, "features")
    if x.shape[0] != model.ambient_dim:
        raise ValueError(f"features have {x.shape[0]} rows, model expects {model.ambient_dim}")
    if model.mean is not None:
        x = x - model.mean.reshape(-1, 1)
    y = model.matrix.T @ x
    return y[:, 0] if vector else y


def stationarity_residual(s1: Subspace, s2: Subspace, pair: PrincipalPair) -> float:
    """Gradient norm of the constrained-margin Lagrangian at ``pair``.

    With coordinates ``w1 = B1^T u`` and ``w2 = B2^T v`` and multipliers
    ``eta = (c - 1) / 2`` where ``c`` is the pair's cosine, the two gradient
    blocks reduce to ``c w1 - B1^T B2 w2`` and ``c w2 - B2^T B1 w1``. Returns
    the larger of their norms; it vanishes exactly at principal pairs.
    """
    w1 = s1.basis.T @ pair.u
    w2 = s2.basis.T @ pair.v
    g = s1.basis.T @ s2.basis
    eta = 0.5 * (pair.cosine - 1.0)
    r1 = np.linalg.norm((1 + 2 * eta) * w1 - g @ w2)
    r2 = np.linalg.norm((1 + 2 * eta) * w2 - g.T @ w1)
    return float(max(r1, r2))
