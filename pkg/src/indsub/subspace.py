"""Linear subspaces, margins, principal vector pairs and synthetic unions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import LabeledDataset
from .linalg import RANK_TOL, as_matrix, numerical_rank, orthonormalize, thin_svd

__all__ = [
    "Subspace",
    "PrincipalPair",
    "cosine",
    "margin",
    "principal_pairs",
    "sum_subspace",
    "is_independent",
    "synth_union",
]


@dataclass(frozen=True, eq=False)
class Subspace:
    """Subspace of R^n given by an orthonormal basis (n x d)."""

    basis: np.ndarray

    def __post_init__(self):
        b = as_matrix(self.basis, "basis")
        n, d = b.shape
        if d > n:
            raise ValueError(f"basis has more columns ({d}) than rows ({n})")
        if not np.allclose(b.T @ b, np.eye(d), rtol=0.0, atol=1e-10):
            raise ValueError("basis columns are not orthonormal")
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @classmethod
    def from_span(cls, a, tol=RANK_TOL) -> "Subspace":
        """Subspace spanned by the columns of ``a`` (dependent columns dropped)."""
        return cls(orthonormalize(a, tol))

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def project(self, x):
        return self.basis @ (self.basis.T @ x)

    def residual(self, x):
        """Norm of the component of ``x`` orthogonal to the subspace (per column)."""
        x = np.asarray(x, dtype=np.float64)
        return np.linalg.norm(x - self.project(x), axis=0)


@dataclass(frozen=True, eq=False)
class PrincipalPair:
    """Unit vectors ``u`` (first subspace) and ``v`` (second) with ``cosine = u.v``."""

    u: np.ndarray
    v: np.ndarray
    cosine: float
    index: int = 1


def cosine(x, y) -> float:
    x = np.ravel(x)
    y = np.ravel(y)
    return float(x @ y / (np.linalg.norm(x) * np.linalg.norm(y)))


def _check_ambient(*subspaces):
    dims = {s.ambient_dim for s in subspaces}
    if len(dims) > 1:
        raise ValueError(f"ambient dimension mismatch: {sorted(dims)}")


def margin(s1: Subspace, s2: Subspace) -> float:
    """Largest cosine between unit vectors of ``s1`` and ``s2``, in [0, 1]."""
    _check_ambient(s1, s2)
    s = thin_svd(s1.basis.T @ s2.basis).s
    return float(np.clip(s[0], 0.0, 1.0))


def principal_pairs(s1: Subspace, s2: Subspace) -> list[PrincipalPair]:
    """All ``min(d1, d2)`` principal vector pairs, cosines nonincreasing.

    From the SVD ``U S V^T`` of the cross-Gram ``B1^T B2``: the i-th pair is
    ``(B1 U[:, i], B2 V[:, i])`` with cosine ``S[i]``.
    """
    _check_ambient(s1, s2)
    u, s, v = thin_svd(s1.basis.T @ s2.basis)
    left = s1.basis @ u
    right = s2.basis @ v
    left /= np.linalg.norm(left, axis=0)
    right /= np.linalg.norm(right, axis=0)
    return [
        PrincipalPair(left[:, i], right[:, i], float(np.clip(s[i], 0.0, 1.0)), i + 1)
        for i in range(s.shape[0])
    ]


def sum_subspace(subspaces, tol=RANK_TOL) -> Subspace:
    subspaces = list(subspaces)
    if not subspaces:
        raise ValueError("need at least one subspace")
    _check_ambient(*subspaces)
    return Subspace(orthonormalize(np.hstack([s.basis for s in subspaces]), tol))


def is_independent(subspaces, rel_tol=RANK_TOL) -> bool:
    """True when the dimension of the sum equals the sum of the dimensions."""
    subspaces = list(subspaces)
    if not subspaces:
        return True
    _check_ambient(*subspaces)
    stacked = np.hstack([s.basis for s in subspaces])
    return numerical_rank(stacked, rel_tol) == sum(s.dim for s in subspaces)


def synth_union(n, dims, samples_per_class, noise_sigma=0.0, seed=0):
    """Sample a labeled union of random subspaces.

    Each class basis is an orthonormalized standard Gaussian ``n x d`` matrix.
    A sample is ``B g`` for standard Gaussian ``g``, scaled to unit length,
    plus isotropic Gaussian noise with per-coordinate standard deviation
    ``noise_sigma / sqrt(n)`` (so the noise norm is about ``noise_sigma``),
    then renormalized to unit length.

    Returns ``(dataset, subspaces)``; both are fully determined by ``seed``.
    """
    dims = [int(d) for d in dims]
    if not dims or min(dims) < 1:
        raise ValueError("dims must be a nonempty list of positive integers")
    if sum(dims) > n:
        raise ValueError(f"sum of dims ({sum(dims)}) exceeds ambient dimension {n}")
    if samples_per_class < 1:
        raise ValueError("samples_per_class must be >= 1")
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be nonnegative")

    rng = np.random.default_rng(seed)
    subspaces = [Subspace(orthonormalize(rng.standard_normal((n, d)))) for d in dims]
    blocks = []
    for s in subspaces:
        x = s.basis @ rng.standard_normal((s.dim, samples_per_class))
        x /= np.linalg.norm(x, axis=0)
        if noise_sigma > 0:
            x = x + (noise_sigma / np.sqrt(n)) * rng.standard_normal(x.shape)
            x /= np.linalg.norm(x, axis=0)
        blocks.append(x)
    labels = np.repeat(np.arange(1, len(dims) + 1), samples_per_class)
    return LabeledDataset(np.hstack(blocks), labels, len(dims)), subspaces
