"""Reference reductions: PCA and Gaussian random projection."""

import numpy as np

from .ispp import ProjectionModel
from .linalg import as_matrix, orthonormalize, thin_svd

__all__ = ["fit_pca", "fit_random_projection"]


def fit_pca(features, m) -> ProjectionModel:
    """Top-``m`` left singular vectors of the column-centered data.

    The column mean is stored on the model and subtracted by ``transform``.
    """
    x = as_matrix(features, "features")
    n, N = x.shape
    if not 1 <= m <= min(n, N):
        raise ValueError(f"m must be in 1..{min(n, N)}, got {m}")
    mean = x.mean(axis=1)
    u, s, _ = thin_svd(x - mean[:, None])
    return ProjectionModel(
        u[:, :m].copy(), "pca", mean=mean, extra={"singular_values": s[:m].tolist()}
    )


def fit_random_projection(n, m, seed=0) -> ProjectionModel:
    """Orthonormalized ``n x m`` standard Gaussian matrix."""
    if not 1 <= m <= n:
        raise ValueError(f"m must be in 1..{n}, got {m}")
    g = np.random.default_rng(seed).standard_normal((n, m))
    return ProjectionModel(orthonormalize(g, tol=1e-12), "random", seed=seed)
