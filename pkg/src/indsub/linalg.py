"""Dense linear-algebra kernels shared by the rest of the package.

Matrices are plain float64 ``numpy.ndarray`` objects; samples are stored as
columns throughout.
"""

from __future__ import annotations

import warnings
from typing import NamedTuple

import numpy as np

__all__ = [
    "SVDConvergenceError",
    "RankDeficiencyError",
    "CGConvergenceWarning",
    "SvdResult",
    "CGInfo",
    "as_matrix",
    "thin_svd",
    "orthonormalize",
    "ridge_solve_cg",
    "numerical_rank",
]

SVD_TOL = 1e-10
CG_TOL = 1e-10
RANK_TOL = 1e-8


class SVDConvergenceError(np.linalg.LinAlgError):
    """The SVD iteration did not converge."""


class RankDeficiencyError(np.linalg.LinAlgError):
    """Raised when a matrix has no usable column space."""


class CGConvergenceWarning(RuntimeWarning):
    """Conjugate gradient stopped at ``max_iter`` above the requested tolerance."""


class SvdResult(NamedTuple):
    u: np.ndarray
    s: np.ndarray
    v: np.ndarray


class CGInfo(NamedTuple):
    converged: bool
    iterations: int
    residual: float  # relative normal-equation residual


def as_matrix(a, name="a") -> np.ndarray:
    """Return ``a`` as a finite 2-D float64 array with at least one row and column."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim == 1:
        m = m[:, None]
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {m.shape}")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"{name} must have at least one row and column, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains NaN or Inf")
    return m


def _fix_signs(u, v):
    # first non-negligible entry of every left singular vector is made positive
    for j in range(u.shape[1]):
        col = u[:, j]
        nz = np.flatnonzero(np.abs(col) > 1e-14)
        if nz.size and col[nz[0]] < 0:
            u[:, j] = -col
            v[:, j] = -v[:, j]
    return u, v


def thin_svd(a) -> SvdResult:
    """Economy SVD ``a = u @ diag(s) @ v.T`` with a deterministic sign convention.

    ``u`` is ``m x k`` and ``v`` is ``n x k`` with ``k = min(m, n)``; ``s`` is
    nonincreasing. The first non-negligible entry of each column of ``u`` is
    nonnegative (``v`` is flipped along with it).
    """
    a = as_matrix(a)
    try:
        u, s, vt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise SVDConvergenceError(f"SVD did not converge for a {a.shape} matrix") from exc
    u, v = _fix_signs(np.array(u), np.array(vt.T))
    return SvdResult(u, s, v)


def orthonormalize(a, tol=RANK_TOL) -> np.ndarray:
    """Orthonormal basis for the column space of ``a``, keeping column order.

    Classical Gram-Schmidt with one full re-orthogonalization pass. A column
    whose residual norm (after removing the already accepted directions) is
    below ``tol`` is dropped, so the result is rank revealing.
    """
    a = as_matrix(a)
    n, p = a.shape
    q = np.empty((n, 0))
    for j in range(p):
        v = a[:, j].copy()
        for _ in range(2):
            v -= q @ (q.T @ v)
        r = np.linalg.norm(v)
        if r < tol:
            continue
        q = np.column_stack([q, v / r])
    if q.shape[1] == 0:
        raise RankDeficiencyError("all columns were dropped; input has no column space")
    return q


def ridge_solve_cg(a, b, lam=0.0, tol=CG_TOL, max_iter=None, x0=None, full_output=False):
    """Solve ``min_w ||a w - b||^2 + lam ||w||^2`` by conjugate gradient.

    The iteration runs on the normal equations ``(a^T a + lam I) w = a^T b``
    without forming ``a^T a`` (CGLS form). It stops once the normal-equation
    residual drops to ``tol * ||a^T b||``. With ``lam = 0`` and a
    rank-deficient ``a`` the zero-start iterate converges to the minimum-norm
    least-squares solution.

    If ``max_iter`` is hit first the best iterate seen is returned and a
    :class:`CGConvergenceWarning` is issued. With ``full_output=True`` a
    ``(w, CGInfo)`` tuple is returned instead of ``w``.
    """
    a = as_matrix(a)
    m, n = a.shape
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if b.shape[0] != m:
        raise ValueError(f"b has length {b.shape[0]}, expected {m}")
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    if max_iter is None:
        max_iter = max(10 * n, 100)

    rhs = a.T @ b
    rhs_norm = np.linalg.norm(rhs)
    w = np.zeros(n) if x0 is None else np.array(x0, dtype=np.float64).reshape(-1)
    if rhs_norm == 0.0:
        # the minimizer is zero regardless of x0 when lam > 0; for lam = 0 zero is the min-norm one
        info = CGInfo(True, 0, 0.0)
        return (np.zeros(n), info) if full_output else np.zeros(n)

    at = a.T
    r = b - a @ w
    s = at @ r - lam * w if lam else at @ r
    p = s
    gamma = s @ s
    target = (tol * rhs_norm) ** 2
    best_w, best_gamma = w, gamma
    it = 0
    # w, r, s, p are rebound (never mutated), so best_w needs no copy
    while best_gamma > target and it < max_iter:
        q = a @ p
        denom = q @ q + lam * (p @ p)
        if denom <= 0.0:
            break
        alpha = gamma / denom
        w = w + alpha * p
        r = r - alpha * q
        s = at @ r - lam * w if lam else at @ r
        gamma_new = s @ s
        it += 1
        if gamma_new < best_gamma:
            best_w, best_gamma = w, gamma_new
        p = s + (gamma_new / gamma) * p
        gamma = gamma_new

    best_res = np.sqrt(best_gamma) / rhs_norm
    converged = best_res <= tol
    if not converged:
        warnings.warn(
            f"CG stopped after {it} iterations at relative residual {best_res:.3e} > {tol:.1e}",
            CGConvergenceWarning,
            stacklevel=2,
        )
    if full_output:
        return best_w, CGInfo(bool(converged), it, float(best_res))
    return best_w


def numerical_rank(a, rel_tol=RANK_TOL) -> int:
    """Number of singular values above ``rel_tol`` times the largest one."""
    s = thin_svd(a).s
    if s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rel_tol * s[0]))
