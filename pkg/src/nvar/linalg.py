"""Dense-matrix primitives: least squares, norms, spectral-radius bound.

All functions are pure and operate on plain numpy arrays; none of them
mutates its inputs, so they are safe to call from concurrent workers.
"""

from __future__ import annotations

import warnings

import numpy as np

from .errors import NonConvergenceWarning, RankDeficientError

RANK_TOL = 1e-10
POWER_TOL = 1e-12
POWER_MAX_ITER = 10_000


def _as_finite_2d(a, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.size == 0:
        raise ValueError(f"{name} must be a non-empty 2-D array")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains NaN or Inf")
    return a


def least_squares_solve(x, y) -> np.ndarray:
    """Solve min_beta ||y - x @ beta||_2 by QR factorization.

    Raises RankDeficientError when the smallest diagonal of the triangular
    factor falls below RANK_TOL times the largest, which signals collinear
    regressors or a design with too many columns for the sample size.
    """
    x = _as_finite_2d(x, "design matrix")
    y = np.asarray(y, dtype=float).ravel()
    n, k = x.shape
    if y.shape[0] != n:
        raise ValueError(f"response length {y.shape[0]} != design rows {n}")
    if n < k:
        raise ValueError(f"underdetermined system: {n} rows < {k} columns")
    if not np.all(np.isfinite(y)):
        raise ValueError("response contains NaN or Inf")
    q, r = np.linalg.qr(x)
    diag = np.abs(np.diag(r))
    largest = diag.max()
    if largest == 0.0 or diag.min() < RANK_TOL * largest:
        raise RankDeficientError(
            f"rank-deficient design: min |R_ii| = {diag.min():.3e}, max = {largest:.3e}"
        )
    return np.linalg.solve(r, q.T @ y)


def frobenius_norm(a) -> float:
    """Square root of the sum of squared entries."""
    a = _as_finite_2d(a)
    return float(np.sqrt(np.sum(a * a)))


def _power_iteration(gram: np.ndarray, v: np.ndarray, tol: float, max_iter: int):
    """Power iteration on a symmetric PSD matrix; returns (eigval, vec, converged)."""
    lam = 0.0
    for _ in range(max_iter):
        w = gram @ v
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            return 0.0, v, True
        v = w / nw
        if abs(nw - lam) <= tol * max(nw, 1e-300):
            return nw, v, True
        lam = nw
    return lam, v, False


def spectral_norm(a, tol: float = POWER_TOL, max_iter: int = POWER_MAX_ITER) -> float:
    """Largest singular value via power iteration on A^T A.

    Start vector is the normalized all-ones vector; after stagnation the
    iterate is deterministically perturbed and iteration resumes, which
    guards against a start vector orthogonal to the top singular direction.
    Emits NonConvergenceWarning (and returns the best estimate) if the
    iteration cap is reached.
    """
    a = _as_finite_2d(a)
    # Work with the smaller Gram matrix.
    gram = a @ a.T if a.shape[0] <= a.shape[1] else a.T @ a
    m = gram.shape[0]
    v = np.ones(m) / np.sqrt(m)
    lam, v, ok = _power_iteration(gram, v, tol, max_iter)
    # Deterministic restart: perturb and re-converge; keeps the larger estimate.
    rng = np.random.default_rng(0)
    v2 = v + 0.5 * rng.standard_normal(m)
    nv2 = float(np.linalg.norm(v2))
    if nv2 > 0.0:
        lam2, _, ok2 = _power_iteration(gram, v2 / nv2, tol, max_iter)
        if lam2 > lam:
            lam, ok = lam2, ok2
    if not ok:
        warnings.warn(
            "power iteration hit the iteration cap; returning best estimate",
            NonConvergenceWarning,
            stacklevel=2,
        )
    return float(np.sqrt(max(lam, 0.0)))


def stationarity_margin(a_tilde) -> tuple[bool, float]:
    """Upper bound on the spectral radius via min_m ||A^m||_2^(1/m), m in {1,2,4,8,16,32}.

    Returns (is_stationary, bound) where is_stationary means bound < 1.
    The bound is valid because rho(A) <= ||A^m||^(1/m) for every m >= 1.
    """
    a = _as_finite_2d(a_tilde, "companion matrix")
    if a.shape[0] != a.shape[1]:
        raise ValueError("stationarity check requires a square matrix")
    bound = spectral_norm(a)
    power = a
    m = 1
    while m < 32:
        power = power @ power
        m *= 2
        if not np.all(np.isfinite(power)):
            break  # overflow: larger powers cannot tighten the bound
        if np.all(power == 0.0):
            bound = 0.0
            break
        bound = min(bound, spectral_norm(power) ** (1.0 / m))
    return bool(bound < 1.0), float(bound)
