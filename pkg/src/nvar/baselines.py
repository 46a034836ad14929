"""Comparison methods: banded VAR over a 1-D ordering and per-row lasso.

The banded VAR delegates to the neighborhood machinery over the band
metric |i - j| after permuting the series, which makes the 1-D lattice
equivalence hold by construction. The lasso solves each row's full
regression (all p series at all q lags) by cyclic coordinate descent
with soft thresholding; the inner sweeps are numba-compiled because a
regularization path over 100+ rows is run inside Monte Carlo loops.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from numba import njit

from . import linalg
from .errors import MissingCoordinatesError
from .estimation import (
    FitReport,
    build_design,
    default_penalty_multiplier,
    select_neighborhood,
)
from .geometry import DistanceMatrix, SensorLayout, lattice1d_distances
from .model import NvarModel, SeriesPanel

ORDERING_KINDS = ("identity", "longitude", "latitude", "pca1", "pca2", "custom")


@dataclass(frozen=True)
class LassoConfig:
    """Regularization-path settings for the per-row lasso."""

    n_lambdas: int = 50
    lambda_min_ratio: float = 1e-3
    max_iter: int = 10_000
    tol: float = 1e-7
    selection: str = "aic"  # "aic", "bic", or "fixed"
    fixed_lambda: Optional[float] = None
    c_n: Optional[float] = None  # penalty multiplier override for lambda selection

    def __post_init__(self):
        if self.n_lambdas < 1 or not (0 < self.lambda_min_ratio < 1):
            raise ValueError("invalid lambda grid settings")
        if self.selection not in ("aic", "bic", "fixed"):
            raise ValueError("selection must be 'aic', 'bic', or 'fixed'")
        if self.selection == "fixed" and self.fixed_lambda is None:
            raise ValueError("fixed selection requires fixed_lambda")


def _principal_axes(coords: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form eigenvectors of the 2x2 covariance of mean-centered coordinates."""
    c = coords - coords.mean(axis=0)
    cxx = float(c[:, 0] @ c[:, 0])
    cyy = float(c[:, 1] @ c[:, 1])
    cxy = float(c[:, 0] @ c[:, 1])
    theta = 0.5 * math.atan2(2.0 * cxy, cxx - cyy)
    v1 = np.array([math.cos(theta), math.sin(theta)])
    v2 = np.array([-math.sin(theta), math.cos(theta)])
    # v1 maximizes the quadratic form when cxx - cyy aligned; verify and swap if not.
    q1 = v1 @ np.array([[cxx, cxy], [cxy, cyy]]) @ v1
    q2 = v2 @ np.array([[cxx, cxy], [cxy, cyy]]) @ v2
    if q2 > q1:
        v1, v2 = v2, v1
    return v1, v2


def order_series(
    layout: SensorLayout,
    strategy: str,
    permutation: Optional[Sequence[int]] = None,
) -> np.ndarray:
    """Permutation placing the series on a 1-D lattice for the banded VAR.

    Returns an array perm where perm[k] is the original index of the series
    in lattice position k. Ties break by original index (stable sort).
    """
    if strategy not in ORDERING_KINDS:
        raise ValueError(f"unknown ordering strategy {strategy!r}")
    p = layout.p
    if strategy == "identity":
        return np.arange(p)
    if strategy == "custom":
        perm = np.asarray(permutation, dtype=int)
        if sorted(perm.tolist()) != list(range(p)):
            raise ValueError("custom permutation must be a bijection on 0..p-1")
        return perm
    if layout.coordinates is None or layout.coordinates.shape[1] != 2:
        raise MissingCoordinatesError(
            f"{strategy} ordering requires 2-D coordinates"
        )
    coords = layout.coordinates
    if strategy == "longitude":
        keys = coords[:, 0]
    elif strategy == "latitude":
        keys = coords[:, 1]
    else:
        v1, v2 = _principal_axes(coords)
        axis = v1 if strategy == "pca1" else v2
        keys = (coords - coords.mean(axis=0)) @ axis
    return np.argsort(keys, kind="stable")


def fit_bvar(
    panel: SeriesPanel,
    layout: SensorLayout,
    strategy: str,
    q: int,
    bandwidth_grid: Sequence[float],
    c_n: Optional[float] = None,
    permutation: Optional[Sequence[int]] = None,
    prune: bool = False,
) -> tuple[NvarModel, FitReport]:
    """Banded VAR: permute the series, select a bandwidth on the |i-j| metric,
    then express the fitted coefficients in the original series order."""
    perm = order_series(layout, strategy, permutation)
    permuted = SeriesPanel(values=panel.values[perm])
    band = lattice1d_distances(panel.p)
    report = select_neighborhood(permuted, band, q, bandwidth_grid, c_n=c_n, prune=prune)
    # Pull both the coefficients and the band metric back to original indices.
    coeffs = []
    for a_perm in report.coeffs:
        a = np.zeros_like(a_perm)
        a[np.ix_(perm, perm)] = a_perm
        coeffs.append(a)
    dist = np.zeros((panel.p, panel.p))
    dist[np.ix_(perm, perm)] = band.entries
    model = NvarModel(
        coeffs=tuple(coeffs),
        radius=report.d_hat,
        distance=DistanceMatrix(dist),
    )
    return model, report


@njit(cache=True)
def _cd_sweeps(gram, rho, beta, lam, max_iter, tol):
    """Cyclic coordinate descent on standardized columns (diag(gram) may vary).

    gram = Xs'Xs / n, rho = Xs'y / n. Returns the sweep count; negative
    means the iteration cap was hit.
    """
    k = beta.shape[0]
    for sweep in range(max_iter):
        max_delta = 0.0
        for j in range(k):
            gjj = gram[j, j]
            if gjj <= 0.0:
                continue
            grad = rho[j]
            for m in range(k):
                grad -= gram[j, m] * beta[m]
            z = beta[j] * gjj + grad
            if z > lam:
                new = (z - lam) / gjj
            elif z < -lam:
                new = (z + lam) / gjj
            else:
                new = 0.0
            delta = abs(new - beta[j])
            if delta > max_delta:
                max_delta = delta
            beta[j] = new
        if max_delta < tol:
            return sweep + 1
    return -max_iter


def lasso_row(
    x: np.ndarray,
    y: np.ndarray,
    lam: float,
    config: LassoConfig = LassoConfig(),
) -> np.ndarray:
    """Minimize (1/(2n)) ||y - x beta||^2 + lam * ||beta||_1.

    Columns are scaled to unit root-mean-square internally (no centering;
    the model is zero-mean) and the returned coefficients are expressed on
    the original scale.
    """
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    n = x.shape[0]
    scale = np.sqrt(np.mean(x * x, axis=0))
    safe = np.where(scale > 0, scale, 1.0)
    xs = x / safe
    gram = xs.T @ xs / n
    rho = xs.T @ y / n
    beta = np.zeros(x.shape[1])
    _cd_sweeps(gram, rho, beta, float(lam), int(config.max_iter), float(config.tol))
    return beta / safe


def lasso_objective(x: np.ndarray, y: np.ndarray, beta: np.ndarray, lam: float) -> float:
    resid = y - x @ beta
    return float(resid @ resid) / (2 * len(y)) + lam * float(np.abs(beta).sum())


def lambda_max(x: np.ndarray, y: np.ndarray) -> float:
    """Smallest lambda at which the lasso solution is identically zero
    (computed on unit-RMS standardized columns)."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    scale = np.sqrt(np.mean(x * x, axis=0))
    safe = np.where(scale > 0, scale, 1.0)
    return float(np.max(np.abs((x / safe).T @ np.asarray(y, float))) / n)


def _lambda_grid(lam_max: float, config: LassoConfig) -> np.ndarray:
    if lam_max <= 0:
        return np.array([0.0])
    return np.geomspace(lam_max, lam_max * config.lambda_min_ratio, config.n_lambdas)


def fit_lasso(
    panel: SeriesPanel,
    q: int,
    config: LassoConfig = LassoConfig(),
) -> tuple[tuple[np.ndarray, ...], dict]:
    """Per-row lasso over the full design (all p series at lags 1..q).

    Each row runs a warm-started path over a descending lambda grid; the
    per-row lambda is picked by an information criterion with degrees of
    freedom equal to the non-zero count (selection="aic" or "bic") or held
    fixed (selection="fixed").  Returns dense coefficient matrices A_1..A_q
    plus path diagnostics.
    """
    p, n = panel.p, panel.n
    members = np.arange(p)
    log_pn = math.log(max(p, n))
    if config.c_n is not None:
        c_n = config.c_n
    elif config.selection == "bic":
        c_n = default_penalty_multiplier(n)
    else:
        c_n = 2.0 / log_pn  # AIC: penalty of 2 per active coefficient
    coeffs = tuple(np.zeros((p, p)) for _ in range(q))
    chosen = np.zeros(p)
    nnz_counts = np.zeros(p, dtype=int)
    # The design is shared across rows: standardize once, one Gram matrix.
    x, _ = build_design(panel, members, q, 0, allow_underdetermined=True)
    scale = np.sqrt(np.mean(x * x, axis=0))
    safe = np.where(scale > 0, scale, 1.0)
    xs = x / safe
    rows = xs.shape[0]
    gram = xs.T @ xs / rows
    path_rows = []
    for i in range(p):
        y = panel.values[i, q:][::-1]
        rho = xs.T @ y / rows
        lam_max = float(np.max(np.abs(rho)))
        if config.selection == "fixed":
            grid = np.array([float(config.fixed_lambda)])
        else:
            grid = _lambda_grid(lam_max, config)
        beta = np.zeros(q * p)
        best_bic = np.inf
        best_beta = beta.copy()
        best_lam = grid[0]
        for lam in grid:
            _cd_sweeps(gram, rho, beta, float(lam), int(config.max_iter), float(config.tol))
            resid = y - xs @ beta
            rss = float(resid @ resid)
            df = int(np.count_nonzero(beta))
            score = (-np.inf if rss <= 1e-300
                     else math.log(rss) + df * c_n * log_pn / n)
            path_rows.append((i, float(lam), df, score))
            if score < best_bic:
                best_bic, best_beta, best_lam = score, beta.copy(), float(lam)
        chosen[i] = best_lam
        nnz_counts[i] = int(np.count_nonzero(best_beta))
        unscaled = best_beta / safe
        for r in range(q):
            coeffs[r][i, :] = unscaled[r * p:(r + 1) * p]
    details = {
        "chosen_lambda": chosen,
        "nonzeros": nnz_counts,
        "path": path_rows,
        "c_n": c_n,
    }
    return coeffs, details
