"""NVAR(q) model representation, simulation, and random-model generators.

Coefficient matrices are dense p x p numpy arrays that are zero outside
each series' neighborhood at the model radius. Simulation iterates the
autoregression from a zero initial state with i.i.d. Gaussian noise;
panels are reproducible bit-for-bit from (model, noise, n, burn_in, seed)
because the generator is numpy's seeded PCG64.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import linalg
from .errors import NonStationaryModelError, NvarError
from .geometry import (
    DistanceMatrix,
    SensorLayout,
    euclidean_distances,
    lattice1d_distances,
    lattice2d_distances,
    neighborhood,
)

DEFAULT_BURN_IN = 200


@dataclass(frozen=True)
class NvarModel:
    """Lag order q, coefficient matrices A_1..A_q, radius, and distance matrix."""

    coeffs: tuple[np.ndarray, ...]
    radius: float
    distance: DistanceMatrix

    def __post_init__(self):
        coeffs = tuple(np.asarray(a, dtype=float) for a in self.coeffs)
        if not coeffs:
            raise ValueError("at least one coefficient matrix required")
        p = self.distance.p
        for a in coeffs:
            if a.shape != (p, p):
                raise ValueError(f"coefficient matrix shape {a.shape} != ({p}, {p})")
            if not np.all(np.isfinite(a)):
                raise ValueError("coefficient matrix contains NaN or Inf")
        allowed = self.distance.entries <= self.radius
        for a in coeffs:
            if np.any(a[~allowed] != 0.0):
                raise ValueError("non-zero coefficient outside the model neighborhood")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def p(self) -> int:
        return self.distance.p

    @property
    def q(self) -> int:
        return len(self.coeffs)

    def to_json(self, path) -> None:
        doc = {
            "p": self.p,
            "q": self.q,
            "radius": self.radius,
            "distance": self.distance.entries.tolist(),
            "coeffs": [a.tolist() for a in self.coeffs],
        }
        with open(path, "w") as fh:
            json.dump(doc, fh)

    @classmethod
    def from_json(cls, path) -> "NvarModel":
        with open(path) as fh:
            doc = json.load(fh)
        dist = DistanceMatrix(np.array(doc["distance"], dtype=float))
        coeffs = tuple(np.array(a, dtype=float) for a in doc["coeffs"])
        return cls(coeffs=coeffs, radius=float(doc["radius"]), distance=dist)


@dataclass(frozen=True)
class SeriesPanel:
    """p x n observation matrix; no missing values admitted."""

    values: np.ndarray
    ids: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.size == 0:
            raise ValueError("panel must be a non-empty p x n array")
        if not np.all(np.isfinite(v)):
            raise ValueError("panel contains NaN or Inf")
        object.__setattr__(self, "values", v)
        if self.ids is not None:
            ids = tuple(str(i) for i in self.ids)
            if len(ids) != v.shape[0]:
                raise ValueError("ids length must equal the number of series")
            object.__setattr__(self, "ids", ids)

    @property
    def p(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    def series_ids(self) -> tuple[str, ...]:
        if self.ids is not None:
            return self.ids
        return tuple(f"s{i}" for i in range(self.p))

    def to_csv(self, path) -> None:
        """Write rows = time, columns = series, header = ids."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.series_ids())
            for t in range(self.n):
                writer.writerow(format(x, ".17g") for x in self.values[:, t])

    @classmethod
    def from_csv(cls, path) -> "SeriesPanel":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise NvarError(f"{path}: empty panel file")
            rows = []
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != len(header):
                    raise NvarError(f"{path}:{lineno}: expected {len(header)} fields")
                try:
                    rows.append([float(x) for x in row])
                except ValueError as exc:
                    raise NvarError(f"{path}:{lineno}: {exc}") from exc
        if not rows:
            raise NvarError(f"{path}: no observations")
        return cls(values=np.array(rows).T, ids=tuple(header))


@dataclass(frozen=True)
class NoiseSpec:
    """Isotropic Gaussian noise with covariance sigma_e**2 * I_p."""

    sigma_e: float

    def __post_init__(self):
        if not np.isfinite(self.sigma_e) or self.sigma_e <= 0:
            raise ValueError("sigma_e must be finite and positive")


def companion_form(model: NvarModel) -> np.ndarray:
    """qp x qp block matrix: A_1..A_q across the top, identities on the subdiagonal."""
    p, q = model.p, model.q
    a = np.zeros((q * p, q * p))
    for r, mat in enumerate(model.coeffs):
        a[:p, r * p:(r + 1) * p] = mat
    for r in range(1, q):
        a[r * p:(r + 1) * p, (r - 1) * p:r * p] = np.eye(p)
    return a


def simulate(
    model: NvarModel,
    noise: NoiseSpec,
    n: int,
    burn_in: int = DEFAULT_BURN_IN,
    seed: int = 0,
    init: str = "zero",
) -> SeriesPanel:
    """Iterate the autoregression and keep the last n columns.

    init="zero" starts from a zero state, so the whole panel scales linearly
    with sigma_e.  init="unit" draws the q starting columns from a standard
    normal regardless of sigma_e, so low-noise panels carry a decaying
    unit-scale transient (use burn_in=0 to keep it inside the sample).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if burn_in < 0:
        raise ValueError("burn_in must be >= 0")
    if init not in ("zero", "unit"):
        raise ValueError("init must be 'zero' or 'unit'")
    ok, bound = linalg.stationarity_margin(companion_form(model))
    if not ok:
        raise NonStationaryModelError(f"spectral-radius bound {bound:.4f} >= 1")
    p, q = model.p, model.q
    total = burn_in + n
    rng = np.random.default_rng(seed)
    y = np.zeros((p, total + q))  # q leading columns hold the initial state
    if init == "unit":
        y[:, :q] = rng.standard_normal((p, q))
    e = noise.sigma_e * rng.standard_normal((p, total))
    for t in range(total):
        acc = e[:, t].copy()
        for r, a in enumerate(model.coeffs, start=1):
            acc += a @ y[:, q + t - r]
        y[:, q + t] = acc
    return SeriesPanel(values=y[:, q + burn_in:])


def _fill_and_rescale(support: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Uniform[-1,1] entries on the support, rescaled to spectral norm u ~ U[0.3, 0.9]."""
    a = np.zeros(support.shape)
    nnz = int(support.sum())
    a[support] = rng.uniform(-1.0, 1.0, size=nnz)
    u = rng.uniform(0.3, 0.9)
    norm = linalg.spectral_norm(a)
    if norm == 0.0:
        return a
    return a * (u / norm)


def generate_case1(p: int, d0: int, seed: int = 0) -> NvarModel:
    """Banded lag-1 model on a 1-D lattice: support {|i-j| <= d0}."""
    if p < 1 or d0 < 0:
        raise ValueError("require p >= 1 and d0 >= 0")
    dist = lattice1d_distances(p)
    support = dist.entries <= d0
    rng = np.random.default_rng(seed)
    a = _fill_and_rescale(support, rng)
    return NvarModel(coeffs=(a,), radius=float(d0), distance=dist)


def generate_case2(side: int, d0: int, seed: int = 0) -> NvarModel:
    """Block-banded lag-1 model: city-block neighborhoods on a side x side lattice."""
    if side < 1 or d0 < 0:
        raise ValueError("require side >= 1 and d0 >= 0")
    dist = lattice2d_distances(side)
    support = dist.entries <= d0
    rng = np.random.default_rng(seed)
    a = _fill_and_rescale(support, rng)
    return NvarModel(coeffs=(a,), radius=float(d0), distance=dist)


def generate_case3(p: int, d0_steps: int, seed: int = 0) -> tuple[SensorLayout, NvarModel]:
    """Random spatial lag-1 model: p uniform points on a square sized so that
    the expected neighbor count within unit radius is about 4.

    The square side is sqrt(p * pi / 4): intensity p / side**2 times the
    unit-disc area pi then equals 4. Support = Euclidean neighborhoods at
    radius d0_steps * 1.0 with unscaled distances.
    """
    if p < 2 or d0_steps < 0:
        raise ValueError("require p >= 2 and d0_steps >= 0")
    rng = np.random.default_rng(seed)
    side = np.sqrt(p * np.pi / 4.0)
    coords = rng.uniform(0.0, side, size=(p, 2))
    layout = SensorLayout(ids=tuple(f"s{i}" for i in range(p)), coordinates=coords)
    dist = euclidean_distances(layout, scale=1.0)
    radius = float(d0_steps)
    support = dist.entries <= radius
    a = _fill_and_rescale(support, rng)
    return layout, NvarModel(coeffs=(a,), radius=radius, distance=dist)
