"""Distance-matrix construction and neighborhood index sets.

Supports four distance structures: 1-D lattice bands, 2-D lattice
city-block distances, scaled Euclidean distances between sensor
coordinates, and shortest-path hop counts on an unweighted graph.
Disconnected graph pairs are stored as +inf.
"""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import MissingCoordinatesError, NvarError


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric p x p matrix of non-negative distances with a zero diagonal."""

    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=float)
        if e.ndim != 2 or e.shape[0] != e.shape[1] or e.size == 0:
            raise ValueError("distance matrix must be square and non-empty")
        if np.any(np.isnan(e)):
            raise ValueError("distance matrix contains NaN")
        if np.any(e[np.isfinite(e)] < 0):
            raise ValueError("distances must be non-negative")
        if not np.array_equal(e, e.T):
            raise ValueError("distance matrix must be symmetric")
        if np.any(np.diag(e) != 0):
            raise ValueError("distance matrix must have a zero diagonal")
        object.__setattr__(self, "entries", e)

    @property
    def p(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class SensorLayout:
    """Series identifiers plus either coordinates, an adjacency matrix, or neither."""

    ids: tuple[str, ...]
    coordinates: Optional[np.ndarray] = None
    adjacency: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "ids", tuple(str(i) for i in self.ids))
        p = len(self.ids)
        if p == 0:
            raise ValueError("layout must contain at least one series")
        if self.coordinates is not None and self.adjacency is not None:
            raise ValueError("provide coordinates or adjacency, not both")
        if self.coordinates is not None:
            c = np.asarray(self.coordinates, dtype=float)
            if c.ndim != 2 or c.shape[0] != p or c.shape[1] not in (1, 2, 3):
                raise ValueError("coordinates must be p x m with m in {1,2,3}")
            if not np.all(np.isfinite(c)):
                raise ValueError("coordinates contain NaN or Inf")
            object.__setattr__(self, "coordinates", c)
        if self.adjacency is not None:
            a = np.asarray(self.adjacency, dtype=bool)
            if a.shape != (p, p):
                raise ValueError("adjacency must be p x p")
            if not np.array_equal(a, a.T) or np.any(np.diag(a)):
                raise ValueError("adjacency must be symmetric with a false diagonal")
            object.__setattr__(self, "adjacency", a)

    @property
    def p(self) -> int:
        return len(self.ids)


@dataclass(frozen=True)
class NeighborhoodIndex:
    """Per-series sorted member lists {j : d(i,j) <= radius}."""

    radius: float
    members: tuple[np.ndarray, ...]

    def sizes(self) -> np.ndarray:
        return np.array([len(m) for m in self.members])


def lattice1d_distances(p: int) -> DistanceMatrix:
    """Band distances d(i, j) = |i - j| on a 1-D lattice of p sites."""
    if p < 1:
        raise ValueError("p must be >= 1")
    idx = np.arange(p)
    return DistanceMatrix(np.abs(idx[:, None] - idx[None, :]).astype(float))


def lattice2d_distances(side: int) -> DistanceMatrix:
    """City-block distances on a side x side lattice vectorized row by row.

    Series k sits at cell (k // side, k % side).
    """
    if side < 1:
        raise ValueError("side must be >= 1")
    k = np.arange(side * side)
    rows, cols = k // side, k % side
    d = np.abs(rows[:, None] - rows[None, :]) + np.abs(cols[:, None] - cols[None, :])
    return DistanceMatrix(d.astype(float))


def euclidean_distances(layout: SensorLayout, scale="auto") -> DistanceMatrix:
    """Pairwise Euclidean distances between sensor coordinates times a scale.

    scale="auto" uses (p/2) / d_max**m with d_max the largest raw pairwise
    distance and m the coordinate dimension, which maps the spread of the
    layout onto a lattice-like range. Coincident sensors (distance 0) are
    permitted; they become mutual mandatory neighbors.
    """
    if layout.coordinates is None:
        raise MissingCoordinatesError("layout has no coordinates")
    c = layout.coordinates
    diff = c[:, None, :] - c[None, :, :]
    raw = np.sqrt(np.sum(diff * diff, axis=2))
    if scale == "auto":
        d_max = raw.max()
        if d_max == 0.0:
            factor = 1.0
        else:
            factor = (layout.p / 2.0) / d_max ** c.shape[1]
    else:
        factor = float(scale)
        if factor <= 0:
            raise ValueError("scale must be positive")
    scaled = raw * factor
    scaled = (scaled + scaled.T) / 2.0  # kill float asymmetry
    np.fill_diagonal(scaled, 0.0)
    return DistanceMatrix(scaled)


def graph_shortest_path_distances(layout: SensorLayout) -> DistanceMatrix:
    """Unweighted shortest-path hop counts via BFS from every node.

    Unreachable pairs are stored as +inf.
    """
    if layout.adjacency is None:
        raise ValueError("layout has no adjacency matrix")
    adj = layout.adjacency
    p = layout.p
    neighbors = [np.flatnonzero(adj[i]) for i in range(p)]
    dist = np.full((p, p), np.inf)
    for src in range(p):
        dist[src, src] = 0.0
        queue = deque([src])
        while queue:
            u = queue.popleft()
            du = dist[src, u]
            for v in neighbors[u]:
                if np.isinf(dist[src, v]):
                    dist[src, v] = du + 1.0
                    queue.append(v)
    dist = np.minimum(dist, dist.T)
    return DistanceMatrix(dist)


def neighborhood(d: DistanceMatrix, radius: float) -> NeighborhoodIndex:
    """Exact thresholding: members[i] = {j : d(i,j) <= radius}, sorted ascending."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    members = tuple(np.flatnonzero(row <= radius) for row in d.entries)
    return NeighborhoodIndex(radius=float(radius), members=members)


def candidate_radii(d: DistanceMatrix, tau_max: Optional[int] = None) -> list[float]:
    """Ascending distinct finite distances usable as a radius grid.

    Starts at 0 and walks the unique off-diagonal distances in ascending
    order, stopping after the first radius at which the largest
    neighborhood reaches tau_max members. tau_max defaults to floor(p/2),
    the variable-count cap used in the case study.
    """
    if tau_max is None:
        tau_max = max(1, d.p // 2)
    if tau_max < 1:
        raise ValueError("tau_max must be >= 1")
    e = d.entries
    finite = e[np.isfinite(e)]
    values = np.unique(finite)
    radii: list[float] = [0.0]
    below = (e <= 0.0)
    if below.sum(axis=1).max() >= tau_max:
        return radii
    for v in values:
        if v <= 0.0:
            continue
        radii.append(float(v))
        sizes = (e <= v).sum(axis=1)
        if sizes.max() >= tau_max:
            break
    return radii


def load_layout_csv(path) -> SensorLayout:
    """Read a layout file with header id,x,y[,z]."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[0].strip().lower() != "id":
            raise NvarError(f"{path}: expected header starting with 'id'")
        dims = len(header) - 1
        if dims not in (1, 2, 3):
            raise NvarError(f"{path}: expected 1-3 coordinate columns, got {dims}")
        ids, coords = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != dims + 1:
                raise NvarError(f"{path}:{lineno}: expected {dims + 1} fields")
            ids.append(row[0].strip())
            try:
                coords.append([float(x) for x in row[1:]])
            except ValueError as exc:
                raise NvarError(f"{path}:{lineno}: {exc}") from exc
    if not ids:
        raise NvarError(f"{path}: no data rows")
    return SensorLayout(ids=tuple(ids), coordinates=np.array(coords))


def load_distance_csv(path) -> DistanceMatrix:
    """Read a square numeric distance CSV with no header; 'inf' marks disconnection."""
    arr = np.genfromtxt(path, delimiter=",", dtype=float)
    arr = np.atleast_2d(arr)
    return DistanceMatrix(arr)


def load_adjacency_csv(path, ids: Optional[Sequence[str]] = None) -> SensorLayout:
    """Read a 0/1 square adjacency CSV with no header."""
    arr = np.atleast_2d(np.genfromtxt(path, delimiter=",", dtype=float))
    if not np.all(np.isin(arr, (0.0, 1.0))):
        raise NvarError(f"{path}: adjacency entries must be 0 or 1")
    p = arr.shape[0]
    if ids is None:
        ids = [f"s{i}" for i in range(p)]
    return SensorLayout(ids=tuple(ids), adjacency=arr.astype(bool))


def save_distance_csv(d: DistanceMatrix, path) -> None:
    np.savetxt(path, d.entries, delimiter=",", fmt="%.17g")
