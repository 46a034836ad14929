"""Distance matrices, layouts, neighborhoods, and candidate radius grids."""

import numpy as np
import pytest

from nvar.errors import MissingCoordinatesError
from nvar.geometry import (DistanceMatrix, SensorLayout, candidate_radii,
                           euclidean_distances, graph_shortest_path_distances,
                           lattice1d_distances, lattice2d_distances,
                           load_distance_csv, load_layout_csv, neighborhood,
                           save_distance_csv)


def make_layout(coords):
    coords = np.asarray(coords, dtype=float)
    ids = tuple(f"s{i}" for i in range(coords.shape[0]))
    return SensorLayout(ids=ids, coordinates=coords)


def test_distance_matrix_validation():
    with pytest.raises(ValueError):
        DistanceMatrix(np.array([[0.0, 1.0], [2.0, 0.0]]))  # asymmetric
    with pytest.raises(ValueError):
        DistanceMatrix(np.array([[1.0, 1.0], [1.0, 0.0]]))  # non-zero diagonal
    with pytest.raises(ValueError):
        DistanceMatrix(np.array([[0.0, -1.0], [-1.0, 0.0]]))  # negative
    inf = float("inf")
    d = DistanceMatrix(np.array([[0.0, inf], [inf, 0.0]]))  # disconnected ok
    assert d.p == 2


def test_lattice1d_distances():
    d = lattice1d_distances(4).entries
    assert np.array_equal(d, [[0, 1, 2, 3], [1, 0, 1, 2],
                              [2, 1, 0, 1], [3, 2, 1, 0]])


def test_lattice2d_city_block_row_major():
    d = lattice2d_distances(3).entries
    # series k sits at (k // 3, k % 3); check a few hand-computed pairs
    assert d[0, 4] == 2  # (0,0) vs (1,1)
    assert d[0, 8] == 4  # (0,0) vs (2,2)
    assert d[2, 3] == 3  # (0,2) vs (1,0)
    assert d[1, 7] == 2  # (0,1) vs (2,1)


def test_euclidean_distances_fixed_scale():
    layout = make_layout([[0.0, 0.0], [3.0, 4.0], [0.0, 8.0]])
    d = euclidean_distances(layout, scale=1.0).entries
    assert d[0, 1] == pytest.approx(5.0)
    assert d[1, 2] == pytest.approx(5.0)
    assert d[0, 2] == pytest.approx(8.0)


def test_euclidean_auto_scale_factor_and_order_preservation():
    # auto scale multiplies raw distances by (p/2) / d_max^m, m = dimension
    rng = np.random.default_rng(3)
    coords = rng.uniform(0, 10, size=(12, 2))
    d = euclidean_distances(make_layout(coords), scale="auto").entries
    raw = euclidean_distances(make_layout(coords), scale=1.0).entries
    factor = (12 / 2.0) / raw.max() ** 2
    assert np.allclose(d, raw * factor)
    iu = np.triu_indices(12, 1)
    assert np.array_equal(np.argsort(d[iu]), np.argsort(raw[iu]))


def test_euclidean_requires_coordinates():
    layout = SensorLayout(ids=("a", "b"))
    with pytest.raises(MissingCoordinatesError):
        euclidean_distances(layout)


def test_graph_shortest_path_hops_and_disconnection():
    # path a-b-c plus isolated d
    adj = np.zeros((4, 4))
    adj[0, 1] = adj[1, 0] = 1
    adj[1, 2] = adj[2, 1] = 1
    layout = SensorLayout(ids=("a", "b", "c", "d"), adjacency=adj)
    d = graph_shortest_path_distances(layout).entries
    assert d[0, 2] == 2
    assert d[0, 1] == 1
    assert np.isinf(d[0, 3])


def test_neighborhood_contains_self_and_nests():
    rng = np.random.default_rng(4)
    for _ in range(50):
        p = int(rng.integers(2, 12))
        coords = rng.uniform(0, 5, size=(p, 2))
        d = euclidean_distances(make_layout(coords), scale=1.0)
        radii = sorted(rng.uniform(0, 10, size=3))
        previous = None
        for r in radii:
            nb = neighborhood(d, r)
            for i in range(p):
                members = nb.members[i]
                assert i in members
                assert np.array_equal(members, np.sort(members))
                if previous is not None:
                    assert set(previous.members[i]) <= set(members)
            previous = nb


def test_neighborhood_radius_zero_is_self_only():
    d = lattice1d_distances(5)
    nb = neighborhood(d, 0.0)
    assert all(np.array_equal(nb.members[i], [i]) for i in range(5))
    assert np.array_equal(nb.sizes(), [1] * 5)


def test_candidate_radii_1d_lattice_caps_at_half_p():
    # p=5: sizes at radii 0,1,2 are 1,3,5; tau cap p//2=2 is first
    # exceeded at radius 1, so the grid keeps one radius past it.
    assert candidate_radii(lattice1d_distances(5), tau_max=5) == [0.0, 1.0, 2.0]
    assert candidate_radii(lattice1d_distances(9)) == [0.0, 1.0, 2.0]


def test_candidate_radii_ignores_infinite_distances():
    inf = float("inf")
    d = DistanceMatrix(np.array([[0.0, 2.0, inf],
                                 [2.0, 0.0, inf],
                                 [inf, inf, 0.0]]))
    assert candidate_radii(d, tau_max=3) == [0.0, 2.0]


def test_distance_csv_round_trip(tmp_path):
    d = lattice2d_distances(3)
    path = tmp_path / "d.csv"
    save_distance_csv(d, path)
    again = load_distance_csv(path)
    assert np.array_equal(again.entries, d.entries)


def test_layout_csv_round_trip(tmp_path):
    path = tmp_path / "layout.csv"
    path.write_text("id,x,y\nup,1.0,2.5\ndown,-3.0,0.25\n")
    layout = load_layout_csv(path)
    assert layout.ids == ("up", "down")
    assert np.allclose(layout.coordinates, [[1.0, 2.5], [-3.0, 0.25]])
