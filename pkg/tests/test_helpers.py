import io

import numpy as np
import pytest

from rci_bounds.utils.helpers import convex_hull_2d, format_float, parse_vector, write_csv


def _signed_area(ring: np.ndarray) -> float:
    x, y = ring[:, 0], ring[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def test_hull_of_random_cloud_keeps_extreme_supports():
    rng = np.random.default_rng(21)
    for _ in range(50):
        cloud = rng.normal(size=(rng.integers(3, 40), 2))
        hull = convex_hull_2d(cloud)
        assert hull.shape[0] >= 3
        assert _signed_area(hull) > 0.0
        for v in hull:
            assert np.min(np.max(np.abs(cloud - v), axis=1)) == 0.0
        for z in rng.normal(size=(16, 2)):
            assert np.max(hull @ z) == pytest.approx(np.max(cloud @ z), abs=1e-12)


def test_hull_drops_interior_and_edge_points():
    square = [[0, 0], [1, 0], [1, 1], [0, 1], [0.5, 0.5], [0.5, 0.0], [0, 0]]
    hull = convex_hull_2d(square)
    assert {tuple(v) for v in hull} == {(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)}


def test_collinear_cloud_gives_endpoints():
    hull = convex_hull_2d([[0, 0], [1, 2], [0.5, 1], [-1, -2], [0.25, 0.5]])
    assert {tuple(v) for v in hull} == {(-1.0, -2.0), (1.0, 2.0)}


def test_repeated_point_gives_single_vertex():
    hull = convex_hull_2d([[0.3, -0.2]] * 4)
    np.testing.assert_array_equal(hull, [[0.3, -0.2]])


def test_hull_needs_points():
    with pytest.raises(ValueError):
        convex_hull_2d(np.empty((0, 2)))


def test_csv_cells_keep_full_precision():
    out = io.StringIO()
    write_csv(out, ["k", "alpha"], [[1, 0.1], [2, None]])
    assert out.getvalue() == "k,alpha\n1,0.10000000000000001\n2,\n"
    assert format_float(1 / 3) == "0.33333333333333331"


def test_vector_literals():
    np.testing.assert_array_equal(parse_vector("0,1.5"), [0.0, 1.5])
    np.testing.assert_array_equal(parse_vector(" 2  -1 "), [2.0, -1.0])
    with pytest.raises(ValueError):
        parse_vector(" , ")
