import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from egmgeom.baselines import exact_meb_small
from egmgeom.errors import InsufficientPointsError, InvalidInputError
from egmgeom.geometry import (Ball, LabeledDataset, PointSet, PolytopeFit, PolytopeShape,
                              SimplexVector, data_radius, farthest_pair, pair_lower_bound)


def small_sets(max_n=10, max_d=3):
    return st.integers(1, max_d).flatmap(lambda d: st.lists(
        st.lists(st.floats(-10, 10, allow_nan=False), min_size=d, max_size=d),
        min_size=1, max_size=max_n))


class TestPointSet:
    def test_shape_and_freeze(self):
        ps = PointSet([[1, 2], [3, 4]])
        assert (ps.n, ps.d) == (2, 2)
        with pytest.raises(ValueError):
            ps.points[0, 0] = 5

    def test_one_dimensional_input_becomes_column(self):
        assert PointSet([1.0, 2.0, 3.0]).points.shape == (3, 1)

    @pytest.mark.parametrize("bad", [[], [[1, np.nan]], [[1, np.inf]], [[[1]]]])
    def test_rejects_bad(self, bad):
        with pytest.raises(InvalidInputError):
            PointSet(bad)

    def test_ragged_rejected(self):
        with pytest.raises((InvalidInputError, ValueError)):
            PointSet([[1, 2], [3]])


class TestSimplexVector:
    def test_uniform(self):
        assert np.allclose(SimplexVector.uniform(4).weights, 0.25)

    def test_tolerance(self):
        SimplexVector([0.5, 0.5 + 5e-13])
        with pytest.raises(InvalidInputError):
            SimplexVector([0.5, 0.5 + 1e-9])
        with pytest.raises(InvalidInputError):
            SimplexVector([1.5, -0.5])

    def test_clamps_tiny_negatives(self):
        w = SimplexVector([1.0, -1e-13]).weights
        assert w.min() >= 0.0


def test_ball_radius_consistency():
    b = Ball([0, 0], 2.0)
    assert abs(b.radius - math.sqrt(2.0)) <= 1e-12 * math.sqrt(2.0)
    assert b.contains(PointSet([[1, 1], [-1, 0]]))
    with pytest.raises(InvalidInputError):
        Ball([0], -1.0)


def test_polytope_shape():
    sh = PolytopeShape([[2.0, 0.0], [0.0, -1.0]], [2.0, 0.5])
    assert np.array_equal(sh.scaled_normals, np.array([[1.0, 0.0], [0.0, -2.0]]))
    assert sh.W == 2.0 and sh.m == 2 and sh.d == 2
    with pytest.raises(InvalidInputError):
        PolytopeShape([[1.0, 0.0]], [0.0])
    with pytest.raises(InvalidInputError):
        PolytopeShape([[1.0, 0.0]], [1.0, 2.0])
    cube = PolytopeShape.hypercube(3)
    assert cube.m == 6 and cube.W == 1.0


def test_polytope_fit_encloses():
    sq = PolytopeShape.hypercube(2)
    fit = PolytopeFit([1, 1], 1.0)
    assert fit.encloses(sq, PointSet([[0, 0], [2, 2]]))
    assert not PolytopeFit([1, 1], 0.9).encloses(sq, PointSet([[0, 0], [2, 2]]))


def test_labeled_dataset():
    ds = LabeledDataset([[1, 2], [3, 4]], [1, -1])
    assert np.array_equal(ds.signed_points(), [[1, 2], [-3, -4]])
    with pytest.raises(InvalidInputError):
        LabeledDataset([[1, 2]], [0])
    with pytest.raises(InvalidInputError):
        LabeledDataset([[1, 2]], [1, 1])


class TestDataRadius:
    def test_examples(self):
        assert data_radius(PointSet([[0, 0]])) == 0.0
        assert data_radius(PointSet([[3, 4], [1, 0]])) == 5.0

    def test_frozen_scan(self, frozen):
        for case in frozen["data_radius"]:
            assert data_radius(PointSet(case["X"])) == pytest.approx(case["Q"], rel=1e-14)


class TestPairLowerBound:
    def test_examples(self, frozen):
        assert pair_lower_bound(PointSet([[-1, 0], [1, 0]])) == 1.0
        case = frozen["pair_max_half"]
        assert pair_lower_bound(PointSet(case["X"])) == pytest.approx(case["P"], rel=1e-14)
        assert pair_lower_bound(PointSet([[1, 2], [1, 2], [1, 2]])) == 0.0

    def test_needs_two(self):
        with pytest.raises(InsufficientPointsError):
            pair_lower_bound(PointSet([[1, 2]]))

    def test_farthest_pair_indices(self):
        a, b = farthest_pair(PointSet([[0, 0], [5, 0], [1, 1]]))
        assert {a, b} == {0, 1}

    @given(small_sets())
    def test_below_exact_radius(self, pts):
        ps = PointSet(pts)
        oracle = exact_meb_small(ps)
        if ps.n >= 2:
            assert pair_lower_bound(ps) <= oracle.radius + 1e-9
        # triangle inequality sanity check
        assert data_radius(ps) >= oracle.radius - np.linalg.norm(oracle.center) - 1e-9

    @given(small_sets(), st.sampled_from([1e-3, 0.5, 7.0, 1e4]))
    def test_scaling(self, pts, alpha):
        ps = PointSet(pts)
        sc = ps.scaled(alpha)
        assert data_radius(sc) == pytest.approx(alpha * data_radius(ps), rel=1e-12, abs=0)
        if ps.n >= 2:
            assert pair_lower_bound(sc) == pytest.approx(alpha * pair_lower_bound(ps), rel=1e-12, abs=0)


def test_tiny_coordinates_do_not_underflow():
    ps = PointSet([[0.0, 0.0], [3e-170, 4e-170], [1e-170, 0.0]])
    assert data_radius(ps) == pytest.approx(5e-170, rel=1e-12)
    assert pair_lower_bound(ps) == pytest.approx(2.5e-170, rel=1e-12)
