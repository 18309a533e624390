#!/usr/bin/env python3
"""
Unit tests for index sets, matrices and cell geometry.
"""
import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from core.lattice import (
    DyadicIndex,
    ShearIndex,
    apply_BA,
    apply_invAB,
    cell_index,
    cell_of,
    cell_volume,
    dilation_matrix,
    enumerate_shears,
    forward_matrix,
    grid_cell_index,
    inverse_contraction,
    inverse_matrix,
    min_expansion,
    nested_ellipsoid_constant,
    shear_count,
    shear_matrix,
    translations,
)


class TestMatrices:
    """Test suite for dilation and shear matrices."""

    def test_dilation_examples(self):
        """Test A^j places 4^j on the cone axis."""
        assert_array_equal(dilation_matrix(1, 1, 2), np.diag([4, 2]))
        assert_array_equal(dilation_matrix(3, 2, 3), np.diag([4, 4, 16]))

    def test_shear_examples(self):
        """Test B^[l] carries the shear vector in the cone row."""
        assert_array_equal(shear_matrix(1, (1,), 2), [[1, 1], [0, 1]])
        assert_array_equal(shear_matrix(3, (1, 2), 3), [[1, 0, 0], [0, 1, 0], [1, 2, 1]])

    @pytest.mark.parametrize('cone', [1, 2, 3])
    def test_inverse_is_exact(self, cone):
        """Test A^-j B^-l (B^l A^j) is exactly the identity."""
        for j in range(3):
            for shear in [(0, 0), (2 ** j, -1), (-(2 ** j), 2 ** j)]:
                product = inverse_matrix(j, shear, cone, 3) @ forward_matrix(j, shear, cone, 3)
                assert_array_equal(product, np.eye(3))

    def test_apply_roundtrip(self):
        """Test apply_invAB undoes apply_BA."""
        x = np.random.default_rng(0).standard_normal((20, 2))
        assert_allclose(apply_invAB(2, (3,), apply_BA(2, (3,), x)), x, atol=1e-12)

    def test_cone_1_formula(self):
        """Test the first entry of B A^j x is 4^j x_1 + 2^j l x_2."""
        x = np.array([0.3, -0.7])
        assert_allclose(apply_BA(1, (2,), x), [4 * 0.3 + 2 * 2 * -0.7, 2 * -0.7])

    def test_invalid_arguments(self):
        """Test bad cones, scales and shear lengths raise ValueError."""
        with pytest.raises(ValueError):
            dilation_matrix(3, 1, 2)
        with pytest.raises(ValueError):
            dilation_matrix(1, -1, 2)
        with pytest.raises(ValueError, match="length"):
            shear_matrix(1, (1, 1), 2)

    def test_volume(self):
        """Test |Q_j| = 2^{-(d+1) j}."""
        assert cell_volume(2, 2) == 2.0 ** -6
        assert cell_volume(1, 3) == 1 / 16


class TestIndexSets:
    """Test suite for shear and translation enumeration."""

    def test_shear_count_examples(self):
        """Test (2^{j+1} + 1)^{d-1}."""
        assert shear_count(0, 2) == 3
        assert shear_count(1, 3) == 25

    @pytest.mark.parametrize('j,d', [(0, 2), (2, 2), (1, 3)])
    def test_enumeration_matches_count(self, j, d):
        """Test enumerate_shears lists every vector once."""
        shears = enumerate_shears(j, d)
        assert len(shears) == shear_count(j, d) == len(set(shears))
        assert all(max(abs(s) for s in shear) <= 2 ** j for shear in shears)

    @pytest.mark.parametrize('j,shear,cone,d', [(1, (2,), 1, 2), (2, (-3,), 2, 2), (1, (1, -2), 3, 3)])
    def test_translations(self, j, shear, cone, d):
        """Test 2^{(d+1) j} distinct torus corners in [0, 1)^d."""
        k, corners = translations(j, shear, cone, d)
        assert k.shape == (2 ** ((d + 1) * j), d)
        assert corners.min() >= 0 and corners.max() < 1
        assert len({tuple(c) for c in corners}) == len(corners)

    def test_negative_scale(self):
        """Test negative scales raise ValueError."""
        with pytest.raises(ValueError):
            shear_count(-1, 2)


class TestCells:
    """Test suite for cell geometry."""

    def test_cell_of_example(self):
        """Test (j=1, l=(1,), k=(1, 0)) has lower-left corner (1/4, 0)."""
        cell = cell_of(ShearIndex(cone=1, j=1, shear=(1,), k=(1, 0)))
        assert_allclose(cell.lower_left, (0.25, 0.0))
        assert cell.volume == 2.0 ** -3

    def test_shear_index_validation(self):
        """Test shears beyond 2^j are rejected."""
        with pytest.raises(ValueError, match="exceeds"):
            ShearIndex(cone=1, j=1, shear=(3,), k=(0, 0))
        assert ShearIndex(cone=2, j=1, shear=(-2,), k=(0, 0)).boundary

    def test_dyadic_index(self):
        """Test dyadic cube volume and corner."""
        cube = DyadicIndex(nu=2, k=(1, 3))
        assert cube.volume == 1 / 16
        assert_allclose(cube.lower_left, (0.25, 0.75))
        with pytest.raises(ValueError):
            DyadicIndex(nu=-1, k=(0, 0))

    @pytest.mark.parametrize('j,shear,cone', [(1, (1,), 1), (2, (-4,), 2), (2, (3,), 1)])
    def test_cell_index_of_centers(self, j, shear, cone):
        """Test the center of cell k maps back to its translation index."""
        k, _ = translations(j, shear, cone, 2)
        centers = apply_invAB(j, shear, k + 0.5, cone)
        assert_array_equal(cell_index(j, shear, cone, centers), np.arange(len(k)))

    def test_grid_cell_index_counts(self):
        """Test every cell holds N^d / 2^{(d+1) j} grid nodes when 4^j divides N."""
        index = grid_cell_index(1, (1,), 1, 2, 16)
        assert index.shape == (16, 16)
        assert_array_equal(np.bincount(index.ravel()), np.full(8, 32))

    def test_grid_cell_index_is_cached_and_read_only(self):
        """Test repeated calls share one read-only array."""
        first = grid_cell_index(1, (0,), 2, 2, 16)
        second = grid_cell_index(np.int64(1), [0], 2, 2, 16)
        assert first is second
        assert not first.flags.writeable


class TestSphereBounds:
    """Test suite for the nested-ellipsoid bounds."""

    def test_constant(self):
        """Test C_d = 2^{-d+1}."""
        assert nested_ellipsoid_constant(2) == 0.5
        assert nested_ellipsoid_constant(3) == 0.25

    @pytest.mark.parametrize('j', [0, 1, 2, 3])
    def test_expansion_bound(self, j):
        """Test min |B A^j x| / (2^j |x|) >= 2^{-d+1} for all shears."""
        for shear in enumerate_shears(j, 2):
            assert min_expansion(j, shear, 2000) >= nested_ellipsoid_constant(2)

    def test_zero_shear_expansion(self):
        """Test the unsheared expansion ratio is at least 1."""
        assert min_expansion(2, (0, 0), 2000) >= 1.0 - 1e-12

    def test_inverse_contraction_positive(self):
        """Test the sampled contraction stays above 2^{-2(j+1)}."""
        value = inverse_contraction(2, (4,), 2000)
        assert 2.0 ** -6 <= value <= 1.0
