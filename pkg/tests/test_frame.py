#!/usr/bin/env python3
"""
Unit tests for frame construction and the partition of unity.
"""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from core.frame import (
    LOWPASS_BAND,
    Band,
    FrameSpec,
    atom_spatial_profile,
    band_groups,
    build_frame,
    cone_indicator,
    default_j_max,
    expected_band_count,
    frame_bounds,
    overlap_bounds,
    overlap_count,
    overlap_partners,
    scale_support_conflicts,
    signed_frequencies,
    spatial_atom,
    supports_meet,
    verify_parseval,
)


class TestFrameSpec:
    """Test suite for FrameSpec validation."""

    def test_default_j_max(self):
        """Test floor(log2 N / 2) - 1, at least 1."""
        assert default_j_max(32) == 1
        assert default_j_max(64) == 2
        assert default_j_max(256) == 3
        assert FrameSpec(d=2, N=64).j_max == 2

    def test_largest_valid_j_max(self):
        """Test 2^(2 j_max - 1) may reach N/2 but not exceed it."""
        assert FrameSpec(d=2, N=64, j_max=3).j_max == 3
        with pytest.raises(ValueError, match="too large"):
            FrameSpec(d=2, N=64, j_max=4)

    @pytest.mark.parametrize('kwargs,message', [
        ({'d': 1, 'N': 64}, "Dimension"),
        ({'d': 2, 'N': 48}, "power of two"),
        ({'d': 2, 'N': 4}, "power of two"),
        ({'d': 2, 'N': 64, 'variant': 'curvelet'}, "Unknown frame variant"),
        ({'d': 2, 'N': 64, 'cone_indicators': False}, "cone_projected"),
    ])
    def test_invalid_specs(self, kwargs, message):
        """Test invalid parameters raise ValueError."""
        with pytest.raises(ValueError, match=message):
            FrameSpec(**kwargs)

    def test_dict_roundtrip(self):
        """Test a spec survives to_dict / from_dict."""
        spec = FrameSpec(d=3, N=32, variant='cone_projected', close_high_pass=False)
        assert FrameSpec.from_dict(spec.to_dict()) == spec

    def test_passband(self):
        """Test the open-frame passband 2^(2 j_max - 2)."""
        assert FrameSpec(d=2, N=256).passband == 16


class TestBands:
    """Test suite for band bookkeeping."""

    def test_direction_keys_merge_adjacent_cones(self):
        """Test boundary bands of neighbouring cones share a direction key."""
        assert Band(1, 1, (2,)).direction_key(2) == Band(2, 1, (2,)).direction_key(2)
        assert Band(1, 1, (-2,)).direction_key(2) == Band(2, 1, (-2,)).direction_key(2)
        assert Band(1, 1, (2,)).direction_key(2) != Band(1, 1, (-2,)).direction_key(2)

    def test_expected_band_count(self):
        """Test 1 + d sum_j (2^{j+1} + 1)^{d-1}."""
        assert expected_band_count(FrameSpec(d=2, N=64)) == 35
        assert expected_band_count(FrameSpec(d=2, N=256)) == 69

    def test_smooth_groups_merge_boundaries(self):
        """Test the smooth variant merges two boundary pairs per scale in d=2."""
        assert len(band_groups(FrameSpec(d=2, N=64))) == 29
        assert len(band_groups(FrameSpec(d=2, N=256))) == 61
        assert len(band_groups(FrameSpec(d=2, N=64, variant='cone_projected'))) == 35

    def test_band_list_roundtrip(self):
        """Test Band.to_list / from_list."""
        band = Band(2, 3, (-1, 4))
        assert Band.from_list(band.to_list()) == band

    def test_cone_indicators_partition(self):
        """Test the d cone indicators partition the nonzero frequencies."""
        f = signed_frequencies(16).astype(float)
        coords = np.meshgrid(f, f, f, indexing='ij')
        total = sum(cone_indicator(coords, cone).astype(int) for cone in (1, 2, 3))
        expected = np.ones_like(total)
        expected[0, 0, 0] = 0
        assert np.array_equal(total, expected)


class TestBuiltFrame:
    """Test suite for built frames."""

    def test_atom_counts(self, frame_2d, cone_frame_2d):
        """Test one atom per band group, low-pass first."""
        assert len(frame_2d.atoms) == 29
        assert len(cone_frame_2d.atoms) == 35
        assert frame_2d.atoms[0].band == LOWPASS_BAND

    @pytest.mark.parametrize('name', ['frame_2d', 'cone_frame_2d', 'frame_3d'])
    def test_parseval_partition(self, name, request):
        """Test sum_b mask_b^2 = 1 at every grid frequency."""
        frame = request.getfixturevalue(name)
        assert verify_parseval(frame) <= 1e-10
        lower, upper = frame_bounds(frame)
        assert lower == pytest.approx(1.0, abs=1e-10)
        assert upper == pytest.approx(1.0, abs=1e-10)

    def test_open_frame_passband(self, open_frame_2d):
        """Test the open frame is a partition of unity on its passband only."""
        assert verify_parseval(open_frame_2d, passband_only=True) <= 1e-10
        assert verify_parseval(open_frame_2d) > 0.5

    def test_masks_are_even_and_nonnegative(self, frame_2d):
        """Test every mask is real, nonnegative and even on the grid."""
        N = frame_2d.N
        for atom in frame_2d.atoms:
            mask = atom.dense(N)
            assert mask.min() >= 0
            reflected = np.roll(np.flip(mask, axis=(0, 1)), 1, axis=(0, 1))
            assert_allclose(reflected, mask, atol=1e-14)

    def test_lowpass_only_at_origin(self, frame_2d):
        """Test the low-pass mask is 1 at xi = 0 and nowhere else."""
        low = frame_2d.lowpass
        assert [f.tolist() for f in low.freqs] == [[0], [0]]
        assert low.values[0, 0] == pytest.approx(1.0)

    def test_scale_zero_atoms_vanish(self, frame_2d):
        """Test j = 0 atoms have no grid frequency."""
        for atom in frame_2d.scale_atoms(0):
            assert atom.is_empty

    def test_merged_boundary_atom(self, frame_2d):
        """Test both cones' boundary bands resolve to one merged atom."""
        merged = frame_2d.atom(Band(1, 1, (2,)))
        assert frame_2d.atom(Band(2, 1, (2,))) is merged
        assert len(merged.pieces) == 2
        assert merged.cones == frozenset({1, 2})

    def test_unknown_band(self, frame_2d):
        """Test bands outside the frame raise ValueError."""
        with pytest.raises(ValueError, match="not part of this frame"):
            frame_2d.atom(Band(1, 5, (0,)))

    def test_overlap_within_lemma(self, frame_2d, cone_frame_2d):
        """Test no atom meets more neighbours than the overlap lemma allows."""
        bound = overlap_bounds(2)['lemma']
        for frame in (frame_2d, cone_frame_2d):
            assert max(overlap_count(frame, atom.band) for atom in frame.shear_atoms) <= bound

    def test_overlap_count_matches_pairwise(self, frame_2d, cone_frame_2d):
        """Test the sparse overlap matrix agrees with pairwise support tests."""
        for frame in (frame_2d, cone_frame_2d):
            for atom in frame.shear_atoms:
                expected = sum(
                    1 for other in frame.shear_atoms
                    if other is not atom and abs(other.band.j - atom.band.j) <= 1
                    and other.cones & atom.cones and supports_meet(atom, other)
                )
                assert overlap_count(frame, atom.band) == expected

    def test_interior_band_has_two_same_scale_neighbours(self, frame_2d):
        """Test (1, 2, 0) meets shears -1 and 1 of its own scale and nothing else there."""
        partners = overlap_partners(frame_2d, Band(1, 2, (0,)))
        same_scale = sorted(a.band for a in partners if a.band.j == 2)
        assert same_scale == [Band(1, 2, (-1,)), Band(1, 2, (1,))]

    def test_overlap_within_lemma_3d(self, frame_3d):
        """Test the d = 3 overlap count stays within 2^2 + 3^2 + 6^2."""
        bound = overlap_bounds(3)['lemma']
        assert bound == 49
        assert max(overlap_count(frame_3d, atom.band) for atom in frame_3d.shear_atoms) <= bound

    def test_lowpass_has_no_partners(self, frame_2d):
        """Test the low-pass is excluded from the overlap counts."""
        assert overlap_partners(frame_2d, LOWPASS_BAND) == []

    def test_no_far_scale_conflicts(self, frame_2d, frame_3d):
        """Test scales two or more apart have disjoint supports."""
        assert scale_support_conflicts(frame_2d) == []
        assert scale_support_conflicts(frame_3d) == []

    def test_threaded_build_matches(self, frame_2d):
        """Test a multi-threaded build gives the same masks."""
        threaded = build_frame(frame_2d.spec, workers=3)
        for first, second in zip(frame_2d.atoms, threaded.atoms):
            assert first.band == second.band
            assert np.array_equal(first.values, second.values)

    def test_spatial_atom_is_real(self, frame_2d):
        """Test the spatial atom of a band is finite and nonzero."""
        psi = spatial_atom(frame_2d, Band(1, 2, (0,)))
        assert psi.shape == (64, 64)
        assert np.all(np.isfinite(psi))
        assert np.abs(psi).max() > 0

    def test_overlap_bounds_values(self):
        """Test both published overlap counts."""
        assert overlap_bounds(2) == {'lemma': 11, 'remark': 13}

    def test_atom_spatial_profile(self, frame_2d):
        """Test the decay constant is at least 1 and 0 for a vanishing atom."""
        value = atom_spatial_profile(frame_2d, Band(1, 2, (1,)), radius_N=3)
        assert np.isfinite(value)
        assert value >= 1.0 - 1e-12
        assert atom_spatial_profile(frame_2d, Band(1, 0, (0,)), radius_N=3) == 0.0

    def test_atom_spatial_profile_without_weight(self, frame_2d):
        """Test radius_N = 0 gives the normalized peak, 1."""
        for band in (Band(1, 1, (0,)), Band(2, 2, (-3,)), LOWPASS_BAND):
            assert atom_spatial_profile(frame_2d, band, radius_N=0) == pytest.approx(1.0, abs=1e-12)

    def test_atom_spatial_profile_monotone(self, frame_2d):
        """Test the constant does not decrease as the decay order grows."""
        values = [atom_spatial_profile(frame_2d, Band(1, 2, (1,)), radius_N=r) for r in (0, 1, 2, 3, 4)]
        assert all(a <= b for a, b in zip(values, values[1:]))

    def test_atom_spatial_profile_uniform_in_scale(self, open_frame_2d):
        """Test the j = 2 constant with radius_N = d + 1 is at most 4 times the j = 1 constant."""
        coarse = atom_spatial_profile(open_frame_2d, Band(1, 1, (0,)), radius_N=3)
        fine = atom_spatial_profile(open_frame_2d, Band(1, 2, (0,)), radius_N=3)
        assert np.isfinite(fine)
        assert fine <= 4 * coarse
