#!/usr/bin/env python3
"""
Unit tests for Besov / Triebel-Lizorkin norms and the maximal machinery.
"""
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from core.frame import Band
from core.lattice import cell_volume
from core.spaces import (
    MaximalParams,
    SmoothnessParams,
    besov_AB_norm,
    besov_seq_norm,
    dyadic_norms,
    hl_maximal,
    hl_window_sizes,
    isotropic_peetre,
    lp_norm,
    lp_sum,
    lq_aggregate,
    maximal_sequence,
    maximal_value,
    parse_exponent,
    peetre_maximal,
    spectral_derivative,
    tl_AB_norm,
    tl_seq_norm,
    torus_distance,
)
from core.transform import (
    GridFunction,
    SequenceCoefficients,
    band_limited_random,
    build_dyadic_system,
    dyadic_forward,
    dyadic_subsample,
    forward_grid,
    subsample,
)
from core.windows import WindowBank


def _template(frame):
    return subsample(frame, forward_grid(frame, GridFunction(np.zeros((frame.N,) * frame.d))))


class TestParameters:
    """Test suite for parameter parsing and validation."""

    def test_parse_exponent(self):
        """Test numbers and 'inf' spellings."""
        assert parse_exponent('inf') == math.inf
        assert parse_exponent(' Infinity ') == math.inf
        assert parse_exponent('0.5') == 0.5
        assert parse_exponent(3) == 3.0

    @pytest.mark.parametrize('alpha,p,q', [(0.0, 0.0, 1.0), (0.0, 2.0, -1.0), (float('nan'), 2.0, 2.0)])
    def test_invalid_smoothness(self, alpha, p, q):
        """Test nonpositive exponents and NaN smoothness raise ValueError."""
        with pytest.raises(ValueError):
            SmoothnessParams(alpha, p, q)

    def test_to_dict_inf(self):
        """Test infinite exponents serialize as 'inf'."""
        assert SmoothnessParams(1.0, math.inf, 2.0).to_dict() == {'alpha': 1.0, 'p': 'inf', 'q': 2.0}

    def test_maximal_params(self):
        """Test r > 0 and the decay sufficiency rule."""
        with pytest.raises(ValueError):
            MaximalParams(r=0.0, N_decay=4)
        params = MaximalParams(r=1.0, N_decay=4)
        assert params.decay_sufficient(2, 2.0, 2.0)
        assert not params.decay_sufficient(2, 0.5, 2.0)


class TestLpHelpers:
    """Test suite for l^p / L^p helpers."""

    def test_lp_norm_examples(self):
        """Test ones have norm 1 and zeros norm 0 for every p."""
        for p in (0.5, 1.0, 2.0, math.inf):
            assert lp_norm(np.ones((8, 8)), p) == pytest.approx(1.0)
            assert lp_norm(np.zeros((8, 8)), p) == 0.0

    def test_lp_sum(self):
        """Test plain sums and the sup for p = inf."""
        assert lp_sum([3.0, -4.0], 2.0) == pytest.approx(5.0)
        assert lp_sum([3.0, -4.0], math.inf) == 4.0
        assert lp_sum([], 2.0) == 0.0

    def test_quasi_norm(self):
        """Test p < 1 is a plain quasi-norm."""
        assert lp_sum([1.0, 1.0], 0.5) == pytest.approx(4.0)
        assert lq_aggregate([1.0, 1.0], 0.5) == pytest.approx(4.0)


class TestShearNorms:
    """Test suite for the shear anisotropic norms."""

    @pytest.mark.parametrize('p,q', [(2.0, 2.0), (1.0, math.inf), (0.5, 0.5)])
    def test_constant_function(self, frame_2d, p, q):
        """Test a constant c has norm |c| (only the low-pass sees it)."""
        f = GridFunction(np.full((64, 64), -2.0))
        params = SmoothnessParams(1.5, p, q)
        assert besov_AB_norm(frame_2d, f, params) == pytest.approx(2.0, abs=1e-12)
        assert tl_AB_norm(frame_2d, f, params) == pytest.approx(2.0, abs=1e-12)

    def test_zero_function(self, frame_2d):
        """Test the zero function has norm 0."""
        zero = np.zeros((64, 64))
        params = SmoothnessParams(0.0, 2.0, 2.0)
        assert besov_AB_norm(frame_2d, zero, params) == 0.0
        assert tl_AB_norm(frame_2d, zero, params) == 0.0

    def test_field_and_function_agree(self, frame_2d, rng):
        """Test passing a precomputed field gives the same value."""
        f = band_limited_random(2, 64, rng)
        params = SmoothnessParams(0.5, 2.0, 1.0)
        field = forward_grid(frame_2d, f)
        assert besov_AB_norm(frame_2d, field, params) == pytest.approx(besov_AB_norm(frame_2d, f, params))

    def test_l2_case(self, frame_2d, rng):
        """Test F^0_{2,2}(AB) without the low-pass is the L^2 norm of the high-pass part."""
        f = band_limited_random(2, 64, rng)
        f = GridFunction(f.samples - f.samples.mean())
        assert tl_AB_norm(frame_2d, f, SmoothnessParams(0.0, 2.0, 2.0)) == pytest.approx(f.l2_norm(), rel=1e-10)
        assert besov_AB_norm(frame_2d, f, SmoothnessParams(0.0, 2.0, 2.0)) == pytest.approx(f.l2_norm(), rel=1e-10)

    @pytest.mark.parametrize('p,q', [(1.5, 1.0), (2.0, 2.0), (0.5, 3.0)])
    def test_besov_matches_dense_bands(self, frame_2d, rng, p, q):
        """Test B(AB) against band values from full inverse FFTs of f^ * mask."""
        f = band_limited_random(2, 64, rng)
        params = SmoothnessParams(0.5, p, q)
        spectrum = np.fft.fft2(f.samples)

        def band_norm(atom):
            return lp_norm(np.fft.ifft2(spectrum * atom.dense(64)).real, p)

        weights = [cell_volume(atom.band.j, 2) ** -0.5 for atom in frame_2d.shear_atoms]
        terms = [w * band_norm(atom) for w, atom in zip(weights, frame_2d.shear_atoms)]
        expected = band_norm(frame_2d.lowpass) + sum(t ** q for t in terms) ** (1 / q)
        assert besov_AB_norm(frame_2d, f, params) == pytest.approx(expected, rel=1e-10)

    def test_absolute_homogeneity(self, frame_2d, rng):
        """Test ||lambda f|| = |lambda| ||f|| for both families."""
        f = band_limited_random(2, 64, rng)
        scaled = GridFunction(-3.0 * f.samples)
        for params in (SmoothnessParams(0.5, 1.5, 1.0), SmoothnessParams(1.0, 2.0, 2.0)):
            assert besov_AB_norm(frame_2d, scaled, params) == pytest.approx(
                3.0 * besov_AB_norm(frame_2d, f, params), rel=1e-10)
            assert tl_AB_norm(frame_2d, scaled, params) == pytest.approx(
                3.0 * tl_AB_norm(frame_2d, f, params), rel=1e-10)

    def test_decreasing_in_q(self, frame_2d, rng):
        """Test both norms do not increase with q."""
        f = band_limited_random(2, 64, rng)
        field = forward_grid(frame_2d, f)
        for norm in (besov_AB_norm, tl_AB_norm):
            values = [norm(frame_2d, field, SmoothnessParams(0.5, 1.5, q)) for q in (0.5, 1.0, 2.0, 4.0)]
            assert all(a >= b * (1 - 1e-12) for a, b in zip(values, values[1:]))

    @pytest.mark.parametrize('p', [1.5, 1.0, 3.0])
    def test_besov_equals_tl_for_p_equal_q(self, frame_2d, rng, p):
        """Test B^alpha_{p,p}(AB) = F^alpha_{p,p}(AB) away from p = 2 too."""
        field = forward_grid(frame_2d, band_limited_random(2, 64, rng))
        params = SmoothnessParams(0.75, p, p)
        assert besov_AB_norm(frame_2d, field, params) == pytest.approx(tl_AB_norm(frame_2d, field, params), rel=1e-10)

    def test_band_l2_from_spectrum(self, frame_2d, rng):
        """Test the spectral L^2 norm of a band equals the norm of its values."""
        field = forward_grid(frame_2d, band_limited_random(2, 64, rng))
        for atom in frame_2d.atoms[::7]:
            assert field.band_l2(atom.band) == pytest.approx(lp_norm(field.values(atom.band), 2.0), rel=1e-10)

    def test_tl_rejects_p_inf(self, frame_2d):
        """Test F norms require p < inf."""
        with pytest.raises(ValueError, match="p < inf"):
            tl_AB_norm(frame_2d, np.zeros((64, 64)), SmoothnessParams(0.0, math.inf, 2.0))


class TestSequenceNorms:
    """Test suite for b_AB and f_AB."""

    @pytest.mark.parametrize('alpha,p,q', [(0.0, 2.0, 2.0), (1.0, 1.0, 0.5), (-0.5, math.inf, 3.0)])
    def test_besov_delta_has_unit_norm(self, frame_2d, alpha, p, q):
        """Test s_(j,0,0) = |P_j|^(alpha - d/(p(d+1)) + 1/2) has b_AB norm 1."""
        band = Band(1, 2, (0,))
        params = SmoothnessParams(alpha, p, q)
        exponent = alpha - (0.0 if math.isinf(p) else 2 / (3 * p)) + 0.5
        s = SequenceCoefficients.delta(_template(frame_2d), band, cell_volume(2, 2) ** exponent)
        assert besov_seq_norm(s, params) == pytest.approx(1.0, rel=1e-12)

    @pytest.mark.parametrize('alpha,p,q', [(0.0, 2.0, 2.0), (1.5, 1.0, 4.0)])
    def test_tl_delta_has_unit_norm(self, frame_2d, alpha, p, q):
        """Test s_(j,0,0) = |P_j|^(alpha - 1/p + 1/2) has f_AB norm 1."""
        band = Band(1, 1, (1,))
        s = SequenceCoefficients.delta(_template(frame_2d), band, cell_volume(1, 2) ** (alpha - 1 / p + 0.5), 5)
        assert tl_seq_norm(s, SmoothnessParams(alpha, p, q), frame_2d) == pytest.approx(1.0, rel=1e-12)

    def test_tl_grid_mismatch(self, frame_2d, frame_3d):
        """Test a sequence of another grid raises ValueError."""
        with pytest.raises(ValueError):
            tl_seq_norm(_template(frame_2d), SmoothnessParams(0.0, 2.0, 2.0), frame_3d)


class TestDyadicNorms:
    """Test suite for the isotropic dyadic norms."""

    def test_constant_function(self):
        """Test B and F of a constant are its absolute value."""
        system = build_dyadic_system(WindowBank(), 2, 32)
        f = GridFunction(np.full((32, 32), 1.5))
        for kind in ('B', 'F'):
            assert dyadic_norms(f, SmoothnessParams(2.0, 2.0, 2.0), kind, system) == pytest.approx(1.5)

    def test_dyadic_sequence_delta(self):
        """Test a dyadic delta 2^(-nu d (alpha/d - 1/p + 1/2)) has b and f norm 1."""
        system = build_dyadic_system(WindowBank(), 2, 32)
        field = dyadic_forward(system, GridFunction(np.zeros((32, 32))))
        template = dyadic_subsample(system, field)
        nu, alpha, p = 2, 1.0, 2.0
        volume = 2.0 ** (-nu * 2)
        s = SequenceCoefficients.delta(template, system.atom(nu).band, volume ** (alpha / 2 - 1 / p + 0.5))
        params = SmoothnessParams(alpha, p, 2.0)
        assert dyadic_norms(s, params, 'b') == pytest.approx(1.0, rel=1e-12)
        assert dyadic_norms(s, params, 'f') == pytest.approx(1.0, rel=1e-12)

    def test_b_equals_f_for_p_equal_q(self, rng):
        """Test dyadic B^alpha_{p,p} = F^alpha_{p,p} for p = q = 1.5."""
        system = build_dyadic_system(WindowBank(), 2, 32)
        f = band_limited_random(2, 32, rng)
        params = SmoothnessParams(1.0, 1.5, 1.5)
        assert dyadic_norms(f, params, 'B', system) == pytest.approx(dyadic_norms(f, params, 'F', system), rel=1e-10)

    def test_invalid_kind(self):
        """Test unknown kinds and F with p = inf raise ValueError."""
        f = GridFunction(np.zeros((16, 16)))
        with pytest.raises(ValueError, match="Unknown dyadic norm kind"):
            dyadic_norms(f, SmoothnessParams(0.0, 2.0, 2.0), 'Z')
        with pytest.raises(ValueError, match="p < inf"):
            dyadic_norms(f, SmoothnessParams(0.0, math.inf, 2.0), 'F')


class TestMaximalFunctions:
    """Test suite for maximal functions on the grid."""

    def test_window_sizes(self):
        """Test odd dyadic cube sides below N, then the whole torus."""
        assert hl_window_sizes(16) == [1, 3, 5, 9, 16]
        assert hl_window_sizes(64)[-2:] == [33, 64]

    def test_hl_of_delta(self):
        """Test a spike averages to at least its torus mean and leaves no round-off values."""
        g = np.zeros((16, 16))
        g[3, 5] = 1.0
        result = hl_maximal(g)
        assert result.min() == pytest.approx(1 / 256, rel=1e-12)
        assert result[3, 5] == 1.0
        # cube of side 3 centred next to the spike
        assert result[4, 5] == pytest.approx(1 / 9)

    def test_hl_of_constant(self):
        """Test M1 = 1."""
        assert_allclose(hl_maximal(np.ones((16, 16))), 1.0)

    def test_hl_dominates(self, rng):
        """Test M|g| >= |g| pointwise."""
        g = rng.standard_normal((16, 16))
        assert np.all(hl_maximal(g) >= np.abs(g))

    def test_peetre_dominates(self, rng):
        """Test Peetre maximal functions dominate |g| and fix constants."""
        g = rng.standard_normal((16, 16))
        assert np.all(isotropic_peetre(g, 1.0, scale=4.0) >= np.abs(g))
        assert np.all(peetre_maximal(g, Band(1, 1, (1,)), 1.0) >= np.abs(g))
        assert_allclose(peetre_maximal(np.ones((16, 16)), Band(1, 1, (0,)), 1.0), 1.0)

    def test_peetre_of_delta(self):
        """Test the Peetre function of a spike decays with the weight."""
        g = np.zeros((16, 16))
        g[0, 0] = 1.0
        result = isotropic_peetre(g, 1.0)
        # y = (4/16, 0): weight (1 + 1/4)^2
        assert result[4, 0] == pytest.approx(1.25 ** -2)

    def test_spectral_derivative(self):
        """Test d/dx sin(2 pi x) = 2 pi cos(2 pi x)."""
        x = np.arange(32) / 32
        g = np.sin(2 * np.pi * x)[:, None] * np.ones((1, 32))
        expected = 2 * np.pi * np.cos(2 * np.pi * x)[:, None] * np.ones((1, 32))
        assert_allclose(spectral_derivative(g, 0), expected, atol=1e-10)
        assert_allclose(spectral_derivative(g, 1), 0.0, atol=1e-10)


class TestMaximalSequences:
    """Test suite for the s*_{r,N} envelope."""

    def test_torus_distance(self):
        """Test minimum-image distances."""
        d = torus_distance(np.array([[0.1, 0.0]]), np.array([[0.9, 0.0], [0.1, 0.5]]))
        assert_allclose(d, [[0.2, 0.5]])

    def test_envelope_dominates(self, frame_2d, rng):
        """Test |s_Q| <= (s*)_Q."""
        s = subsample(frame_2d, forward_grid(frame_2d, band_limited_random(2, 64, rng)))
        envelope = maximal_sequence(s, MaximalParams(r=1.0, N_decay=4))
        for band, values in s.bands.items():
            assert np.all(envelope.bands[band] >= np.abs(values) * (1 - 1e-12))

    def test_single_delta_closed_form(self, frame_2d):
        """Test the envelope of a unit delta is (1 + 2^j |x_Q - x_0|)^{-N/r}."""
        band = Band(1, 1, (0,))
        s = SequenceCoefficients.delta(_template(frame_2d), band)
        params = MaximalParams(r=0.5, N_decay=6)
        envelope = maximal_sequence(s, params).bands[band]
        assert envelope[0] == pytest.approx(1.0)
        # corner index 1 is x = (0, 1/2)
        assert envelope[1] == pytest.approx((1 + 2 * 0.5) ** -12)

    def test_scope_mismatch(self, frame_2d):
        """Test a dyadic scope on a shear sequence raises ValueError."""
        with pytest.raises(ValueError, match="does not match"):
            maximal_sequence(_template(frame_2d), MaximalParams(r=1.0, N_decay=4), scope='dyadic')

    def test_cross_scale_requires_finer_target(self, frame_2d):
        """Test maximal_value needs i >= j."""
        s = SequenceCoefficients.delta(_template(frame_2d), Band(1, 2, (0,)))
        params = MaximalParams(r=1.0, N_decay=4)
        with pytest.raises(ValueError, match="i >= j"):
            maximal_value(s, Band(1, 2, (0,)), (0.0, 0.0), 1, params)
        assert maximal_value(s, Band(1, 2, (0,)), (0.0, 0.0), 2, params) == pytest.approx(1.0)
