#!/usr/bin/env python3
"""
Unit tests for the spectral windows.
"""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from core.windows import (
    MEYER_POLYNOMIALS,
    WindowBank,
    eval_W,
    eval_dyadic,
    eval_lowpass,
    eval_psi1_hat,
    eval_psi2_hat,
    eval_v,
    meyer_aux,
    sample_windows,
)


class TestMeyerAux:
    """Test suite for the auxiliary ramp."""

    @pytest.mark.parametrize('degree', sorted(MEYER_POLYNOMIALS))
    def test_endpoints_and_midpoint(self, degree):
        """Test nu(0) = 0, nu(1/2) = 1/2, nu(1) = 1."""
        assert meyer_aux(0.0, degree) == 0.0
        assert meyer_aux(0.5, degree) == pytest.approx(0.5, abs=1e-15)
        assert meyer_aux(1.0, degree) == 1.0

    @pytest.mark.parametrize('degree', sorted(MEYER_POLYNOMIALS))
    def test_symmetry(self, degree):
        """Test nu(t) + nu(1 - t) = 1."""
        t = np.linspace(-0.5, 1.5, 101)
        assert_allclose(meyer_aux(t, degree) + meyer_aux(1 - t, degree), 1.0, atol=1e-14)

    def test_clamped_outside_unit_interval(self):
        """Test the ramp is 0 below 0 and 1 above 1."""
        assert meyer_aux(-3.0) == 0.0
        assert meyer_aux(7.0) == 1.0

    def test_unsupported_degree(self):
        """Test that an unknown degree raises ValueError."""
        with pytest.raises(ValueError, match="Unsupported meyer_degree"):
            meyer_aux(0.3, degree=4)
        with pytest.raises(ValueError):
            WindowBank(meyer_degree=4)


class TestPartitions:
    """Test suite for the partition-of-unity identities."""

    def test_psi2_translates(self):
        """Test sum_m psi2_hat(w - m)^2 = 1."""
        bank = WindowBank()
        w = np.linspace(-3.0, 3.0, 601)
        total = sum(bank.psi2_hat(w - m) ** 2 for m in range(-5, 6))
        assert_allclose(total, 1.0, atol=1e-13)

    def test_psi1_dilates(self):
        """Test sum_j psi1_hat(4^-j w)^2 = 1 for |w| >= 1/8."""
        bank = WindowBank()
        w = np.concatenate([np.linspace(0.125, 20.0, 400), -np.linspace(0.125, 20.0, 400)])
        total = sum(bank.psi1_hat(4.0 ** -j * w) ** 2 for j in range(12))
        assert_allclose(total, 1.0, atol=1e-13)

    def test_smooth_corona(self):
        """Test Phi^2(xi) + sum_j W(4^-j xi)^2 = 1."""
        bank = WindowBank(meyer_degree=5)
        rng = np.random.default_rng(0)
        xi = rng.uniform(-40, 40, size=(500, 2))
        total = bank.smooth_big_phi_hat(xi) ** 2 + sum(bank.W(4.0 ** -j * xi) ** 2 for j in range(10))
        assert_allclose(total, 1.0, atol=1e-13)

    def test_dyadic(self):
        """Test Phi_dyad^2(xi) + sum_nu phi_dyad(2^-nu xi)^2 = 1."""
        bank = WindowBank()
        rng = np.random.default_rng(1)
        xi = rng.uniform(-50, 50, size=(500, 3))
        total = bank.dyadic_big_phi_hat(xi) ** 2 + sum(bank.dyadic_phi_hat(2.0 ** -nu * xi) ** 2 for nu in range(12))
        assert_allclose(total, 1.0, atol=1e-13)

    def test_closed_windows_stay_one(self):
        """Test the closed top windows are 1 far from the origin."""
        bank = WindowBank()
        assert_allclose(bank.closed_psi1_hat(np.array([0.2, 5.0, 100.0])), 1.0)
        assert_allclose(bank.closed_W_c([np.array([3.0]), np.array([0.0])]), 1.0)

    def test_random_points(self):
        """Test every partition on 10^4 random frequencies, including points near the seams."""
        rng = np.random.default_rng(7)
        bank = WindowBank()
        w = rng.uniform(-6.0, 6.0, size=10 ** 4)
        assert_allclose(sum(bank.psi2_hat(w - m) ** 2 for m in range(-8, 9)), 1.0, atol=1e-13)
        xi = rng.uniform(-30.0, 30.0, size=(10 ** 4, 2))
        xi[:100] = rng.choice([-1, 1], size=(100, 2)) * 4.0 ** rng.integers(-2, 3, size=(100, 1)) / 16
        total = bank.smooth_big_phi_hat(xi) ** 2 + sum(bank.W(4.0 ** -j * xi) ** 2 for j in range(10))
        assert_allclose(total, 1.0, atol=1e-13)
        xi3 = rng.uniform(-30.0, 30.0, size=(10 ** 4, 3))
        total = bank.dyadic_big_phi_hat(xi3) ** 2 + sum(bank.dyadic_phi_hat(2.0 ** -nu * xi3) ** 2 for nu in range(10))
        assert_allclose(total, 1.0, atol=1e-13)


class TestLipschitz:
    """Test suite for the Lipschitz continuity of the windows."""

    STEP = 1e-5

    def _slope(self, window, w):
        return np.max(np.abs(window(w + self.STEP) - window(w))) / self.STEP

    @pytest.mark.parametrize('degree', sorted(MEYER_POLYNOMIALS))
    def test_one_dimensional(self, degree):
        """Test difference quotients stay below (pi / 2) max nu' / ramp width."""
        bank = WindowBank(meyer_degree=degree)
        w = np.linspace(-1.5, 1.5, 30001)
        # steepest ramp: the low-pass edge of width 1/16
        bound = 0.5 * np.pi * 2.2 * 16
        for window in (bank.psi1_hat, bank.psi2_hat, bank.lowpass_1d, bank.closed_psi1_hat):
            assert self._slope(window, w) <= bound

    def test_multivariate(self):
        """Test difference quotients of the corona and dyadic windows along each axis."""
        bank = WindowBank()
        f = np.linspace(-1.2, 1.2, 801)
        xi = np.stack(np.meshgrid(f, f, indexing='ij'), axis=-1)
        for window in (bank.W, bank.smooth_big_phi_hat, bank.dyadic_phi_hat, bank.dyadic_big_phi_hat):
            base = window(xi)
            for axis in range(2):
                step = np.zeros(2)
                step[axis] = self.STEP
                assert np.max(np.abs(window(xi + step) - base)) / self.STEP <= 200.0


class TestSupports:
    """Test suite for window supports."""

    def test_psi1_support(self):
        """Test psi1_hat vanishes for |w| <= 1/16 and |w| >= 1/2."""
        bank = WindowBank()
        assert_allclose(bank.psi1_hat(np.array([0.0, 0.03, 1 / 16, 0.5, 0.9, -0.6])), 0.0, atol=1e-15)
        assert bank.psi1_hat(0.25) > 0

    def test_psi2_support(self):
        """Test psi2_hat is 1 at 0 and vanishes for |w| >= 1."""
        bank = WindowBank()
        assert float(bank.psi2_hat(0.0)) == pytest.approx(1.0)
        assert_allclose(bank.psi2_hat(np.array([1.0, -1.0, 1.5])), 0.0)

    def test_lowpass_flat_region(self):
        """Test the smooth low-pass is 1 on [-1/16, 1/16] and 0 beyond 1/8."""
        bank = WindowBank()
        assert_allclose(bank.lowpass_1d(np.array([0.0, 0.05, -1 / 16])), 1.0)
        assert_allclose(bank.lowpass_1d(np.array([0.125, 0.3])), 0.0)

    def test_supports_metadata(self):
        """Test every window declares its support."""
        supports = WindowBank().supports
        assert supports['psi1_hat']['annulus'] == [1 / 16, 1 / 2]
        assert set(supports) >= {'psi2_hat', 'W', 'dyadic_phi_hat', 'dyadic_big_phi_hat'}


class TestEvaluators:
    """Test suite for the named evaluators."""

    def test_eval_lowpass_variants(self):
        """Test each low-pass variant is 1 at the origin."""
        bank = WindowBank()
        for variant in ('shear_global', 'dyadic', 'smooth'):
            assert eval_lowpass(bank, variant, np.zeros((1, 2)))[0] == pytest.approx(1.0)

    def test_eval_lowpass_unknown(self):
        """Test an unknown variant raises ValueError."""
        with pytest.raises(ValueError, match="Unknown low-pass variant"):
            eval_lowpass(WindowBank(), 'cubic', np.zeros((1, 2)))

    def test_eval_dyadic_unknown(self):
        """Test an unknown dyadic kind raises ValueError."""
        with pytest.raises(ValueError):
            eval_dyadic(WindowBank(), 'ring', np.zeros((1, 2)))

    def test_bank_dict_roundtrip(self):
        """Test the bank rebuilds from its dict."""
        bank = WindowBank(meyer_degree=3)
        assert WindowBank.from_dict(bank.to_dict()) == bank


class TestSampleWindows:
    """Test suite for sample_windows."""

    def test_columns(self):
        """Test the sampled table has omega first and one column per window."""
        table = sample_windows(WindowBank(), 33)
        assert list(table)[0] == 'omega'
        assert len(table) == 9
        assert all(len(values) == 33 for values in table.values())
        assert table['omega'][0] == -1.0
        assert table['omega'][-1] == 1.0

    def test_too_small_grid(self):
        """Test that fewer than two points raises ValueError."""
        with pytest.raises(ValueError, match="grid must be at least 2"):
            sample_windows(WindowBank(), 1)


class TestNamedWindows:
    """Test suite for the psi1, psi2, W and v evaluators."""

    def test_psi1_values(self):
        """Test zeros outside the annulus and the dilation sum at 1/4."""
        bank = WindowBank()
        assert float(eval_psi1_hat(bank, 0.0)) == 0.0
        assert float(eval_psi1_hat(bank, 0.6)) == 0.0
        total = sum(float(eval_psi1_hat(bank, 4.0 ** -j * 0.25)) ** 2 for j in range(5))
        assert total == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize('w', [0.0, 0.3])
    def test_psi2_three_term_identity(self, w):
        """Test |psi2(w-1)|^2 + |psi2(w)|^2 + |psi2(w+1)|^2 = 1."""
        bank = WindowBank()
        total = sum(float(eval_psi2_hat(bank, w + m)) ** 2 for m in (-1, 0, 1))
        assert total == pytest.approx(1.0, abs=1e-12)
        assert float(eval_psi2_hat(bank, 1.5)) == 0.0

    def test_v_values(self):
        """Test v(0) = 1 and v vanishes beyond 1."""
        bank = WindowBank()
        assert float(eval_v(bank, 0.0)) == pytest.approx(1.0)
        assert float(eval_v(bank, 1.2)) == 0.0

    def test_corona_telescoping(self):
        """Test Phi^2 + sum_{j<=5} W^2(4^-j xi) = 1 at (0.4, 0.1)."""
        bank = WindowBank()
        xi = np.array([0.4, 0.1])
        total = bank.smooth_big_phi_hat(xi) ** 2 + sum(eval_W(bank, 4.0 ** -j * xi) ** 2 for j in range(6))
        assert float(total) == pytest.approx(1.0, abs=1e-12)

    def test_smooth_lowpass_examples(self):
        """Test the smooth low-pass is 0 at (0.2, 0) and Psi_hat is 1 on the flat cube."""
        bank = WindowBank()
        assert float(eval_lowpass(bank, 'smooth', np.array([0.2, 0.0]))) == 0.0
        assert float(eval_lowpass(bank, 'shear_global', np.array([0.1, 0.1]))) == pytest.approx(1.0)
