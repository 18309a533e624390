#!/usr/bin/env python3
"""
Spectral windows for the cone-adapted shearlet and dyadic frames.

Every window is built from one auxiliary ramp (meyer_aux) so that the
partition-of-unity identities hold exactly up to floating point:

    sum_j psi1_hat(4^-j w)^2 = 1                 for |w| >= 1/8
    sum_m psi2_hat(w - m)^2  = 1                 for all w
    Phi^2(xi) + sum_j W(4^-j xi)^2 = 1           for all xi
    Phi_dyad^2(xi) + sum_nu phi_dyad(2^-nu xi)^2 = 1

Points in frequency space are arrays whose last axis has length d.
"""
import logging
from dataclasses import dataclass, asdict

import numpy as np

logger = logging.getLogger(__name__)

# Smoothstep polynomials nu(t) on (0, 1), keyed by degree
MEYER_POLYNOMIALS = {
    3: (0.0, 0.0, 3.0, -2.0),
    5: (0.0, 0.0, 0.0, 10.0, -15.0, 6.0),
    7: (0.0, 0.0, 0.0, 0.0, 35.0, -84.0, 70.0, -20.0),
}
DEFAULT_MEYER_DEGREE = 7

# Breakpoints (continuum frequency units)
LOWPASS_FLAT = 1 / 16      # smooth phi_hat == 1 below this
LOWPASS_EDGE = 1 / 8       # smooth phi_hat == 0 above this
PSI1_SUPPORT = (1 / 16, 1 / 2)
PSI2_SUPPORT = 1.0
BIG_PSI_FLAT = 1 / 8
BIG_PSI_EDGE = 1 / 4
DYADIC_FLAT = 1 / 2
DYADIC_EDGE = 1.0

# Tolerated negative radicand before a window is declared broken
RADICAND_TOLERANCE = 1e-14

VARIANTS = ('shear_global', 'dyadic', 'smooth')


def meyer_aux(t, degree: int = DEFAULT_MEYER_DEGREE):
    """
    Auxiliary ramp nu(t): 0 for t <= 0, 1 for t >= 1, nu(t) + nu(1 - t) = 1.

    Examples:
      - meyer_aux(0) -> 0
      - meyer_aux(0.5) -> 0.5
      - meyer_aux(1) -> 1

    Args:
        t: Scalar or array
        degree: Smoothstep degree (3, 5 or 7)

    Returns:
        Array (or float for scalar input) with values in [0, 1]

    Raises:
        ValueError: If the degree is not supported
    """
    if degree not in MEYER_POLYNOMIALS:
        raise ValueError(
            f"Unsupported meyer_degree {degree}; expected one of {sorted(MEYER_POLYNOMIALS)}"
        )
    t = np.asarray(t, dtype=float)
    inner = np.clip(t, 0.0, 1.0)
    value = np.polynomial.polynomial.polyval(inner, MEYER_POLYNOMIALS[degree])
    value = np.where(t <= 0.0, 0.0, np.where(t >= 1.0, 1.0, value))
    return value if value.ndim else float(value)


def _ramp_down(x, flat, edge, degree):
    """cos(pi/2 * nu((|x| - flat) / (edge - flat))): 1 on |x| <= flat, 0 on |x| >= edge."""
    x = np.abs(np.asarray(x, dtype=float))
    value = np.cos(0.5 * np.pi * meyer_aux((x - flat) / (edge - flat), degree))
    # cos(pi/2) is not exactly zero in floating point
    return np.where(x >= edge, 0.0, value)


def _safe_sqrt(radicand, name):
    """Square root of a window difference; tiny negative radicands are rounding noise."""
    radicand = np.asarray(radicand, dtype=float)
    worst = float(radicand.min()) if radicand.size else 0.0
    if worst < -RADICAND_TOLERANCE:
        logger.error(f"Negative radicand {worst:.3e} while evaluating {name}")
        raise ArithmeticError(
            f"{name}: radicand {worst:.3e} below -{RADICAND_TOLERANCE:g}; window construction is inconsistent"
        )
    return np.sqrt(np.maximum(radicand, 0.0))


def _coords(xi):
    """Split points (..., d) into a list of d coordinate arrays."""
    xi = np.asarray(xi, dtype=float)
    if xi.ndim == 0:
        raise ValueError("Frequency point must have at least one coordinate")
    return [xi[..., i] for i in range(xi.shape[-1])]


@dataclass(frozen=True)
class WindowBank:
    """
    All spectral windows used by the frames, parametrized by the ramp degree.

    The bank is immutable; every method is a pure function of its arguments.
    Coordinate-list methods (suffix _c) take a list of broadcastable arrays,
    one per axis, so frames can evaluate on sparse grids without stacking.
    """
    meyer_degree: int = DEFAULT_MEYER_DEGREE

    def __post_init__(self):
        if self.meyer_degree not in MEYER_POLYNOMIALS:
            raise ValueError(
                f"Unsupported meyer_degree {self.meyer_degree}; "
                f"expected one of {sorted(MEYER_POLYNOMIALS)}"
            )

    # -- one-dimensional windows ------------------------------------------------

    def lowpass_1d(self, w):
        """Meyer scaling window: 1 on [-1/16, 1/16], 0 outside [-1/8, 1/8]."""
        return _ramp_down(w, LOWPASS_FLAT, LOWPASS_EDGE, self.meyer_degree)

    def psi1_hat(self, w):
        """Radial shearlet window, supported in 1/16 <= |w| <= 1/2."""
        w = np.asarray(w, dtype=float)
        return _safe_sqrt(self.lowpass_1d(w / 4) ** 2 - self.lowpass_1d(w) ** 2, 'psi1_hat')

    def closed_psi1_hat(self, w):
        """Top-scale radial window: like psi1_hat on the rising edge, then 1 to infinity."""
        return _safe_sqrt(1.0 - self.lowpass_1d(w) ** 2, 'closed_psi1_hat')

    def psi2_hat(self, w):
        """Shear window cos(pi/2 * nu(|w|)), supported in [-1, 1]."""
        w = np.abs(np.asarray(w, dtype=float))
        return np.where(w < PSI2_SUPPORT, np.cos(0.5 * np.pi * meyer_aux(w, self.meyer_degree)), 0.0)

    def v(self, u):
        """Smooth-variant bump: v(0) = 1, supp v in [-1, 1]."""
        return self.psi2_hat(u)

    def dyadic_theta(self, r):
        """Radial profile: 1 for r <= 1/2, 0 for r >= 1."""
        return _ramp_down(r, DYADIC_FLAT, DYADIC_EDGE, self.meyer_degree)

    # -- d-dimensional windows on coordinate lists --------------------------------

    def big_psi_hat_c(self, coords):
        value = 1.0
        for c in coords:
            value = value * _ramp_down(c, BIG_PSI_FLAT, BIG_PSI_EDGE, self.meyer_degree)
        return np.asarray(value, dtype=float)

    def smooth_big_phi_hat_c(self, coords):
        value = 1.0
        for c in coords:
            value = value * self.lowpass_1d(c)
        return np.asarray(value, dtype=float)

    def W_c(self, coords):
        outer = self.smooth_big_phi_hat_c([c / 4 for c in coords])
        inner = self.smooth_big_phi_hat_c(coords)
        return _safe_sqrt(outer ** 2 - inner ** 2, 'W')

    def closed_W_c(self, coords):
        return _safe_sqrt(1.0 - self.smooth_big_phi_hat_c(coords) ** 2, 'closed_W')

    def dyadic_big_phi_hat_c(self, coords):
        return self.dyadic_theta(_radius(coords))

    def dyadic_phi_hat_c(self, coords):
        r = _radius(coords)
        return _safe_sqrt(self.dyadic_theta(r / 2) ** 2 - self.dyadic_theta(r) ** 2, 'dyadic_phi_hat')

    def closed_dyadic_phi_hat_c(self, coords):
        return _safe_sqrt(1.0 - self.dyadic_theta(_radius(coords)) ** 2, 'closed_dyadic_phi_hat')

    # -- d-dimensional windows on (..., d) points ---------------------------------

    def big_psi_hat(self, xi):
        """Shear-global low-pass: 1 on [-1/8, 1/8]^d, supported in [-1/4, 1/4]^d."""
        return self.big_psi_hat_c(_coords(xi))

    def smooth_big_phi_hat(self, xi):
        """Tensor product of lowpass_1d: 1 on [-1/16, 1/16]^d, 0 outside [-1/8, 1/8]^d."""
        return self.smooth_big_phi_hat_c(_coords(xi))

    def W(self, xi):
        """Corona window sqrt(Phi^2(xi/4) - Phi^2(xi))."""
        return self.W_c(_coords(xi))

    def dyadic_big_phi_hat(self, xi):
        """Radial dyadic low-pass, supported in |xi| <= 1."""
        return self.dyadic_big_phi_hat_c(_coords(xi))

    def dyadic_phi_hat(self, xi):
        """Radial dyadic annulus, supported in 1/2 <= |xi| <= 2."""
        return self.dyadic_phi_hat_c(_coords(xi))

    @property
    def supports(self) -> dict:
        """Declared support metadata for every window (continuum units)."""
        return {
            'psi1_hat': {'annulus': list(PSI1_SUPPORT)},
            'psi2_hat': {'interval': [-PSI2_SUPPORT, PSI2_SUPPORT]},
            'big_psi_hat': {'cube': BIG_PSI_EDGE, 'flat_cube': BIG_PSI_FLAT},
            'smooth_phi_hat': {'interval': [-LOWPASS_EDGE, LOWPASS_EDGE], 'flat': LOWPASS_FLAT},
            'W': {'cube_annulus': [LOWPASS_FLAT, 4 * LOWPASS_EDGE]},
            'v': {'interval': [-PSI2_SUPPORT, PSI2_SUPPORT]},
            'dyadic_phi_hat': {'annulus': [DYADIC_FLAT, 2 * DYADIC_EDGE]},
            'dyadic_big_phi_hat': {'ball': DYADIC_EDGE},
        }

    def to_dict(self) -> dict:
        data = asdict(self)
        data['breakpoints'] = {
            'lowpass': [LOWPASS_FLAT, LOWPASS_EDGE],
            'psi1': list(PSI1_SUPPORT),
            'big_psi': [BIG_PSI_FLAT, BIG_PSI_EDGE],
            'dyadic': [DYADIC_FLAT, DYADIC_EDGE],
        }
        return data

    @classmethod
    def from_dict(cls, data: dict) -> 'WindowBank':
        """Rebuild a bank from its JSON config; breakpoints are informational."""
        return cls(meyer_degree=int(data.get('meyer_degree', DEFAULT_MEYER_DEGREE)))


def _radius(coords):
    total = 0.0
    for c in coords:
        total = total + np.asarray(c, dtype=float) ** 2
    return np.sqrt(total)


def eval_psi1_hat(bank: WindowBank, w):
    """Evaluate psi1_hat; zero outside [-1/2, -1/16] U [1/16, 1/2]."""
    return bank.psi1_hat(w)


def eval_psi2_hat(bank: WindowBank, w):
    """Evaluate psi2_hat; zero for |w| >= 1."""
    return bank.psi2_hat(w)


def eval_lowpass(bank: WindowBank, variant: str, xi):
    """
    Evaluate the low-pass window of a frame variant at frequency points.

    Args:
        bank: Window bank
        variant: 'shear_global' (Psi_hat), 'dyadic' (Phi_hat) or 'smooth' (Phi_hat of the smooth frame)
        xi: Points of shape (..., d)

    Returns:
        Array of values in [0, 1]

    Raises:
        ValueError: If the variant is unknown
    """
    if variant == 'shear_global':
        return bank.big_psi_hat(xi)
    if variant == 'dyadic':
        return bank.dyadic_big_phi_hat(xi)
    if variant == 'smooth':
        return bank.smooth_big_phi_hat(xi)
    raise ValueError(f"Unknown low-pass variant '{variant}'; expected one of {VARIANTS}")


def eval_W(bank: WindowBank, xi):
    return bank.W(xi)


def eval_v(bank: WindowBank, u):
    return bank.v(u)


def eval_dyadic(bank: WindowBank, kind: str, xi):
    """
    Evaluate a dyadic window.

    Args:
        bank: Window bank
        kind: 'annulus' for phi_hat or 'lowpass' for Phi_hat
        xi: Points of shape (..., d)
    """
    if kind == 'annulus':
        return bank.dyadic_phi_hat(xi)
    if kind == 'lowpass':
        return bank.dyadic_big_phi_hat(xi)
    raise ValueError(f"Unknown dyadic window kind '{kind}'; expected 'annulus' or 'lowpass'")


def sample_windows(bank: WindowBank, grid: int) -> dict:
    """
    Sample the one-dimensional windows on `grid` points of [-1, 1].

    The d-dimensional windows are sampled along the first axis (other
    coordinates zero), which is enough to inspect their radial profiles.

    Returns:
        dict: column name -> array, with 'omega' first
    """
    if grid < 2:
        raise ValueError(f"grid must be at least 2, got {grid}")
    omega = np.linspace(-1.0, 1.0, grid)
    axis = np.stack([omega, np.zeros_like(omega)], axis=-1)
    return {
        'omega': omega,
        'psi1_hat': bank.psi1_hat(omega),
        'psi2_hat': bank.psi2_hat(omega),
        'big_psi_hat': bank.big_psi_hat(axis),
        'smooth_phi_hat': bank.lowpass_1d(omega),
        'W': bank.W(axis),
        'v': bank.v(omega),
        'dyadic_phi_hat': bank.dyadic_phi_hat(axis),
        'dyadic_big_phi_hat': bank.dyadic_big_phi_hat(axis),
    }
