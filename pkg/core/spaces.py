#!/usr/bin/env python3
"""
Quasi-norms of shear anisotropic and dyadic Besov / Triebel-Lizorkin spaces.

Distribution-side norms work on full-grid coefficient fields with the
quadrature ||g||_p = N^{-d/p} (sum |g|^p)^{1/p}. Sequence-side norms work
on lattice coefficients. p = inf or q = inf are exact suprema; 0 < p < 1 and
0 < q < 1 are plain quasi-norms.

Also here: the maximal machinery used by the characterization proofs
(Hardy-Littlewood, Peetre, and the s*_{r,N} sequence envelope).
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import fft, ndimage

from core.frame import Frame, signed_frequencies, torus_coordinates
from core.lattice import apply_BA, cell_volume, grid_cell_index, translations
from core.transform import (
    CoefficientField,
    DyadicBand,
    DyadicSystem,
    GridFunction,
    SequenceCoefficients,
    build_dyadic_system,
    dyadic_forward,
    forward_grid,
)
from core.windows import WindowBank

logger = logging.getLogger(__name__)

INF = math.inf

# Block size for pairwise distance sums in maximal_sequence
PAIR_CHUNK = 512

# Relative size below which a box average is treated as an exact zero
ROUNDOFF = 64 * np.finfo(float).eps


@dataclass(frozen=True)
class SmoothnessParams:
    """(alpha, p, q) with p, q in (0, inf]."""
    alpha: float
    p: float
    q: float

    def __post_init__(self):
        is_valid, error = self.validate()
        if not is_valid:
            raise ValueError(error)

    def validate(self):
        if not self.p > 0:
            return False, f"p must be positive, got {self.p}"
        if not self.q > 0:
            return False, f"q must be positive, got {self.q}"
        if math.isnan(self.alpha):
            return False, "alpha must be a number"
        return True, ""

    def to_dict(self) -> dict:
        return {'alpha': self.alpha, 'p': _jsonable(self.p), 'q': _jsonable(self.q)}


@dataclass(frozen=True)
class MaximalParams:
    """r and N of s*_{r,N}, and the Peetre exponent lambda."""
    r: float
    N_decay: float
    lam: float = 1.0

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError(f"r must be positive, got {self.r}")
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")

    def decay_sufficient(self, d: int, p: float, q: float) -> bool:
        """True if N > (d+1) max(1, r/q, r/p), the range where s* is an equivalent norm."""
        return self.N_decay > (d + 1) * max(1.0, self.r / q, self.r / p)


def _jsonable(value: float):
    return 'inf' if math.isinf(value) else value


def parse_exponent(value) -> float:
    """Accept numbers and the strings 'inf' / 'infinity'."""
    if isinstance(value, str) and value.strip().lower() in ('inf', 'infinity'):
        return INF
    return float(value)


# -- l^p / L^p helpers ------------------------------------------------------------------

def lp_sum(values, p: float) -> float:
    """Plain l^p (quasi-)norm (sum |v|^p)^{1/p}; max |v| for p = inf."""
    values = np.abs(np.asarray(values)).ravel()
    if values.size == 0:
        return 0.0
    if math.isinf(p):
        return float(values.max())
    return float(np.sum(values ** p) ** (1.0 / p))


def lp_norm(values, p: float) -> float:
    """
    Quadrature L^p norm of grid samples on [0, 1)^d.

    Examples:
      - ones on any grid, any p -> 1.0
      - zeros -> 0.0
    """
    values = np.asarray(values)
    if math.isinf(p):
        return lp_sum(values, p)
    return lp_sum(values, p) / values.size ** (1.0 / p)


def lq_aggregate(terms, q: float) -> float:
    """(sum_t t^q)^{1/q} of nonnegative numbers."""
    return lp_sum(np.asarray(list(terms), dtype=float), q)


class _PointwiseAggregate:
    """Running (sum_b |g_b|^q)^{1/q} over arrays of one shape."""

    def __init__(self, q: float):
        self.q = q
        self.total = None

    def add(self, values: np.ndarray):
        values = np.abs(values)
        if math.isinf(self.q):
            update = values
            self.total = update if self.total is None else np.maximum(self.total, update)
        else:
            update = values ** self.q
            self.total = update if self.total is None else self.total + update

    def result(self, shape) -> np.ndarray:
        if self.total is None:
            return np.zeros(shape)
        return self.total if math.isinf(self.q) else self.total ** (1.0 / self.q)


def shear_weight(j: int, d: int, exponent: float) -> float:
    """|Q_j|^exponent with |Q_j| = 2^{-(d+1)j}."""
    return cell_volume(j, d) ** exponent


def _shear_field(frame: Frame, f, workers: int) -> CoefficientField:
    if isinstance(f, CoefficientField):
        return f
    if not isinstance(f, GridFunction):
        f = GridFunction(np.asarray(f))
    return forward_grid(frame, f, workers)


def _dyadic_field(system, f, workers: int) -> CoefficientField:
    if isinstance(f, CoefficientField):
        return f
    if not isinstance(f, GridFunction):
        f = GridFunction(np.asarray(f))
    return dyadic_forward(system, f, workers)


def _band_lp(field: CoefficientField, band, p: float) -> float:
    """||c_b||_p; for p = 2 straight from the stored spectrum (Parseval)."""
    if p == 2:
        return field.band_l2(band)
    return lp_norm(field.values(band), p)


# -- shear anisotropic distribution norms -----------------------------------------------

def besov_AB_norm(frame: Frame, f, params: SmoothnessParams, workers: int = 1) -> float:
    """
    ||f * Psi||_p + (sum_b [|Q_j|^-alpha ||f * psi_b||_p]^q)^{1/q}.

    Args:
        frame: Built frame
        f: GridFunction, raw samples, or a CoefficientField of the frame
        params: Smoothness parameters
    """
    field = _shear_field(frame, f, workers)
    low = _band_lp(field, frame.lowpass.band, params.p)
    terms = [
        shear_weight(atom.band.j, frame.d, -params.alpha) * _band_lp(field, atom.band, params.p)
        for atom in frame.shear_atoms
    ]
    return low + lq_aggregate(terms, params.q)


def tl_AB_norm(frame: Frame, f, params: SmoothnessParams, workers: int = 1) -> float:
    """
    ||f * Psi||_p + || (sum_b (|Q_j|^-alpha |f * psi_b|)^q)^{1/q} ||_p.

    Raises:
        ValueError: If p = inf
    """
    if math.isinf(params.p):
        raise ValueError("Triebel-Lizorkin norms require p < inf")
    field = _shear_field(frame, f, workers)
    low = lp_norm(field.lowpass_values(), params.p)
    aggregate = _PointwiseAggregate(params.q)
    for atom in frame.shear_atoms:
        aggregate.add(shear_weight(atom.band.j, frame.d, -params.alpha) * field.values(atom.band))
    return low + lp_norm(aggregate.result((frame.N,) * frame.d), params.p)


# -- shear anisotropic sequence norms ----------------------------------------------------

def besov_seq_exponent(params: SmoothnessParams, d: int) -> float:
    """Exponent of |Q| in b_AB: -alpha + d/(p(d+1)) - 1/2."""
    return -params.alpha + d / (params.p * (d + 1)) - 0.5


def besov_seq_norm(s: SequenceCoefficients, params: SmoothnessParams, d: int = None) -> float:
    """
    (sum |s_k|^p)^{1/p} + (sum_b [sum_Q (|Q|^{-alpha + d/(p(d+1)) - 1/2} |s_Q|)^p]^{q/p})^{1/q}.

    Example: the delta s_(j,0,0) = |P_j|^(alpha - d/(p(d+1)) + 1/2) has norm 1.
    """
    d = s.d if d is None else d
    exponent = besov_seq_exponent(params, d)
    terms = [shear_weight(band.j, d, exponent) * lp_sum(values, params.p) for band, values in s.bands.items()]
    return abs(s.lowpass) + lq_aggregate(terms, params.q)


def tl_seq_norm(s: SequenceCoefficients, params: SmoothnessParams, frame: Frame = None) -> float:
    """
    || (sum_Q (|Q|^-alpha |s_Q| |Q|^{-1/2} chi_Q)^q)^{1/q} ||_p over the shear cells.

    The cell indicators are evaluated exactly on the grid (grid_cell_index).

    Raises:
        ValueError: If p = inf
    """
    if math.isinf(params.p):
        raise ValueError("Triebel-Lizorkin norms require p < inf")
    d, N = s.d, s.N
    if frame is not None and (frame.d, frame.N) != (d, N):
        raise ValueError(f"Sequence is for d={d} N={N}, frame is d={frame.d} N={frame.N}")
    aggregate = _PointwiseAggregate(params.q)
    for band, values in s.bands.items():
        if not np.any(values):
            continue
        cells = grid_cell_index(band.j, band.shear, band.cone, d, N)
        weight = shear_weight(band.j, d, -params.alpha - 0.5)
        aggregate.add(weight * np.abs(values)[cells])
    return lp_norm(aggregate.result((N,) * d), params.p)


# -- dyadic norms ----------------------------------------------------------------------------

def dyadic_cell_index(nu: int, d: int, N: int) -> np.ndarray:
    """Flat index (C-order over [0, 2^nu)^d) of the dyadic cube holding each grid node."""
    k = (np.arange(N) * 2 ** nu) // N
    grids = np.meshgrid(*([k] * d), indexing='ij')
    return np.ravel_multi_index(tuple(grids), (2 ** nu,) * d)


DYADIC_KINDS = ('B', 'F', 'b', 'f')


def dyadic_norms(x, params: SmoothnessParams, kind: str, system: DyadicSystem = None,
                 workers: int = 1) -> float:
    """
    Isotropic inhomogeneous Besov / Triebel-Lizorkin quasi-norms.

    Args:
        x: GridFunction or dyadic CoefficientField for 'B'/'F'; dyadic
           SequenceCoefficients for 'b'/'f'
        params: Smoothness parameters
        kind: 'B', 'F', 'b' or 'f'
        system: DyadicSystem (built from a default WindowBank if omitted)

    Returns:
        float: 'B' = ||f*Phi||_p + (sum_nu (2^{nu alpha} ||f*phi_nu||_p)^q)^{1/q};
        'F' = ||f*Phi||_p + ||(sum_nu (2^{nu alpha} |f*phi_nu|)^q)^{1/q}||_p;
        'b' = (sum_nu (sum_Q (|Q|^{-alpha/d + 1/p - 1/2} |s_Q|)^p)^{q/p})^{1/q};
        'f' = ||(sum_Q (|Q|^{-alpha/d} |s_Q| |Q|^{-1/2} chi_Q)^q)^{1/q}||_p

    Raises:
        ValueError: Unknown kind, or p = inf for 'F'/'f'
    """
    if kind not in DYADIC_KINDS:
        raise ValueError(f"Unknown dyadic norm kind '{kind}'; expected one of {DYADIC_KINDS}")
    if kind in ('F', 'f') and math.isinf(params.p):
        raise ValueError("Triebel-Lizorkin norms require p < inf")

    if kind in ('b', 'f'):
        return _dyadic_sequence_norm(x, params, kind)

    if system is None:
        system = build_dyadic_system(WindowBank(), x.d, x.N)
    field = _dyadic_field(system, x, workers)
    levels = [a.band for a in system.atoms[1:]]
    if kind == 'B':
        low = _band_lp(field, system.atoms[0].band, params.p)
        terms = [2.0 ** (band.nu * params.alpha) * _band_lp(field, band, params.p) for band in levels]
        return low + lq_aggregate(terms, params.q)
    low = lp_norm(field.lowpass_values(), params.p)
    aggregate = _PointwiseAggregate(params.q)
    for band in levels:
        aggregate.add(2.0 ** (band.nu * params.alpha) * field.values(band))
    return low + lp_norm(aggregate.result((system.N,) * system.d), params.p)


def _dyadic_sequence_norm(s: SequenceCoefficients, params: SmoothnessParams, kind: str) -> float:
    d, N = s.d, s.N
    if kind == 'b':
        terms = []
        for band, values in s.bands.items():
            volume = 2.0 ** (-band.nu * d)
            exponent = -params.alpha / d + (0.0 if math.isinf(params.p) else 1.0 / params.p) - 0.5
            terms.append(volume ** exponent * lp_sum(values, params.p))
        return lq_aggregate(terms, params.q)
    aggregate = _PointwiseAggregate(params.q)
    for band, values in s.bands.items():
        volume = 2.0 ** (-band.nu * d)
        cells = dyadic_cell_index(band.nu, d, N)
        aggregate.add(volume ** (-params.alpha / d - 0.5) * np.abs(values)[cells])
    return lp_norm(aggregate.result((N,) * d), params.p)


# -- maximal sequences ------------------------------------------------------------------------

def _positions(band, d: int) -> np.ndarray:
    """Lower-left corners x_P of the translations of a band."""
    if isinstance(band, DyadicBand):
        k = np.indices((2 ** band.nu,) * d).reshape(d, -1).T
        return k * 2.0 ** -band.nu
    _, corners = translations(band.j, band.shear, band.cone, d)
    return corners


def _scale_factor(band) -> float:
    """2^j for a shear band, 2^nu (inverse cube side) for a dyadic level."""
    return 2.0 ** (band.nu if isinstance(band, DyadicBand) else band.j)


def torus_distance(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Minimum-image distances between rows of x (M, d) and y (K, d) on [0, 1)^d, shape (M, K)."""
    delta = x[:, None, :] - y[None, :, :]
    delta -= np.round(delta)
    return np.linalg.norm(delta, axis=-1)


def _envelope(targets: np.ndarray, sources: np.ndarray, magnitudes: np.ndarray,
              scale: float, params: MaximalParams) -> np.ndarray:
    """(sum_P |s_P|^r / (1 + scale |x_Q - x_P|)^N)^{1/r} for each target x_Q."""
    out = np.zeros(len(targets))
    if magnitudes.size == 0:
        return out
    powered = magnitudes ** params.r
    for start in range(0, len(targets), PAIR_CHUNK):
        block = targets[start:start + PAIR_CHUNK]
        weights = (1.0 + scale * torus_distance(block, sources)) ** (-params.N_decay)
        out[start:start + PAIR_CHUNK] = (weights @ powered) ** (1.0 / params.r)
    return out


def maximal_sequence(s: SequenceCoefficients, params: MaximalParams, scope: str = None) -> SequenceCoefficients:
    """
    The envelope (s*_{r,N})_Q = (sum_P |s_P|^r / (1 + 2^j |x_Q - x_P|)^N)^{1/r}.

    P runs over the band (or dyadic level) of Q with torus distances; the sum
    is truncated to the nonzero entries of s, which is exact. The low-pass
    entry is its own envelope.

    Raises:
        ValueError: If scope does not match the sequence kind
    """
    scope = s.kind if scope is None else scope
    if scope not in ('shear', 'dyadic') or scope != s.kind:
        raise ValueError(f"Scope '{scope}' does not match a {s.kind} sequence")
    bands = {}
    for band, values in s.bands.items():
        magnitudes = np.abs(values)
        positions = _positions(band, s.d)
        support = magnitudes > 0
        bands[band] = _envelope(positions, positions[support], magnitudes[support], _scale_factor(band), params)
    return SequenceCoefficients(s.d, s.N, bands, abs(s.lowpass), s.kind)


def maximal_value(s: SequenceCoefficients, band_P, x_Q, scale_Q: int, params: MaximalParams) -> float:
    """
    Cross-scale envelope at one point: P over band_P (scale j), Q at scale i >= j.

    Raises:
        ValueError: If scale_Q < j
    """
    if scale_Q < band_P.j:
        raise ValueError(f"Cross-scale envelope needs i >= j, got i={scale_Q} < j={band_P.j}")
    magnitudes = np.abs(s.bands[band_P])
    positions = _positions(band_P, s.d)
    support = magnitudes > 0
    target = np.atleast_2d(np.asarray(x_Q, dtype=float))
    return float(_envelope(target, positions[support], magnitudes[support], _scale_factor(band_P), params)[0])


# -- maximal functions on the grid ----------------------------------------------------------

def hl_window_sizes(N: int):
    """
    Cube sides in grid steps: odd 1, 3, 5, 9, 17, ... <= N - 1, then N for the whole torus.

    Example: N = 16 -> [1, 3, 5, 9, 16]
    """
    sizes = [1]
    k = 1
    while 2 ** k + 1 <= N - 1:
        sizes.append(2 ** k + 1)
        k += 1
    sizes.append(N)
    return sizes


def hl_maximal(g) -> np.ndarray:
    """
    Hardy-Littlewood maximal function with centered cubes of dyadic side on the torus.

    The largest cube is the torus itself, so the result is at least the mean
    of |g| everywhere. Box averages below ROUNDOFF * max|g| are round-off of
    an exact zero and count as 0.

    Example: g == 1 -> 1 everywhere
    """
    values = np.abs(g.samples if isinstance(g, GridFunction) else np.asarray(g)).astype(float)
    result = values.copy()
    peak = float(values.max()) if values.size else 0.0
    if peak == 0:
        return result
    N = values.shape[0]
    for size in hl_window_sizes(N)[1:]:
        if size >= N:
            averaged = np.full(values.shape, values.mean())
        else:
            averaged = ndimage.uniform_filter(values, size=size, mode='wrap')
        averaged[averaged < ROUNDOFF * peak] = 0.0
        np.maximum(result, averaged, out=result)
    return result


def _offset_sup(values: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """
    sup_y |g(x - y)| / weights[y] over all grid offsets y (FFT order).

    Offsets are visited by decreasing 1/weight; once max|g| / weight falls below
    the smallest value found so far no later offset can change the result.
    """
    magnitudes = np.abs(values)
    result = magnitudes.copy()
    peak = magnitudes.max() if magnitudes.size else 0.0
    if peak == 0:
        return result
    damping = 1.0 / weights.ravel()
    order = np.argsort(-damping, kind='stable')
    floor = result.min()
    for flat in order:
        if peak * damping[flat] <= floor:
            break
        if flat == 0:
            continue
        shift = np.unravel_index(flat, values.shape)
        np.maximum(result, damping[flat] * np.roll(magnitudes, shift, axis=tuple(range(values.ndim))), out=result)
        floor = result.min()
    return result


def peetre_maximal(c, band, lam: float, d: int = None) -> np.ndarray:
    """
    Shear anisotropic Peetre maximal function sup_y |c(x - y)| / (1 + |B^[l] A^j y|)^{d lam}.

    Args:
        c: Grid values of one band's field
        band: Band (cone, j, l) giving the anisotropic metric
        lam: Exponent lambda > 0
    """
    values = c.samples if isinstance(c, GridFunction) else np.asarray(c)
    d = values.ndim if d is None else d
    N = values.shape[0]
    y = torus_coordinates(N, d)
    stretched = np.linalg.norm(apply_BA(band.j, band.shear, y, band.cone), axis=-1)
    return _offset_sup(values, (1.0 + stretched) ** (d * lam))


def isotropic_peetre(g, lam: float, scale: float = 1.0) -> np.ndarray:
    """g*_lambda(x) = sup_y |g(x - y)| / (1 + scale |y|)^{d lam}."""
    values = g.samples if isinstance(g, GridFunction) else np.asarray(g)
    d, N = values.ndim, values.shape[0]
    y = torus_coordinates(N, d)
    return _offset_sup(values, (1.0 + scale * np.linalg.norm(y, axis=-1)) ** (d * lam))


def spectral_derivative(g, axis: int) -> np.ndarray:
    """d g / d x_axis on the torus by multiplying the spectrum with 2 pi i xi_axis."""
    values = g.samples if isinstance(g, GridFunction) else np.asarray(g)
    d, N = values.ndim, values.shape[0]
    shape = [1] * d
    shape[axis] = -1
    xi = signed_frequencies(N).astype(float).reshape(shape)
    derivative = fft.ifftn(2j * np.pi * xi * fft.fftn(values))
    return derivative.real if np.isrealobj(values) else derivative


def derivative_peetre(g, lam: float, axis: int = 0, scale: float = 1.0) -> np.ndarray:
    """(d g / d x_axis)*_lambda with the isotropic weight."""
    return isotropic_peetre(spectral_derivative(g, axis), lam, scale)
