#!/usr/bin/env python3
"""
FFT analysis and synthesis for shearlet and dyadic systems.

Conventions on the N^d grid of the torus [0, 1)^d:

- DFT = N^d * Fourier-series coefficient
- c_b = f * psi~_b on the grid: ifftn(fftn(f) * mask_b) (masks are real and even)
- s_P = |P|^(1/2) c_b(x_P), x_P = A^-j B^-[l] k, |P| = 2^-(d+1)j
- synthesis of one band: ifftn(N^d |P|^(1/2) mask_b * fftn(scatter of s onto the nodes x_P))
"""
import logging
import time
from dataclasses import dataclass, field
from functools import cached_property
from multiprocessing.pool import ThreadPool
from typing import Dict, Optional, Tuple

import numpy as np
from scipy import fft

from core.frame import AtomSpectrum, Band, Frame, as_band, cone_indicator, signed_frequencies, sparse_block
from core.lattice import cell_volume, translations
from core.windows import WindowBank

logger = logging.getLogger(__name__)

# Largest imaginary part tolerated when a field of a real signal is returned as real
REAL_TOLERANCE = 1e-9

# Direct evaluation on a band's support box is used while
# (points * box size) <= DIRECT_COST_FACTOR * N^d; beyond that a full FFT is cheaper
DIRECT_COST_FACTOR = 8


def block_ifft(freqs, block: np.ndarray, N: int) -> np.ndarray:
    """
    ifftn of a spectrum supported on the open mesh `freqs`, one axis at a time.

    Axes are transformed from the longest to the shortest, so the leading
    transforms only touch the rows of the support box.
    """
    d = len(freqs)
    current = np.asarray(block, dtype=complex)
    for axis in sorted(range(d), key=lambda a: -len(freqs[a])):
        shape = list(current.shape)
        shape[axis] = N
        embedded = np.zeros(shape, dtype=complex)
        index = [slice(None)] * d
        index[axis] = np.mod(freqs[axis], N)
        embedded[tuple(index)] = current
        current = fft.ifft(embedded, axis=axis)
    return current


def _phases(freqs: np.ndarray, coords: np.ndarray, N: int, sign: int) -> np.ndarray:
    """exp(sign 2 pi i n xi / N), shape (points, len(freqs))."""
    return np.exp(sign * 2j * np.pi * np.outer(coords, freqs) / N)


def direct_is_cheaper(atom: AtomSpectrum, points: int, N: int) -> bool:
    return points * atom.values.size <= DIRECT_COST_FACTOR * N ** atom.d


def values_at_nodes(freqs, block: np.ndarray, nodes: np.ndarray, N: int) -> np.ndarray:
    """N^-d sum_xi S(xi) e^{2 pi i xi.n / N} at the grid nodes n (rows of `nodes`) only."""
    M, d = nodes.shape
    partial = _phases(freqs[0], nodes[:, 0], N, 1) @ block.reshape(len(freqs[0]), -1)
    partial = partial.reshape((M,) + block.shape[1:])
    for axis in range(1, d):
        partial = np.einsum('mi,mi...->m...', _phases(freqs[axis], nodes[:, axis], N, 1), partial)
    return partial / N ** d


def lattice_sum(freqs, coefficients: np.ndarray, nodes: np.ndarray, N: int) -> np.ndarray:
    """sum_m c_m e^{-2 pi i xi.n_m / N} on the open mesh `freqs` (the DFT of the scattered nodes)."""
    d = len(freqs)
    partial = np.asarray(coefficients)[:, None] * _phases(freqs[0], nodes[:, 0], N, -1)
    for axis in range(1, d - 1):
        partial = np.einsum('m...,mi->m...i', partial, _phases(freqs[axis], nodes[:, axis], N, -1))
    return np.einsum('m...,mi->...i', partial, _phases(freqs[d - 1], nodes[:, d - 1], N, -1))


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples of a function on the N^d grid of [0, 1)^d."""
    samples: np.ndarray

    def __post_init__(self):
        shape = np.shape(self.samples)
        if len(shape) < 1 or len(set(shape)) != 1:
            raise ValueError(f"Grid function must be sampled on an N^d cube, got shape {shape}")

    @property
    def d(self) -> int:
        return self.samples.ndim

    @property
    def N(self) -> int:
        return self.samples.shape[0]

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.samples)

    @cached_property
    def spectrum(self) -> np.ndarray:
        return fft.fftn(self.samples)

    @classmethod
    def from_spectrum(cls, spectrum: np.ndarray, real: bool = True) -> 'GridFunction':
        samples = fft.ifftn(spectrum)
        return cls(_as_real(samples) if real else samples)

    def l2_norm(self) -> float:
        """Quadrature L^2 norm N^{-d/2} ||samples||_2."""
        return float(np.sqrt(np.sum(np.abs(self.samples) ** 2) / self.N ** self.d))

    def __add__(self, other: 'GridFunction') -> 'GridFunction':
        return GridFunction(self.samples + other.samples)

    def __mul__(self, scalar) -> 'GridFunction':
        return GridFunction(self.samples * scalar)

    __rmul__ = __mul__


def _as_real(samples: np.ndarray) -> np.ndarray:
    """Real part of a field that is real up to rounding."""
    imag = float(np.max(np.abs(samples.imag))) if samples.size else 0.0
    scale = float(np.max(np.abs(samples.real))) if samples.size else 0.0
    if imag > REAL_TOLERANCE * max(scale, 1.0):
        logger.warning(f"Discarding imaginary part {imag:.3e} of a field expected to be real")
    return samples.real.copy()


def _check_grid(system, f: GridFunction):
    if f.d != system.d or f.N != system.N:
        raise ValueError(
            f"Grid mismatch: function is d={f.d} N={f.N}, system is d={system.d} N={system.N}"
        )


# -- dyadic system ----------------------------------------------------------------

@dataclass(frozen=True, order=True)
class DyadicBand:
    """Level nu of the dyadic Littlewood-Paley system; nu = -1 is the low-pass Phi."""
    nu: int

    @property
    def is_lowpass(self) -> bool:
        return self.nu < 0

    @property
    def j(self) -> int:
        return max(self.nu, 0)


DYADIC_LOWPASS = DyadicBand(-1)


def dyadic_nu_max(N: int) -> int:
    """Largest nu with 2^(nu + 1) <= N / 2."""
    return int(np.log2(N)) - 2


@dataclass(frozen=True, eq=False)
class DyadicSystem:
    """Radial dyadic masks Phi, phi(2^-nu xi) for nu = 0..nu_max on one grid."""
    bank: WindowBank
    d: int
    N: int
    atoms: Tuple[AtomSpectrum, ...]
    close_high_pass: bool = True

    @property
    def nu_max(self) -> int:
        return len(self.atoms) - 2

    @property
    def lowpass(self) -> AtomSpectrum:
        return self.atoms[0]

    @property
    def bands(self):
        return [a.band for a in self.atoms]

    @cached_property
    def band_index(self) -> Dict[DyadicBand, int]:
        return {a.band: i for i, a in enumerate(self.atoms)}

    def atom(self, band) -> AtomSpectrum:
        if isinstance(band, int):
            band = DyadicBand(band)
        if band not in self.band_index:
            raise ValueError(f"Level {band} is not part of this dyadic system")
        return self.atoms[self.band_index[band]]


def build_dyadic_system(bank: WindowBank, d: int, N: int, close_high_pass: bool = True) -> DyadicSystem:
    """
    Dyadic masks on the grid; the top level is closed so the squares sum to one everywhere.

    Raises:
        ValueError: If the grid holds no dyadic level
    """
    nu_max = dyadic_nu_max(N)
    if nu_max < 0:
        raise ValueError(f"Grid N={N} is too small for a dyadic system")

    def level(nu):
        if nu < 0:
            return bank.dyadic_big_phi_hat_c, [1] * d
        scale = 2.0 ** -nu
        if close_high_pass and nu == nu_max:
            return (lambda c: bank.closed_dyadic_phi_hat_c([scale * x for x in c])), [N // 2] * d
        reach = min(N // 2, 2 ** (nu + 1))
        return (lambda c: bank.dyadic_phi_hat_c([scale * x for x in c])), [reach] * d

    atoms = []
    for nu in range(-1, nu_max + 1):
        evaluate, bounds = level(nu)
        freqs, values = sparse_block(N, bounds, evaluate)
        atoms.append(AtomSpectrum(band=DyadicBand(nu), freqs=freqs, values=values))
    logger.debug(f"Built dyadic system d={d} N={N}: levels 0..{nu_max}")
    return DyadicSystem(bank=bank, d=d, N=N, atoms=tuple(atoms), close_high_pass=close_high_pass)


# -- coefficient fields -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CoefficientField:
    """
    Band-pass pieces c_b = f * psi~_b of one function.

    Only the spectrum of each band on its mask's support block is stored;
    spatial arrays are materialized on demand by values() and kept only
    when cache_values is set.
    """
    system: object
    spectra: Tuple[np.ndarray, ...]
    real: bool = True
    cache_values: bool = False
    _values: dict = field(default_factory=dict, init=False, repr=False)

    @property
    def d(self) -> int:
        return self.system.d

    @property
    def N(self) -> int:
        return self.system.N

    @property
    def bands(self):
        return self.system.bands

    def _position(self, band) -> int:
        if isinstance(self.system, Frame):
            band = as_band(band)
        return self.system.band_index[self.system.atom(band).band]

    def spectrum_block(self, band) -> np.ndarray:
        return self.spectra[self._position(band)]

    def spectrum(self, band) -> np.ndarray:
        """Dense DFT of c_b."""
        position = self._position(band)
        atom = self.system.atoms[position]
        dense = np.zeros((self.N,) * self.d, dtype=complex)
        if not atom.is_empty:
            dense[atom.grid_index(self.N)] = self.spectra[position]
        return dense

    def values(self, band) -> np.ndarray:
        """c_b on the grid (read-only when cached)."""
        position = self._position(band)
        if position in self._values:
            return self._values[position]
        atom = self.system.atoms[position]
        if atom.is_empty:
            samples = np.zeros((self.N,) * self.d, dtype=complex)
        else:
            samples = block_ifft(atom.freqs, self.spectra[position], self.N)
        result = _as_real(samples) if self.real else samples
        if self.cache_values:
            result.setflags(write=False)
            self._values[position] = result
        return result

    def values_at(self, band, nodes: np.ndarray) -> np.ndarray:
        """c_b at the grid nodes (M, d) only, without a full inverse FFT when that is cheaper."""
        position = self._position(band)
        atom = self.system.atoms[position]
        if position in self._values or not direct_is_cheaper(atom, len(nodes), self.N):
            return self.values(band)[tuple(np.asarray(nodes).T)]
        if atom.is_empty:
            return np.zeros(len(nodes), dtype=float if self.real else complex)
        samples = values_at_nodes(atom.freqs, self.spectra[position], np.asarray(nodes), self.N)
        return _as_real(samples) if self.real else samples

    def band_l2(self, band) -> float:
        """Quadrature L^2 norm of c_b from its stored spectrum."""
        block = self.spectra[self._position(band)]
        return float(np.sqrt(np.sum(np.abs(block) ** 2))) / self.N ** self.d

    def cached(self) -> 'CoefficientField':
        """Same field, keeping every materialized band."""
        return CoefficientField(self.system, self.spectra, self.real, cache_values=True)

    def lowpass_values(self) -> np.ndarray:
        return self.values(self.system.atoms[0].band)

    def items(self):
        """(band, grid values) for every band, low-pass first."""
        for atom in self.system.atoms:
            yield atom.band, self.values(atom.band)

    def energy(self) -> float:
        """sum_b ||c_b||^2 in quadrature units, from the spectra (Parseval)."""
        total = sum(float(np.sum(np.abs(block) ** 2)) for block in self.spectra)
        return total / self.N ** (2 * self.d)

    def zeros_like(self) -> 'CoefficientField':
        return CoefficientField(self.system, tuple(np.zeros_like(b) for b in self.spectra), self.real,
                                self.cache_values)


def _analyze(system, f: GridFunction, workers: int) -> CoefficientField:
    _check_grid(system, f)
    spectrum = f.spectrum

    def one(atom: AtomSpectrum) -> np.ndarray:
        if atom.is_empty:
            return np.zeros(atom.values.shape, dtype=complex)
        return spectrum[atom.grid_index(system.N)] * atom.values

    if workers > 1:
        with ThreadPool(workers) as pool:
            spectra = pool.map(one, system.atoms)
    else:
        spectra = [one(atom) for atom in system.atoms]
    return CoefficientField(system=system, spectra=tuple(spectra), real=f.is_real)


def _synthesize_field(system, field: CoefficientField) -> GridFunction:
    if field.system is not system:
        if field.bands != system.bands or field.N != system.N or field.d != system.d:
            raise ValueError("Coefficient field was computed with a different band set")
    total = np.zeros((system.N,) * system.d, dtype=complex)
    for atom, block in zip(system.atoms, field.spectra):
        if not atom.is_empty:
            total[atom.grid_index(system.N)] += block * atom.values
    return GridFunction.from_spectrum(total, real=field.real)


def forward_grid(frame: Frame, f: GridFunction, workers: int = 1) -> CoefficientField:
    """
    Full-grid analysis: every band's c_b = f * psi~_b.

    Args:
        frame: Built frame
        f: Function on the frame's grid
        workers: Threads over bands

    Raises:
        ValueError: On a grid mismatch
    """
    start = time.perf_counter()
    field = _analyze(frame, f, workers)
    logger.debug(f"forward_grid: {len(frame.atoms)} bands in {time.perf_counter() - start:.3f}s")
    return field


def inverse_grid(frame: Frame, field: CoefficientField) -> GridFunction:
    """Reassemble f from sum_b c_b^ * mask_b; exact for a Parseval frame."""
    return _synthesize_field(frame, field)


def dyadic_forward(system, f: GridFunction, workers: int = 1) -> CoefficientField:
    """
    Littlewood-Paley fields f * Phi and f * phi_{2^nu} for nu = 0..nu_max.

    Args:
        system: DyadicSystem, or a WindowBank to build one for f's grid
        f: Function on the grid
    """
    if isinstance(system, WindowBank):
        system = build_dyadic_system(system, f.d, f.N)
    return _analyze(system, f, workers)


def dyadic_inverse(system: DyadicSystem, field: CoefficientField) -> GridFunction:
    return _synthesize_field(system, field)


# -- sequences ----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SequenceCoefficients:
    """
    Lattice coefficients of a shearlet or dyadic system.

    bands maps each owner band to the array of s_Q over its translations,
    ordered as core.lattice.translations (or C-order k for dyadic levels);
    lowpass holds the single torus coefficient s_0.
    """
    d: int
    N: int
    bands: Dict[object, np.ndarray]
    lowpass: complex = 0.0
    kind: str = 'shear'

    def __add__(self, other: 'SequenceCoefficients') -> 'SequenceCoefficients':
        if set(self.bands) != set(other.bands):
            raise ValueError("Cannot add sequences over different band sets")
        return SequenceCoefficients(
            self.d, self.N, {b: self.bands[b] + other.bands[b] for b in self.bands},
            self.lowpass + other.lowpass, self.kind,
        )

    def __mul__(self, scalar) -> 'SequenceCoefficients':
        return SequenceCoefficients(
            self.d, self.N, {b: v * scalar for b, v in self.bands.items()},
            self.lowpass * scalar, self.kind,
        )

    __rmul__ = __mul__

    def zeros_like(self) -> 'SequenceCoefficients':
        return self * 0.0

    @property
    def size(self) -> int:
        return 1 + sum(v.size for v in self.bands.values())

    def max_abs(self) -> float:
        values = [abs(self.lowpass)] + [float(np.max(np.abs(v))) for v in self.bands.values() if v.size]
        return max(values)

    @classmethod
    def delta(cls, template: 'SequenceCoefficients', band, value: complex = 1.0,
              position: int = 0) -> 'SequenceCoefficients':
        """A sequence with one nonzero entry s_(band, position) = value."""
        zero = template.zeros_like()
        if band not in zero.bands:
            raise ValueError(f"Band {band} is not part of the sequence")
        if not 0 <= position < zero.bands[band].size:
            raise ValueError(f"Translation index {position} out of range for band {band}")
        bands = {b: v.astype(complex) for b, v in zero.bands.items()}
        bands[band][position] = value
        return cls(zero.d, zero.N, bands, 0.0, zero.kind)


def _nodes(corners: np.ndarray, N: int, label) -> Tuple[np.ndarray, bool]:
    """Grid nodes nearest to the corners (mod N) and whether they are exact."""
    scaled = corners * N
    nodes = np.rint(scaled).astype(np.int64)
    exact = bool(np.allclose(scaled, nodes, atol=1e-9))
    if not exact:
        logger.warning(f"Translations of {label} fall between grid nodes; rounding to the nearest node")
    return np.mod(nodes, N), exact


def band_nodes(frame: Frame, band: Band) -> np.ndarray:
    """Grid node indices (M, d) of x_P for the translations of a shear band."""
    _, corners = translations(band.j, band.shear, band.cone, frame.d)
    nodes, _ = _nodes(corners, frame.N, band)
    return nodes


def dyadic_nodes(nu: int, d: int, N: int) -> np.ndarray:
    """Grid node indices of x_Q = 2^-nu k, k in [0, 2^nu)^d, C-order."""
    k = np.indices((2 ** nu,) * d).reshape(d, -1).T
    nodes, _ = _nodes(k * 2.0 ** -nu, N, f"level {nu}")
    return nodes


def subsample(frame: Frame, field: CoefficientField) -> SequenceCoefficients:
    """
    Sequence coefficients s_P = |P|^(1/2) c_b(x_P) for every atom and translation.

    The low-pass has the single torus coefficient s_0 = c_low(0).
    """
    bands = {}
    for atom in frame.shear_atoms:
        band = atom.band
        nodes = band_nodes(frame, band)
        bands[band] = np.sqrt(cell_volume(band.j, frame.d)) * field.values_at(band, nodes)
    lowpass = field.values_at(frame.lowpass.band, np.zeros((1, frame.d), dtype=np.int64))[0]
    return SequenceCoefficients(frame.d, frame.N, bands, lowpass, 'shear')


def _scatter(values: np.ndarray, nodes: np.ndarray, N: int, d: int) -> np.ndarray:
    grid = np.zeros((N,) * d, dtype=complex)
    np.add.at(grid, tuple(nodes.T), values)
    return grid


def _synthesize_sequence(system, s: SequenceCoefficients, nodes_of, volume_of) -> GridFunction:
    if s.d != system.d or s.N != system.N:
        raise ValueError(f"Sequence is for d={s.d} N={s.N}, system is d={system.d} N={system.N}")
    N, d = system.N, system.d
    total = np.zeros((N,) * d, dtype=complex)
    lowpass = system.atoms[0]
    if not lowpass.is_empty:
        spike = np.zeros((N,) * d, dtype=complex)
        spike[(0,) * d] = s.lowpass
        total[lowpass.grid_index(N)] += N ** d * lowpass.values * fft.fftn(spike)[lowpass.grid_index(N)]
    for band, coefficients in s.bands.items():
        if band not in system.band_index:
            raise ValueError(f"Band {band} is not part of this system")
        atom = system.atom(band)
        nodes = nodes_of(atom.band)
        if coefficients.shape != (len(nodes),):
            raise ValueError(
                f"Band {band} has {coefficients.size} coefficients, expected {len(nodes)} translations"
            )
        if atom.is_empty:
            continue
        index = atom.grid_index(N)
        if direct_is_cheaper(atom, len(nodes), N):
            on_lattice = lattice_sum(atom.freqs, coefficients, nodes, N)
        else:
            on_lattice = fft.fftn(_scatter(coefficients, nodes, N, d))[index]
        total[index] += N ** d * np.sqrt(volume_of(atom.band)) * atom.values * on_lattice
    samples = fft.ifftn(total)
    is_real = all(np.isrealobj(v) for v in s.bands.values()) and np.isrealobj(s.lowpass)
    return GridFunction(_as_real(samples) if is_real else samples)


def synthesize_sequence(frame: Frame, s: SequenceCoefficients) -> GridFunction:
    """
    T s = s_0 Psi + sum_P s_P psi_P, summed over one fundamental domain of translations.

    Raises:
        ValueError: If a band or translation count does not match the frame
    """
    return _synthesize_sequence(
        frame, s,
        nodes_of=lambda band: band_nodes(frame, band),
        volume_of=lambda band: cell_volume(band.j, frame.d),
    )


def dyadic_subsample(system: DyadicSystem, field: CoefficientField) -> SequenceCoefficients:
    """s_Q = 2^(-nu d / 2) c_nu(2^-nu k); the low-pass keeps s_0 = (f * Phi)(0)."""
    bands = {}
    for atom in system.atoms[1:]:
        nu = atom.band.nu
        nodes = dyadic_nodes(nu, system.d, system.N)
        bands[atom.band] = 2.0 ** (-nu * system.d / 2) * field.values_at(atom.band, nodes)
    lowpass = field.values_at(system.lowpass.band, np.zeros((1, system.d), dtype=np.int64))[0]
    return SequenceCoefficients(system.d, system.N, bands, lowpass, 'dyadic')


def dyadic_synthesize(system: DyadicSystem, s: SequenceCoefficients) -> GridFunction:
    """Dyadic synthesis; not an exact inverse of dyadic_subsample (the lattice is not critical)."""
    return _synthesize_sequence(
        system, s,
        nodes_of=lambda band: dyadic_nodes(band.nu, system.d, system.N),
        volume_of=lambda band: 2.0 ** (-band.nu * system.d),
    )


# -- atoms and trial functions ----------------------------------------------------------

def atom(frame: Frame, band) -> GridFunction:
    """psi_{j,l,0} = |P|^(-1/2) psi(B^[l] A^j x) on the grid."""
    target = frame.atom(band)
    scale = 1.0 if target.band.is_lowpass else np.sqrt(cell_volume(target.band.j, frame.d))
    spectrum = frame.N ** frame.d * scale * target.dense(frame.N)
    return GridFunction.from_spectrum(spectrum, real=True)


def dyadic_atom(system, N: int, d: int, nu: int) -> GridFunction:
    """phi_{nu,0} = 2^(nu d / 2) phi(2^nu x) on the grid."""
    if isinstance(system, WindowBank):
        system = build_dyadic_system(system, d, N)
    target = system.atom(DyadicBand(nu))
    scale = 1.0 if nu < 0 else 2.0 ** (-nu * d / 2)
    return GridFunction.from_spectrum(N ** d * scale * target.dense(N), real=True)


def frequency_inf_norm(N: int, d: int) -> np.ndarray:
    """|xi|_inf for every grid frequency in FFT order."""
    f = np.abs(signed_frequencies(N))
    grids = np.meshgrid(*([f] * d), indexing='ij')
    return np.max(np.stack(grids), axis=0)


def band_limited_random(d: int, N: int, rng: np.random.Generator, radius: Optional[int] = None,
                        cone: Optional[int] = None) -> GridFunction:
    """
    Real random function with spectrum in |xi|_inf <= radius (and optionally one cone).

    Args:
        d: Dimension
        N: Grid size
        rng: numpy Generator
        radius: Band limit; defaults to N/2 (no limit)
        cone: If given, keep only the frequencies of this cone

    Returns:
        GridFunction: real samples
    """
    noise = rng.standard_normal((N,) * d)
    spectrum = fft.fftn(noise)
    keep = frequency_inf_norm(N, d) <= (N // 2 if radius is None else radius)
    if cone is not None:
        f = signed_frequencies(N).astype(float)
        coords = np.meshgrid(*([f] * d), indexing='ij')
        keep = keep & cone_indicator(coords, cone)
    return GridFunction.from_spectrum(np.where(keep, spectrum, 0.0), real=True)
