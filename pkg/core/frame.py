#!/usr/bin/env python3
"""
Frequency-domain shearlet frames on the N^d torus grid.

Two variants are built from the same WindowBank:

- cone_projected: psi1_hat(4^-j xi_a) * prod_i psi2_hat(2^j xi_i / xi_a - l_i) * chi_cone
- smooth:         W(4^-j xi) * prod_i v(2^j xi_i / xi_a - l_i) * chi_cone, with
                  boundary atoms (|l_i| = 2^j) of adjacent cones merged into one
                  atom whose squared mask is the sum of the pieces

Masks are real, nonnegative and even. They are stored sparsely: each atom
keeps its signed integer frequencies per axis plus a dense block of values
over their product set.
"""
import logging
import math
import time
from dataclasses import dataclass, field, asdict
from functools import cached_property
from multiprocessing.pool import ThreadPool
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import fft, sparse

from core.lattice import apply_BA, enumerate_shears, shear_count
from core.windows import WindowBank

logger = logging.getLogger(__name__)

FRAME_VARIANTS = ('cone_projected', 'smooth')
MIN_GRID = 8


@dataclass(frozen=True, order=True)
class Band:
    """Frequency band (cone, j, l); cone 0 is the low-pass."""
    cone: int
    j: int
    shear: Tuple[int, ...]

    @property
    def is_lowpass(self) -> bool:
        return self.cone == 0

    @property
    def boundary(self) -> bool:
        return not self.is_lowpass and any(abs(s) == 2 ** self.j for s in self.shear)

    def direction_key(self, d: int) -> Tuple[int, ...]:
        """Integer direction with 2^j on the cone axis, sign-normalized (first nonzero entry positive)."""
        key = list(self.shear)
        key.insert(self.cone - 1, 2 ** self.j)
        first = next(v for v in key if v != 0)
        if first < 0:
            key = [-v for v in key]
        return tuple(key)

    def to_list(self) -> list:
        return [self.cone, self.j, list(self.shear)]

    @classmethod
    def from_list(cls, data) -> 'Band':
        return cls(int(data[0]), int(data[1]), tuple(int(s) for s in data[2]))


def as_band(band) -> Band:
    """Accept a Band or a (cone, j, shear) tuple."""
    if isinstance(band, Band):
        return band
    cone, j, shear = band
    return Band(int(cone), int(j), tuple(int(s) for s in shear))


LOWPASS_BAND = Band(0, 0, ())


def is_power_of_two(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


def default_j_max(N: int) -> int:
    """floor(log2(N) / 2) - 1, at least 1."""
    return max(1, int(math.log2(N)) // 2 - 1)


@dataclass(frozen=True)
class FrameSpec:
    """
    Parameters of a discrete frame.

    Args:
        d: Dimension (>= 2)
        N: Grid points per axis, a power of two
        j_max: Largest scale; defaults to floor(log2 N / 2) - 1
        variant: 'cone_projected' or 'smooth'
        bank: Window bank
        close_high_pass: Replace the top radial window by one that stays 1 up to Nyquist
        cone_indicators: Multiply by chi_cone (cone_projected only)
    """
    d: int
    N: int
    j_max: Optional[int] = None
    variant: str = 'smooth'
    bank: WindowBank = field(default_factory=WindowBank)
    close_high_pass: bool = True
    cone_indicators: bool = True

    def __post_init__(self):
        if self.j_max is None:
            object.__setattr__(self, 'j_max', default_j_max(self.N))
        is_valid, error = self.validate()
        if not is_valid:
            raise ValueError(error)

    def validate(self) -> Tuple[bool, str]:
        """
        Check the frame parameters.

        Returns:
            tuple: (is_valid, error_message)
        """
        if self.d < 2:
            return False, f"Dimension must be at least 2, got {self.d}"
        if not is_power_of_two(self.N) or self.N < MIN_GRID:
            return False, f"N must be a power of two >= {MIN_GRID}, got {self.N}"
        if self.variant not in FRAME_VARIANTS:
            return False, f"Unknown frame variant '{self.variant}'; expected one of {FRAME_VARIANTS}"
        if self.j_max < 1:
            return False, f"j_max must be at least 1, got {self.j_max}"
        if 2 ** (2 * self.j_max - 1) > self.N // 2:
            return False, (
                f"j_max={self.j_max} too large for N={self.N}: "
                f"scale support 2^{2 * self.j_max - 1} exceeds N/2"
            )
        if not self.cone_indicators and self.variant != 'cone_projected':
            return False, "cone_indicators=False is only supported for the cone_projected variant"
        return True, ""

    @property
    def passband(self) -> int:
        """Largest |xi|_inf on which the open frame is still a partition of unity."""
        return 2 ** (2 * self.j_max - 2)

    def to_dict(self) -> dict:
        data = asdict(self)
        data['bank'] = self.bank.to_dict()
        return data

    @classmethod
    def from_dict(cls, data: dict) -> 'FrameSpec':
        return cls(
            d=int(data['d']),
            N=int(data['N']),
            j_max=data.get('j_max'),
            variant=data.get('variant', 'smooth'),
            bank=WindowBank.from_dict(data.get('bank', {})),
            close_high_pass=bool(data.get('close_high_pass', True)),
            cone_indicators=bool(data.get('cone_indicators', True)),
        )


@dataclass(frozen=True, eq=False)
class AtomSpectrum:
    """
    Sparse real mask of one frame atom.

    freqs[k] holds the sorted signed integer frequencies kept on axis k;
    values has shape tuple(len(f) for f in freqs). The grid index of a
    frequency is f mod N.
    """
    band: Band
    freqs: Tuple[np.ndarray, ...]
    values: np.ndarray
    pieces: Tuple[Band, ...] = ()

    @property
    def d(self) -> int:
        return len(self.freqs)

    @property
    def boundary(self) -> bool:
        return len(self.pieces) > 1 or self.band.boundary

    @property
    def cones(self) -> frozenset:
        return frozenset(p.cone for p in (self.pieces or (self.band,)))

    @property
    def is_empty(self) -> bool:
        return self.values.size == 0

    def grid_index(self, N: int):
        """Open-mesh index into an (N,)*d array in FFT order."""
        return np.ix_(*[np.mod(f, N) for f in self.freqs])

    def dense(self, N: int) -> np.ndarray:
        mask = np.zeros((N,) * self.d)
        if not self.is_empty:
            mask[self.grid_index(N)] = self.values
        return mask


@dataclass(frozen=True, eq=False)
class Frame:
    """A built frame: its spec plus one AtomSpectrum per band, low-pass first."""
    spec: FrameSpec
    atoms: Tuple[AtomSpectrum, ...]

    @property
    def d(self) -> int:
        return self.spec.d

    @property
    def N(self) -> int:
        return self.spec.N

    @property
    def j_max(self) -> int:
        return self.spec.j_max

    @property
    def lowpass(self) -> AtomSpectrum:
        return self.atoms[0]

    @property
    def shear_atoms(self) -> Tuple[AtomSpectrum, ...]:
        return self.atoms[1:]

    @property
    def bands(self) -> List[Band]:
        return [a.band for a in self.atoms]

    @cached_property
    def band_index(self) -> Dict[Band, int]:
        """Band (including merged pieces) -> position in atoms."""
        index = {}
        for position, atom in enumerate(self.atoms):
            index[atom.band] = position
            for piece in atom.pieces:
                index[piece] = position
        return index

    def atom(self, band) -> AtomSpectrum:
        band = as_band(band)
        if band not in self.band_index:
            raise ValueError(f"Band {band} is not part of this frame")
        return self.atoms[self.band_index[band]]

    def scale_atoms(self, j: int) -> List[AtomSpectrum]:
        return [a for a in self.shear_atoms if a.band.j == j]

    @cached_property
    def support_overlaps(self):
        """Sparse (atoms x atoms) count of grid frequencies where both masks are nonzero."""
        return support_overlap_matrix(self)


def signed_frequencies(N: int) -> np.ndarray:
    """Integer frequencies of the grid in FFT order: 0..N/2-1, -N/2..-1."""
    return np.rint(fft.fftfreq(N, d=1.0 / N)).astype(np.int64)


def _radial_reach(spec: FrameSpec, j: int) -> int:
    if spec.close_high_pass and j == spec.j_max:
        return spec.N // 2
    return min(spec.N // 2, math.ceil(2.0 ** (2 * j - 1)))


def _box(spec: FrameSpec, band: Band) -> List[int]:
    """Per-axis bound on |xi_i| outside of which the piece vanishes."""
    if band.is_lowpass:
        return [1] * spec.d
    reach = _radial_reach(spec, band.j)
    bounds = []
    shears = iter(band.shear)
    for axis in range(spec.d):
        if axis == band.cone - 1:
            bounds.append(reach)
        else:
            spread = math.ceil(reach * (abs(next(shears)) + 1) / 2 ** band.j)
            bounds.append(min(spec.N // 2, spread))
    return bounds


def _box_coords(freqs):
    d = len(freqs)
    coords = []
    for axis, f in enumerate(freqs):
        shape = [1] * d
        shape[axis] = -1
        coords.append(f.astype(float).reshape(shape))
    return coords


def cone_indicator(coords, cone: int) -> np.ndarray:
    """
    chi of the half-open cone: xi_a != 0, |xi_i| < |xi_a| for i < a, |xi_i| <= |xi_a| for i > a.

    Seams belong to the lowest cone index, so the d indicators partition xi != 0.
    """
    a = cone - 1
    lead = np.abs(coords[a])
    inside = lead != 0
    for axis, c in enumerate(coords):
        if axis < a:
            inside = inside & (np.abs(c) < lead)
        elif axis > a:
            inside = inside & (np.abs(c) <= lead)
    return inside


def _slopes(coords, band: Band):
    """u_i = 2^j xi_i / xi_a - l_i for the off-cone axes; xi_a = 0 maps to an out-of-support value."""
    a = band.cone - 1
    lead = coords[a]
    safe = np.where(lead == 0, 1.0, lead)
    slopes = []
    shears = iter(band.shear)
    for axis, c in enumerate(coords):
        if axis == a:
            continue
        u = 2.0 ** band.j * c / safe - next(shears)
        slopes.append(np.where(lead == 0, np.inf, u))
    return slopes


def _piece_mask(spec: FrameSpec, band: Band, coords) -> np.ndarray:
    bank = spec.bank
    if band.is_lowpass:
        if spec.variant == 'cone_projected':
            return bank.big_psi_hat_c(coords)
        return bank.smooth_big_phi_hat_c(coords)

    top = spec.close_high_pass and band.j == spec.j_max
    scale = 4.0 ** -band.j
    if spec.variant == 'cone_projected':
        lead = scale * coords[band.cone - 1]
        radial = bank.closed_psi1_hat(lead) if top else bank.psi1_hat(lead)
        directional = bank.psi2_hat
    else:
        scaled = [scale * c for c in coords]
        radial = bank.closed_W_c(scaled) if top else bank.W_c(scaled)
        directional = bank.v

    mask = radial
    for u in _slopes(coords, band):
        mask = mask * directional(u)
    if spec.cone_indicators:
        mask = mask * cone_indicator(coords, band.cone)
    return np.asarray(mask, dtype=float)


def _crop(freqs, values):
    nonzero = values != 0
    d = values.ndim
    keep = []
    for axis in range(d):
        others = tuple(a for a in range(d) if a != axis)
        keep.append(np.any(nonzero, axis=others) if others else nonzero)
    cropped = values[np.ix_(*keep)]
    return tuple(f[k] for f, k in zip(freqs, keep)), cropped


def _fold_nyquist(freqs, values, N):
    """
    Merge the +N/2 and -N/2 representatives of each axis into the -N/2 slot.

    The squared value becomes the mean over both representatives, which keeps
    the partition of unity and makes the discrete mask exactly even.
    """
    half = N // 2
    freqs = list(freqs)
    for axis, f in enumerate(freqs):
        if f.size == 0 or f[-1] != half:
            continue
        low = np.take(values, [0], axis=axis)
        high = np.take(values, [f.size - 1], axis=axis)
        folded = np.sqrt(0.5 * (low ** 2 + high ** 2))
        values = np.concatenate([folded, np.take(values, np.arange(1, f.size - 1), axis=axis)], axis=axis)
        freqs[axis] = f[:-1]
    return tuple(freqs), values


def sparse_block(N: int, bounds, evaluate):
    """
    Evaluate a mask on the box |xi_i| <= bounds[i] and reduce it to its nonzero block.

    Args:
        N: Grid size
        bounds: Per-axis bound (at most N/2)
        evaluate: Callable taking a list of broadcastable coordinate arrays

    Returns:
        tuple: (freqs, values) as stored by AtomSpectrum
    """
    grid = np.arange(-(N // 2), N // 2 + 1)
    freqs = tuple(grid[np.abs(grid) <= b] for b in bounds)
    values = np.array(np.broadcast_to(evaluate(_box_coords(freqs)), tuple(len(f) for f in freqs)), dtype=float)
    freqs, values = _fold_nyquist(freqs, values, N)
    return _crop(freqs, values)


def _build_atom(spec: FrameSpec, pieces: Tuple[Band, ...]) -> AtomSpectrum:
    bounds = np.max([_box(spec, p) for p in pieces], axis=0)

    def evaluate(coords):
        if len(pieces) == 1:
            return _piece_mask(spec, pieces[0], coords)
        # merged boundary atom: pieces have disjoint cone indicators
        return np.sqrt(sum(_piece_mask(spec, p, coords) ** 2 for p in pieces))

    freqs, values = sparse_block(spec.N, bounds, evaluate)
    return AtomSpectrum(
        band=pieces[0],
        freqs=freqs,
        values=values,
        pieces=pieces if len(pieces) > 1 else (),
    )


def band_groups(spec: FrameSpec) -> List[Tuple[Band, ...]]:
    """
    Bands of the frame in build order, low-pass first.

    For the smooth variant, boundary bands with the same (j, direction key)
    form one group whose first entry (lowest cone) owns the merged atom.
    """
    groups = [(LOWPASS_BAND,)]
    for j in range(spec.j_max + 1):
        merged: Dict[Tuple[int, ...], list] = {}
        scale_groups = []
        for cone in range(1, spec.d + 1):
            for shear in enumerate_shears(j, spec.d):
                band = Band(cone, j, shear)
                if spec.variant == 'smooth' and band.boundary:
                    key = band.direction_key(spec.d)
                    if key in merged:
                        merged[key].append(band)
                        continue
                    merged[key] = [band]
                    scale_groups.append(merged[key])
                else:
                    scale_groups.append([band])
        groups.extend(tuple(g) for g in scale_groups)
    return groups


def expected_band_count(spec: FrameSpec) -> int:
    """Number of atoms before merging: 1 + d * sum_j shear_count(j, d)."""
    return 1 + spec.d * sum(shear_count(j, spec.d) for j in range(spec.j_max + 1))


def build_frame(spec: FrameSpec, workers: int = 1) -> Frame:
    """
    Assemble every atom mask of the frame.

    Args:
        spec: Validated frame spec
        workers: Number of threads; bands are independent

    Returns:
        Frame: immutable, low-pass first
    """
    start = time.perf_counter()
    groups = band_groups(spec)
    if workers > 1:
        with ThreadPool(workers) as pool:
            atoms = pool.map(lambda pieces: _build_atom(spec, pieces), groups)
    else:
        atoms = [_build_atom(spec, pieces) for pieces in groups]
    elapsed = time.perf_counter() - start
    logger.info(
        f"Built {spec.variant} frame d={spec.d} N={spec.N} j_max={spec.j_max}: "
        f"{len(atoms)} atoms in {elapsed:.2f}s"
    )
    return Frame(spec=spec, atoms=tuple(atoms))


def partition_sum(frame: Frame) -> np.ndarray:
    """Sum of squared masks at every grid frequency (FFT order)."""
    total = np.zeros((frame.N,) * frame.d)
    for atom in frame.atoms:
        if not atom.is_empty:
            total[atom.grid_index(frame.N)] += atom.values ** 2
    return total


def passband_mask(frame: Frame) -> np.ndarray:
    """Boolean grid of frequencies with |xi|_inf <= 2^(2 j_max - 2)."""
    f = np.abs(signed_frequencies(frame.N))
    inf_norm = np.zeros((frame.N,) * frame.d, dtype=np.int64)
    for axis in range(frame.d):
        shape = [1] * frame.d
        shape[axis] = -1
        inf_norm = np.maximum(inf_norm, f.reshape(shape))
    return inf_norm <= frame.spec.passband


def verify_parseval(frame: Frame, passband_only: bool = False) -> float:
    """
    Max over grid frequencies of |sum_atoms mask^2 - 1|.

    Args:
        frame: Built frame
        passband_only: Restrict to |xi|_inf <= 2^(2 j_max - 2), where an open
            (close_high_pass=False) frame still sums to one

    Returns:
        float: maximal deviation
    """
    deviation = np.abs(partition_sum(frame) - 1.0)
    if passband_only:
        deviation = deviation[passband_mask(frame)]
    return float(deviation.max())


def frame_bounds(frame: Frame) -> Tuple[float, float]:
    """(A, B): min and max of sum_atoms mask^2 over the grid."""
    total = partition_sum(frame)
    return float(total.min()), float(total.max())


def overlap_bounds(d: int) -> Dict[str, int]:
    """Both published overlap counts for dimension d."""
    return {
        'lemma': 2 ** (d - 1) + 3 ** (d - 1) + 6 ** (d - 1),
        'remark': 3 ** (d - 1) + 3 ** (d - 1) + 6 ** (d - 1) + 1,
    }


def supports_meet(first: AtomSpectrum, second: AtomSpectrum) -> bool:
    """True if the two masks are simultaneously nonzero at some frequency."""
    if first.is_empty or second.is_empty:
        return False
    idx_first, idx_second = [], []
    for f1, f2 in zip(first.freqs, second.freqs):
        common, i1, i2 = np.intersect1d(f1, f2, assume_unique=True, return_indices=True)
        if common.size == 0:
            return False
        idx_first.append(i1)
        idx_second.append(i2)
    sub_first = first.values[np.ix_(*idx_first)] != 0
    sub_second = second.values[np.ix_(*idx_second)] != 0
    return bool(np.any(sub_first & sub_second))


def _support_columns(atom: AtomSpectrum, N: int) -> np.ndarray:
    """Flat grid indices (C-order, FFT layout) where the mask is nonzero."""
    grids = np.meshgrid(*[np.mod(f, N) for f in atom.freqs], indexing='ij')
    nonzero = atom.values != 0
    return np.ravel_multi_index(tuple(g[nonzero] for g in grids), (N,) * atom.d)


def support_overlap_matrix(frame: Frame) -> sparse.csr_matrix:
    """
    Incidence product S S^T, S[a, xi] = 1 where atom a is nonzero at xi.

    Entry (a, b) > 0 exactly when supports_meet(atoms[a], atoms[b]).
    """
    rows, columns = [], []
    for position, atom in enumerate(frame.atoms):
        if atom.is_empty:
            continue
        support = _support_columns(atom, frame.N)
        rows.append(np.full(support.size, position, dtype=np.int64))
        columns.append(support)
    if not rows:
        return sparse.csr_matrix((len(frame.atoms), len(frame.atoms)), dtype=np.int64)
    rows, columns = np.concatenate(rows), np.concatenate(columns)
    incidence = sparse.csr_matrix(
        (np.ones(rows.size, dtype=np.int64), (rows, columns)),
        shape=(len(frame.atoms), frame.N ** frame.d),
    )
    return (incidence @ incidence.T).tocsr()


def overlap_partners(frame: Frame, band) -> List[AtomSpectrum]:
    """
    Other atoms sharing a cone with `band` at scale j-1, j or j+1 whose supports intersect it.

    scale_support_conflicts checks that no other scale can meet.
    """
    target = frame.atom(band)
    if target.band.is_lowpass:
        return []
    position = frame.band_index[target.band]
    row = frame.support_overlaps.getrow(position)
    partners = []
    for other_position in row.indices[row.data > 0]:
        other = frame.atoms[other_position]
        if other is target or other.band.is_lowpass or abs(other.band.j - target.band.j) > 1:
            continue
        if other.cones & target.cones:
            partners.append(other)
    return partners


def overlap_count(frame: Frame, band) -> int:
    """Number of other atoms sharing a cone with `band` whose supports intersect it."""
    return len(overlap_partners(frame, band))


def scale_support_conflicts(frame: Frame) -> List[Tuple[int, int]]:
    """Pairs of scales (i, j) with j - i >= 2 whose supports intersect; empty for a valid frame."""
    supports = []
    for j in range(frame.j_max + 1):
        support = np.zeros((frame.N,) * frame.d, dtype=bool)
        for atom in frame.scale_atoms(j):
            if not atom.is_empty:
                support[atom.grid_index(frame.N)] |= atom.values != 0
        supports.append(support)
    conflicts = []
    for i in range(len(supports)):
        for j in range(i + 2, len(supports)):
            if np.any(supports[i] & supports[j]):
                conflicts.append((i, j))
    return conflicts


def torus_coordinates(N: int, d: int) -> np.ndarray:
    """Grid points n/N wrapped to [-1/2, 1/2)^d, shape (N,)*d + (d,)."""
    x = signed_frequencies(N) / N
    return np.stack(np.meshgrid(*([x] * d), indexing='ij'), axis=-1)


def spatial_atom(frame: Frame, band) -> np.ndarray:
    """psi_{j,l,0} on the grid: the Fourier series of the mask (N^d * ifft)."""
    mask = frame.atom(band).dense(frame.N)
    return np.real(fft.ifftn(mask)) * frame.N ** frame.d


def atom_spatial_profile(frame: Frame, band, radius_N: float) -> float:
    """
    Normalized decay constant of an atom in space.

    Returns:
        float: sup over |x| <= 1/4 of |psi(x)| (1 + |B^[l] A^j x|)^radius_N / max|psi|;
        0.0 for an atom that vanishes on the grid
    """
    band = as_band(band)
    psi = np.abs(spatial_atom(frame, band))
    peak = psi.max()
    if peak == 0:
        logger.warning(f"Atom {band} vanishes on the N={frame.N} grid")
        return 0.0
    x = torus_coordinates(frame.N, frame.d)
    near = np.linalg.norm(x, axis=-1) <= 0.25
    if band.is_lowpass:
        stretched = np.linalg.norm(x, axis=-1)
    else:
        stretched = np.linalg.norm(apply_BA(band.j, band.shear, x, band.cone), axis=-1)
    weighted = psi * (1.0 + stretched) ** radius_N
    return float(weighted[near].max() / peak)
