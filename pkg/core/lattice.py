#!/usr/bin/env python3
"""
Index sets, dilation/shear matrices and cell geometry.

Cones are numbered 1..d. The cone-1 conventions are

    A^j    = diag(4^j, 2^j, ..., 2^j)
    B^[l]  = identity with l_1..l_{d-1} in row 1, columns 2..d

and cone c places the 4^j entry and the shear row at axis c. Matrices act
on column vectors for translations (x_P = A^-j B^-l k) and on row vectors
for frequencies (xi A^-j B^-l).
"""
import itertools
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np

logger = logging.getLogger(__name__)

DEFAULT_SPHERE_SAMPLES = 10_000


def _check_cone(cone: int, d: int):
    if d < 2:
        raise ValueError(f"Dimension must be at least 2, got {d}")
    if not 1 <= cone <= d:
        raise ValueError(f"Cone must lie in 1..{d}, got {cone}")


def _check_scale(j: int):
    if j < 0:
        raise ValueError(f"Scale j must be non-negative, got {j}")


def dilation_matrix(cone: int, j: int, d: int) -> np.ndarray:
    """
    Anisotropic dilation A^j for a cone.

    Examples:
      - (1, 1, 2) -> diag(4, 2)
      - (3, 2, 3) -> diag(4, 4, 16)

    Raises:
        ValueError: If j < 0 or the cone is out of range
    """
    _check_cone(cone, d)
    _check_scale(j)
    diag = np.full(d, 2 ** j, dtype=np.int64)
    diag[cone - 1] = 4 ** j
    return np.diag(diag)


def inverse_dilation(cone: int, j: int, d: int) -> np.ndarray:
    """A^-j; entries are powers of two so the float matrix is exact."""
    _check_cone(cone, d)
    _check_scale(j)
    diag = np.full(d, 2.0 ** -j)
    diag[cone - 1] = 4.0 ** -j
    return np.diag(diag)


def shear_matrix(cone: int, shear, d: int) -> np.ndarray:
    """
    Shear B^[l]: identity plus the shear vector in row `cone`, off the diagonal.

    Examples:
      - (1, (1,), 2) -> [[1, 1], [0, 1]]
      - (3, (1, 2), 3) -> [[1, 0, 0], [0, 1, 0], [1, 2, 1]]

    Raises:
        ValueError: If len(shear) != d - 1
    """
    _check_cone(cone, d)
    shear = tuple(int(s) for s in shear)
    if len(shear) != d - 1:
        raise ValueError(f"Shear vector must have length {d - 1}, got {len(shear)}")
    matrix = np.eye(d, dtype=np.int64)
    matrix[cone - 1, _other_axes(cone, d)] = shear
    return matrix


def _other_axes(cone: int, d: int):
    return [axis for axis in range(d) if axis != cone - 1]


def forward_matrix(j: int, shear, cone: int = 1, d: int = None) -> np.ndarray:
    """B^[l] A^j as an integer matrix."""
    d = len(shear) + 1 if d is None else d
    return shear_matrix(cone, shear, d) @ dilation_matrix(cone, j, d)


def inverse_matrix(j: int, shear, cone: int = 1, d: int = None) -> np.ndarray:
    """A^-j B^-[l]; B^-[l] = B^[-l] is integral and A^-j is dyadic, so the product is exact."""
    d = len(shear) + 1 if d is None else d
    neg = tuple(-int(s) for s in shear)
    return inverse_dilation(cone, j, d) @ shear_matrix(cone, neg, d)


def apply_BA(j: int, shear, x, cone: int = 1) -> np.ndarray:
    """
    Apply B^[l] A^j to points x of shape (..., d).

    For cone 1 the first entry is 4^j x_1 + 2^j sum_i l_i x_{i+1}, the rest 2^j x_i.
    """
    x = np.asarray(x, dtype=float)
    matrix = forward_matrix(j, shear, cone, x.shape[-1]).astype(float)
    return x @ matrix.T


def apply_invAB(j: int, shear, x, cone: int = 1) -> np.ndarray:
    """Apply A^-j B^-[l] to points x of shape (..., d)."""
    x = np.asarray(x, dtype=float)
    return x @ inverse_matrix(j, shear, cone, x.shape[-1]).T


def dilation_det(j: int, d: int) -> int:
    return 2 ** ((d + 1) * j)


def cell_volume(j: int, d: int) -> float:
    """|Q_{j,l,k}| = 2^{-(d+1)j} = |det A|^-j."""
    return 2.0 ** (-(d + 1) * j)


@dataclass(frozen=True)
class ShearIndex:
    """Frame index (cone, j, l, k) with |l_i| <= 2^j."""
    cone: int
    j: int
    shear: Tuple[int, ...]
    k: Tuple[int, ...]

    def __post_init__(self):
        d = len(self.k)
        _check_cone(self.cone, d)
        _check_scale(self.j)
        if len(self.shear) != d - 1:
            raise ValueError(f"Shear vector must have length {d - 1}, got {len(self.shear)}")
        if any(abs(s) > 2 ** self.j for s in self.shear):
            raise ValueError(f"Shear {self.shear} exceeds 2^j = {2 ** self.j}")

    @property
    def d(self) -> int:
        return len(self.k)

    @property
    def boundary(self) -> bool:
        return any(abs(s) == 2 ** self.j for s in self.shear)


@dataclass(frozen=True)
class Cell:
    owner: ShearIndex
    lower_left: Tuple[float, ...]
    volume: float


@dataclass(frozen=True)
class DyadicIndex:
    """Dyadic cube Q_{nu,k} = 2^-nu (Q0 + k)."""
    nu: int
    k: Tuple[int, ...]

    def __post_init__(self):
        if self.nu < 0:
            raise ValueError(f"Dyadic level must be non-negative, got {self.nu}")

    @property
    def d(self) -> int:
        return len(self.k)

    @property
    def volume(self) -> float:
        return 2.0 ** (-self.nu * self.d)

    @property
    def lower_left(self) -> Tuple[float, ...]:
        return tuple(2.0 ** -self.nu * np.asarray(self.k, dtype=float))


def cell_of(idx: ShearIndex) -> Cell:
    """
    Cell geometry Q_{j,l,k} = A^-j B^-[l] (Q0 + k).

    Example: (j=1, l=(1,), k=(1, 0), d=2) -> lower_left (1/4, 0)
    """
    corner = apply_invAB(idx.j, idx.shear, np.asarray(idx.k, dtype=float), idx.cone)
    return Cell(owner=idx, lower_left=tuple(float(c) for c in corner), volume=cell_volume(idx.j, idx.d))


def dyadic_cell_of(idx: DyadicIndex) -> Tuple[Tuple[float, ...], float]:
    """Lower-left corner and side length of a dyadic cube."""
    return idx.lower_left, 2.0 ** -idx.nu


def shear_count(j: int, d: int) -> int:
    """
    Exact cardinality of {l : |l_i| <= 2^j}, i.e. (2^{j+1} + 1)^{d-1}.

    Examples:
      - (0, 2) -> 3
      - (1, 3) -> 25
    """
    _check_scale(j)
    return (2 ** (j + 1) + 1) ** (d - 1)


def enumerate_shears(j: int, d: int):
    """All shear vectors with |l_i| <= 2^j, in lexicographic order."""
    _check_scale(j)
    span = range(-2 ** j, 2 ** j + 1)
    return [tuple(s) for s in itertools.product(span, repeat=d - 1)]


def torus_periods(j: int, cone: int, d: int) -> Tuple[int, ...]:
    """Per-axis periods of m = B^-[l] k on the unit torus: 4^j on the cone axis, 2^j elsewhere."""
    return tuple(int(v) for v in np.diag(dilation_matrix(cone, j, d)))


def translations(j: int, shear, cone: int, d: int):
    """
    Torus representatives of the translations of band (cone, j, l).

    The corners x_P = A^-j B^-[l] k range over A^-j Z^d (B is unimodular), so
    the representatives are k = B^[l] m for m in the box of torus_periods.
    There are 2^{(d+1)j} of them.

    Returns:
        tuple: (k array (M, d) of ints, corners array (M, d) in [0, 1)^d)
    """
    periods = torus_periods(j, cone, d)
    m = np.indices(periods).reshape(d, -1).T
    k = m @ shear_matrix(cone, shear, d).T
    corners = m * np.diag(inverse_dilation(cone, j, d))
    return k, corners


def cell_index(j: int, shear, cone: int, points) -> np.ndarray:
    """
    Flat index (into `translations`) of the cell containing each point.

    Membership is B^[l] A^j x - k in [0, 1)^d, reduced modulo the torus.
    """
    points = np.asarray(points, dtype=float)
    d = points.shape[-1]
    k = np.floor(apply_BA(j, shear, points, cone)).astype(np.int64)
    return _flat_cell(j, shear, cone, d, k)


def grid_cell_index(j: int, shear, cone: int, d: int, N: int) -> np.ndarray:
    """
    Cell index of every node n/N of the grid, computed in integer arithmetic.

    Results are cached per band and grid; the returned array is read-only.

    Returns:
        Array of shape (N,)*d with flat translation indices
    """
    return _grid_cell_index(int(j), tuple(int(s) for s in shear), int(cone), int(d), int(N))


@lru_cache(maxsize=64)
def _grid_cell_index(j, shear, cone, d, N):
    nodes = np.indices((N,) * d).reshape(d, -1).T
    scaled = nodes @ forward_matrix(j, shear, cone, d).T
    k = np.floor_divide(scaled, N)
    index = _flat_cell(j, shear, cone, d, k).reshape((N,) * d)
    index.setflags(write=False)
    return index


def _flat_cell(j, shear, cone, d, k):
    periods = torus_periods(j, cone, d)
    m = k @ shear_matrix(cone, tuple(-int(s) for s in shear), d).T
    m = np.mod(m, periods)
    return np.ravel_multi_index(tuple(m[..., i] for i in range(d)), periods)


def _sphere_samples(d: int, sample_count: int, rng=None) -> np.ndarray:
    """Unit vectors: the coordinate axes and diagonals first, then random directions."""
    rng = np.random.default_rng(0) if rng is None else rng
    fixed = [np.eye(d), np.ones((1, d)) / np.sqrt(d)]
    random = rng.standard_normal((max(sample_count - d - 1, 0), d))
    samples = np.concatenate(fixed + [random], axis=0)
    return samples / np.linalg.norm(samples, axis=1, keepdims=True)


def min_expansion(j: int, shear, sample_count: int = DEFAULT_SPHERE_SAMPLES,
                  cone: int = 1, rng=None) -> float:
    """
    Sampled min of |B^[l] A^j x| / (2^j |x|) over the unit sphere.

    The nested-ellipsoid bound says this is at least 2^{-d+1}.

    Args:
        j: Scale
        shear: Shear vector (length d - 1)
        sample_count: Number of sphere points (at least 10^3 recommended)
        cone: Cone number
        rng: Optional numpy Generator

    Returns:
        float: the sampled minimum ratio
    """
    d = len(shear) + 1
    x = _sphere_samples(d, sample_count, rng)
    ratios = np.linalg.norm(apply_BA(j, shear, x, cone), axis=1) / 2.0 ** j
    return float(ratios.min())


def inverse_contraction(j: int, shear, sample_count: int = DEFAULT_SPHERE_SAMPLES,
                        cone: int = 1, rng=None) -> float:
    """Sampled min of |A^-j B^-[l] x| / |x| over the unit sphere."""
    d = len(shear) + 1
    x = _sphere_samples(d, sample_count, rng)
    return float(np.linalg.norm(apply_invAB(j, shear, x, cone), axis=1).min())


def nested_ellipsoid_constant(d: int) -> float:
    """C_d = 2^{-d+1}."""
    return 2.0 ** (-d + 1)
