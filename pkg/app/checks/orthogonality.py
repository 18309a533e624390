#!/usr/bin/env python3
"""
Almost orthogonality: decay of convolutions between atoms of nearby scales.

For a target band b = (c, j, l) and every same-cone atom psi_Q at scale
i in {j-1, j, j+1} whose spectrum meets it, the measured constant is

    sup_{|x| <= 1/4} |(g_b * psi_Q)(x)| (1 + 2^i |x|)^{d+1} |Q_i|^{1/2}

and against the dyadic level nu

    sup_{|x| <= 1/4} |(g_b * phi_nu)(x)| (1 + 2^j |x|)^{d+1} |P_j| |Q_nu|^{-1/2}

where g_b has the mask of b as Fourier coefficients. Targets are, in every
cone, the zero shear and the shears with all |l_i| = 2^j (the merged
boundary atoms of the smooth variant). The maximum per scale should not
depend on j.
"""
import logging

import numpy as np
from scipy import fft

from app.checks.common import dyadic_for, open_frame, spread
from app.checks.report import CheckReport
from app.config import RunConfig
from core.frame import AtomSpectrum, Frame, overlap_partners, supports_meet, torus_coordinates
from core.lattice import cell_volume

logger = logging.getLogger(__name__)

# Scales below this have at most a handful of grid frequencies
MIN_SCALE = 2


def _decay_sup(product: np.ndarray, radii: np.ndarray, near: np.ndarray, scale: float, power: int) -> float:
    N, d = product.shape[0], product.ndim
    conv = np.abs(fft.ifftn(product)) * N ** d
    return float(np.max(conv[near] * (1.0 + scale * radii[near]) ** power))


def target_atoms(frame: Frame, j: int):
    """Atoms of scale j with zero shear or with every |l_i| = 2^j, one per distinct atom."""
    targets = []
    for atom in frame.scale_atoms(j):
        shear = atom.band.shear
        if all(s == 0 for s in shear) or all(abs(s) == 2 ** j for s in shear):
            targets.append(atom)
    return targets


def shear_shear_constants(frame: Frame, target: AtomSpectrum, radii, near) -> dict:
    """Measured constant per partner atom of `target`."""
    d, N = frame.d, frame.N
    mask = target.dense(N)
    out = {}
    for other in overlap_partners(frame, target.band):
        i = other.band.j
        volume = cell_volume(i, d)
        product = mask * other.dense(N) * np.sqrt(volume)
        out[other.band] = _decay_sup(product, radii, near, 2.0 ** i, d + 1) * np.sqrt(volume)
    return out


def shear_dyadic_constants(frame: Frame, target: AtomSpectrum, radii, near) -> dict:
    """Measured constant per dyadic level nu in {2j-3, 2j-2, 2j-1} meeting `target`."""
    d, N = frame.d, frame.N
    j = target.band.j
    system = dyadic_for(frame.spec, close_high_pass=False)
    mask = target.dense(N)
    out = {}
    for nu in (2 * j - 3, 2 * j - 2, 2 * j - 1):
        if not 0 <= nu <= system.nu_max:
            continue
        level = system.atom(nu)
        if not supports_meet(target, level):
            continue
        dyadic_volume = 2.0 ** (-nu * d)
        product = mask * level.dense(N) * np.sqrt(dyadic_volume)
        sup = _decay_sup(product, radii, near, 2.0 ** j, d + 1)
        out[nu] = sup * cell_volume(j, d) / np.sqrt(dyadic_volume)
    return out


def disjoint_scale_products(frame: Frame) -> int:
    """Number of atom pairs with scale gap >= 2 whose masks overlap; zero for a valid frame."""
    overlaps = frame.support_overlaps.tocoo()
    count = 0
    for first, second, shared in zip(overlaps.row, overlaps.col, overlaps.data):
        a, b = frame.atoms[first].band, frame.atoms[second].band
        if shared > 0 and not a.is_lowpass and not b.is_lowpass and b.j - a.j >= 2:
            count += 1
    return count


def check_almost_orthogonality(frame: Frame, config: RunConfig) -> CheckReport:
    """Scale-uniform decay constants for shear-shear and shear-dyadic pairs."""
    work = open_frame(frame, config.workers)
    d, N = work.d, work.N
    x = torus_coordinates(N, d)
    radii = np.linalg.norm(x, axis=-1)
    near = radii <= 0.25

    shear_shear = {}
    shear_dyadic = {}
    targets_per_scale = {}
    for j in range(MIN_SCALE, work.j_max + 1):
        targets = target_atoms(work, j)
        targets_per_scale[str(j)] = len(targets)
        pairs, cross = [], []
        for target in targets:
            pairs.extend(shear_shear_constants(work, target, radii, near).values())
            cross.extend(shear_dyadic_constants(work, target, radii, near).values())
        if pairs:
            shear_shear[j] = max(pairs)
        if cross:
            shear_dyadic[j] = max(cross)
        logger.debug(f"Orthogonality j={j}: {len(targets)} targets, {len(pairs)} shear pairs, "
                     f"{len(cross)} dyadic pairs")

    conflicts = disjoint_scale_products(work)
    limit = config.threshold('orthogonality_spread')
    shear_spread = spread(list(shear_shear.values())) if shear_shear else 1.0
    dyadic_spread = spread(list(shear_dyadic.values())) if shear_dyadic else 1.0
    notes = []
    if not shear_shear:
        notes.append(f"no scale j >= {MIN_SCALE} on this grid; nothing to compare")
    passed = conflicts == 0 and shear_spread <= limit and dyadic_spread <= limit
    return CheckReport(
        check_name='orthogonality',
        parameters={'d': d, 'N': N, 'j_max': work.j_max, 'decay_power': d + 1, 'min_scale': MIN_SCALE,
                    'targets_per_scale': targets_per_scale},
        measured={
            'shear_shear': {str(j): v for j, v in shear_shear.items()},
            'shear_dyadic': {str(j): v for j, v in shear_dyadic.items()},
            'shear_shear_spread': shear_spread,
            'shear_dyadic_spread': dyadic_spread,
            'overlapping_far_pairs': conflicts,
        },
        threshold={'orthogonality_spread': limit},
        passed=bool(passed),
        notes=notes,
    )
