#!/usr/bin/env python3
"""
Sampling on anisotropic lattices and the Plancherel-Polya inequality.

A function whose spectrum lies in D = [-1/2, 1/2)^d B^[l] A^j is determined
by its samples on A^-j Z^d: on the torus its Fourier coefficients are
2^-(d+1)j sum_x g(x) e^{-2 pi i xi.x} for xi in D. The shearlet psi_{j,l,0}
of the open frame has its spectrum strictly inside D, so each band is
first tried on that atom, then on random spectra filling D.
"""
import logging
import math

import numpy as np
from scipy import fft, ndimage

from app.checks.common import check_rng, open_frame, relative_error, spread
from app.checks.report import CheckReport
from app.config import RunConfig
from core.frame import Band, Frame, signed_frequencies
from core.lattice import cell_volume, grid_cell_index, inverse_matrix, translations
from core.spaces import lp_norm, lp_sum
from core.transform import atom

logger = logging.getLogger(__name__)


def sampling_domain(j: int, shear, cone: int, d: int, N: int) -> np.ndarray:
    """Boolean grid (FFT order) of the integer frequencies in [-1/2, 1/2)^d B^[l] A^j."""
    f = signed_frequencies(N).astype(float)
    xi = np.stack(np.meshgrid(*([f] * d), indexing='ij'), axis=-1)
    eta = xi @ inverse_matrix(j, shear, cone, d)
    return np.all((eta >= -0.5) & (eta < 0.5), axis=-1)


def lattice_nodes(j: int, shear, cone: int, d: int, N: int) -> np.ndarray:
    """Grid indices (M, d) of the lattice points A^-j B^-[l] k on the torus."""
    _, corners = translations(j, shear, cone, d)
    return np.mod(np.rint(corners * N).astype(np.int64), N)


def reconstruct_from_samples(samples: np.ndarray, nodes: np.ndarray, domain: np.ndarray, j: int) -> np.ndarray:
    """DFT of the band-limited function with the given lattice samples."""
    N, d = domain.shape[0], domain.ndim
    scatter = np.zeros((N,) * d, dtype=complex)
    scatter[tuple(nodes.T)] = samples
    return N ** d * cell_volume(j, d) * np.where(domain, fft.fftn(scatter), 0.0)


def _random_on(domain: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    shape = domain.shape
    spectrum = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return np.where(domain, spectrum, 0.0)


def plancherel_polya_constant(g: np.ndarray, cells: np.ndarray, j: int, p: float) -> float:
    """
    (sum_Q sup_Q |g|^p)^{1/p} / (|Q_j|^{-d/(p(d+1))} ||g||_p).

    Returns:
        float: the ratio, or 0.0 for g = 0
    """
    d = g.ndim
    magnitudes = np.abs(g)
    labels = np.unique(cells)
    sups = np.asarray(ndimage.maximum(magnitudes, labels=cells, index=labels))
    norm = lp_norm(magnitudes, p)
    if norm == 0:
        return 0.0
    exponent = 0.0 if math.isinf(p) else d / (p * (d + 1))
    return lp_sum(sups, p) / (cell_volume(j, d) ** -exponent * norm)


def _test_bands(frame: Frame):
    """(j, shear) pairs: zero and all-ones shear of cone 1 for every scale j >= 1."""
    for j in range(1, frame.j_max + 1):
        for shear in ((0,) * (frame.d - 1), (1,) * (frame.d - 1)):
            yield j, shear


def check_sampling_plancherel_polya(frame: Frame, config: RunConfig) -> CheckReport:
    """Exact lattice reconstruction and stability of the Plancherel-Polya constant."""
    rng = check_rng(config.seed, 'sampling')
    d, N = frame.d, frame.N
    atoms = open_frame(frame, config.workers)
    ps = [p for p in config.ps if p > 0]
    reconstruction = {}
    constants = {}
    per_scale = {p: {} for p in ps}
    zero_ok = True

    for j, shear in _test_bands(frame):
        domain = sampling_domain(j, shear, 1, d, N)
        nodes = lattice_nodes(j, shear, 1, d, N)
        cells = grid_cell_index(j, shear, 1, d, N)
        errors = []
        values = {p: [] for p in ps}
        for trial in range(config.trials):
            if trial == 0:
                g = atom(atoms, Band(1, j, shear)).samples
                spectrum = fft.fftn(g)
            else:
                spectrum = _random_on(domain, rng)
                g = fft.ifftn(spectrum)
            rebuilt = reconstruct_from_samples(g[tuple(nodes.T)], nodes, domain, j)
            errors.append(relative_error(rebuilt, spectrum))
            for p in ps:
                values[p].append(plancherel_polya_constant(g, cells, j, p))
        zero = reconstruct_from_samples(np.zeros(len(nodes)), nodes, domain, j)
        zero_ok = zero_ok and not np.any(zero) and plancherel_polya_constant(np.zeros((N,) * d), cells, j, 2.0) == 0
        key = f"j={j},l={list(shear)}"
        reconstruction[key] = max(errors)
        for p in ps:
            constants[f"{key},p={p}"] = {'median': float(np.median(values[p])), 'spread': spread(values[p])}
            per_scale[p].setdefault(j, []).extend(values[p])
        logger.debug(f"Sampling {key}: reconstruction error {max(errors):.3e}")

    scale_spread = {}
    for p in ps:
        medians = [float(np.median(v)) for v in per_scale[p].values()]
        scale_spread[str(p)] = spread(medians) if medians else 1.0

    limit = config.threshold('stability_spread')
    passed = (
        zero_ok
        and all(e <= config.threshold('sampling') for e in reconstruction.values())
        and all(c['spread'] <= limit for c in constants.values())
        and all(s <= limit for s in scale_spread.values())
    )
    return CheckReport(
        check_name='sampling',
        parameters={'d': d, 'N': N, 'j_max': frame.j_max, 'ps': ps, 'trials': config.trials},
        measured={
            'reconstruction_max_relative_error': reconstruction,
            'plancherel_polya': constants,
            'scale_spread': scale_spread,
            'zero_function_ok': zero_ok,
        },
        threshold={'sampling': config.threshold('sampling'), 'stability_spread': limit},
        passed=bool(passed),
    )
