#!/usr/bin/env python3
"""
Maximal-function inequalities measured on random band-limited data.

Runs on a reduced grid (N = 64 for d = 2, N = 16 for d = 3): the Peetre
suprema visit every grid offset.
"""
import logging
import math

import numpy as np

from app.checks.common import cached_frame, check_rng, stability
from app.checks.report import CheckReport
from app.config import RunConfig
from core.frame import Band, Frame, FrameSpec, default_j_max
from core.lattice import grid_cell_index, translations
from core.spaces import (
    MaximalParams,
    derivative_peetre,
    hl_maximal,
    isotropic_peetre,
    maximal_sequence,
    peetre_maximal,
    torus_distance,
)
from core.transform import (
    SequenceCoefficients,
    band_limited_random,
    band_nodes,
    forward_grid,
    subsample,
)

logger = logging.getLogger(__name__)

REDUCED_GRID = {2: 64, 3: 16}
LAMBDA = 1.0
SEQUENCE_R = 1.0
SEQUENCE_A = 0.5


def reduced_frame(frame: Frame, workers: int = 1) -> Frame:
    """Open frame of the same variant and windows on the reduced grid."""
    N = REDUCED_GRID.get(frame.d, 8)
    spec = FrameSpec(d=frame.d, N=N, j_max=default_j_max(N), variant=frame.spec.variant,
                     bank=frame.spec.bank, close_high_pass=False)
    return cached_frame(spec, workers)


def _ratio(left: np.ndarray, right: np.ndarray) -> float:
    positive = right > 0
    if not np.any(positive):
        return 0.0
    return float(np.max(left[positive] / right[positive]))


def peetre_ratio(c: np.ndarray, band: Band, lam: float) -> float:
    """max_x c*_lambda(x) / [M(|c|^{1/lambda})(x)]^lambda."""
    peetre = peetre_maximal(c, band, lam)
    hl = hl_maximal(np.abs(c) ** (1.0 / lam)) ** lam
    return _ratio(peetre, hl)


def derivative_ratio(g: np.ndarray, lam: float, radius: float) -> float:
    """max_x (d_1 g)*_lambda(x) / (2 pi R g*_lambda(x)) with the weight scale R."""
    left = derivative_peetre(g, lam, axis=0, scale=radius)
    right = 2.0 * np.pi * radius * isotropic_peetre(g, lam, scale=radius)
    return _ratio(left, right)


def sequence_decay(d: int) -> float:
    """Smallest integer decay above (d+1) r / a."""
    return math.floor((d + 1) * SEQUENCE_R / SEQUENCE_A) + 1


def sequence_ratio(s: SequenceCoefficients, band: Band, frame: Frame, params: MaximalParams) -> float:
    """max_Q (s*_{r,N})_Q / [M(sum_P |s_P|^a chi_P)(x_Q)]^{1/a} over the translations of one band."""
    envelope = maximal_sequence(s, params).bands[band]
    cells = grid_cell_index(band.j, band.shear, band.cone, frame.d, frame.N)
    averaged = hl_maximal(np.abs(s.bands[band])[cells] ** SEQUENCE_A) ** (1.0 / SEQUENCE_A)
    nodes = band_nodes(frame, band)
    return _ratio(envelope, averaged[tuple(nodes.T)])


def single_delta_error(s: SequenceCoefficients, band: Band, params: MaximalParams) -> float:
    """|s*| of a unit delta against its closed form (1 + 2^j |x_Q - x_0|)^{-N/r}."""
    delta = SequenceCoefficients.delta(s, band)
    envelope = maximal_sequence(delta, params).bands[band]
    _, corners = translations(band.j, band.shear, band.cone, s.d)
    distance = torus_distance(corners, corners[:1])[:, 0]
    closed = (1.0 + 2.0 ** band.j * distance) ** (-params.N_decay / params.r)
    return float(np.max(np.abs(envelope - closed)))


def check_maximal_inequalities(frame: Frame, config: RunConfig) -> CheckReport:
    """Peetre / Hardy-Littlewood, derivative Peetre and s* constants across random trials."""
    rng = check_rng(config.seed, 'maximal')
    small = reduced_frame(frame, config.workers)
    d, N = small.d, small.N
    band = Band(1, small.j_max, (0,) * (d - 1))
    radius = N // 4
    params = MaximalParams(r=SEQUENCE_R, N_decay=sequence_decay(d), lam=LAMBDA)

    peetre, derivative, sequence = [], [], []
    for _ in range(config.trials):
        g = band_limited_random(d, N, rng, radius=small.spec.passband)
        field = forward_grid(small, g)
        peetre.append(peetre_ratio(field.values(band), band, LAMBDA))
        derivative.append(derivative_ratio(band_limited_random(d, N, rng, radius=radius).samples, LAMBDA, radius))
        s = subsample(small, field)
        only_band = SequenceCoefficients(d, N, {band: s.bands[band]}, 0.0, s.kind)
        sequence.append(sequence_ratio(only_band, band, small, params))

    constant = np.ones((N,) * d)
    constant_ratio = peetre_ratio(constant, band, LAMBDA)
    template = SequenceCoefficients(d, N, {band: np.zeros(len(band_nodes(small, band)))}, 0.0, 'shear')
    delta_error = single_delta_error(template, band, params)
    delta_ratio = sequence_ratio(SequenceCoefficients.delta(template, band), band, small, params)

    limit = config.threshold('maximal_spread')
    spreads = {'peetre': stability(peetre), 'derivative': stability(derivative), 'sequence': stability(sequence)}
    finite = all(math.isfinite(v) for v in peetre + derivative + sequence + [delta_ratio])
    passed = (
        finite
        and all(v <= limit for v in spreads.values())
        and abs(constant_ratio - 1.0) <= config.threshold('exact')
        and delta_error <= config.threshold('exact')
        and delta_ratio <= config.threshold('maximal_constant')
    )
    return CheckReport(
        check_name='maximal',
        parameters={'d': d, 'N': N, 'band': band.to_list(), 'lambda': LAMBDA, 'r': params.r,
                    'N_decay': params.N_decay, 'a': SEQUENCE_A, 'derivative_scale': radius,
                    'trials': config.trials},
        measured={
            'peetre_hl_max': max(peetre),
            'derivative_max': max(derivative),
            'sequence_max': max(sequence),
            'spread': spreads,
            'constant_ratio': constant_ratio,
            'single_delta_error': delta_error,
            'single_delta_ratio': delta_ratio,
        },
        threshold={'maximal_spread': limit, 'maximal_constant': config.threshold('maximal_constant'),
                   'exact': config.threshold('exact')},
        passed=bool(passed),
    )
