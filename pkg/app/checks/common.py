#!/usr/bin/env python3
"""Helpers shared by the checks."""
import logging
import zlib
from dataclasses import replace
from functools import lru_cache

import numpy as np

from core.frame import Frame, FrameSpec, build_frame
from core.transform import CoefficientField, DyadicSystem, build_dyadic_system

logger = logging.getLogger(__name__)

# Memory allowed for the materialized band values of one field
CACHE_LIMIT = 256 * 2 ** 20


def check_rng(seed: int, name: str) -> np.random.Generator:
    """Independent, reproducible random stream per (seed, check)."""
    return np.random.default_rng([int(seed), zlib.crc32(name.encode('utf-8'))])


@lru_cache(maxsize=8)
def cached_frame(spec: FrameSpec, workers: int = 1) -> Frame:
    return build_frame(spec, workers)


def open_frame(frame: Frame, workers: int = 1) -> Frame:
    """The same frame without the closed top scale (partition exact on the passband only)."""
    if not frame.spec.close_high_pass:
        return frame
    return cached_frame(replace(frame.spec, close_high_pass=False), workers)


@lru_cache(maxsize=8)
def dyadic_for(frame_spec: FrameSpec, close_high_pass: bool = True) -> DyadicSystem:
    return build_dyadic_system(frame_spec.bank, frame_spec.d, frame_spec.N, close_high_pass)


def materialize(field: CoefficientField) -> CoefficientField:
    """Cache band values when every band fits in CACHE_LIMIT bytes."""
    footprint = len(field.spectra) * field.N ** field.d * 8
    return field.cached() if footprint <= CACHE_LIMIT else field


def relative_error(estimate: np.ndarray, reference: np.ndarray) -> float:
    """||estimate - reference||_2 / ||reference||_2 (absolute error if the reference is 0)."""
    scale = float(np.linalg.norm(reference))
    error = float(np.linalg.norm(estimate - reference))
    return error / scale if scale > 0 else error


def spread(values) -> float:
    """max / min of positive measurements."""
    values = np.asarray(values, dtype=float)
    return float(values.max() / values.min()) if values.size and values.min() > 0 else float('inf')


def stability(values) -> float:
    """max / median of positive measurements."""
    values = np.asarray(values, dtype=float)
    median = float(np.median(values)) if values.size else 0.0
    return float(values.max() / median) if median > 0 else float('inf')
