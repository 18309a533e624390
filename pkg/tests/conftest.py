#!/usr/bin/env python3
"""
Pytest configuration to ensure project root is on sys.path
so imports like `from core.frame import ...` work when running
tests from the repository root, plus shared frame fixtures.
"""
import os
import sys

import numpy as np
import pytest

# Add repo root to sys.path
ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if ROOT not in sys.path:
    sys.path.insert(0, ROOT)

from core.frame import FrameSpec, build_frame  # noqa: E402


@pytest.fixture(scope='session')
def frame_2d():
    """Closed smooth frame, d=2, N=64, j_max=2."""
    return build_frame(FrameSpec(d=2, N=64))


@pytest.fixture(scope='session')
def cone_frame_2d():
    """Closed cone_projected frame, d=2, N=64."""
    return build_frame(FrameSpec(d=2, N=64, variant='cone_projected'))


@pytest.fixture(scope='session')
def open_frame_2d():
    """Smooth frame without the closed top scale, d=2, N=64."""
    return build_frame(FrameSpec(d=2, N=64, close_high_pass=False))


@pytest.fixture(scope='session')
def frame_3d():
    """Closed smooth frame, d=3, N=32, j_max=1."""
    return build_frame(FrameSpec(d=3, N=32))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
