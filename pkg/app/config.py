#!/usr/bin/env python3
"""
Run configuration.

Precedence, lowest to highest: dataclass defaults, environment
(SHEARLET_WORKERS, SHEARLET_SEED), command-line flags, JSON config file.
"""
import json
import logging
import os
from dataclasses import dataclass, field, asdict, fields
from typing import List, Optional

from core.frame import FRAME_VARIANTS, FrameSpec, is_power_of_two
from core.windows import MEYER_POLYNOMIALS, WindowBank

logger = logging.getLogger(__name__)

REPORT_FORMATS = ('json', 'csv')

# Default check thresholds; RunConfig.thresholds overrides individual keys
DEFAULT_THRESHOLDS = {
    'partition': 1e-10,
    'roundtrip': 1e-10,
    'energy': 1e-10,
    'sequence_roundtrip': 1e-6,
    'sampling': 1e-8,
    'orthogonality_spread': 3.0,
    'maximal_spread': 5.0,
    'maximal_constant': 50.0,
    'stability_spread': 10.0,
    'slope_tolerance': 0.25,
    'exact': 1e-12,
}

ENV_WORKERS = 'SHEARLET_WORKERS'
ENV_SEED = 'SHEARLET_SEED'


@dataclass
class RunConfig:
    """Everything needed to reproduce a run."""
    d: int = 2
    N: int = 256
    j_max: Optional[int] = None
    variant: str = 'smooth'
    meyer_degree: int = 7
    close_high_pass: bool = True
    cone_indicators: bool = True
    seed: int = 0
    suite: str = 'all'
    trials: int = 20
    input: Optional[str] = None
    frame_path: Optional[str] = None
    output: Optional[str] = None
    report_format: str = 'json'
    alphas: List[float] = field(default_factory=lambda: [0.0])
    ps: List[float] = field(default_factory=lambda: [2.0])
    qs: List[float] = field(default_factory=lambda: [2.0])
    workers: int = 1
    thresholds: dict = field(default_factory=dict)

    def validate(self) -> tuple[bool, str]:
        """
        Validate the configuration before anything runs.

        Returns:
            tuple: (is_valid, error_message)
        """
        if self.d < 2:
            return False, f"d must be at least 2, got {self.d}"
        if not is_power_of_two(self.N) or self.N < 8:
            return False, f"N must be a power of two >= 8, got {self.N}"
        if self.variant not in FRAME_VARIANTS:
            return False, f"variant must be one of {FRAME_VARIANTS}, got '{self.variant}'"
        if self.meyer_degree not in MEYER_POLYNOMIALS:
            return False, f"meyer_degree must be one of {sorted(MEYER_POLYNOMIALS)}, got {self.meyer_degree}"
        if self.report_format not in REPORT_FORMATS:
            return False, f"report_format must be one of {REPORT_FORMATS}, got '{self.report_format}'"
        if self.trials < 1:
            return False, f"trials must be positive, got {self.trials}"
        if self.workers < 1:
            return False, f"workers must be positive, got {self.workers}"
        unknown = set(self.thresholds) - set(DEFAULT_THRESHOLDS)
        if unknown:
            return False, f"Unknown threshold keys: {', '.join(sorted(unknown))}"
        try:
            self.frame_spec()
        except ValueError as e:
            return False, str(e)
        return True, ""

    def frame_spec(self) -> FrameSpec:
        return FrameSpec(
            d=self.d,
            N=self.N,
            j_max=self.j_max,
            variant=self.variant,
            bank=WindowBank(meyer_degree=self.meyer_degree),
            close_high_pass=self.close_high_pass,
            cone_indicators=self.cone_indicators,
        )

    def threshold(self, name: str) -> float:
        return float(self.thresholds.get(name, DEFAULT_THRESHOLDS[name]))

    def to_dict(self) -> dict:
        data = asdict(self)
        data['thresholds'] = {**DEFAULT_THRESHOLDS, **self.thresholds}
        return data

    def updated(self, **overrides) -> 'RunConfig':
        """Copy with the given non-None fields replaced."""
        known = {f.name for f in fields(self)}
        values = asdict(self)
        for key, value in overrides.items():
            if key not in known:
                raise ValueError(f"Unknown config field '{key}'")
            if value is not None:
                values[key] = value
        return RunConfig(**values)


def from_env(base: RunConfig = None) -> RunConfig:
    """Apply SHEARLET_WORKERS / SHEARLET_SEED on top of a config."""
    base = base or RunConfig()
    overrides = {}
    for var, key in ((ENV_WORKERS, 'workers'), (ENV_SEED, 'seed')):
        raw = os.environ.get(var)
        if raw is None or not raw.strip():
            continue
        try:
            overrides[key] = int(raw)
        except ValueError:
            raise ValueError(f"{var} must be an integer, got '{raw}'")
    return base.updated(**overrides)


def load_config_file(path: str, base: RunConfig = None) -> RunConfig:
    """
    Overlay a JSON config file.

    Raises:
        OSError: If the file cannot be read
        ValueError: If it is not a JSON object or names unknown fields
    """
    base = base or RunConfig()
    with open(path, 'r', encoding='utf-8') as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as e:
            raise ValueError(f"Config file {path} is not valid JSON: {e}")
    if not isinstance(data, dict):
        raise ValueError(f"Config file {path} must contain a JSON object")
    logger.info(f"Loaded config file {path} ({len(data)} keys)")
    return base.updated(**data)
