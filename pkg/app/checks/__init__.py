#!/usr/bin/env python3
"""
Numerical checks.
Each check takes a built frame and a RunConfig and returns a CheckReport.
"""
import logging
import time
from multiprocessing.pool import ThreadPool
from typing import List, Optional

from app.checks import embeddings, geometry, identity, maximal, orthogonality, sampling, vanishing
from app.checks.common import cached_frame
from app.checks.report import CheckReport, reports_to_csv, reports_to_json
from app.config import RunConfig
from core.frame import Frame

logger = logging.getLogger(__name__)

# Check registry, in suite order
CHECKS = {
    'parseval': identity.check_parseval,
    'reproducing_identity': identity.check_reproducing_identity,
    'sampling': sampling.check_sampling_plancherel_polya,
    'orthogonality': orthogonality.check_almost_orthogonality,
    'geometry': geometry.check_geometry,
    'maximal': maximal.check_maximal_inequalities,
    'embeddings': embeddings.check_embeddings,
    'characterization': embeddings.check_characterization,
    'vanishing': vanishing.check_vanishing_sequences,
}


def resolve_suite(suite: str) -> List[str]:
    """
    Names selected by a suite string: 'all', one name, or a comma-separated list.

    Raises:
        ValueError: If a name is not registered
    """
    if not suite or suite == 'all':
        return list(CHECKS)
    names = [name.strip() for name in suite.split(',') if name.strip()]
    unknown = [name for name in names if name not in CHECKS]
    if unknown:
        raise ValueError(f"Unknown check(s): {', '.join(unknown)}; available: {', '.join(CHECKS)}")
    return names


def run_check(name: str, frame: Frame, config: RunConfig) -> CheckReport:
    """
    Run one registered check, timing it.

    A check that raises is logged and reported as failed rather than
    aborting the suite.
    """
    start = time.perf_counter()
    try:
        report = CHECKS[name](frame, config)
    except Exception as e:
        logger.error(f"Check {name} raised: {str(e)}", exc_info=True)
        report = CheckReport(
            check_name=name,
            parameters={'d': frame.d, 'N': frame.N},
            measured={},
            threshold={},
            passed=False,
            notes=[f"{type(e).__name__}: {e}"],
        )
    report.runtime = time.perf_counter() - start
    level = logging.INFO if report.passed else logging.WARNING
    logger.log(level, f"Check {name}: {'passed' if report.passed else 'FAILED'} in {report.runtime:.2f}s")
    return report


def run_suite(config: RunConfig, frame: Optional[Frame] = None, names: Optional[List[str]] = None) -> List[CheckReport]:
    """
    Run the selected checks on one frame.

    Args:
        config: Validated run configuration
        frame: Prebuilt frame; built from config.frame_spec() if omitted
        names: Check names; defaults to config.suite

    Returns:
        list: CheckReport per check, in registry order of the selection
    """
    names = resolve_suite(config.suite) if names is None else names
    if frame is None:
        frame = cached_frame(config.frame_spec(), config.workers)
    logger.info(f"Running {len(names)} check(s) on d={frame.d} N={frame.N} seed={config.seed}")
    if config.workers > 1 and len(names) > 1:
        with ThreadPool(min(config.workers, len(names))) as pool:
            return pool.map(lambda name: run_check(name, frame, config), names)
    return [run_check(name, frame, config) for name in names]


__all__ = [
    'CHECKS',
    'CheckReport',
    'resolve_suite',
    'run_check',
    'run_suite',
    'reports_to_json',
    'reports_to_csv',
]
