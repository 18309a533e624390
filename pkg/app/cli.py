#!/usr/bin/env python3
"""
Command-line front end.

    windows dump       sample the window profiles
    lattice enumerate  list the bands of one scale
    frame build        build a frame and save it
    transform          forward / inverse / roundtrip on a saved signal
    norm               one Besov / Triebel-Lizorkin (quasi-)norm of a signal
    verify             run the numerical checks and write a report

Exit codes: 0 success, 1 failed check, 2 usage or configuration error, 3 I/O failure.
"""
import argparse
import logging
import sys
from typing import List, Optional

import numpy as np

from app import create_app
from app.config import REPORT_FORMATS, RunConfig
from app.io import format_number, read_field, read_frame, read_signal, write_field, write_frame, write_signal
from core.frame import FRAME_VARIANTS, Frame, build_frame, verify_parseval
from core.lattice import enumerate_shears, shear_count, translations
from core.spaces import (
    SmoothnessParams,
    besov_AB_norm,
    besov_seq_norm,
    dyadic_norms,
    parse_exponent,
    tl_AB_norm,
    tl_seq_norm,
)
from core.transform import (
    build_dyadic_system,
    dyadic_forward,
    dyadic_subsample,
    forward_grid,
    inverse_grid,
    subsample,
)
from core.windows import MEYER_POLYNOMIALS, WindowBank, sample_windows

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_IO = 3

SPACES = ('bAB', 'fAB', 'BAB', 'FAB', 'b', 'f', 'B', 'F')


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='JSON config file; its keys override flags')
    common.add_argument('--log-level', help='DEBUG, INFO, WARNING or ERROR (default: LOG_LEVEL or INFO)')
    common.add_argument('--workers', type=int, help='threads for band-parallel work')

    frame_flags = argparse.ArgumentParser(add_help=False)
    frame_flags.add_argument('--d', type=int, help='dimension')
    frame_flags.add_argument('--N', type=int, help='grid points per axis (power of two)')
    frame_flags.add_argument('--jmax', dest='j_max', type=int, help='largest scale')
    frame_flags.add_argument('--variant', choices=FRAME_VARIANTS)
    frame_flags.add_argument('--meyer-degree', type=int, choices=sorted(MEYER_POLYNOMIALS))
    frame_flags.add_argument('--no-close', dest='close_high_pass', action='store_const', const=False,
                             help='keep the open top-scale window')
    frame_flags.add_argument('--no-cone-indicators', dest='cone_indicators', action='store_const', const=False,
                             help='drop the cone indicators (cone_projected only)')

    parser = argparse.ArgumentParser(prog='shearlet-spaces', description='Discrete shearlet frame toolkit')
    commands = parser.add_subparsers(dest='command', required=True)

    windows = commands.add_parser('windows', help='window profiles')
    windows_actions = windows.add_subparsers(dest='action', required=True)
    dump = windows_actions.add_parser('dump', parents=[common], help='sample the windows on [-1, 1]')
    dump.add_argument('--grid', type=int, default=257)
    dump.add_argument('--meyer-degree', type=int, choices=sorted(MEYER_POLYNOMIALS))
    dump.add_argument('--out', dest='output')

    lattice = commands.add_parser('lattice', help='index sets')
    lattice_actions = lattice.add_subparsers(dest='action', required=True)
    enumerate_cmd = lattice_actions.add_parser('enumerate', parents=[common], help='bands of one scale')
    enumerate_cmd.add_argument('--d', type=int, required=True)
    enumerate_cmd.add_argument('--j', type=int, required=True)
    enumerate_cmd.add_argument('--out', dest='output')

    frame = commands.add_parser('frame', help='frames')
    frame_actions = frame.add_subparsers(dest='action', required=True)
    build = frame_actions.add_parser('build', parents=[common, frame_flags], help='build and save a frame')
    build.add_argument('--out', dest='output', required=True)

    transform = commands.add_parser('transform', parents=[common, frame_flags], help='analysis and synthesis')
    transform.add_argument('direction', choices=('forward', 'inverse', 'roundtrip'))
    transform.add_argument('--input', required=True)
    transform.add_argument('--frame', dest='frame_path', help='saved frame (built from flags if omitted)')
    transform.add_argument('--out', dest='output')

    norm = commands.add_parser('norm', parents=[common, frame_flags], help='one space norm of a signal')
    norm.add_argument('--space', required=True, choices=SPACES)
    norm.add_argument('--alpha', dest='alphas', type=float, nargs='+')
    norm.add_argument('--p', dest='ps', type=parse_exponent, nargs='+')
    norm.add_argument('--q', dest='qs', type=parse_exponent, nargs='+')
    norm.add_argument('--input', required=True)
    norm.add_argument('--frame', dest='frame_path')

    verify = commands.add_parser('verify', parents=[common, frame_flags], help='run numerical checks')
    verify.add_argument('--suite', default=None, help="'all', a check name, or a comma-separated list")
    verify.add_argument('--seed', type=int)
    verify.add_argument('--trials', type=int)
    verify.add_argument('--alpha', dest='alphas', type=float, nargs='+')
    verify.add_argument('--p', dest='ps', type=parse_exponent, nargs='+')
    verify.add_argument('--q', dest='qs', type=parse_exponent, nargs='+')
    verify.add_argument('--out', dest='output')
    verify.add_argument('--format', dest='report_format', choices=REPORT_FORMATS)
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    """Config fields present on the command line."""
    known = set(RunConfig.__dataclass_fields__)
    return {key: value for key, value in vars(args).items() if key in known and value is not None}


def _write_text(text: str, path: Optional[str]):
    if path:
        with open(path, 'w', encoding='utf-8', newline='') as fh:
            fh.write(text)
        logger.info(f"Wrote {path}")
    else:
        sys.stdout.write(text)


def _csv_text(header: List[str], rows) -> str:
    lines = [','.join(header)]
    for row in rows:
        lines.append(','.join(format_number(v) if isinstance(v, (float, np.floating)) else str(v) for v in row))
    return '\n'.join(lines) + '\n'


def _read(reader, *args):
    """Run a file reader; malformed files count as I/O failures."""
    try:
        return reader(*args)
    except ValueError as e:
        raise OSError(str(e)) from e


def _frame_for(config: RunConfig, d: int = None, N: int = None) -> Frame:
    if config.frame_path:
        frame = _read(read_frame, config.frame_path)
        if d is not None and (frame.d, frame.N) != (d, N):
            raise ValueError(f"Frame is d={frame.d} N={frame.N}, signal is d={d} N={N}")
        return frame
    if d is not None:
        config = config.updated(d=d, N=N)
        is_valid, error = config.validate()
        if not is_valid:
            raise ValueError(error)
    return build_frame(config.frame_spec(), config.workers)


# -- commands -----------------------------------------------------------------------------

def cmd_windows(args, config: RunConfig) -> int:
    table = sample_windows(WindowBank(meyer_degree=config.meyer_degree), args.grid)
    columns = list(table)
    rows = zip(*[table[c].tolist() for c in columns])
    _write_text(_csv_text(columns, rows), config.output)
    return EXIT_OK


def cmd_lattice(args, config: RunConfig) -> int:
    d, j = args.d, args.j
    if d < 2 or j < 0:
        raise ValueError(f"Need d >= 2 and j >= 0, got d={d} j={j}")
    header = ['cone', 'j'] + [f"l{i + 1}" for i in range(d - 1)] + ['boundary', 'translations']
    rows = []
    for cone in range(1, d + 1):
        for shear in enumerate_shears(j, d):
            k, _ = translations(j, shear, cone, d)
            rows.append([cone, j, *shear, any(abs(s) == 2 ** j for s in shear), len(k)])
    logger.info(f"Scale {j}: {shear_count(j, d)} shears per cone, {len(rows)} bands")
    _write_text(_csv_text(header, rows), config.output)
    return EXIT_OK


def cmd_frame(args, config: RunConfig) -> int:
    frame = build_frame(config.frame_spec(), config.workers)
    write_frame(config.output, frame)
    deviation = verify_parseval(frame, passband_only=not frame.spec.close_high_pass)
    print(f"atoms {len(frame.atoms)}")
    print(f"partition_max_deviation {format_number(deviation)}")
    return EXIT_OK


def cmd_transform(args, config: RunConfig) -> int:
    if args.direction == 'inverse':
        frame = _frame_for(config)
        field = _read(read_field, config.input, frame)
        g = inverse_grid(frame, field)
        if not config.output:
            raise ValueError("transform inverse needs --out")
        write_signal(config.output, g)
        return EXIT_OK

    f = _read(read_signal, config.input)
    frame = _frame_for(config, f.d, f.N)
    field = forward_grid(frame, f, config.workers)
    if args.direction == 'forward':
        if not config.output:
            raise ValueError("transform forward needs --out")
        write_field(config.output, field)
        print(f"energy {format_number(field.energy())}")
        return EXIT_OK

    g = inverse_grid(frame, field)
    scale = float(np.linalg.norm(f.samples))
    error = float(np.linalg.norm(g.samples - f.samples))
    print(f"relative_error {format_number(error / scale if scale > 0 else error)}")
    if config.output:
        write_signal(config.output, g)
    return EXIT_OK


def compute_norm(space: str, f, config: RunConfig) -> float:
    """Evaluate one named norm of a grid function with the first (alpha, p, q) of the config."""
    params = SmoothnessParams(config.alphas[0], config.ps[0], config.qs[0])
    if space in ('bAB', 'fAB', 'BAB', 'FAB'):
        frame = _frame_for(config, f.d, f.N)
        if space == 'BAB':
            return besov_AB_norm(frame, f, params, config.workers)
        if space == 'FAB':
            return tl_AB_norm(frame, f, params, config.workers)
        s = subsample(frame, forward_grid(frame, f, config.workers))
        return besov_seq_norm(s, params) if space == 'bAB' else tl_seq_norm(s, params, frame)
    system = build_dyadic_system(WindowBank(meyer_degree=config.meyer_degree), f.d, f.N)
    if space in ('B', 'F'):
        return dyadic_norms(f, params, space, system, config.workers)
    s = dyadic_subsample(system, dyadic_forward(system, f, config.workers))
    return dyadic_norms(s, params, space)


def cmd_norm(args, config: RunConfig) -> int:
    f = _read(read_signal, config.input)
    value = compute_norm(args.space, f, config)
    print(format_number(value))
    return EXIT_OK


def cmd_verify(args, config: RunConfig) -> int:
    from app.checks import reports_to_csv, reports_to_json, run_suite

    reports = run_suite(config)
    if config.report_format == 'csv':
        text = reports_to_csv(reports)
    else:
        text = reports_to_json(reports, config.to_dict()) + '\n'
    _write_text(text, config.output)
    failed = [r.check_name for r in reports if not r.passed]
    if failed:
        logger.warning(f"Failed checks: {', '.join(failed)}")
        return EXIT_CHECK_FAILED
    logger.info(f"All {len(reports)} checks passed")
    return EXIT_OK


COMMANDS = {
    'windows': cmd_windows,
    'lattice': cmd_lattice,
    'frame': cmd_frame,
    'transform': cmd_transform,
    'norm': cmd_norm,
    'verify': cmd_verify,
}


def run(argv: Optional[List[str]] = None) -> int:
    """
    Parse argv, build the configuration and dispatch one subcommand.

    Returns:
        int: exit code (0 ok, 1 failed check, 2 usage/config error, 3 I/O failure)
    """
    parser = build_parser()
    try:
        args = parser.parse_args(sys.argv[1:] if argv is None else argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    try:
        config = create_app(_overrides(args), getattr(args, 'config', None), getattr(args, 'log_level', None))
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        logger.error(f"Cannot read config: {str(e)}", exc_info=True)
        return EXIT_IO

    try:
        return COMMANDS[args.command](args, config)
    except OSError as e:
        logger.error(f"I/O failure: {str(e)}", exc_info=True)
        return EXIT_IO
    except ValueError as e:
        logger.error(f"{args.command} failed: {str(e)}", exc_info=True)
        return EXIT_USAGE


if __name__ == '__main__':
    sys.exit(run())
