#!/usr/bin/env python3
"""
Command-line front end for advection velocity estimation.

Usage:
    python3 run_mrai.py <command> [options]

Examples:
    python3 run_mrai.py simulate --out phantom --vx 0.7 --vy 0.35 --noise 0.5 --seed 1
    python3 run_mrai.py reconstruct --in phantom --out velocity --itmax 10
    python3 run_mrai.py mip --in velocity --norm norm.pgm --colour colour.ppm
    python3 run_mrai.py adjoint-check --trials 100 --tol 1e-10
    python3 run_mrai.py info --in phantom
"""

from typing import List, Optional
import argparse
import logging
import sys

from cgne_solver import run_cgne
from config import (
    ADJOINT_CHECK_TOL, ADJOINT_CHECK_TRIALS, DEFAULT_CYCLE_SECONDS, DEFAULT_DELTA_MM,
    DEFAULT_ITMAX, LOG_FILE, LOG_FORMAT, LOG_LEVEL, PHANTOM_DEFAULTS
)
from core_model import GridSpec
from data_handler import DataHandler
from mip_renderer import MipRenderer
from operators import AdvectionOperator, assemble_rhs, run_adjoint_suite
from synth import GaussianPhantomSpec, add_noise, gaussian_advection_series

logger = logging.getLogger(__name__)


def setup_logging() -> None:
    """Send log records to stderr and, if configured, to LOG_FILE."""
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if LOG_FILE:
        handlers.append(logging.FileHandler(LOG_FILE))
    logging.basicConfig(
        level=getattr(logging, LOG_LEVEL.upper(), logging.INFO),
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='run_mrai.py',
        description='Estimate advection velocity fields from slice-timed 4D data',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__.split('Examples:')[1],
    )
    commands = parser.add_subparsers(dest='command', required=True)

    simulate = commands.add_parser('simulate', help='Write a Gaussian phantom series')
    simulate.add_argument('--out', required=True, help='Output container basename')
    simulate.add_argument('--nx', type=int, default=PHANTOM_DEFAULTS['nx'])
    simulate.add_argument('--ny', type=int, default=PHANTOM_DEFAULTS['ny'])
    simulate.add_argument('--nz', type=int, default=PHANTOM_DEFAULTS['nz'])
    simulate.add_argument('--nt', type=int, default=PHANTOM_DEFAULTS['nt'])
    simulate.add_argument('--delta', type=float, default=DEFAULT_DELTA_MM, help='Voxel pitch in mm')
    simulate.add_argument('--dt', type=float, default=None,
                          help=f'Slice time step in s (default: {DEFAULT_CYCLE_SECONDS} / nz)')
    simulate.add_argument('--cx', type=float, default=None, help='Bump centre x in mm (default: middle)')
    simulate.add_argument('--cy', type=float, default=None, help='Bump centre y in mm (default: middle)')
    simulate.add_argument('--cz', type=float, default=None, help='Bump centre z in mm (default: middle)')
    simulate.add_argument('--sigma', type=float, default=None,
                          help=f"Bump width in mm (default: {PHANTOM_DEFAULTS['sigma_voxels']} voxels)")
    simulate.add_argument('--amp', type=float, default=PHANTOM_DEFAULTS['amplitude'])
    simulate.add_argument('--base', type=float, default=PHANTOM_DEFAULTS['baseline'])
    simulate.add_argument('--vx', type=float, default=0.0, help='Velocity x in mm/s')
    simulate.add_argument('--vy', type=float, default=0.0, help='Velocity y in mm/s')
    simulate.add_argument('--vz', type=float, default=0.0, help='Velocity z in mm/s')
    simulate.add_argument('--noise', type=float, default=0.0, help='Gaussian noise standard deviation')
    simulate.add_argument('--seed', type=int, default=0)

    reconstruct = commands.add_parser('reconstruct', help='Run CGNE on a series container')
    reconstruct.add_argument('--in', dest='input', required=True, help='Series container basename')
    reconstruct.add_argument('--out', required=True, help='Velocity container basename')
    reconstruct.add_argument('--itmax', type=int, default=DEFAULT_ITMAX)
    reconstruct.add_argument('--log', default=None, help='Residual CSV (default: <out>.csv)')

    mip = commands.add_parser('mip', help='Render z-MIPs of a velocity container')
    mip.add_argument('--in', dest='input', required=True, help='Velocity container basename')
    mip.add_argument('--norm', default=None, help='Grey-scale norm MIP (.pgm)')
    mip.add_argument('--colour', default=None, help='Colour MIP (.ppm)')

    check = commands.add_parser('adjoint-check', help='Random adjoint-identity suite')
    check.add_argument('--trials', type=int, default=ADJOINT_CHECK_TRIALS)
    check.add_argument('--tol', type=float, default=ADJOINT_CHECK_TOL)
    check.add_argument('--seed', type=int, default=0)

    info = commands.add_parser('info', help='Print a container header')
    info.add_argument('--in', dest='input', required=True, help='Container basename')

    return parser


def cmd_simulate(args: argparse.Namespace) -> int:
    dt = args.dt if args.dt is not None else DEFAULT_CYCLE_SECONDS / args.nz
    grid = GridSpec(I=args.nx - 1, J=args.ny - 1, K=args.nz - 1, L=args.nt - 1,
                    delta=args.delta, delta_t=dt)
    middle = [n * args.delta / 2.0 for n in (grid.I, grid.J, grid.K)]
    center = tuple(c if c is not None else m for c, m in zip((args.cx, args.cy, args.cz), middle))
    sigma = args.sigma if args.sigma is not None else PHANTOM_DEFAULTS['sigma_voxels'] * args.delta

    spec = GaussianPhantomSpec(center=center, sigma=sigma, amplitude=args.amp,
                               baseline=args.base, velocity=(args.vx, args.vy, args.vz))
    series = add_noise(gaussian_advection_series(grid, spec), args.noise, args.seed)
    DataHandler().save_series(series, args.out)
    return 0


def cmd_reconstruct(args: argparse.Namespace) -> int:
    handler = DataHandler()
    series = handler.load_series(args.input)
    operator = AdvectionOperator(series)
    report = run_cgne(operator, assemble_rhs(series), itmax=args.itmax)
    header_path = handler.save_velocity(report.v, args.out)

    log_path = args.log if args.log is not None else header_path.with_suffix('.csv')
    report.write_residual_csv(str(log_path))
    if report.breakdown:
        logger.warning(f"Solver stopped early after {report.iterations_run} iterations (breakdown)")
    return 0


def cmd_mip(args: argparse.Namespace) -> int:
    renderer = MipRenderer(DataHandler().load_velocity(args.input))
    if args.norm:
        renderer.write_norm(args.norm)
    if args.colour:
        renderer.write_colour(args.colour)
    return 0


def cmd_adjoint_check(args: argparse.Namespace) -> int:
    if args.trials < 1:
        raise ValueError(f"--trials must be >= 1, got {args.trials}")
    result = run_adjoint_suite(args.trials, args.tol, seed=args.seed)
    print(f"trials: {result.trials}")
    print(f"max relative adjoint defect: {result.max_adjoint_defect:.3e}")
    print(f"max relative kappa defect: {result.max_kappa_defect:.3e}")
    print("PASSED" if result.passed else "FAILED")
    return 0 if result.passed else 1


def cmd_info(args: argparse.Namespace) -> int:
    header = DataHandler().header(args.input)
    for key, value in header.items():
        print(f"{key}={value}")
    return 0


COMMANDS = {
    'simulate': cmd_simulate,
    'reconstruct': cmd_reconstruct,
    'mip': cmd_mip,
    'adjoint-check': cmd_adjoint_check,
    'info': cmd_info,
}


def cli_main(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments and run one command.

    Returns:
        int: 0 on success, 1 on validation/format errors, 2 on usage errors
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    if args.command == 'mip' and not (args.norm or args.colour):
        parser.print_usage(sys.stderr)
        print("run_mrai.py mip: error: at least one of --norm, --colour is required", file=sys.stderr)
        return 2

    setup_logging()
    try:
        return COMMANDS[args.command](args)
    except (ValueError, OSError) as e:
        logger.error(f"{args.command} failed: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(cli_main(sys.argv[1:]))
