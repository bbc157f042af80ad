"""Command-line front end: derive, verify and evolve.

Exit codes: 0 success, 1 failed verification checks, 2 invalid input,
3 caustic or degenerate kernel.
"""
import argparse
import logging
import sys
from typing import List, Optional

from schwinger_kernels.config import ENGINES, RunConfig, build_config, config_keys
from schwinger_kernels.errors import (
    BranchError,
    CausticError,
    DegenerateKernelError,
    DegenerateMapError,
    InvalidArgumentError,
    SchwingerError,
)
from schwinger_kernels.kernel_builder import GaussianKernel, build_kernel, describe_exponent
from schwinger_kernels.records import read_record, write_record
from schwinger_kernels.reference_evolver import WaveFunctionGrid, apply_kernel, evolve, gaussian_packet
from schwinger_kernels.verification import run_suite

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED_CHECKS = 1
EXIT_INVALID = 2
EXIT_DEGENERATE = 3


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON or YAML run configuration (bare names resolve in the config directory)")
    common.add_argument("--m", dest="mass", type=float, help="mass; kinetic coefficient 1/(2m)")
    common.add_argument("--omega", type=float, help="angular frequency; potential coefficient m*omega^2/2")
    common.add_argument("--kinetic", type=float, help="coefficient a of P^2")
    common.add_argument("--potential", type=float, help="coefficient b of X^2")
    common.add_argument("--cross", type=float, help="coefficient c of (XP + PX)/2")
    common.add_argument("--linear-p", dest="linear_p", type=float, help="coefficient d of P")
    common.add_argument("--linear-x", dest="linear_x", type=float, help="coefficient e of X")
    common.add_argument("--hbar", type=float)
    common.add_argument("--rep", choices=("momentum", "position"))
    common.add_argument("--t", dest="times", type=float, nargs="+", help="elapsed time(s)")
    common.add_argument("--delta-times", dest="delta_times", type=float, nargs="+")
    common.add_argument("--x-min", dest="x_min", type=float)
    common.add_argument("--x-max", dest="x_max", type=float)
    common.add_argument("--n", type=int, help="grid points, a power of two")
    common.add_argument("--steps", type=int, help="split-step count")
    common.add_argument("--seed", type=int)
    common.add_argument("--workers", type=int)
    common.add_argument("--output", help="write the record here instead of stdout")
    return common


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(prog="schwinger-kernels",
                                     description="Propagators of quadratic Hamiltonians and their verification")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common_options()

    derive = sub.add_parser("derive", parents=[common], help="Build the Gaussian kernel and print its record")
    derive.add_argument("--pretty", action="store_true", help="also print the exponent in readable form")

    verify = sub.add_parser("verify", parents=[common], help="Run the verification suite")
    verify.add_argument("--kernel-file", dest="kernel_file", help="check a stored kernel record instead")
    verify.add_argument("--no-timing", dest="no_timing", action="store_true",
                        help="report runtime_ms as 0 so reports are byte-identical")

    evolve_parser = sub.add_parser("evolve", parents=[common], help="Evolve a Gaussian packet or a stored state")
    evolve_parser.add_argument("--engine", choices=ENGINES)
    evolve_parser.add_argument("--center-q", dest="center_q", type=float)
    evolve_parser.add_argument("--center-conjugate", dest="center_conjugate", type=float)
    evolve_parser.add_argument("--width", type=float)
    evolve_parser.add_argument("--state-file", dest="state_file", help="initial state record")
    return parser.parse_args(argv)


def cmd_derive(config: RunConfig, pretty: bool, stream) -> int:
    h = config.hamiltonian()
    kernels = [build_kernel(h, t, config.representation) for t in config.times]
    degenerate = [kernel for kernel in kernels if kernel.degenerate]
    if degenerate:
        for kernel in degenerate:
            logger.error(f"Kernel at t={kernel.time} is a delta distribution: {kernel.delta_phase.describe()}")
        return EXIT_DEGENERATE

    record = kernels[0].to_record() if len(kernels) == 1 else {"kernels": [k.to_record() for k in kernels]}
    write_record(record, config.output, stream)
    if pretty:
        for kernel in kernels:
            stream.write(describe_exponent(kernel) + "\n")
    return EXIT_OK


def cmd_verify(config: RunConfig, kernel_file: Optional[str], timing: bool, stream) -> int:
    kernel = GaussianKernel.from_record(read_record(kernel_file)) if kernel_file else None
    report = run_suite(config.hamiltonian(), config.suite_settings(timing=timing), kernel)
    write_record(report.to_record(), config.output, stream)
    for entry in report.failures():
        logger.error(f"Check {entry.check_name} failed: residual {entry.residual} > {entry.threshold} {entry.detail}")
    return EXIT_OK if report.overall else EXIT_FAILED_CHECKS


def cmd_evolve(config: RunConfig, state_file: Optional[str], stream) -> int:
    if len(config.times) != 1:
        raise InvalidArgumentError(f"evolve takes exactly one time, got {len(config.times)}.")
    t = config.times[0]
    h = config.hamiltonian()
    if state_file:
        initial = WaveFunctionGrid.from_record(read_record(state_file))
    else:
        initial = gaussian_packet(config.center_q, config.center_conjugate, config.width, config.grid(),
                                  rep=config.representation, hbar=h.hbar)

    if config.engine == "oracle":
        final = evolve(initial, h, t, config.steps)
    else:
        final = apply_kernel(build_kernel(h, t, initial.rep), initial, t)

    record = {
        "engine": config.engine,
        "time": t,
        "steps": config.steps,
        "norm": final.norm(),
        "fidelity_to_initial": initial.fidelity(final),
        "expectation": final.expectation(),
        "state": final.to_record(),
    }
    logger.info(f"Evolved with the {config.engine} engine to t={t}: fidelity {record['fidelity_to_initial']:.12f}")
    write_record(record, config.output, stream)
    return EXIT_OK


def main(argv: Optional[List[str]] = None, stream=None) -> int:
    stream = stream or sys.stdout
    args = parse_args(argv)
    overrides = {key: value for key, value in vars(args).items() if key in config_keys()}
    try:
        config = build_config(args.config, overrides)
        if args.command == "derive":
            return cmd_derive(config, args.pretty, stream)
        if args.command == "verify":
            return cmd_verify(config, args.kernel_file, not args.no_timing, stream)
        return cmd_evolve(config, args.state_file, stream)
    except (CausticError, DegenerateMapError, BranchError, DegenerateKernelError) as error:
        logger.error(f"{type(error).__name__}: {error}")
        return EXIT_DEGENERATE
    except SchwingerError as error:
        logger.error(f"{type(error).__name__}: {error}")
        return EXIT_INVALID
