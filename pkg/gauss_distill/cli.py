"""Command line front end.

Every command resolves a :class:`~gauss_distill.configuration.RunConfig`,
runs, writes its CSV file(s) plus a manifest to the output directory and
returns the exit code (0 success, 1 failure, 2 usage error).
"""

__copyright__ = "Copyright (c) 2026, the gauss_distill developers"
__license__ = "BSD 3-Clause"

import logging
import os
import sys
import time
import traceback
import typing

from . import actions, protocol, validation
from .configuration import (
    Command,
    OutputFiles,
    RunConfig,
    make_run_config,
)
from .errors import UsageError
from .gaussian_core import ChannelParametrization, cs_from_rt

STAGE_HEADER = (
    "stage",
    "q",
    "C",
    "S",
    "r",
    "T",
    "epsilon",
    "purity",
    "eof",
    "weight",
    "leakage",
)
FIGURE3_HEADER = ("eps_in", "N", "eps_out")
FIGURE4_HEADER = ("T", "N", "purity", "eof")


def _stage_row(report: protocol.StageReport) -> tuple:
    out = report.output
    return (
        report.stage,
        report.q,
        out.C,
        out.S,
        out.r,
        out.T,
        out.epsilon,
        out.purity,
        out.eof,
        report.weight,
        report.leakage,
    )


def _output_file(config: RunConfig, name: str) -> str:
    return os.path.join(config.output_dir, name)


def _protocol_config(config: RunConfig) -> protocol.ProtocolConfig:
    return protocol.ProtocolConfig(
        initial=ChannelParametrization(config.r, config.T),
        stages=config.stages,
        target_r=config.target_r,
        q_per_stage=config.q,
        cutoff=config.four_mode_cutoff,
        tolerances=config.tolerances,
        brute_force=config.brute_force,
        max_iters=config.max_iters,
    )


def _store_stage_reports(
    config: RunConfig,
    reports: typing.Sequence[protocol.StageReport],
    name: str,
    started: float,
):
    data_file = actions.write_csv(
        _output_file(config, name),
        STAGE_HEADER,
        (_stage_row(report) for report in reports),
    )
    leakage = {
        "max_stage_leakage": max(report.leakage for report in reports),
    }
    brute = [r.brute_force for r in reports if r.brute_force is not None]
    if brute:
        leakage["max_brute_force_leakage"] = max(b.leakage for b in brute)
    actions.store_manifest(
        config, [data_file], time.monotonic() - started, leakage
    )


def cmd_validate(config: RunConfig) -> int:
    """Run all invariant suites, exit code 0 iff all of them pass."""
    results = validation.run_validation(config)
    actions.store_report(config, results)

    failed = [result.name for result in results if not result.passed]
    if failed:
        logging.error(
            "%d of %d checks failed: %s",
            len(failed),
            len(results),
            ", ".join(failed),
        )
        return 1

    logging.info("All %d checks passed.", len(results))
    return 0


def cmd_stage(config: RunConfig) -> int:
    started = time.monotonic()
    state = cs_from_rt(config.r, config.T)
    tol = config.tolerances

    if config.q is None:
        q = protocol.tune_q(
            state, config.target_r, config.four_mode_cutoff, tol
        )
        tuned = True
    else:
        q = config.q[0]
        tuned = False

    report = protocol.run_stage(
        state,
        q,
        config.four_mode_cutoff,
        tol,
        brute_force=config.brute_force,
        max_iters=config.max_iters,
        tuned=tuned,
    )
    _store_stage_reports(config, [report], OutputFiles.stage_data, started)
    return 0


def cmd_nested(config: RunConfig) -> int:
    started = time.monotonic()
    reports = protocol.nested_protocol(_protocol_config(config))
    _store_stage_reports(config, reports, OutputFiles.nested_data, started)
    return 0


def cmd_figure3(config: RunConfig) -> int:
    started = time.monotonic()
    rows = protocol.figure3_data(config.eps_grid, config.stages)
    data_file = actions.write_csv(
        _output_file(config, OutputFiles.figure3), FIGURE3_HEADER, rows
    )
    actions.store_manifest(config, [data_file], time.monotonic() - started)
    return 0


def cmd_figure4(config: RunConfig) -> int:
    started = time.monotonic()
    rows = protocol.figure4_data(
        config.T_grid,
        config.stages,
        r=config.r,
        target_r=config.target_r,
        d=config.four_mode_cutoff,
        tolerances=config.tolerances,
        jobs=config.jobs,
    )
    data_file = actions.write_csv(
        _output_file(config, OutputFiles.figure4), FIGURE4_HEADER, rows
    )
    actions.store_manifest(config, [data_file], time.monotonic() - started)
    return 0


def cmd_rerun(config: RunConfig) -> int:
    """Re-execute the command line recorded in a manifest."""
    if not os.path.isfile(config.manifest):
        raise UsageError("Manifest {} does not exist".format(config.manifest))

    manifest = actions.read_manifest(config.manifest)
    argv = manifest.get("argv")
    if not argv or argv[0] == Command.RERUN.value:
        raise UsageError(
            "Manifest {} records no re-executable command".format(
                config.manifest
            )
        )

    logging.info("Re-execute: %s", " ".join(argv))
    return run(argv)


COMMANDS: typing.Dict[Command, typing.Callable[[RunConfig], int]] = {
    Command.VALIDATE: cmd_validate,
    Command.STAGE: cmd_stage,
    Command.NESTED: cmd_nested,
    Command.FIGURE3: cmd_figure3,
    Command.FIGURE4: cmd_figure4,
    Command.RERUN: cmd_rerun,
}


def run(argv: typing.Optional[typing.Sequence[str]] = None) -> int:
    """Parse the command line, execute the command and return the exit code.

    Args:
        argv:  Command line arguments without the program name.  If not
            set, ``sys.argv[1:]`` is used.
    """
    if argv is None:
        argv = sys.argv[1:]
    argv = list(argv)

    verbose = "-v" in argv or "--verbose" in argv
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="[%(asctime)s] [%(levelname)s] %(message)s",
    )

    try:
        config = make_run_config(argv)
    except SystemExit as e:
        # argparse prints usage and exits with 2 on bad input, 0 on --help
        return e.code if isinstance(e.code, int) else 2
    except UsageError as e:
        logging.error("Usage error: %s", e)
        return 2

    if config.command is not Command.RERUN and not os.path.isdir(
        config.output_dir
    ):
        logging.fatal(
            "Output directory {} does not exist or is not a directory.".format(
                config.output_dir
            )
        )
        return 2

    returncode = 0
    try:
        logging.info("Run command %s", config.command.value)
        returncode = COMMANDS[config.command](config)
        logging.info("Finished.")
    except UsageError as e:
        logging.error("Usage error: %s", e)
        returncode = 2
    except Exception as e:
        logging.critical("FAILURE: %s", e)
        traceback.print_exc()

        if config.command is not Command.RERUN:
            actions.store_error_report(config.output_dir, e)

        returncode = 1

    return returncode


def main():
    sys.exit(run())
