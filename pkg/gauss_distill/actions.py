"""Actions that produce output files."""

__copyright__ = "Copyright (c) 2026, the gauss_distill developers"
__license__ = "BSD 3-Clause"

import csv
import hashlib
import json
import logging
import os
import platform
import socket
import time
import typing

import numpy as np
import scipy

from .configuration import OutputFiles, RunConfig

if typing.TYPE_CHECKING:
    from .validation import CheckResult


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    return str(value)


def write_csv(
    path: str, header: typing.Sequence[str], rows: typing.Iterable[tuple]
) -> str:
    """Write rows to a CSV file.

    Floats are written with 12 significant digits and lines end with
    ``\\n``, so identical rows always give identical files.

    Returns:
        The path of the written file.
    """
    n_rows = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_cell(v) for v in row])
            n_rows += 1

    logging.info("Wrote %d rows to %s", n_rows, path)
    return path


def sha256_of_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(65536), b""):
            digest.update(block)
    return digest.hexdigest()


def _package_version() -> str:
    from . import __version__

    return __version__


def manifest_path(data_file: str) -> str:
    """Path of the manifest that accompanies ``data_file``."""
    directory, name = os.path.split(data_file)
    stem = os.path.splitext(name)[0]
    return os.path.join(directory, OutputFiles.manifest.format(stem=stem))


def store_manifest(
    config: RunConfig,
    data_files: typing.Sequence[str],
    wall_clock: float,
    leakage_summary: typing.Optional[typing.Dict[str, float]] = None,
) -> typing.List[str]:
    """Store a manifest next to every data file.

    The manifest holds everything needed to reproduce the file: the
    command line, the resolved configuration, the versions of the numeric
    stack and digests of the outputs.  The ``rerun`` command re-executes
    the recorded command line.

    Returns:
        Paths of the written manifests.
    """
    manifest: typing.Dict[str, typing.Any] = {
        "command": config.command.value,
        "argv": list(config.argv),
        "config": config.to_dict(),
        "versions": {
            "gauss_distill": _package_version(),
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "outputs": {
            os.path.basename(path): sha256_of_file(path)
            for path in data_files
        },
        "wall_clock_s": wall_clock,
        "leakage": leakage_summary or {},
        "hostname": socket.gethostname(),
        "timestamp": time.asctime(),
    }

    written = []
    for path in data_files:
        manifest_file = manifest_path(path)
        with open(manifest_file, "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=4, sort_keys=True)
        logging.info("Wrote manifest %s", manifest_file)
        written.append(manifest_file)

    return written


def read_manifest(path: str) -> typing.Dict[str, typing.Any]:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def store_report(
    config: RunConfig, results: typing.Sequence["CheckResult"]
) -> typing.Tuple[str, str]:
    """Store the validation report.

    Two files are written, ``validation.json`` for machines and
    ``validation.txt`` for humans.  The report is created at the very end,
    so it also indicates that the validation is over.
    """
    report: typing.Dict[str, typing.Any] = {
        "passed": all(result.passed for result in results),
        "checks": [
            {
                "name": result.name,
                "state": result.state.value,
                "metric": None
                if np.isnan(result.metric)
                else result.metric,
                "detail": result.detail,
            }
            for result in results
        ],
        "config": config.to_dict(),
    }

    json_file = os.path.join(config.output_dir, OutputFiles.validation_report)
    with open(json_file, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=4, sort_keys=True)

    width = max((len(result.name) for result in results), default=0)
    text_file = os.path.join(config.output_dir, OutputFiles.validation_text)
    with open(text_file, "w", encoding="utf-8") as fh:
        for result in results:
            fh.write(
                "{:<{width}}  {:<6}  {:>10.3e}  {}\n".format(
                    result.name,
                    result.state.name,
                    result.metric,
                    result.detail,
                    width=width,
                )
            )
        n_passed = sum(result.passed for result in results)
        fh.write("\n{} of {} checks passed\n".format(n_passed, len(results)))

    logging.info("Wrote validation report to %s", json_file)
    return json_file, text_file


def store_error_report(output_dir: str, error: BaseException) -> str:
    """Write the error that aborted a run to the output directory."""
    error_report_file = os.path.join(output_dir, OutputFiles.error_report)
    with open(error_report_file, "w", encoding="utf-8") as fh:
        fh.write(
            "Run failed with the following error:\n{}: {}\n".format(
                type(error).__name__, error
            )
        )
    return error_report_file
