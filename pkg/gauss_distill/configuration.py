__copyright__ = "Copyright (c) 2026, the gauss_distill developers"
__license__ = "BSD 3-Clause"

import argparse
import enum
import logging
import math
import os
import typing

from .errors import UsageError


#: Default per-mode Fock cutoff for one- and two-mode work.
DEFAULT_CUTOFF = 8
#: Default per-mode Fock cutoff for 4-mode two-copy stages (d⁸ entries).
DEFAULT_FOUR_MODE_CUTOFF = 6
#: Maximum number of entries of a 4-mode ρ⊗ρ tensor.
FOUR_MODE_ENTRY_BUDGET = 2 ** 26
#: Allowed population of the top Fock level of any mode.
DEFAULT_LEAKAGE_BOUND = 1e-4
#: Effective two-mode squeezing held fixed by q tuning.
DEFAULT_TARGET_R = 1.0
#: Maximum number of brute-force Gaussification iterations.
DEFAULT_MAX_ITERS = 12
#: Search bracket of the detection parameter q.
Q_BRACKET = (1e-3, 1e3)
#: Number of log-spaced points of the diagnostic q sweep.
Q_SWEEP_POINTS = 25

DEFAULT_EPS_GRID = "0.05:0.95:0.05"
DEFAULT_T_GRID = "0.05:1.0:0.05"
DEFAULT_PROBE_LAMBDA = 0.5

#: Environment variable used when ``--jobs`` is not given.
JOBS_ENV_VAR = "GAUSS_DISTILL_JOBS"


class OutputFiles:
    """Names of the output files that are generated."""

    stage_data = "stage.csv"
    nested_data = "nested.csv"
    figure3 = "figure3.csv"
    figure4 = "figure4.csv"

    manifest = "{stem}.manifest.json"

    validation_report = "validation.json"
    validation_text = "validation.txt"

    error_report = "error_report.txt"


class Tolerances(typing.NamedTuple):
    #: Algebraic identities between closed forms.
    algebraic: float = 1e-10
    #: Slack of γ + iΩ ⪰ 0 and of density-matrix eigenvalues.
    positivity: float = 1e-9
    #: Allowed anti-Hermitian part of a density matrix.
    hermiticity: float = 1e-10
    #: Allowed population of the top Fock level.
    leakage_bound: float = DEFAULT_LEAKAGE_BOUND
    #: Conditional steps with a smaller trace are treated as impossible.
    weight_floor: float = 1e-14
    #: Magnitude below which the vanishing σ elements count as zero.
    zero_pattern: float = 1e-8
    #: Residual tolerance of the asymptotic-state root finder.
    root: float = 1e-10
    #: Allowed deviation of the tuned squeezing from its target.
    target_r: float = 1e-6
    #: Trace distance at which brute-force Gaussification has converged.
    convergence: float = 1e-6
    #: Per-stage relative tolerance of ε⁽ᵏ⁾ = ε_in^(2^k).
    squaring: float = 1e-8


class Command(enum.Enum):
    """Commands of the command line front end."""

    VALIDATE = "validate"
    STAGE = "stage"
    NESTED = "nested"
    FIGURE3 = "figure3"
    FIGURE4 = "figure4"
    RERUN = "rerun"


class RunConfig(typing.NamedTuple):
    #: Which command to execute.
    command: Command

    #: The command line that produced this configuration.
    argv: typing.Tuple[str, ...] = ()

    #: Directory in which all output files are stored.
    output_dir: str = "."

    #: Number of worker processes for grid commands.
    jobs: int = 1

    #: Initial effective two-mode squeezing.
    r: float = DEFAULT_TARGET_R
    #: Initial effective channel transmittance.
    T: float = 0.5

    #: Explicit q per stage.  None means "auto-tune to target_r".
    q: typing.Optional[typing.Tuple[float, ...]] = None
    target_r: float = DEFAULT_TARGET_R

    #: Number of nested stages.
    stages: int = 1

    #: Per-mode Fock cutoff of two-mode work.
    cutoff: int = DEFAULT_CUTOFF
    #: Per-mode Fock cutoff of 4-mode two-copy stages.
    four_mode_cutoff: int = DEFAULT_FOUR_MODE_CUTOFF

    #: Verify each stage by iterating the Gaussification in Fock space.
    brute_force: bool = False
    max_iters: int = DEFAULT_MAX_ITERS

    #: Grids of figure commands.
    eps_grid: typing.Tuple[float, ...] = ()
    T_grid: typing.Tuple[float, ...] = ()

    #: Squeezing λ of the cutoff probe of ``validate``.
    probe_lambda: float = DEFAULT_PROBE_LAMBDA

    #: Manifest to re-execute (``rerun`` only).
    manifest: typing.Optional[str] = None

    verbose: bool = False

    tolerances: Tolerances = Tolerances()

    def to_dict(self) -> typing.Dict[str, typing.Any]:
        """JSON-compatible representation (used for manifests)."""
        d = self._asdict()
        d["command"] = self.command.value
        d["argv"] = list(self.argv)
        d["q"] = list(self.q) if self.q is not None else None
        d["eps_grid"] = list(self.eps_grid)
        d["T_grid"] = list(self.T_grid)
        d["tolerances"] = self.tolerances._asdict()
        return d


def parse_grid(text: str) -> typing.List[float]:
    """Parse a grid given as ``start:stop:step`` or as a comma list.

    The stop value is included if it lies within half a step of the last
    grid point.  Values are rounded to 12 significant digits so that the
    grid does not depend on accumulated floating point error.
    """
    text = text.strip()
    try:
        if ":" not in text:
            return [float(v) for v in text.split(",") if v.strip()]

        start, stop, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise UsageError("Malformed grid '{}'".format(text))

    if step <= 0 or stop < start:
        raise UsageError(
            "Grid '{}' needs step > 0 and stop >= start".format(text)
        )

    n = int(math.floor((stop - start) / step + 0.5)) + 1
    return [float(format(start + i * step, ".12g")) for i in range(n)]


def read_config_file(path: str) -> typing.Dict[str, str]:
    """Read a flat ``key = value`` configuration file.

    Lines starting with ``#`` and blank lines are ignored, trailing
    ``#`` comments are stripped.
    """
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(
                    "{}:{}: expected 'key = value'".format(path, lineno)
                )
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in _CONFIG_KEYS:
                raise UsageError(
                    "{}:{}: unknown key '{}'".format(path, lineno, key)
                )
            values[key] = value

    return values


def default_jobs() -> int:
    """Worker count from $GAUSS_DISTILL_JOBS or the available parallelism."""
    env = os.environ.get(JOBS_ENV_VAR)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(
                "${} must be an integer, got '{}'".format(JOBS_ENV_VAR, env)
            )
    return max(1, os.cpu_count() or 1)


def _parse_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    if value.lower() in ("1", "true", "yes", "on"):
        return True
    if value.lower() in ("0", "false", "no", "off"):
        return False
    raise UsageError("Expected a boolean, got '{}'".format(value))


def _parse_q_list(value: str) -> typing.Tuple[float, ...]:
    try:
        return tuple(float(v) for v in value.split(",") if v.strip())
    except ValueError:
        raise UsageError("Malformed q list '{}'".format(value))


#: key -> converter of the values accepted in a configuration file
_CONFIG_KEYS: typing.Dict[str, typing.Callable] = {
    "output_dir": str,
    "jobs": int,
    "r": float,
    "T": str,
    "q": _parse_q_list,
    "target_r": float,
    "stages": int,
    "cutoff": int,
    "four_mode_cutoff": int,
    "brute_force": _parse_bool,
    "max_iters": int,
    "eps": parse_grid,
    "probe_lambda": float,
    "leakage_bound": float,
}


def _add_common_arguments(parser: argparse.ArgumentParser):
    parser.add_argument(
        "--config",
        type=str,
        help="Configuration file with 'key = value' lines.",
    )
    parser.add_argument(
        "--output-dir",
        "-o",
        type=str,
        help="Path to the output directory (default: current directory).",
    )
    parser.add_argument(
        "--jobs",
        "-j",
        type=int,
        help="""Number of worker processes for grid points (default:
            ${} or the number of CPUs).""".format(JOBS_ENV_VAR),
    )
    parser.add_argument(
        "--verbose",
        "-v",
        action="store_true",
        help="Enable debug output.",
    )


def _add_stage_arguments(parser: argparse.ArgumentParser, grid_T=False):
    parser.add_argument(
        "--r",
        type=float,
        help="Effective two-mode squeezing r of the initial state.",
    )
    parser.add_argument(
        "--T",
        type=str,
        help=(
            "Grid of effective transmittances (start:stop:step)."
            if grid_T
            else "Effective channel transmittance T of the initial state."
        ),
    )
    parser.add_argument(
        "--cutoff",
        type=int,
        help="Per-mode Fock cutoff of the 4-mode stages (default: {}).".format(
            DEFAULT_FOUR_MODE_CUTOFF
        ),
    )
    parser.add_argument(
        "--target-r",
        type=float,
        help="Squeezing held constant when q is auto-tuned (default: 1).",
    )
    parser.add_argument(
        "--leakage-bound",
        type=float,
        help="Allowed population of the top Fock level.",
    )


def make_argument_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gauss_distill",
        description="""Simulate symmetric continuous-variable entanglement
            distillation with two-copy de-Gaussification.""",
    )
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    subparsers.required = True

    p = subparsers.add_parser(
        Command.VALIDATE.value, help="Run all invariant suites."
    )
    _add_common_arguments(p)
    p.add_argument(
        "--cutoff",
        type=int,
        help="Cutoff of two-mode checks (default: {}).".format(DEFAULT_CUTOFF),
    )
    p.add_argument(
        "--four-mode-cutoff",
        type=int,
        help="Cutoff of 4-mode checks (default: {}).".format(
            DEFAULT_FOUR_MODE_CUTOFF
        ),
    )
    p.add_argument(
        "--probe-lambda",
        type=float,
        help="Squeezing lambda of the TMSV that probes the cutoff"
        " (default: {}).".format(DEFAULT_PROBE_LAMBDA),
    )
    p.add_argument(
        "--leakage-bound",
        type=float,
        help="Allowed population of the top Fock level.",
    )

    for command, help_text in (
        (Command.STAGE, "Run a single distillation stage."),
        (Command.NESTED, "Run the nested distillation protocol."),
    ):
        p = subparsers.add_parser(command.value, help=help_text)
        _add_common_arguments(p)
        _add_stage_arguments(p)
        p.add_argument(
            "--q",
            type=str,
            help="""Detection parameter q (comma list for several stages).
                If omitted, q is tuned to hold --target-r.""",
        )
        p.add_argument(
            "--brute-force",
            action="store_true",
            help="Verify every stage by iterating the Gaussification.",
        )
        p.add_argument(
            "--max-iters",
            type=int,
            help="Maximum number of brute-force Gaussification iterations.",
        )
        if command is Command.NESTED:
            p.add_argument(
                "--stages", type=int, help="Number of stages (default: 3)."
            )

    p = subparsers.add_parser(
        Command.FIGURE3.value,
        help="Export eps after N stages as function of eps_in.",
    )
    _add_common_arguments(p)
    p.add_argument(
        "--eps",
        type=str,
        help="Grid of eps_in (default: {}).".format(DEFAULT_EPS_GRID),
    )
    p.add_argument(
        "--stages", type=int, help="Maximum number of stages (default: 4)."
    )

    p = subparsers.add_parser(
        Command.FIGURE4.value,
        help="Export purity and entanglement of formation per stage.",
    )
    _add_common_arguments(p)
    _add_stage_arguments(p, grid_T=True)
    p.add_argument(
        "--stages", type=int, help="Maximum number of stages (default: 3)."
    )

    p = subparsers.add_parser(
        Command.RERUN.value, help="Re-execute the run recorded in a manifest."
    )
    p.add_argument("manifest", type=str, help="Path to a manifest file.")
    p.add_argument("--verbose", "-v", action="store_true")

    return parser


#: default number of stages per command
_DEFAULT_STAGES = {
    Command.STAGE: 1,
    Command.NESTED: 3,
    Command.FIGURE3: 4,
    Command.FIGURE4: 3,
}


def make_run_config(
    argv: typing.Optional[typing.Sequence[str]] = None,
) -> RunConfig:
    """Build the run configuration from the command line.

    Settings are resolved with precedence flags > config file > defaults.

    Raises:
        UsageError: If a value cannot be parsed or is out of range.
        SystemExit: From argparse on malformed command lines (code 2).
    """
    parser = make_argument_parser()
    args = parser.parse_args(argv)
    command = Command(args.command)
    argv = tuple(argv) if argv is not None else ()

    if command is Command.RERUN:
        return RunConfig(
            command=command,
            argv=argv,
            manifest=args.manifest,
            verbose=args.verbose,
        )

    file_values = {}
    if args.config:
        if not os.path.isfile(args.config):
            raise UsageError(
                "Config file {} does not exist".format(args.config)
            )
        file_values = read_config_file(args.config)
        logging.info("Read configuration file %s", args.config)

    def resolve(name, flag_value, default):
        if flag_value is not None:
            return flag_value
        if name in file_values:
            try:
                return _CONFIG_KEYS[name](file_values[name])
            except ValueError:
                raise UsageError(
                    "Invalid value '{}' for '{}'".format(
                        file_values[name], name
                    )
                )
        return default

    def flag(name):
        return getattr(args, name, None)

    jobs = resolve("jobs", flag("jobs"), None)
    if jobs is None:
        jobs = default_jobs()

    tolerances = Tolerances(
        leakage_bound=resolve(
            "leakage_bound", flag("leakage_bound"), DEFAULT_LEAKAGE_BOUND
        )
    )

    fields: typing.Dict[str, typing.Any] = dict(
        command=command,
        argv=argv,
        output_dir=resolve("output_dir", flag("output_dir"), "."),
        jobs=jobs,
        verbose=bool(args.verbose),
        tolerances=tolerances,
    )

    if command is Command.VALIDATE:
        fields.update(
            cutoff=resolve("cutoff", flag("cutoff"), DEFAULT_CUTOFF),
            four_mode_cutoff=resolve(
                "four_mode_cutoff",
                flag("four_mode_cutoff"),
                DEFAULT_FOUR_MODE_CUTOFF,
            ),
            probe_lambda=resolve(
                "probe_lambda", flag("probe_lambda"), DEFAULT_PROBE_LAMBDA
            ),
        )
    elif command is Command.FIGURE3:
        eps_flag = parse_grid(args.eps) if args.eps else None
        fields.update(
            eps_grid=tuple(
                resolve("eps", eps_flag, parse_grid(DEFAULT_EPS_GRID))
            ),
            stages=resolve("stages", flag("stages"), _DEFAULT_STAGES[command]),
        )
    else:
        stages = _DEFAULT_STAGES[command]
        if command is not Command.STAGE:
            stages = resolve("stages", flag("stages"), stages)

        q_flag = _parse_q_list(args.q) if flag("q") else None
        T_value = resolve("T", flag("T"), None)
        fields.update(
            r=resolve("r", flag("r"), DEFAULT_TARGET_R),
            q=resolve("q", q_flag, None) if command is not Command.FIGURE4
            else None,
            target_r=resolve("target_r", flag("target_r"), DEFAULT_TARGET_R),
            stages=stages,
            four_mode_cutoff=resolve(
                "cutoff", flag("cutoff"), DEFAULT_FOUR_MODE_CUTOFF
            ),
            brute_force=bool(
                resolve("brute_force", flag("brute_force") or None, False)
            ),
            max_iters=resolve(
                "max_iters", flag("max_iters"), DEFAULT_MAX_ITERS
            ),
        )
        if command is Command.FIGURE4:
            fields["T_grid"] = tuple(
                parse_grid(T_value if T_value is not None else DEFAULT_T_GRID)
            )
        else:
            try:
                fields["T"] = float(T_value) if T_value is not None else 0.5
            except ValueError:
                raise UsageError("--T must be a number, got '{}'".format(
                    T_value
                ))

    config = RunConfig(**fields)
    _check_config(config)

    return config


def _check_config(config: RunConfig):
    if config.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    if config.stages < 1:
        raise UsageError("--stages must be at least 1")
    if config.cutoff < 2 or config.four_mode_cutoff < 2:
        raise UsageError("The cutoff must be at least 2")
    if config.max_iters < 1:
        raise UsageError("--max-iters must be at least 1")
    if config.q is not None:
        if any(q == 0 for q in config.q):
            raise UsageError("q = 0 is not allowed")
        if len(config.q) not in (1, config.stages):
            raise UsageError(
                "Give either one q or one q per stage ({} stages)".format(
                    config.stages
                )
            )
