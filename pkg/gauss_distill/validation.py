"""Invariant suites run by the ``validate`` command."""

__copyright__ = "Copyright (c) 2026, the gauss_distill developers"
__license__ = "BSD 3-Clause"

import enum
import logging
import math
import traceback
import typing

import numpy as np

from . import degauss, fock_engine, gaussian_core, gaussify, protocol
from .configuration import DEFAULT_TARGET_R, RunConfig, parse_grid
from .errors import DistillationError


class CheckState(enum.Enum):
    """Outcome of a single check."""

    PASSED = "passed"
    #: the check ran and the invariant does not hold (this includes domain
    #: errors such as a too small cutoff)
    FAILED = "failed"
    #: the check crashed with an unexpected exception
    ERROR = "error"


class CheckResult(typing.NamedTuple):
    name: str
    state: CheckState
    #: worst deviation found by the check (nan if not applicable)
    metric: float
    detail: str

    @property
    def passed(self) -> bool:
        return self.state is CheckState.PASSED


#: (r, T) grid of the ε-invariance and photon-subtraction checks
BASELINE_GRID = [(r, T) for r in (0.3, 0.6, 1.0) for T in (0.3, 0.5, 0.8)]

#: (r, T, q) grid of the squaring law
SQUARING_GRID = [
    (r, T, q) for r in (0.5, 1.0) for T in (0.4, 0.7) for q in (0.5, 1.0, 2.0)
]

#: (r, T, q) configurations compared against iterated Gaussification.
#: Iteration closes the gap by about half per step and the gap shrinks with
#: the squeezing of the input, so eight steps need weakly squeezed inputs.
FIXED_POINT_CONFIGS = [
    (0.1, 0.5, 1.0),
    (0.1, 0.8, 1.0),
    (0.1, 0.5, 2.0),
    (0.1, 0.8, 2.0),
]

#: normalized elements after two-copy de-Gaussification of the truncated
#: state (λ = 1, T = 0.5, q = 1)
TRUNCATED_STATE_ELEMENTS = {
    ((0, 0), (0, 0)): 25 / 28,
    ((1, 1), (0, 0)): 4 / 28,
    ((1, 0), (1, 0)): 1 / 28,
    ((0, 1), (0, 1)): 1 / 28,
    ((1, 1), (1, 1)): 1 / 28,
}

#: E_f of the TMSV with r = 1, (N̄ + 1) log₂(N̄ + 1) − N̄ log₂ N̄, N̄ = sinh² 1
TMSV_EOF_R1 = (
    math.cosh(1) ** 2 * math.log2(math.cosh(1) ** 2)
    - math.sinh(1) ** 2 * math.log2(math.sinh(1) ** 2)
)

#: the first stage may lower the purity only below this transmittance
PURITY_CROSSOVER_MAX = 0.5


CheckOutcome = typing.Tuple[bool, float, str]


def _check_roundtrip(config: RunConfig) -> CheckOutcome:
    worst = 0.0
    for r in np.linspace(0.1, 3.0, 30):
        for T in np.linspace(0.05, 1.0, 20):
            back = gaussian_core.rt_from_cs(
                gaussian_core.cs_from_rt(r, T), config.tolerances
            )
            worst = max(worst, abs(back.r - r), abs(back.T - T))
    return worst < 1e-12, worst, "(r, T) -> (C, S) -> (r, T) on 30x20 grid"


def _check_epsilon_identity(config: RunConfig) -> CheckOutcome:
    worst = 0.0
    for r in np.linspace(0.1, 3.0, 30):
        for T in np.linspace(0.05, 1.0, 20):
            eps = gaussian_core.epsilon_from_cs(gaussian_core.cs_from_rt(r, T))
            worst = max(worst, abs(eps - (1 - T) * np.tanh(r)))
    return worst < 1e-12, worst, "eps(C, S) = (1 - T) tanh r"


def _check_purity_formula(config: RunConfig) -> CheckOutcome:
    worst = 0.0
    for r in np.linspace(0.05, 2.0, 40):
        for fraction in np.linspace(0.0, 0.95, 20):
            eps = fraction * np.tanh(r)
            state = gaussian_core.cs_from_rt(r, 1 - eps / np.tanh(r))
            worst = max(
                worst,
                abs(
                    gaussian_core.purity(state, config.tolerances)
                    - gaussian_core.purity_closed_form(r, eps)
                ),
            )
    detail = "closed form vs 1/sqrt(det gamma) on 40x20 (r, eps)"
    return worst < 1e-12, worst, detail


def _check_filter_epsilon(config: RunConfig) -> CheckOutcome:
    worst = 0.0
    for r in (0.2, 0.7, 1.5):
        for T in (0.2, 0.5, 0.9):
            state = gaussian_core.cs_from_rt(r, T)
            eps = gaussian_core.epsilon_from_cs(state)
            for s in (0.1, 0.5, 1.0, 2.0):
                filtered = gaussian_core.symmetric_gaussian_filter(state, s)
                worst = max(
                    worst, abs(gaussian_core.epsilon_from_cs(filtered) - eps)
                )
    return worst < 1e-10, worst, "eps preserved by the local Gaussian filter"


def _check_cp_map(config: RunConfig) -> CheckOutcome:
    filter_error = 0.0
    loss_error = 0.0
    for r, T, s in ((0.5, 0.5, 0.4), (1.0, 0.8, 1.0), (1.5, 0.3, 0.7)):
        state = gaussian_core.cs_from_rt(r, T)
        gamma = gaussian_core.covariance_from_cs(state)
        mapped = gaussian_core.gaussian_cp_map(
            gaussian_core.tmsv_pair_operation(s), gamma, config.tolerances
        )
        closed = gaussian_core.covariance_from_cs(
            gaussian_core.symmetric_gaussian_filter(state, s)
        )
        filter_error = max(filter_error, mapped.max_distance(closed))

        # s → ∞ with output loss is the pure-loss channel
        tmsv = gaussian_core.tmsv_covariance(r)
        lossy = gaussian_core.gaussian_cp_map(
            gaussian_core.tmsv_pair_operation(10.0, transmittance=T),
            tmsv,
            config.tolerances,
        )
        loss_error = max(
            loss_error,
            lossy.max_distance(gaussian_core.lossy_channel(tmsv, T)),
        )
    return (
        filter_error < 1e-10 and loss_error < 1e-6,
        max(filter_error, loss_error),
        "filter {:.3e}, pure loss {:.3e}".format(filter_error, loss_error),
    )


def _check_beam_splitter(config: RunConfig) -> CheckOutcome:
    d = config.cutoff
    u = fock_engine.beam_splitter_tensor(d).tensor.real.reshape(d * d, d * d)
    n, m = np.divmod(np.arange(d * d), d)
    # columns with n + m < d lose nothing to the truncation
    kept = u[:, n + m < d]
    worst = float(np.abs(kept.T @ kept - np.eye(kept.shape[1])).max())
    # no |1, 1⟩ component in U|1, 1⟩
    worst = max(worst, abs(u[d + 1, d + 1]))
    return worst < 1e-12, worst, "U^dagger U on n + m < {}".format(d)


def _check_tmsv_covariance(config: RunConfig) -> CheckOutcome:
    state = gaussian_core.cs_from_rt(1.0, 0.5)
    rho = fock_engine.lossy_tmsv(np.tanh(1.0), 0.5, 30).normalized()
    distance = fock_engine.covariance_of(rho).max_distance(
        gaussian_core.covariance_from_cs(state)
    )
    return distance < 1e-8, distance, "lossy TMSV (r=1, T=0.5) at d=30"


def _check_epsilon_invariance(config: RunConfig) -> CheckOutcome:
    worst = 0.0
    for r, T in BASELINE_GRID:
        state = gaussian_core.cs_from_rt(r, T)
        rho = fock_engine.lossy_tmsv(np.tanh(r), T, config.cutoff)
        rho1 = gaussify.gaussification_step(rho, config.tolerances)
        out = gaussify.asymptotic_state(
            gaussify.sigma_from_rho1(rho1.rho, config.tolerances),
            config.tolerances,
        )
        worst = max(
            worst,
            abs(
                gaussian_core.epsilon_from_cs(out)
                - gaussian_core.epsilon_from_cs(state)
            ),
        )
    return worst < 1e-6, worst, "9 (r, T) points at d={}".format(
        config.cutoff
    )


def _check_photon_subtraction(config: RunConfig) -> CheckOutcome:
    worst = 0.0
    smallest_ratio = math.inf
    for r, T in BASELINE_GRID:
        lam = np.tanh(r)
        rho = fock_engine.lossy_tmsv(lam, T, config.cutoff)
        eps_in = fock_engine.epsilon_from_rho(rho, config.tolerances)
        subtracted = degauss.single_photon_subtract(rho, config.tolerances)
        rho1 = gaussify.gaussification_step(
            subtracted.normalized(), config.tolerances
        )
        eps_out = gaussify.epsilon_from_sigma(
            gaussify.sigma_from_rho1(rho1.rho, config.tolerances),
            config.tolerances,
        )
        ratio = eps_out / eps_in
        smallest_ratio = min(smallest_ratio, ratio)
        worst = max(
            worst,
            abs(ratio - degauss.photon_subtraction_epsilon_ratio(lam, T)),
        )
    return (
        worst < 1e-8 and smallest_ratio >= 1,
        worst,
        "eps_out/eps_in vs closed form, smallest ratio {:.6g}".format(
            smallest_ratio
        ),
    )


def _check_squaring_law(config: RunConfig) -> CheckOutcome:
    worst = 0.0
    d = config.four_mode_cutoff
    for r, T, q in SQUARING_GRID:
        rho = fock_engine.lossy_tmsv(np.tanh(r), T, d)
        eps_in = (1 - T) * np.tanh(r)
        degaussed = degauss.two_copy_degauss(rho, rho, q, config.tolerances)
        rho1 = gaussify.gaussification_step(
            degaussed.normalized(), config.tolerances
        )
        eps_out = gaussify.epsilon_from_sigma(
            gaussify.sigma_from_rho1(rho1.rho, config.tolerances),
            config.tolerances,
        )
        worst = max(worst, abs(eps_out - eps_in ** 2))
    return worst < 1e-5, worst, "12 (r, T, q) configurations at d={}".format(
        d
    )


def _check_truncated_state(config: RunConfig) -> CheckOutcome:
    d = max(4, config.four_mode_cutoff)
    rho = fock_engine.truncated_tmsv(1.0, d).to_density()
    rho = fock_engine.apply_loss(rho, 0.5, 0)
    rho = fock_engine.apply_loss(rho, 0.5, 1)
    out = degauss.two_copy_degauss(rho, rho, 1.0, config.tolerances)
    out = out.normalized()

    worst = max(
        abs(out.element(ket, bra).real - value)
        for (ket, bra), value in TRUNCATED_STATE_ELEMENTS.items()
    )
    eps = fock_engine.epsilon_from_rho(out, config.tolerances)
    worst = max(worst, abs(eps - 0.25))
    detail = "(lambda=1, T=0.5, q=1), eps = {:.12g}".format(eps)
    return worst < 1e-10, worst, detail


def _check_fock_mapping(config: RunConfig) -> CheckOutcome:
    q = 1.3
    kraus = degauss.two_copy_filter_kraus(q, 4)
    worst = max(
        float(
            np.abs(
                kraus[n]
                - degauss.two_copy_filter_fock_action(n, q).tensor.real
            ).max()
        )
        for n in (0, 1, 2)
    )
    d = config.four_mode_cutoff
    expansion = degauss.two_copy_filter_expansion(q, d)
    circuit = degauss.two_copy_filter_kraus(q, d).transpose(1, 2, 0)
    worst = max(worst, float(np.abs(expansion - circuit).max()))
    return worst < 1e-10, worst, "F|n> for n = 0, 1, 2 and full expansion"


def _check_fixed_point(config: RunConfig) -> CheckOutcome:
    worst = 0.0
    for r, T, q in FIXED_POINT_CONFIGS:
        report = protocol.run_stage(
            gaussian_core.cs_from_rt(r, T),
            q,
            config.four_mode_cutoff,
            config.tolerances,
            brute_force=True,
            max_iters=8,
        )
        worst = max(worst, report.brute_force.covariance_distance)
    detail = "{} configurations, at most 8 iterations at d={}".format(
        len(FIXED_POINT_CONFIGS), config.four_mode_cutoff
    )
    return worst < 1e-4, worst, detail


def _check_figure3(config: RunConfig) -> CheckOutcome:
    eps_grid = parse_grid("0.1:0.9:0.1")
    rows = protocol.figure3_data(eps_grid, 4)
    worst = 0.0
    for row in rows:
        value = row.eps_in
        for _ in range(row.N):
            value = value * value
        worst = max(worst, abs(row.eps_out - value) / value)

    # the Fock pipeline follows the same sequence
    lam = np.tanh(DEFAULT_TARGET_R)
    reports = protocol.nested_protocol(
        protocol.ProtocolConfig(
            initial=gaussian_core.ChannelParametrization(
                DEFAULT_TARGET_R, 1 - 0.5 / lam
            ),
            stages=3,
            cutoff=config.four_mode_cutoff,
            tolerances=config.tolerances,
        )
    )
    for report in reports:
        expected = 0.5 ** (2 ** report.stage)
        worst = max(worst, abs(report.output.epsilon - expected) / expected)
    return worst < 1e-5, worst, "36 rows, nested pipeline from eps_in = 0.5"


def _rising(values: typing.Sequence[float], slack: float = 1e-9) -> bool:
    return all(b >= a - slack for a, b in zip(values, values[1:]))


def purity_crossover(
    by_T: typing.Dict[float, typing.Sequence[float]]
) -> float:
    """Lowest T above which purity rises with every stage (nan if none)."""
    crossover = math.nan
    for T in sorted(by_T, reverse=True):
        if not _rising(by_T[T]):
            break
        crossover = T
    return crossover


def _check_figure4(config: RunConfig) -> CheckOutcome:
    T_grid = parse_grid("0.05:1.0:0.05")
    rows = protocol.figure4_data(
        T_grid,
        3,
        d=config.four_mode_cutoff,
        tolerances=config.tolerances,
        jobs=config.jobs,
    )
    by_T: typing.Dict[float, typing.List[protocol.Figure4Row]] = {}
    for row in rows:
        by_T.setdefault(row.T, []).append(row)

    problems = []
    for T, series in by_T.items():
        eofs = [row.eof for row in series]
        purities = [row.purity for row in series]
        if T < 1 and not all(b > a for a, b in zip(eofs, eofs[1:])):
            problems.append("E_f not increasing at T={}".format(T))
        # only the first stage may lower the purity
        if not _rising(purities[1:]):
            problems.append("purity drops after stage 1 at T={}".format(T))

    crossover = purity_crossover(
        {T: [row.purity for row in series] for T, series in by_T.items()}
    )
    if not crossover <= PURITY_CROSSOVER_MAX:
        problems.append(
            "purity rises at every stage only for T >= {}".format(crossover)
        )

    lossless = by_T[1.0]
    deviation = max(
        max(abs(row.purity - 1) for row in lossless),
        max(abs(row.eof - TMSV_EOF_R1) for row in lossless),
    )
    if deviation > 1e-4:
        problems.append("T=1 deviates by {:.3e}".format(deviation))

    detail = "{} T points, N <= 3, purity rises at every stage for T >= {}"
    return (
        not problems,
        deviation,
        "; ".join(problems) or detail.format(len(by_T), crossover),
    )


def _check_cutoff_probe(config: RunConfig) -> CheckOutcome:
    state = fock_engine.tmsv(
        config.probe_lambda, config.cutoff, config.tolerances
    )
    leakage = state.leakage()
    return True, leakage, "TMSV(lambda={}) at d={}".format(
        config.probe_lambda, config.cutoff
    )


#: name -> check, in the order in which they are run
CHECKS: typing.Dict[str, typing.Callable[[RunConfig], CheckOutcome]] = {
    "cutoff_probe": _check_cutoff_probe,
    "roundtrip": _check_roundtrip,
    "epsilon_identity": _check_epsilon_identity,
    "purity_formula": _check_purity_formula,
    "filter_epsilon_invariance": _check_filter_epsilon,
    "gaussian_cp_map": _check_cp_map,
    "beam_splitter_unitarity": _check_beam_splitter,
    "lossy_tmsv_covariance": _check_tmsv_covariance,
    "epsilon_invariance": _check_epsilon_invariance,
    "photon_subtraction": _check_photon_subtraction,
    "squaring_law": _check_squaring_law,
    "truncated_state_elements": _check_truncated_state,
    "fock_mapping": _check_fock_mapping,
    "fixed_point_consistency": _check_fixed_point,
    "figure3": _check_figure3,
    "figure4": _check_figure4,
}


def run_check(name: str, config: RunConfig, logger=logging) -> CheckResult:
    try:
        ok, metric, detail = CHECKS[name](config)
        state = CheckState.PASSED if ok else CheckState.FAILED
    except DistillationError as e:
        state, metric, detail = CheckState.FAILED, math.nan, "{}: {}".format(
            type(e).__name__, e
        )
    except Exception as e:
        logger.debug(traceback.format_exc())
        state, metric, detail = CheckState.ERROR, math.nan, "{}: {}".format(
            type(e).__name__, e
        )

    logger.info("Check %s: %s (%s)", name, state.name, detail)
    return CheckResult(name, state, float(metric), detail)


def run_validation(
    config: RunConfig, logger=logging
) -> typing.List[CheckResult]:
    """Run all checks, see :data:`CHECKS`."""
    return [run_check(name, config, logger) for name in CHECKS]
