"""Nested distillation: stages of two-copy de-Gaussification + Gaussification.

A stage takes a symmetric Gaussian state, de-Gaussifies two copies of it
and Gaussifies the result to its fixed point.  The parameter ε of the
output is the square of the input ε.  The detection parameter q of each
stage can be tuned so that the output keeps a given two-mode squeezing.
"""

__copyright__ = "Copyright (c) 2026, the gauss_distill developers"
__license__ = "BSD 3-Clause"

import logging
import math
import multiprocessing
import typing

import numpy as np
import scipy.optimize

from . import degauss, fock_engine, gaussify
from .configuration import (
    DEFAULT_FOUR_MODE_CUTOFF,
    DEFAULT_MAX_ITERS,
    DEFAULT_TARGET_R,
    Q_BRACKET,
    Q_SWEEP_POINTS,
    Tolerances,
)
from .errors import (
    CutoffTooSmallError,
    DegenerateDecompositionError,
    DistillationError,
    DomainError,
    EpsilonUndefinedError,
    InvariantViolationError,
    NoRootInBracketError,
)
from .gaussian_core import (
    ChannelParametrization,
    SymmetricGaussianState,
    canonicalize,
    cs_from_rt,
    eof_symmetric,
    epsilon_from_cs,
    purity,
    rt_from_cs,
)


class StateSummary(typing.NamedTuple):
    C: float
    S: float
    #: nan if the state has no channel decomposition
    r: float
    T: float
    #: nan if S = 0
    epsilon: float
    purity: float
    eof: float

    @property
    def state(self) -> SymmetricGaussianState:
        return SymmetricGaussianState(self.C, self.S)


class BruteForceCheck(typing.NamedTuple):
    """Result of iterating the Gaussification in Fock space."""

    iterations: int
    converged: bool
    #: product of the conditional weights of all steps
    weight: float
    #: max-norm distance of the covariance matrices of the iterated state and
    #: of the analytic fixed point (both at the same cutoff)
    covariance_distance: float
    leakage: float


class StageReport(typing.NamedTuple):
    stage: int
    q: float
    input: StateSummary
    output: StateSummary
    #: de-Gaussification weight times first Gaussification weight
    weight: float
    degauss_weight: float
    gaussification_weight: float
    #: input copies consumed per output copy, cumulative over stages
    copies_consumed: int
    leakage: float
    #: True if q was tuned to hold the target squeezing
    tuned: bool = False
    brute_force: typing.Optional[BruteForceCheck] = None

    @property
    def weight_is_proxy(self) -> bool:
        """The weight ignores all Gaussification steps but the first."""
        return True


class ProtocolConfig(typing.NamedTuple):
    initial: typing.Union[ChannelParametrization, SymmetricGaussianState]
    stages: int = 1
    #: squeezing held constant when q is tuned
    target_r: float = DEFAULT_TARGET_R
    #: explicit q per stage (a single value is used for all stages);
    #: None means "tune q"
    q_per_stage: typing.Optional[typing.Tuple[float, ...]] = None
    cutoff: int = DEFAULT_FOUR_MODE_CUTOFF
    tolerances: Tolerances = Tolerances()
    brute_force: bool = False
    max_iters: int = DEFAULT_MAX_ITERS

    def initial_state(self) -> SymmetricGaussianState:
        if isinstance(self.initial, ChannelParametrization):
            return cs_from_rt(self.initial.r, self.initial.T)
        return SymmetricGaussianState(*self.initial)

    def q_for(self, stage: int) -> typing.Optional[float]:
        if self.q_per_stage is None:
            return None
        if len(self.q_per_stage) == 1:
            return self.q_per_stage[0]
        return self.q_per_stage[stage - 1]


def summarize(
    state: SymmetricGaussianState, tolerances: Tolerances = Tolerances()
) -> StateSummary:
    try:
        channel = rt_from_cs(state, tolerances)
        r, T = channel.r, channel.T
    except DegenerateDecompositionError:
        r = T = math.nan
    try:
        eps = epsilon_from_cs(canonicalize(state)[0])
    except EpsilonUndefinedError:
        eps = math.nan

    return StateSummary(
        C=state.C,
        S=state.S,
        r=r,
        T=T,
        epsilon=eps,
        purity=purity(state, tolerances),
        eof=eof_symmetric(state),
    )


class _StageOutput(typing.NamedTuple):
    rho: fock_engine.FockArray
    degaussed: fock_engine.WeightedState
    gaussified: fock_engine.WeightedState
    state: SymmetricGaussianState


def _stage_output(
    state: SymmetricGaussianState,
    q: float,
    d: int,
    tolerances: Tolerances,
) -> _StageOutput:
    canonical, flipped = canonicalize(state)
    channel = rt_from_cs(canonical, tolerances)

    rho = fock_engine.lossy_tmsv(channel.lam, channel.T, d)
    degaussed = degauss.two_copy_degauss(rho, rho, q, tolerances)
    gaussified = gaussify.gaussification_step(
        degaussed.normalized(), tolerances
    )
    sig = gaussify.sigma_from_rho1(gaussified.rho, tolerances)
    out = gaussify.asymptotic_state(sig, tolerances)

    if flipped:
        out = SymmetricGaussianState(out.C, -out.S)
    return _StageOutput(rho, degaussed, gaussified, out)


def _brute_force_check(
    degaussed: fock_engine.WeightedState,
    out: SymmetricGaussianState,
    d: int,
    max_iters: int,
    tolerances: Tolerances,
) -> BruteForceCheck:
    report = gaussify.iterate_to_convergence(
        degaussed.rho, max_iters, tolerances.convergence, tolerances
    )
    leakage = report.state.leakage()
    if leakage > tolerances.leakage_bound:
        raise CutoffTooSmallError(
            leakage, tolerances.leakage_bound, "iterated Gaussification"
        )

    channel = rt_from_cs(canonicalize(out)[0], tolerances)
    reference = fock_engine.lossy_tmsv(channel.lam, channel.T, d).normalized()
    distance = fock_engine.covariance_of(report.state).max_distance(
        fock_engine.covariance_of(reference)
    )
    return BruteForceCheck(
        iterations=report.iterations,
        converged=report.converged,
        weight=degaussed.weight * float(np.prod(report.weights)),
        covariance_distance=distance,
        leakage=leakage,
    )


def run_stage(
    state: SymmetricGaussianState,
    q: float,
    d: int = DEFAULT_FOUR_MODE_CUTOFF,
    tolerances: Tolerances = Tolerances(),
    stage: int = 1,
    copies_in: int = 1,
    brute_force: bool = False,
    max_iters: int = DEFAULT_MAX_ITERS,
    tuned: bool = False,
) -> StageReport:
    """Run one distillation stage on an entangled symmetric Gaussian state.

    The output state is obtained from the σ elements of the first
    Gaussification step.  With ``brute_force`` the Gaussification is also
    iterated in Fock space and compared with the analytic result.
    """
    result = _stage_output(state, q, d, tolerances)

    leakage = max(
        result.rho.leakage(), result.degaussed.normalized().leakage()
    )
    if leakage > tolerances.leakage_bound:
        logging.warning(
            "Stage %d: truncation leakage %.3e above bound %.1e"
            " (sigma elements are not affected)",
            stage,
            leakage,
            tolerances.leakage_bound,
        )

    check = None
    copies = copies_in * 2 * 2
    if brute_force:
        check = _brute_force_check(
            result.degaussed, result.state, d, max_iters, tolerances
        )
        copies = copies_in * 2 * 2 ** check.iterations
        logging.info(
            "Stage %d brute force: %d iterations, covariance distance %.3e",
            stage,
            check.iterations,
            check.covariance_distance,
        )

    report = StageReport(
        stage=stage,
        q=float(q),
        input=summarize(state, tolerances),
        output=summarize(result.state, tolerances),
        weight=result.degaussed.weight * result.gaussified.weight,
        degauss_weight=result.degaussed.weight,
        gaussification_weight=result.gaussified.weight,
        copies_consumed=copies,
        leakage=leakage,
        tuned=tuned,
        brute_force=check,
    )
    logging.info(
        "Stage %d (q=%.6g): eps %.6g -> %.6g, r %.6g -> %.6g, P %.6g",
        stage,
        q,
        report.input.epsilon,
        report.output.epsilon,
        report.input.r,
        report.output.r,
        report.output.purity,
    )
    return report


def _output_r(
    state: SymmetricGaussianState, q: float, d: int, tolerances: Tolerances
) -> float:
    """Squeezing of the stage output, nan where no output state exists."""
    try:
        out = _stage_output(state, q, d, tolerances).state
        return rt_from_cs(out, tolerances).r
    except DistillationError:
        return math.nan


def sweep_q(
    state: SymmetricGaussianState,
    d: int = DEFAULT_FOUR_MODE_CUTOFF,
    tolerances: Tolerances = Tolerances(),
    bracket: typing.Tuple[float, float] = Q_BRACKET,
    points: int = Q_SWEEP_POINTS,
) -> typing.List[typing.Tuple[float, float]]:
    """Output squeezing r on a log-spaced grid of q (nan where undefined)."""
    qs = np.geomspace(bracket[0], bracket[1], points)
    sweep = [(float(q), _output_r(state, q, d, tolerances)) for q in qs]
    for q, r in sweep:
        logging.debug("q sweep: q=%.6g r_out=%.12g", q, r)
    return sweep


def _is_monotone(values: typing.Sequence[float]) -> bool:
    diffs = np.diff([v for v in values if not math.isnan(v)])
    return bool(np.all(diffs <= 0) or np.all(diffs >= 0))


def _admissible_end(
    q_undefined: float,
    q_defined: float,
    target_r: float,
    output_r: typing.Callable[[float], float],
    max_halvings: int = 60,
) -> typing.Optional[typing.Tuple[float, float]]:
    """Admissible (q, r_out) with r_out above ``target_r``, near the edge.

    r_out(q) diverges where the stage output stops being an admissible
    Gaussian state, so the search halves the log q interval between the
    last undefined point and the first defined one until r_out exceeds the
    target.  Returns None if the interval collapses first.
    """
    lo, hi = math.log(q_undefined), math.log(q_defined)
    for _ in range(max_halvings):
        mid = 0.5 * (lo + hi)
        r = output_r(math.exp(mid))
        if math.isnan(r):
            lo = mid
        elif r > target_r:
            return math.exp(mid), r
        else:
            hi = mid
    return None


def _brackets(
    sweep: typing.Sequence[typing.Tuple[float, float]],
    target_r: float,
    output_r: typing.Callable[[float], float],
) -> typing.Iterator[typing.Tuple[float, float]]:
    """Intervals of q on which r_out(q) - target_r changes sign."""
    for (q_lo, r_lo), (q_hi, r_hi) in zip(sweep[:-1], sweep[1:]):
        if math.isnan(r_lo) and math.isnan(r_hi):
            continue

        if math.isnan(r_lo) or math.isnan(r_hi):
            if math.isnan(r_lo):
                q_nan, (q_end, r_end) = q_lo, (q_hi, r_hi)
            else:
                q_nan, (q_end, r_end) = q_hi, (q_lo, r_lo)
            if r_end > target_r:
                continue
            edge = _admissible_end(q_nan, q_end, target_r, output_r)
            if edge is None:
                continue
            logging.debug(
                "Admissible edge near q=%.6g (r_out=%.6g)", edge[0], edge[1]
            )
            yield tuple(sorted((edge[0], q_end)))
            continue

        if (r_lo - target_r) * (r_hi - target_r) <= 0:
            yield q_lo, q_hi


def tune_q(
    state: SymmetricGaussianState,
    target_r: float = DEFAULT_TARGET_R,
    d: int = DEFAULT_FOUR_MODE_CUTOFF,
    tolerances: Tolerances = Tolerances(),
    bracket: typing.Tuple[float, float] = Q_BRACKET,
    points: int = Q_SWEEP_POINTS,
) -> float:
    """Find q such that the stage output has squeezing ``target_r``.

    A log-spaced sweep locates a sign change of r_out(q) - target_r, which
    is then refined with Brent's method on log q.  Next to the values of q
    without an admissible output state r_out grows without bound, so such
    an edge closes a bracket as well.

    Raises:
        NoRootInBracketError: If no sign change exists in the bracket.  The
            sweep is attached to the exception.
    """
    sweep = sweep_q(state, d, tolerances, bracket, points)
    if not _is_monotone([r for _, r in sweep]):
        logging.warning("Output squeezing is not monotone in q")

    def output_r(q):
        return _output_r(state, q, d, tolerances)

    def residual(log_q):
        return output_r(math.exp(log_q)) - target_r

    for q_lo, q_hi in _brackets(sweep, target_r, output_r):
        log_q = scipy.optimize.brentq(
            residual, math.log(q_lo), math.log(q_hi), xtol=1e-14
        )
        q = math.exp(log_q)
        deviation = abs(residual(log_q))
        if deviation > tolerances.target_r:
            raise NoRootInBracketError(
                "q={} misses r={} by {:.3e}".format(q, target_r, deviation),
                sweep,
            )
        logging.info("Tuned q = %.12g for r = %g", q, target_r)
        return q

    raise NoRootInBracketError(
        "No q in [{}, {}] reaches r = {}".format(
            bracket[0], bracket[1], target_r
        ),
        sweep,
    )


def nested_protocol(config: ProtocolConfig) -> typing.List[StageReport]:
    """Chain ``config.stages`` stages, tuning q per stage if requested.

    Raises:
        InvariantViolationError: If ε after stage k deviates from
            ε_in^(2^k).
    """
    if config.stages < 1:
        raise DomainError("At least one stage is required")

    tol = config.tolerances
    state = config.initial_state()
    eps_in = epsilon_from_cs(canonicalize(state)[0])

    reports = []
    copies = 1
    for k in range(1, config.stages + 1):
        q = config.q_for(k)
        tuned = q is None
        if tuned:
            q = tune_q(state, config.target_r, config.cutoff, tol)

        report = run_stage(
            state,
            q,
            config.cutoff,
            tol,
            stage=k,
            copies_in=copies,
            brute_force=config.brute_force,
            max_iters=config.max_iters,
            tuned=tuned,
        )

        expected = eps_in ** (2 ** k)
        deviation = abs(report.output.epsilon - expected)
        if not deviation <= 10 * tol.squaring * k * expected + tol.algebraic:
            raise InvariantViolationError(
                "Stage {}: epsilon = {} but eps_in^(2^{}) = {}".format(
                    k, report.output.epsilon, k, expected
                )
            )

        reports.append(report)
        state = report.output.state
        copies = report.copies_consumed

    return reports


class Figure3Row(typing.NamedTuple):
    eps_in: float
    N: int
    eps_out: float


class Figure4Row(typing.NamedTuple):
    T: float
    N: int
    purity: float
    eof: float


def figure3_data(
    eps_grid: typing.Sequence[float], n_max: int
) -> typing.List[Figure3Row]:
    """ε after N stages, ε_in^(2^N), for N = 1 … n_max."""
    return [
        Figure3Row(eps, n, eps ** (2 ** n))
        for eps in eps_grid
        for n in range(1, n_max + 1)
    ]


class GridRunner:
    """Evaluate independent grid points, in a process pool if jobs > 1."""

    def __init__(self, jobs: int = 1, logger=logging):
        self.jobs = jobs
        self.logger = logger

    def map(self, fn, items: typing.Sequence) -> typing.List:
        items = list(items)
        self.logger.info(
            "Evaluate %d grid points with %d worker(s)", len(items), self.jobs
        )
        if self.jobs <= 1 or len(items) <= 1:
            return [fn(item) for item in items]

        processes = min(self.jobs, len(items))
        with multiprocessing.Pool(processes=processes) as pool:
            # map keeps the order of the items
            return pool.map(fn, items)


def _figure4_point(args) -> typing.List[Figure4Row]:
    T, r, target_r, n_max, d, tolerances = args
    config = ProtocolConfig(
        initial=ChannelParametrization(r, T),
        stages=n_max,
        target_r=target_r,
        cutoff=d,
        tolerances=tolerances,
    )
    initial = summarize(config.initial_state(), tolerances)
    rows = [Figure4Row(T, 0, initial.purity, initial.eof)]
    for report in nested_protocol(config):
        rows.append(
            Figure4Row(
                T, report.stage, report.output.purity, report.output.eof
            )
        )
    return rows


def figure4_data(
    T_grid: typing.Sequence[float],
    n_max: int,
    r: float = DEFAULT_TARGET_R,
    target_r: float = DEFAULT_TARGET_R,
    d: int = DEFAULT_FOUR_MODE_CUTOFF,
    tolerances: Tolerances = Tolerances(),
    jobs: int = 1,
    logger=logging,
) -> typing.List[Figure4Row]:
    """Purity and entanglement of formation after N = 0 … n_max stages.

    q is tuned in every stage to keep the squeezing at ``target_r``.  Rows
    are ordered by (T, N).
    """
    runner = GridRunner(jobs, logger)
    points = [(T, r, target_r, n_max, d, tolerances) for T in T_grid]
    per_T = runner.map(_figure4_point, points)
    return sorted(
        (row for rows in per_T for row in rows), key=lambda row: (row.T, row.N)
    )
