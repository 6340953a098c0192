"""Iterative Gaussification and its asymptotic Gaussian state.

One Gaussification step takes two copies ρ_AB ⊗ ρ_CD, mixes A with C and
B with D on balanced beam splitters and keeps the outcome where C and D
are found in vacuum.  Iterating the step converges to a Gaussian state that
is fixed by a few low-order elements of the first output (the σ matrix).
"""

__copyright__ = "Copyright (c) 2026, the gauss_distill developers"
__license__ = "BSD 3-Clause"

import logging
import typing

import numpy as np
import scipy.optimize

from . import fock_engine
from .configuration import FOUR_MODE_ENTRY_BUDGET, Tolerances
from .errors import (
    DomainError,
    EpsilonUndefinedError,
    NoConvergenceError,
    SymmetryViolationError,
    ZeroWeightError,
)
from .fock_engine import FockArray, StateLike, WeightedState
from .gaussian_core import SymmetricGaussianState, cs_from_rt


#: Elements of σ that vanish for symmetric states.
ZERO_PATTERN = {
    "s20_00": ((2, 0), (0, 0)),
    "s02_00": ((0, 2), (0, 0)),
    "s00_20": ((0, 0), (2, 0)),
    "s00_02": ((0, 0), (0, 2)),
    "s10_01": ((1, 0), (0, 1)),
    "s01_10": ((0, 1), (1, 0)),
}


class SigmaElements(typing.NamedTuple):
    s10_10: float
    s01_01: float
    s11_00: float
    s00_11: float
    #: magnitude of each element of :data:`ZERO_PATTERN`
    zero_pattern: typing.Dict[str, float] = {}


class ConvergenceReport(typing.NamedTuple):
    #: last normalized state
    state: FockArray
    iterations: int
    #: success weight of each step (inputs normalized)
    weights: typing.Tuple[float, ...]
    #: trace distance between successive normalized states
    distances: typing.Tuple[float, ...]
    #: largest zero-pattern/symmetry violation after each step
    symmetry_violations: typing.Tuple[float, ...]
    #: number of input copies consumed per output copy
    copies_consumed: int
    converged: bool


def gaussification_kraus(d: int) -> np.ndarray:
    """Local Kraus map K[j, a, c] = ⟨j|_A ⟨0|_C U_BS |a, c⟩.

    Equals √binom(j, a) / 2^(j/2) on a + c = j.
    """
    return np.array(fock_engine.beam_splitter_tensor(d).tensor[:, 0].real)


def gaussification_step(
    rho: StateLike,
    tolerances: Tolerances = Tolerances(),
    budget: int = FOUR_MODE_ENTRY_BUDGET,
) -> WeightedState:
    """One Gaussification step on two identical copies of ``rho``.

    The returned weight is the probability of the vacuum outcome on C and
    D times the squared weight of the input copies.

    Raises:
        ZeroWeightError: If the vacuum outcome has vanishing probability.
        CutoffBudgetError: If ρ⊗ρ exceeds ``budget`` entries.
    """
    state, weight = fock_engine.unpack(rho)
    if state.n_modes != 2:
        raise DomainError("Gaussification needs a two-mode state")

    kraus = gaussification_kraus(state.mode_dims[0])
    out = fock_engine.apply_two_copy_kraus(kraus, kraus, state, state, budget)

    ratio = out.trace() / state.trace() ** 2
    if ratio < tolerances.weight_floor:
        raise ZeroWeightError(ratio, tolerances.weight_floor, "Gaussification")

    return WeightedState(out, weight * weight * ratio)


def zero_pattern_violations(rho1: StateLike) -> typing.Dict[str, float]:
    """Magnitudes of the σ elements that vanish for symmetric states.

    Also lists the asymmetries |σ₁₀,₁₀ − σ₀₁,₀₁| and |σ₁₁,₀₀ − σ₀₀,₁₁|.
    """
    state, _ = fock_engine.unpack(rho1)
    rho00 = state.element((0, 0), (0, 0)).real
    if rho00 <= 0:
        raise ZeroWeightError(rho00, 0.0, "sigma normalization")

    d = min(state.mode_dims)
    magnitudes = {
        name: abs(state.element(ket, bra)) / rho00
        for name, (ket, bra) in ZERO_PATTERN.items()
        if max(ket + bra) < d
    }
    magnitudes["s10_10-s01_01"] = (
        abs(state.element((1, 0), (1, 0)) - state.element((0, 1), (0, 1)))
        / rho00
    )
    magnitudes["s11_00-s00_11"] = (
        abs(state.element((1, 1), (0, 0)) - state.element((0, 0), (1, 1)))
        / rho00
    )
    return magnitudes


def sigma_from_rho1(
    rho1: StateLike, tolerances: Tolerances = Tolerances()
) -> SigmaElements:
    """σ = ρ⁽¹⁾/ρ⁽¹⁾₀₀,₀₀ restricted to the elements that matter.

    Raises:
        SymmetryViolationError: If an element of the symmetric zero
            pattern exceeds ``tolerances.zero_pattern``.
    """
    state, _ = fock_engine.unpack(rho1)
    magnitudes = zero_pattern_violations(state)
    violations = {
        k: v for k, v in magnitudes.items() if v > tolerances.zero_pattern
    }
    if violations:
        raise SymmetryViolationError(violations)

    rho00 = state.element((0, 0), (0, 0)).real
    return SigmaElements(
        s10_10=state.element((1, 0), (1, 0)).real / rho00,
        s01_01=state.element((0, 1), (0, 1)).real / rho00,
        s11_00=state.element((1, 1), (0, 0)).real / rho00,
        s00_11=state.element((0, 0), (1, 1)).real / rho00,
        zero_pattern=magnitudes,
    )


def epsilon_from_sigma(
    sig: SigmaElements, tolerances: Tolerances = Tolerances()
) -> float:
    if abs(sig.s11_00) <= tolerances.zero_pattern:
        raise EpsilonUndefinedError("sigma_11,00 vanishes")
    return sig.s10_10 / sig.s11_00


def _lossy_tmsv_ratios(lam: float, T: float) -> np.ndarray:
    """(σ₁₀,₁₀, σ₁₁,₀₀) of the Gaussian state TMSV(λ) after loss T."""
    rho = fock_engine.lossy_tmsv(lam, T, 2)
    rho00 = rho.element((0, 0), (0, 0)).real
    return np.array(
        [
            rho.element((1, 0), (1, 0)).real / rho00,
            rho.element((1, 1), (0, 0)).real / rho00,
        ]
    )


def asymptotic_state(
    sig: SigmaElements, tolerances: Tolerances = Tolerances()
) -> SymmetricGaussianState:
    """The Gaussian state reached by iterating Gaussification.

    It is the member (λ′, T′) of the lossy-TMSV family whose element
    ratios σ₁₀,₁₀ and σ₁₁,₀₀ match ``sig``.  The ratio σ₁₀,₁₀/σ₁₁,₀₀ of that
    family is (1 − T′)λ′, which gives the starting point::

        ε = s₁/s₂,   λ′ = s₂(1 − ε²) + ε,   T′ = s₂(1 − ε²)/λ′

    The match is verified against the Fock elements and refined with a 2-D
    root finder if the residual exceeds ``tolerances.root``.

    Raises:
        NoConvergenceError: If no admissible (λ′ < 1, 0 < T′ ≤ 1) Gaussian
            state matches σ.
    """
    s2 = 0.5 * (sig.s11_00 + sig.s00_11)
    s1 = 0.5 * (sig.s10_10 + sig.s01_01)
    sign = -1.0 if s2 < 0 else 1.0
    s2 = abs(s2)

    if s1 < 0:
        if s1 < -tolerances.zero_pattern:
            raise NoConvergenceError(
                "sigma_10,10 = {} < 0 does not belong to a Gaussian"
                " state".format(s1)
            )
        s1 = 0.0
    if s2 <= tolerances.zero_pattern:
        if s1 > tolerances.zero_pattern:
            raise NoConvergenceError(
                "sigma_11,00 vanishes while sigma_10,10 = {}".format(s1)
            )
        return SymmetricGaussianState(1.0, 0.0)

    eps = s1 / s2
    if s2 >= 1 / (1 + eps):
        raise NoConvergenceError(
            "No Gaussian state with sigma_11,00 = {} and epsilon = {}".format(
                s2, eps
            )
        )
    lam = s2 * (1 - eps ** 2) + eps
    T = min(1.0, s2 * (1 - eps ** 2) / lam)

    target = np.array([s1, s2])
    residual = np.abs(_lossy_tmsv_ratios(lam, T) - target).max()
    logging.debug(
        "Asymptotic state seed lambda'=%.12g T'=%.12g, residual %.3e",
        lam,
        T,
        residual,
    )

    if residual > tolerances.root * max(1.0, s2):
        solution = scipy.optimize.root(
            lambda x: _lossy_tmsv_ratios(*x) - target,
            x0=[lam, T],
            tol=tolerances.root,
        )
        lam, T = solution.x
        residual = (
            np.abs(solution.fun).max() if solution.success else np.inf
        )
        if (
            not solution.success
            or residual > tolerances.root * max(1.0, s2)
            or not 0 <= lam < 1
            or not 0 < T <= 1 + tolerances.algebraic
        ):
            raise NoConvergenceError(
                "Root finder failed: {} (residual {:.3e})".format(
                    solution.message, residual
                )
            )
        T = min(1.0, T)

    state = cs_from_rt(float(np.arctanh(lam)), float(T))
    return SymmetricGaussianState(state.C, sign * state.S)


def iterate_to_convergence(
    rho: StateLike,
    max_iters: int = 12,
    tol: float = 1e-6,
    tolerances: Tolerances = Tolerances(),
    budget: int = FOUR_MODE_ENTRY_BUDGET,
) -> ConvergenceReport:
    """Repeat :func:`gaussification_step` until the state stops changing.

    Stops when the trace distance of successive normalized states drops
    below ``tol``.  Running out of iterations is reported, not raised.
    """
    current, _ = fock_engine.unpack(rho)
    current = current.normalized()

    weights = []
    distances = []
    violations = []
    converged = False
    for i in range(1, max_iters + 1):
        step = gaussification_step(current, tolerances, budget)
        following = step.rho.normalized()

        weights.append(step.weight)
        distances.append(fock_engine.trace_distance(following, current))
        violations.append(max(zero_pattern_violations(following).values()))
        logging.debug(
            "Gaussification iteration %d: weight %.6g, distance %.3e",
            i,
            step.weight,
            distances[-1],
        )

        current = following
        if distances[-1] < tol:
            converged = True
            break

    if not converged:
        logging.warning(
            "Gaussification did not converge within %d iterations"
            " (last distance %.3e)",
            max_iters,
            distances[-1],
        )

    return ConvergenceReport(
        state=current,
        iterations=len(weights),
        weights=tuple(weights),
        distances=tuple(distances),
        symmetry_violations=tuple(violations),
        copies_consumed=2 ** len(weights),
        converged=converged,
    )
