"""De-Gaussification filters applied before Gaussification."""

__copyright__ = "Copyright (c) 2026, the gauss_distill developers"
__license__ = "BSD 3-Clause"

import functools
import math
import typing

import numpy as np

from . import fock_engine
from .configuration import FOUR_MODE_ENTRY_BUDGET, Tolerances
from .errors import DomainError, UnsupportedFockNumberError, ZeroWeightError
from .fock_engine import (
    FilterKind,
    FockArray,
    FockKind,
    ProjectionTarget,
    StateLike,
    WeightedState,
)


class TwoCopyFilterSpec:
    """Two-copy de-Gaussifier: Mach-Zehnder with Z = n − 1 in both arms.

    The second output port is projected on ⟨q| ∝ ⟨0|(a + q), q real.
    """

    filter_kind = FilterKind.N_MINUS_1

    def __init__(self, q: float):
        q = float(q)
        if q == 0 or not math.isfinite(q):
            raise DomainError(
                "q must be finite and non-zero, got {}".format(q)
            )
        self.q = q

    def __repr__(self):
        return "TwoCopyFilterSpec(q={!r})".format(self.q)

    def __eq__(self, other):
        return isinstance(other, TwoCopyFilterSpec) and other.q == self.q

    def __hash__(self):
        return hash(self.q)


def _two_mode(rho: FockArray):
    if rho.n_modes != 2:
        raise DomainError("Expected a two-mode state, got {}".format(rho))


def single_photon_subtract(
    rho: StateLike, tolerances: Tolerances = Tolerances()
) -> WeightedState:
    """ρ → ab ρ a†b†, unnormalized."""
    _two_mode(fock_engine.unpack(rho)[0])
    out = fock_engine.fock_filter(
        rho, 0, FilterKind.ANNIHILATE, tolerances=tolerances
    )
    return fock_engine.fock_filter(
        out, 1, FilterKind.ANNIHILATE, tolerances=tolerances
    )


def photon_subtraction_sigma(
    lam: float, T: float
) -> typing.Tuple[float, float]:
    """Closed-form (σ₁₁,₀₀, σ₁₀,₁₀) of a photon-subtracted lossy TMSV."""
    x = lam ** 2 * (1 - T) ** 2
    denominator = 1 - x ** 2
    return (
        2 * T * lam * (1 + 2 * x) / denominator,
        2 * T * (1 - T) * lam ** 2 * (2 + x) / denominator,
    )


def photon_subtraction_epsilon_ratio(lam: float, T: float) -> float:
    """ε_out/ε_in after photon subtraction; always ≥ 1."""
    x = lam ** 2 * (1 - T) ** 2
    return (2 + x) / (1 + 2 * x)


def local_gaussian_filter_tau(
    rho: StateLike, tau: float, tolerances: Tolerances = Tolerances()
) -> WeightedState:
    """Apply τ^n to both modes."""
    if not 0 < tau <= 1:
        raise DomainError("tau must be in (0, 1], got {}".format(tau))
    state, _ = fock_engine.unpack(rho)
    _two_mode(state)

    out = rho
    for mode in (0, 1):
        op = np.diag(tau ** np.arange(state.mode_dims[mode]))
        out = fock_engine.apply_operator(out, op, [mode], tolerances, "tau^n")
    return out


def n_plus_w_filter(
    rho: StateLike, w: float, tolerances: Tolerances = Tolerances()
) -> WeightedState:
    """Baseline de-Gaussifier Z = n + w on both modes."""
    _two_mode(fock_engine.unpack(rho)[0])
    out = fock_engine.fock_filter(
        rho, 0, FilterKind.N_PLUS_W, w, tolerances=tolerances
    )
    return fock_engine.fock_filter(
        out, 1, FilterKind.N_PLUS_W, w, tolerances=tolerances
    )


@functools.lru_cache(maxsize=64)
def two_copy_filter_kraus(q: float, d: int) -> np.ndarray:
    """Local map K[j, a, c] = ⟨j|_A ⟨q|_C U (n_A − 1)(n_C − 1) U |a, c⟩.

    The interferometer is evaluated with cutoff 2d − 1, so that no
    component of an input with a, c < d is lost between the beam
    splitters, and then restricted to j, a, c < d.
    """
    filter_spec = TwoCopyFilterSpec(q)
    big = 2 * d - 1
    u = fock_engine.beam_splitter_tensor(big).tensor.real
    z = np.arange(big) - 1.0

    arms = u * z[:, None, None, None] * z[None, :, None, None]
    # [j, c', a, c]
    mz = np.tensordot(u, arms, axes=([2, 3], [0, 1]))
    detection = ProjectionTarget.q_state(filter_spec.q).functional(big)
    kraus = np.tensordot(detection, mz, axes=([0], [1]))

    kraus = np.array(kraus[:d, :d, :d])
    kraus.setflags(write=False)
    return kraus


def two_copy_filter_expansion(q: float, d: int) -> np.ndarray:
    """Closed form of F = K†, returned as F[a, c, n] = ⟨a, c|F|n⟩.

    F|n⟩ = (q/4)(n − 1)(n − 4)|n, 0⟩ + (1/4)n(n − 5)|n, 1⟩
           − (1/4)√(n(n − 1)) (q√2|n − 2, 2⟩ + √6|n − 2, 3⟩)
    """
    f = np.zeros((d, d, d))
    for n in range(d):
        f[n, 0, n] = q / 4 * (n - 1) * (n - 4)
        f[n, 1, n] = n * (n - 5) / 4
        if n >= 2:
            lowered = math.sqrt(n * (n - 1)) / 4
            if d > 2:
                f[n - 2, 2, n] = -lowered * q * math.sqrt(2)
            if d > 3:
                f[n - 2, 3, n] = -lowered * math.sqrt(6)
    return f


def two_copy_filter_fock_action(n: int, q: float) -> FockArray:
    """F|n⟩ for the three lowest Fock states, as a two-mode vector (d = 4)."""
    vec = np.zeros((4, 4))
    if n == 0:
        vec[0, 0] = q
    elif n == 1:
        vec[1, 1] = -1.0
    elif n == 2:
        vec[2, 0] = -q / 2
        vec[2, 1] = -3 / 2
        vec[0, 2] = -q / 2
        vec[0, 3] = -math.sqrt(3) / 2
    else:
        raise UnsupportedFockNumberError(
            "Closed-form action only known for n < 3, got {}".format(n)
        )
    return FockArray(vec, FockKind.PURE)


def two_copy_degauss(
    rho_ab: StateLike,
    rho_cd: StateLike,
    q: typing.Union[float, TwoCopyFilterSpec],
    tolerances: Tolerances = Tolerances(),
    budget: int = FOUR_MODE_ENTRY_BUDGET,
) -> WeightedState:
    """Two-copy de-Gaussification of ρ_AB ⊗ ρ_CD.

    Alice interferes A with C and Bob B with D in identical Mach-Zehnder
    interferometers with n − 1 in every arm; C and D are projected on ⟨q|.
    A single combined weight is reported for both detections.

    Raises:
        ZeroWeightError: If the heralding outcome has vanishing weight.
        CutoffBudgetError: If ρ_AB ⊗ ρ_CD exceeds ``budget`` entries.
    """
    filter_spec = (
        q if isinstance(q, TwoCopyFilterSpec) else TwoCopyFilterSpec(q)
    )
    state_ab, weight_ab = fock_engine.unpack(rho_ab)
    state_cd, weight_cd = fock_engine.unpack(rho_cd)
    _two_mode(state_ab)
    _two_mode(state_cd)
    dims = set(state_ab.mode_dims) | set(state_cd.mode_dims)
    if len(dims) != 1:
        raise DomainError("Both copies must share one cutoff, got {}".format(
            sorted(dims)
        ))

    kraus = two_copy_filter_kraus(filter_spec.q, dims.pop())
    out = fock_engine.apply_two_copy_kraus(
        kraus, kraus, state_ab, state_cd, budget
    )

    ratio = out.trace() / (state_ab.trace() * state_cd.trace())
    if ratio < tolerances.weight_floor:
        raise ZeroWeightError(
            ratio, tolerances.weight_floor, "two-copy de-Gaussification"
        )
    return WeightedState(out, weight_ab * weight_cd * ratio)
