"""Covariance-matrix calculus of symmetric two-mode Gaussian states.

Quadratures are ordered (x_A, p_A, x_B, p_B) with x = (a + a†)/√2 and
p = (a − a†)/(i√2).  Covariance matrices use γ_jk = ⟨{Δr_j, Δr_k}⟩ so that
the vacuum has γ = 1.  A symmetric state has the block form::

    γ = | C   0   S   0 |
        | 0   C   0  -S |
        | S   0   C   0 |
        | 0  -S   0   C |
"""

__copyright__ = "Copyright (c) 2026, the gauss_distill developers"
__license__ = "BSD 3-Clause"

import typing

import numpy as np
import scipy.linalg
import scipy.special

from .configuration import Tolerances
from .errors import (
    DegenerateDecompositionError,
    DomainError,
    EpsilonUndefinedError,
    InadmissibleStateError,
    SingularOperationError,
    SymmetryViolationError,
)


class SymmetricGaussianState(typing.NamedTuple):
    #: quadrature variance
    C: float
    #: quadrature correlation (sign allowed)
    S: float

    @property
    def epr_variance(self) -> float:
        """C − |S|; the state is entangled iff this is below 1."""
        return self.C - abs(self.S)


class ChannelParametrization(typing.NamedTuple):
    #: two-mode squeezing constant
    r: float
    #: intensity transmittance of the (symmetric) lossy channel
    T: float

    @property
    def lam(self) -> float:
        return float(np.tanh(self.r))


class CovarianceMatrix:
    """Read-only 2N×2N real covariance matrix."""

    def __init__(self, entries):
        entries = np.array(entries, dtype=float)
        if (
            entries.ndim != 2
            or entries.shape[0] != entries.shape[1]
            or entries.shape[0] % 2
        ):
            raise DomainError(
                "Covariance matrix must be 2N x 2N, got shape {}".format(
                    entries.shape
                )
            )
        entries.setflags(write=False)
        self.entries = entries

    @property
    def n_modes(self) -> int:
        return self.entries.shape[0] // 2

    def __array__(self, dtype=None, copy=None):
        if copy:
            return np.array(self.entries, dtype=dtype, copy=True)
        return np.asarray(self.entries, dtype=dtype)

    def __repr__(self):
        return "CovarianceMatrix({})".format(self.entries.tolist())

    def min_uncertainty_eigenvalue(self) -> float:
        """Smallest eigenvalue of γ + iΩ (≥ 0 for physical states)."""
        omega = symplectic_form(self.n_modes)
        return float(
            scipy.linalg.eigvalsh(self.entries + 1j * omega).min()
        )

    def check(self, tolerances: Tolerances = Tolerances()):
        """Raise InadmissibleStateError unless γ is symmetric and γ + iΩ ⪰ 0.

        Returns self so that the call can be chained.
        """
        scale = max(1.0, float(np.abs(self.entries).max()))
        asym = float(np.abs(self.entries - self.entries.T).max())
        if asym > tolerances.algebraic * scale:
            raise InadmissibleStateError(
                "Covariance matrix is not symmetric (deviation {:.3e})".format(
                    asym
                )
            )
        min_eig = self.min_uncertainty_eigenvalue()
        if min_eig < -tolerances.positivity * scale:
            raise InadmissibleStateError(
                "gamma + i Omega has eigenvalue {:.3e} < 0".format(min_eig)
            )
        return self

    def max_distance(self, other) -> float:
        return float(np.abs(self.entries - _entries(other)).max())


class GaussianOperation(typing.NamedTuple):
    """Gaussian CP map given by the blocks of a 4N×4N covariance matrix Γ.

    Γ₁ acts on the output modes, Γ₂ on the input modes that are contracted
    with the state and Γ₁₂ couples them.
    """

    gamma1: np.ndarray
    gamma2: np.ndarray
    gamma12: np.ndarray

    def full(self) -> np.ndarray:
        return np.block(
            [[self.gamma1, self.gamma12], [self.gamma12.T, self.gamma2]]
        )

    def check(self, tolerances: Tolerances = Tolerances()):
        CovarianceMatrix(self.full()).check(tolerances)
        return self


def _entries(gamma) -> np.ndarray:
    if isinstance(gamma, CovarianceMatrix):
        return gamma.entries
    return np.asarray(gamma, dtype=float)


def symplectic_form(n_modes: int) -> np.ndarray:
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def vacuum_covariance(n_modes: int = 2) -> CovarianceMatrix:
    return CovarianceMatrix(np.eye(2 * n_modes))


def phase_flip_matrix(n_modes: int = 2) -> np.ndarray:
    """Σ = diag(1, −1, 1, −1, ...), i.e. p → −p on every mode."""
    return np.diag(np.tile([1.0, -1.0], n_modes))


def cs_from_rt(r: float, T: float) -> SymmetricGaussianState:
    """(C, S) of a TMSV with squeezing r sent through two loss channels T."""
    if r < 0:
        raise DomainError("r must be >= 0, got {}".format(r))
    if not 0 < T <= 1:
        raise DomainError("T must be in (0, 1], got {}".format(T))

    return SymmetricGaussianState(
        C=float(T * np.cosh(2 * r) + 1 - T), S=float(T * np.sinh(2 * r))
    )


def validate_state(
    state: SymmetricGaussianState, tolerances: Tolerances = Tolerances()
) -> SymmetricGaussianState:
    C, S = state
    if not (np.isfinite(C) and np.isfinite(S)):
        raise InadmissibleStateError("Non-finite state {}".format(state))
    if C < 1 - tolerances.positivity:
        raise InadmissibleStateError("C = {} < 1".format(C))
    if (C - S) * (C + S) < 1 - tolerances.positivity * max(1.0, C * C):
        raise InadmissibleStateError(
            "C^2 - S^2 = {} < 1".format((C - S) * (C + S))
        )
    return state


def is_entangled(state: SymmetricGaussianState) -> bool:
    return state.epr_variance < 1


def canonicalize(
    state: SymmetricGaussianState,
) -> typing.Tuple[SymmetricGaussianState, bool]:
    """Map S < 0 to S > 0 by a local phase flip.

    Returns:
        The canonical state and whether a flip was applied.
    """
    if state.S < 0:
        return SymmetricGaussianState(state.C, -state.S), True
    return state, False


def rt_from_cs(
    state: SymmetricGaussianState, tolerances: Tolerances = Tolerances()
) -> ChannelParametrization:
    """Invert :func:`cs_from_rt`.

    The state is canonicalised first (S → |S|).

    Raises:
        DegenerateDecompositionError: If C = 1, S = 0 or the state is
            separable, in which case no (r, T) with T > 0 exists.
        DomainError: If the decomposition gives T > 1.
    """
    validate_state(state, tolerances)
    (C, S), _ = canonicalize(state)

    if S == 0 or C - 1 <= tolerances.algebraic:
        raise DegenerateDecompositionError(
            "No channel decomposition for C = {}, S = {}".format(C, S)
        )
    if not is_entangled(state):
        raise DegenerateDecompositionError(
            "Separable state (C - |S| = {}) has no decomposition".format(
                C - S
            )
        )

    T = (S * S - (C - 1) ** 2) / (2 * (C - 1))
    if T > 1:
        if T - 1 > tolerances.algebraic * max(1.0, C):
            raise DomainError(
                "Effective transmittance T = {} exceeds 1".format(T)
            )
        T = 1.0

    # equivalent to tanh 2r = 2S(C−1)/(S² + (C−1)²) but stable for large r
    r = 0.5 * np.arcsinh(S / T)

    return ChannelParametrization(r=float(r), T=float(T))


def epsilon_from_cs(state: SymmetricGaussianState) -> float:
    """ε = (C² − S² − 1)/(2S), equal to (1 − T)·tanh r."""
    C, S = state
    if S == 0:
        raise EpsilonUndefinedError("epsilon is undefined for S = 0")
    return float(((C - S) * (C + S) - 1) / (2 * S))


def purity(
    state: SymmetricGaussianState, tolerances: Tolerances = Tolerances()
) -> float:
    validate_state(state, tolerances)
    C, S = state
    # det γ = (C² − S²)²
    return float(1.0 / ((C - S) * (C + S)))


def purity_closed_form(r: float, eps: float) -> float:
    """Purity as function of the squeezing r and ε."""
    return float(
        1.0
        / (
            1
            - 2 * eps ** 2
            - 2 * eps ** 2 * np.cosh(2 * r)
            + 2 * eps * np.sinh(2 * r)
        )
    )


def eof_symmetric(state: SymmetricGaussianState) -> float:
    """Entanglement of formation in ebits.

    Function of the EPR variance δ = C − |S| only::

        E_f = c₊ log₂ c₊ − c₋ log₂ c₋,   c± = (δ^(−1/2) ± δ^(1/2))² / 4
    """
    delta = state.epr_variance
    if delta >= 1:
        return 0.0
    if delta <= 0:
        raise InadmissibleStateError(
            "EPR variance {} is not positive".format(delta)
        )

    c_plus = (delta ** -0.5 + delta ** 0.5) ** 2 / 4
    c_minus = (delta ** -0.5 - delta ** 0.5) ** 2 / 4
    return float(
        (
            scipy.special.xlogy(c_plus, c_plus)
            - scipy.special.xlogy(c_minus, c_minus)
        )
        / np.log(2)
    )


def von_neumann_entropy(state: SymmetricGaussianState) -> float:
    """Entropy (bits) from the symplectic eigenvalue ν = √(C² − S²).

    Both symplectic eigenvalues of a symmetric state are equal, so the
    entropy only depends on the purity P = 1/ν².
    """
    validate_state(state)
    C, S = state
    nu = np.sqrt(max(1.0, (C - S) * (C + S)))
    plus = (nu + 1) / 2
    minus = (nu - 1) / 2
    return float(
        2
        * (
            scipy.special.xlogy(plus, plus)
            - scipy.special.xlogy(minus, minus)
        )
        / np.log(2)
    )


def logarithmic_negativity(state: SymmetricGaussianState) -> float:
    # smallest symplectic eigenvalue of the partial transpose is C − |S|
    return float(max(0.0, -np.log2(state.epr_variance)))


def covariance_from_cs(state: SymmetricGaussianState) -> CovarianceMatrix:
    C, S = state
    return CovarianceMatrix(
        [
            [C, 0, S, 0],
            [0, C, 0, -S],
            [S, 0, C, 0],
            [0, -S, 0, C],
        ]
    )


def state_from_covariance(gamma, atol: float = 1e-8) -> SymmetricGaussianState:
    """Read (C, S) off a two-mode covariance matrix of symmetric form.

    Raises:
        SymmetryViolationError: If γ deviates from the symmetric block
            pattern by more than ``atol``.
    """
    g = _entries(gamma)
    if g.shape != (4, 4):
        raise DomainError("Expected a 4x4 covariance matrix")

    state = SymmetricGaussianState(
        C=float(np.trace(g) / 4), S=float((g[0, 2] - g[1, 3]) / 2)
    )
    deviation = float(np.abs(g - covariance_from_cs(state).entries).max())
    if deviation > atol:
        raise SymmetryViolationError({"block_pattern": deviation})

    return state


def tmsv_covariance(r: float) -> CovarianceMatrix:
    return covariance_from_cs(cs_from_rt(r, 1.0))


def lossy_channel(gamma, T: float) -> CovarianceMatrix:
    """γ → Tγ + (1 − T)·1, the same loss applied to every mode."""
    if not 0 <= T <= 1:
        raise DomainError("T must be in [0, 1], got {}".format(T))
    g = _entries(gamma)
    return CovarianceMatrix(T * g + (1 - T) * np.eye(g.shape[0]))


def tmsv_pair_operation(
    s: float, transmittance: float = 1.0, n_modes: int = 2
) -> GaussianOperation:
    """Gaussian operation built from one TMSV(s) Choi block per mode.

    With ``transmittance`` = 1 this is the local symmetric Gaussian filter of
    :func:`symmetric_gaussian_filter`.  For s → ∞ it approaches the identity
    channel, or the pure-loss channel when ``transmittance`` < 1.
    """
    if s < 0:
        raise DomainError("s must be >= 0, got {}".format(s))
    if not 0 <= transmittance <= 1:
        raise DomainError(
            "transmittance must be in [0, 1], got {}".format(transmittance)
        )

    c = np.cosh(2 * s)
    eye = np.eye(2 * n_modes)
    return GaussianOperation(
        gamma1=(transmittance * c + 1 - transmittance) * eye,
        gamma2=c * eye,
        gamma12=np.sqrt(transmittance)
        * np.sinh(2 * s)
        * phase_flip_matrix(n_modes),
    )


def gaussian_cp_map(
    op: GaussianOperation, gamma, tolerances: Tolerances = Tolerances()
) -> CovarianceMatrix:
    """γ′ = Γ₁ − Γ₁₂ [Γ₂ + ΣγΣ]⁻¹ Γ₁₂ᵀ.

    Raises:
        SingularOperationError: If Γ₂ + ΣγΣ is not invertible.
        InadmissibleStateError: If the output violates γ′ + iΩ ⪰ 0.
    """
    g = _entries(gamma)
    sigma = phase_flip_matrix(g.shape[0] // 2)
    m = op.gamma2 + sigma @ g @ sigma.T

    if np.linalg.cond(m) > 1 / np.finfo(float).eps:
        raise SingularOperationError(
            "Gamma_2 + Sigma gamma Sigma is singular; the operation cannot"
            " act on this state"
        )
    try:
        x = np.linalg.solve(m, op.gamma12.T)
    except np.linalg.LinAlgError as e:
        raise SingularOperationError(str(e))

    out = op.gamma1 - op.gamma12 @ x
    # symmetrise away roundoff of the solve
    return CovarianceMatrix((out + out.T) / 2).check(tolerances)


def symmetric_gaussian_filter(
    state: SymmetricGaussianState, s: float
) -> SymmetricGaussianState:
    """Apply the local Gaussian filter with squeezing s on both modes."""
    if s < 0:
        raise DomainError("s must be >= 0, got {}".format(s))
    C, S = state
    c2 = np.cosh(2 * s)
    denominator = (C + c2) ** 2 - S ** 2
    return SymmetricGaussianState(
        C=float(
            (C * (c2 ** 2 + 1) + ((C - S) * (C + S) + 1) * c2) / denominator
        ),
        S=float(S * np.sinh(2 * s) ** 2 / denominator),
    )
