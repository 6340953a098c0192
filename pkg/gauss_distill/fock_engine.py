"""Truncated Fock-space numerics.

States and operators are stored as tensors with one axis per mode.  A pure
state of N modes has N axes, density matrices and operators have 2N axes,
first the N ket (output) axes, then the N bra (input) axes, so that the
element ρ_{jk,mn} = ⟨j,k|ρ|m,n⟩ of a two-mode density matrix is
``rho.tensor[j, k, m, n]``.

Modes are numbered Alice first, copy-major: (A, B) for one copy and
(A, B, C, D) for two copies, where A and C are held by Alice and B and D by
Bob.

Operators act on the affected modes only (by tensor contraction), full
multimode matrices are never built.
"""

__copyright__ = "Copyright (c) 2026, the gauss_distill developers"
__license__ = "BSD 3-Clause"

import enum
import functools
import logging
import math
import typing

import numpy as np
import scipy.linalg
import scipy.special

from .configuration import FOUR_MODE_ENTRY_BUDGET, Tolerances
from .errors import (
    CutoffBudgetError,
    CutoffTooSmallError,
    DomainError,
    EpsilonUndefinedError,
    InadmissibleStateError,
    ZeroWeightError,
)
from .gaussian_core import CovarianceMatrix


#: Upper limit of loss branches summed by :func:`lossy_tmsv`.
MAX_LOSS_BRANCHES = 5000


class FockKind(enum.Enum):
    PURE = "pure"
    OPERATOR = "operator"
    DENSITY = "density"


class FockArray:
    """Immutable truncated multimode tensor."""

    def __init__(self, tensor, kind: FockKind):
        tensor = np.array(tensor, dtype=complex)
        if kind is not FockKind.PURE and tensor.ndim % 2:
            raise DomainError(
                "{} tensor needs an even number of axes".format(kind.value)
            )
        tensor.setflags(write=False)
        self.tensor = tensor
        self.kind = kind

    @property
    def n_modes(self) -> int:
        if self.kind is FockKind.PURE:
            return self.tensor.ndim
        return self.tensor.ndim // 2

    @property
    def mode_dims(self) -> typing.Tuple[int, ...]:
        return self.tensor.shape[: self.n_modes]

    @property
    def cutoff(self) -> int:
        return max(self.mode_dims) if self.mode_dims else 1

    def __repr__(self):
        return "FockArray(kind={}, mode_dims={})".format(
            self.kind.value, self.mode_dims
        )

    def matrix(self) -> np.ndarray:
        """Flattened vector (pure) or square matrix (operator, density)."""
        size = int(np.prod(self.mode_dims))
        if self.kind is FockKind.PURE:
            return self.tensor.reshape(size)
        return self.tensor.reshape(size, size)

    def to_density(self) -> "FockArray":
        if self.kind is FockKind.DENSITY:
            return self
        if self.kind is FockKind.OPERATOR:
            raise DomainError("An operator has no density matrix")
        return FockArray(
            np.tensordot(self.tensor, self.tensor.conj(), axes=0),
            FockKind.DENSITY,
        )

    def trace(self) -> float:
        if self.kind is FockKind.PURE:
            return float(np.vdot(self.tensor, self.tensor).real)
        return float(np.trace(self.matrix()).real)

    def normalized(self) -> "FockArray":
        tr = self.trace()
        if tr <= 0:
            raise ZeroWeightError(tr, 0.0, "normalization")
        if self.kind is FockKind.PURE:
            return FockArray(self.tensor / np.sqrt(tr), self.kind)
        return FockArray(self.tensor / tr, self.kind)

    def element(
        self, ket: typing.Sequence[int], bra: typing.Sequence[int]
    ) -> complex:
        """⟨ket|ρ|bra⟩ (for a pure state of the projector |ψ⟩⟨ψ|)."""
        if self.kind is FockKind.PURE:
            return complex(
                self.tensor[tuple(ket)] * np.conj(self.tensor[tuple(bra)])
            )
        return complex(self.tensor[tuple(ket) + tuple(bra)])

    def populations(self) -> np.ndarray:
        """Diagonal of the state, shaped like ``mode_dims``."""
        if self.kind is FockKind.PURE:
            return np.abs(self.tensor) ** 2
        if self.kind is FockKind.OPERATOR:
            raise DomainError("Populations of an operator are undefined")
        return np.diagonal(self.matrix()).real.reshape(self.mode_dims)

    def leakage(self) -> float:
        """Largest normalized population of the top Fock level of a mode."""
        pops = self.populations()
        total = pops.sum()
        if total <= 0:
            return 0.0
        top = [
            np.take(pops, dim - 1, axis=mode).sum()
            for mode, dim in enumerate(self.mode_dims)
        ]
        return float(max(top) / total) if top else 0.0

    def purity(self) -> float:
        if self.kind is FockKind.PURE:
            return 1.0
        m = self.matrix()
        return float(np.vdot(m.conj().T, m).real / self.trace() ** 2)


class WeightedState(typing.NamedTuple):
    #: unnormalized conditional density matrix (or pure state)
    rho: FockArray
    #: accumulated success weight
    weight: float = 1.0

    def normalized(self) -> FockArray:
        return self.rho.normalized()


StateLike = typing.Union[FockArray, WeightedState]


def unpack(state: StateLike) -> typing.Tuple[FockArray, float]:
    if isinstance(state, WeightedState):
        return state.rho, state.weight
    return state, 1.0


def _operator_tensor(op) -> np.ndarray:
    if isinstance(op, FockArray):
        if op.kind is not FockKind.OPERATOR:
            raise DomainError("Expected an operator, got {}".format(op))
        return op.tensor
    return np.asarray(op)


def _apply_on_axes(op: np.ndarray, tensor: np.ndarray, axes) -> np.ndarray:
    """Contract the input axes of ``op`` with ``axes`` of ``tensor``.

    ``op`` has k output axes followed by k input axes, the output axes
    replace ``axes`` in place.
    """
    k = len(axes)
    out = np.tensordot(op, tensor, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(out, list(range(k)), list(axes))


def _apply(op: np.ndarray, state: FockArray, modes) -> FockArray:
    modes = list(modes)
    if state.kind is FockKind.PURE:
        return FockArray(_apply_on_axes(op, state.tensor, modes), state.kind)

    n = state.n_modes
    tensor = _apply_on_axes(op, state.tensor, modes)
    if state.kind is FockKind.DENSITY:
        tensor = _apply_on_axes(op.conj(), tensor, [n + m for m in modes])
    return FockArray(tensor, state.kind)


def _check_weight(
    before: float, after: float, weight: float, floor: float, what: str
) -> float:
    ratio = after / before if before > 0 else 0.0
    if ratio < floor:
        raise ZeroWeightError(ratio, floor, what)
    return weight * ratio


# ----------------------------------------------------------------------------
# single-mode matrices and states


def annihilation(d: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, d, dtype=float)), k=1)


def creation(d: int) -> np.ndarray:
    return annihilation(d).T


def number(d: int) -> np.ndarray:
    return np.diag(np.arange(d, dtype=float))


def fock_state(ns: typing.Sequence[int], d: int) -> FockArray:
    tensor = np.zeros((d,) * len(ns), dtype=complex)
    tensor[tuple(ns)] = 1.0
    return FockArray(tensor, FockKind.PURE)


def vacuum(n_modes: int, d: int) -> FockArray:
    return fock_state([0] * n_modes, d)


def tensor_product(*arrays: FockArray) -> FockArray:
    """Tensor product, mode order follows the argument order."""
    kinds = {a.kind for a in arrays}
    if len(kinds) != 1:
        raise DomainError("Cannot mix kinds {} in a product".format(kinds))
    kind = kinds.pop()

    tensor = arrays[0].tensor
    n = arrays[0].n_modes
    for a in arrays[1:]:
        tensor = np.tensordot(tensor, a.tensor, axes=0)
        if kind is not FockKind.PURE:
            m = a.n_modes
            # (ket1, bra1, ket2, bra2) -> (ket1, ket2, bra1, bra2)
            order = (
                list(range(n))
                + list(range(2 * n, 2 * n + m))
                + list(range(n, 2 * n))
                + list(range(2 * n + m, 2 * n + 2 * m))
            )
            tensor = tensor.transpose(order)
        n += a.n_modes

    return FockArray(tensor, kind)


def _check_lambda(lam: float):
    if not 0 <= lam < 1:
        raise DomainError("lambda must be in [0, 1), got {}".format(lam))


def _check_cutoff(d: int):
    if d < 2:
        raise DomainError("Cutoff must be at least 2, got {}".format(d))


def tmsv(
    lam: float, d: int, tolerances: Tolerances = Tolerances()
) -> FockArray:
    """√(1 − λ²) Σ_{n<d} λⁿ |n, n⟩ (not renormalized after truncation).

    Raises:
        CutoffTooSmallError: If the population of the top level,
            (1 − λ²)λ^(2(d−1)), exceeds the leakage bound.
    """
    _check_lambda(lam)
    _check_cutoff(d)

    n = np.arange(d)
    amplitudes = np.sqrt(1 - lam ** 2) * lam ** n
    leakage = float(amplitudes[-1] ** 2)
    if leakage > tolerances.leakage_bound:
        raise CutoffTooSmallError(
            leakage, tolerances.leakage_bound, "TMSV(lambda={})".format(lam)
        )
    logging.debug(
        "TMSV lambda=%g d=%d: leakage %.3e, norm deficit %.3e",
        lam,
        d,
        leakage,
        lam ** (2 * d),
    )

    return FockArray(np.diag(amplitudes), FockKind.PURE)


def truncated_tmsv(lam: float, d: int) -> FockArray:
    """(|00⟩ + λ|11⟩)/√(1 + λ²)."""
    _check_cutoff(d)
    tensor = np.zeros((d, d), dtype=complex)
    tensor[0, 0] = 1.0
    tensor[1, 1] = lam
    return FockArray(tensor / np.sqrt(1 + lam ** 2), FockKind.PURE)


def lossy_tmsv(
    lam: float, T: float, d: int, tail: float = 1e-18
) -> FockArray:
    """TMSV(λ) after loss T on both modes, every element below d exact.

    Each pair (k_A, k_B) of lost photon numbers is a separate branch of the
    mixture.  The amplitudes of a branch are evaluated in closed form, so
    truncating the result introduces no error in the retained elements.
    Branches are summed until the probability of losing more photons
    drops below ``tail``.
    """
    _check_lambda(lam)
    _check_cutoff(d)
    if not 0 <= T <= 1:
        raise DomainError("T must be in [0, 1], got {}".format(T))
    if lam == 0 or T == 0:
        return vacuum(2, d).to_density()

    n_branches = int(math.ceil(math.log(tail) / (2 * math.log(lam)))) + d
    if n_branches > MAX_LOSS_BRANCHES:
        logging.warning(
            "lambda=%g needs %d loss branches, truncating to %d",
            lam,
            n_branches,
            MAX_LOSS_BRANCHES,
        )
        n_branches = MAX_LOSS_BRANCHES

    j = np.arange(d)[None, :]
    rho = np.zeros((d,) * 4)
    for s in range(-(d - 1), d):
        # branches with k_A − k_B = s map |n,n⟩ onto |j, j + s⟩
        k_b = np.arange(max(0, -s), n_branches)[:, None]
        k_a = k_b + s
        n = k_a + j
        k = j + s
        valid = (k >= 0) & (k < d)
        log_amp = (
            0.5 * np.log1p(-(lam ** 2))
            + n * np.log(lam)
            + 0.5
            * (
                2 * scipy.special.gammaln(n + 1)
                - scipy.special.gammaln(k_a + 1)
                - scipy.special.gammaln(j + 1)
                - scipy.special.gammaln(k_b + 1)
                - scipy.special.gammaln(np.clip(k, 0, None) + 1)
            )
            + 0.5 * scipy.special.xlogy(2 * j + s, T)
            + 0.5 * scipy.special.xlogy(k_a + k_b, 1 - T)
        )
        amp = np.exp(np.where(valid, log_amp, -np.inf))

        jv = np.flatnonzero(valid[0])
        block = amp[:, jv].T @ amp[:, jv]
        rho[
            jv[:, None], jv[:, None] + s, jv[None, :], jv[None, :] + s
        ] = block

    return FockArray(rho, FockKind.DENSITY)


# ----------------------------------------------------------------------------
# channels and unitaries


def loss_kraus(T: float, d: int) -> np.ndarray:
    """Stacked amplitude-damping Kraus operators K_k[out, in], k < d."""
    if not 0 <= T <= 1:
        raise DomainError("T must be in [0, 1], got {}".format(T))
    n = np.arange(d)[None, :]
    k = np.arange(d)[:, None]
    coeff = np.sqrt(
        scipy.special.comb(n, k)
        * np.exp(
            scipy.special.xlogy(np.clip(n - k, 0, None), T)
            + scipy.special.xlogy(k, 1 - T)
        )
    )
    coeff = np.where(n >= k, coeff, 0.0)

    kraus = np.zeros((d, d, d))
    for kk in range(d):
        cols = np.arange(kk, d)
        kraus[kk, cols - kk, cols] = coeff[kk, kk:]
    return kraus


def apply_loss(rho: StateLike, T: float, mode: int) -> FockArray:
    """Amplitude-damping channel with transmittance T on one mode."""
    rho, _ = unpack(rho)
    rho = rho.to_density()
    kraus = loss_kraus(T, rho.mode_dims[mode])

    n = rho.n_modes
    t = np.moveaxis(rho.tensor, (mode, n + mode), (0, 1))
    t = np.einsum("kab,bc...,kdc->ad...", kraus, t, kraus)
    return FockArray(np.moveaxis(t, (0, 1), (mode, n + mode)), rho.kind)


@functools.lru_cache(maxsize=None)
def beam_splitter_tensor(d: int) -> FockArray:
    """⟨n′, m′|U|n, m⟩ of the balanced beam splitter a → (a + c)/√2.

    U|n, m⟩ = (a† + c†)ⁿ (a† − c†)ᵐ / √(2ⁿ⁺ᵐ n! m!) |0, 0⟩, components with
    n′ or m′ ≥ d are dropped.
    """
    fact = scipy.special.factorial(np.arange(2 * d))
    u = np.zeros((d, d, d, d))
    for n in range(d):
        for m in range(d):
            norm = np.sqrt(2.0 ** (n + m) * fact[n] * fact[m])
            for i in range(n + 1):
                for l in range(m + 1):
                    out_a = i + l
                    out_c = n + m - out_a
                    if out_a >= d or out_c >= d:
                        continue
                    u[out_a, out_c, n, m] += (
                        scipy.special.comb(n, i)
                        * scipy.special.comb(m, l)
                        * (-1) ** (m - l)
                        * np.sqrt(fact[out_a] * fact[out_c])
                        / norm
                    )
    return FockArray(u, FockKind.OPERATOR)


def beam_splitter(
    state: StateLike, modes: typing.Tuple[int, int]
) -> FockArray:
    state, _ = unpack(state)
    dims = {state.mode_dims[m] for m in modes}
    if len(dims) != 1:
        raise DomainError("Beam splitter modes must share their cutoff")
    return _apply(beam_splitter_tensor(dims.pop()).tensor, state, modes)


def displacement_operator(
    alpha: complex, d: int, padding: typing.Optional[int] = None
) -> np.ndarray:
    """D(α) = exp(α a† − α* a), exponentiated on a padded space.

    The generator is truncated at d + padding so that the returned d×d
    block is not affected by the truncation.
    """
    padding = max(20, d) if padding is None else padding
    a = annihilation(d + padding)
    generator = alpha * a.T - np.conj(alpha) * a
    return scipy.linalg.expm(generator)[:d, :d]


def displace(state: StateLike, mode: int, alpha: complex) -> FockArray:
    state, _ = unpack(state)
    return _apply(
        displacement_operator(alpha, state.mode_dims[mode]), state, [mode]
    )


# ----------------------------------------------------------------------------
# filters and measurements


class FilterKind(enum.Enum):
    N_MINUS_1 = "n_minus_1"
    N_PLUS_W = "n_plus_w"
    ANNIHILATE = "annihilate"
    CREATE = "create"


def filter_operator(kind: FilterKind, d: int, w: float = 0.0) -> FockArray:
    if kind is FilterKind.N_MINUS_1:
        op = number(d) - np.eye(d)
    elif kind is FilterKind.N_PLUS_W:
        # (1 − w) a†a + w a a† = n + w
        op = number(d) + w * np.eye(d)
    elif kind is FilterKind.ANNIHILATE:
        op = annihilation(d)
    elif kind is FilterKind.CREATE:
        op = creation(d)
    else:
        raise DomainError("Unknown filter {}".format(kind))
    return FockArray(op, FockKind.OPERATOR)


def apply_operator(
    state: StateLike,
    op,
    modes: typing.Sequence[int],
    tolerances: Tolerances = Tolerances(),
    what: str = "operator",
) -> WeightedState:
    """Apply a raw (unnormalized) operator, ρ → ZρZ†, tracking the weight.

    Raises:
        ZeroWeightError: If the trace ratio falls below the weight floor.
    """
    rho, weight = unpack(state)
    out = _apply(_operator_tensor(op), rho, modes)
    weight = _check_weight(
        rho.trace(), out.trace(), weight, tolerances.weight_floor, what
    )
    return WeightedState(out, weight)


def fock_filter(
    rho: StateLike,
    mode: int,
    kind: FilterKind,
    w: float = 0.0,
    tolerances: Tolerances = Tolerances(),
) -> WeightedState:
    """Apply a Fock-state filter to one mode, see :class:`FilterKind`."""
    base, _ = unpack(rho)
    op = filter_operator(kind, base.mode_dims[mode], w)
    return apply_operator(rho, op, [mode], tolerances, kind.value)


class ProjectionTarget(typing.NamedTuple):
    """Functional a mode is projected on: ⟨0| or ⟨0|(a + q) = q⟨0| + ⟨1|."""

    q: typing.Optional[float] = None

    @classmethod
    def vacuum(cls):
        return cls(None)

    @classmethod
    def q_state(cls, q: float):
        return cls(float(q))

    def functional(self, d: int) -> np.ndarray:
        f = np.zeros(d)
        if self.q is None:
            f[0] = 1.0
        else:
            f[0] = self.q
            f[1] = 1.0
        return f


def project(
    rho: StateLike,
    mode: int,
    target: ProjectionTarget,
    tolerances: Tolerances = Tolerances(),
) -> WeightedState:
    """Project one mode on ``target`` and remove it from the tensor."""
    state, weight = unpack(rho)
    f = target.functional(state.mode_dims[mode])

    if state.kind is FockKind.PURE:
        out = np.tensordot(f, state.tensor, axes=([0], [mode]))
    elif state.kind is FockKind.DENSITY:
        n = state.n_modes
        out = np.tensordot(f, state.tensor, axes=([0], [mode]))
        # the bra axis of ``mode`` moved one position to the left
        out = np.tensordot(f.conj(), out, axes=([0], [n - 1 + mode]))
    else:
        raise DomainError("Cannot project an operator")

    out = FockArray(out, state.kind)
    weight = _check_weight(
        state.trace(),
        out.trace(),
        weight,
        tolerances.weight_floor,
        "projection",
    )
    return WeightedState(out, weight)


def partial_trace(rho: StateLike, modes: typing.Sequence[int]) -> FockArray:
    """Trace out ``modes``, the remaining modes keep their order."""
    rho, _ = unpack(rho)
    rho = rho.to_density()
    tensor = rho.tensor
    n = rho.n_modes
    for mode in sorted(modes, reverse=True):
        tensor = np.trace(tensor, axis1=mode, axis2=n + mode)
        n -= 1
    return FockArray(tensor, FockKind.DENSITY)


def expectation(
    state: StateLike, factors: typing.Sequence[typing.Tuple[int, np.ndarray]]
) -> complex:
    """⟨O₁ O₂ ⋯⟩ of a product of single-mode factors (mode, matrix).

    The state is normalized first.
    """
    state, _ = unpack(state)
    if state.kind is FockKind.OPERATOR:
        raise DomainError("Expectation needs a state")

    tensor = state.tensor
    for mode, op in reversed(list(factors)):
        tensor = _apply_on_axes(np.asarray(op), tensor, [mode])

    if state.kind is FockKind.PURE:
        value = np.vdot(state.tensor, tensor)
    else:
        size = int(np.prod(state.mode_dims))
        value = np.trace(tensor.reshape(size, size))
    return complex(value / state.trace())


def covariance_of(rho: StateLike) -> CovarianceMatrix:
    """Covariance matrix γ_jk = ⟨{Δr_j, Δr_k}⟩ of a state.

    Built from the moments ⟨a_j⟩, ⟨a_j a_k⟩ and ⟨a_j† a_k⟩, using
    ⟨a a†⟩ = ⟨a† a⟩ + 1 so that the truncation of a a† at the top level does
    not enter.
    """
    state, _ = unpack(rho)
    n = state.n_modes
    a = [annihilation(d) for d in state.mode_dims]

    alpha = np.array([expectation(state, [(j, a[j])]) for j in range(n)])
    m = np.empty((n, n), dtype=complex)
    nn = np.empty((n, n), dtype=complex)
    for j in range(n):
        for k in range(n):
            if j == k:
                m[j, k] = expectation(state, [(j, a[j] @ a[j])])
                nn[j, k] = expectation(state, [(j, a[j].T @ a[j])])
            else:
                m[j, k] = expectation(state, [(j, a[j]), (k, a[k])])
                nn[j, k] = expectation(state, [(j, a[j].T), (k, a[k])])
    m -= np.outer(alpha, alpha)
    nn -= np.outer(alpha.conj(), alpha)

    eye = np.eye(n)
    gamma = np.empty((2 * n, 2 * n))
    gamma[0::2, 0::2] = 2 * m.real + 2 * nn.real + eye
    gamma[1::2, 1::2] = -2 * m.real + 2 * nn.real + eye
    gamma[0::2, 1::2] = 2 * m.imag + 2 * nn.imag
    gamma[1::2, 0::2] = gamma[0::2, 1::2].T
    return CovarianceMatrix(gamma)


def epsilon_from_rho(
    rho: StateLike, tolerances: Tolerances = Tolerances()
) -> float:
    """ε = ρ₁₀,₁₀ / ρ₁₁,₀₀ of a two-mode symmetric state."""
    state, _ = unpack(rho)
    rho11 = state.element((1, 1), (0, 0)).real
    if abs(rho11) <= tolerances.weight_floor * state.trace():
        raise EpsilonUndefinedError("rho_11,00 vanishes")
    return float(state.element((1, 0), (1, 0)).real / rho11)


def trace_distance(rho: StateLike, sigma: StateLike) -> float:
    """½‖ρ − σ‖₁ of the (unmodified) input matrices."""
    rho, _ = unpack(rho)
    sigma, _ = unpack(sigma)
    diff = rho.to_density().matrix() - sigma.to_density().matrix()
    return float(0.5 * np.abs(scipy.linalg.eigvalsh(diff)).sum())


def check_density(
    rho: StateLike, tolerances: Tolerances = Tolerances()
) -> FockArray:
    """Raise InadmissibleStateError unless ρ is a valid density matrix."""
    rho, _ = unpack(rho)
    m = rho.to_density().matrix()

    herm = float(np.abs(m - m.conj().T).max())
    if herm > tolerances.hermiticity:
        raise InadmissibleStateError(
            "Density matrix is not Hermitian (deviation {:.3e})".format(herm)
        )
    min_eig = float(scipy.linalg.eigvalsh((m + m.conj().T) / 2).min())
    if min_eig < -tolerances.positivity:
        raise InadmissibleStateError(
            "Density matrix has eigenvalue {:.3e}".format(min_eig)
        )
    tr = float(np.trace(m).real)
    if not 0 < tr <= 1 + tolerances.positivity:
        raise InadmissibleStateError("Trace {} outside (0, 1]".format(tr))

    return rho


def apply_two_copy_kraus(
    kraus_a: np.ndarray,
    kraus_b: np.ndarray,
    rho_ab: StateLike,
    rho_cd: StateLike,
    budget: int = FOUR_MODE_ENTRY_BUDGET,
) -> FockArray:
    """Apply local two-into-one Kraus maps to ρ_AB ⊗ ρ_CD.

    ``kraus_a[j, a, c]`` maps Alice's modes (A, C) to her output mode and
    ``kraus_b[l, b, e]`` maps Bob's modes (B, D) to his.  The 4-mode
    product is never formed; the contraction runs through tensors with at
    most d⁷ entries.

    Raises:
        CutoffBudgetError: If ρ_AB ⊗ ρ_CD would exceed ``budget`` entries.
    """
    rho_ab, _ = unpack(rho_ab)
    rho_cd, _ = unpack(rho_cd)
    rho_ab = rho_ab.to_density()
    rho_cd = rho_cd.to_density()

    entries = rho_ab.tensor.size * rho_cd.tensor.size
    if entries > budget:
        raise CutoffBudgetError(
            "rho x rho has {} entries, budget is {}; lower the cutoff".format(
                entries, budget
            )
        )
    logging.debug("Two-copy contraction over %d entries", entries)

    ka = np.asarray(kraus_a)
    kb = np.asarray(kraus_b)

    # [j, c, b, a', b']
    t = np.tensordot(ka, rho_ab.tensor, axes=([1], [0]))
    # [j, b, a', b', e, c', e']
    t = np.tensordot(t, rho_cd.tensor, axes=([1], [0]))
    # [j, a', b', c', e', l]
    t = np.tensordot(t, kb, axes=([1, 4], [1, 2]))
    # [j, b', e', l, j']
    t = np.tensordot(t, ka.conj(), axes=([1, 3], [1, 2]))
    # [j, l, j', l']
    t = np.tensordot(t, kb.conj(), axes=([1, 2], [1, 2]))

    return FockArray(t, FockKind.DENSITY)
