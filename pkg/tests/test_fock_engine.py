import numpy as np
import pytest

from gauss_distill import fock_engine as fe
from gauss_distill import gaussian_core as gc
from gauss_distill.configuration import Tolerances
from gauss_distill.errors import (
    CutoffBudgetError,
    CutoffTooSmallError,
    DomainError,
    InadmissibleStateError,
    ZeroWeightError,
)
from gauss_distill.fock_engine import FilterKind, FockArray, FockKind


def pure(amplitudes: dict, d: int) -> FockArray:
    """Normalized two-mode pure state from {(n, m): amplitude}."""
    tensor = np.zeros((d, d), dtype=complex)
    for index, amplitude in amplitudes.items():
        tensor[index] = amplitude
    return FockArray(tensor, FockKind.PURE).normalized()


class TestStates:
    def test_tmsv_vacuum(self):
        state = fe.tmsv(0.0, 4)
        assert state.element((0, 0), (0, 0)) == pytest.approx(1.0)
        assert state.trace() == pytest.approx(1.0)

    def test_tmsv_photon_number(self):
        state = fe.tmsv(0.5, 10)
        n1 = fe.expectation(state, [(0, fe.number(10))]).real
        assert n1 == pytest.approx(0.25 / 0.75, rel=1e-4)

    def test_tmsv_leakage_bound(self):
        with pytest.raises(CutoffTooSmallError) as e:
            fe.tmsv(0.9, 2)
        assert e.value.leakage > e.value.bound

    def test_tmsv_covariance(self):
        lam = np.tanh(0.5)
        gamma = fe.covariance_of(fe.tmsv(lam, 25).normalized())
        expected = gc.covariance_from_cs(gc.cs_from_rt(0.5, 1.0))
        assert gamma.max_distance(expected) < 1e-6

    def test_truncated_tmsv(self):
        bell = fe.truncated_tmsv(1.0, 3)
        assert bell.trace() == pytest.approx(1.0)
        assert bell.tensor[0, 0] == pytest.approx(1 / np.sqrt(2))
        assert bell.tensor[1, 1] == pytest.approx(1 / np.sqrt(2))
        assert np.allclose(
            fe.truncated_tmsv(0.0, 3).tensor, fe.vacuum(2, 3).tensor
        )

    def test_immutable(self):
        state = fe.vacuum(2, 3)
        with pytest.raises(ValueError):
            state.tensor[0, 0] = 2

    def test_tensor_product_order(self):
        state = fe.tensor_product(
            fe.fock_state([1], 3).to_density(),
            fe.fock_state([2], 3).to_density(),
        )
        assert state.element((1, 2), (1, 2)) == pytest.approx(1.0)
        assert state.mode_dims == (3, 3)


class TestLoss:
    def test_identity(self, lossy_state):
        out = fe.apply_loss(lossy_state, 1.0, 0)
        assert np.allclose(out.tensor, lossy_state.tensor)

    def test_truncated_state(self, truncated_lossy_state):
        rho = truncated_lossy_state
        assert rho.element((0, 0), (0, 0)).real == pytest.approx(0.625)
        assert rho.element((1, 1), (0, 0)).real == pytest.approx(0.25)
        assert rho.element((1, 0), (1, 0)).real == pytest.approx(0.125)
        assert rho.element((0, 1), (0, 1)).real == pytest.approx(0.125)
        assert rho.element((1, 1), (1, 1)).real == pytest.approx(0.125)
        fe.check_density(rho)

    def test_lossy_tmsv_matches_channel(self):
        lam, T, d = 0.4, 0.6, 8
        rho = fe.tmsv(lam, d).to_density()
        rho = fe.apply_loss(fe.apply_loss(rho, T, 0), T, 1)
        exact = fe.lossy_tmsv(lam, T, d)
        # loss only moves population downwards, so low elements agree
        for ket, bra in [((0, 0), (0, 0)), ((1, 1), (0, 0)), ((1, 0), (1, 0))]:
            assert rho.element(ket, bra) == pytest.approx(
                exact.element(ket, bra), abs=1e-6
            )

    def test_lossy_tmsv_covariance(self):
        rho = fe.lossy_tmsv(np.tanh(1.0), 0.5, 30).normalized()
        gamma = fe.covariance_of(rho)
        assert gamma.max_distance(
            gc.covariance_from_cs(gc.SymmetricGaussianState(2.38110, 1.81343))
        ) < 1e-4
        assert gamma.max_distance(
            gc.covariance_from_cs(gc.cs_from_rt(1.0, 0.5))
        ) < 1e-8

    def test_lossless_limit(self):
        lam = 0.3
        rho = fe.lossy_tmsv(lam, 1.0, 6)
        assert np.allclose(rho.tensor, fe.tmsv(lam, 6).to_density().tensor)

    def test_loss_kraus_is_trace_preserving(self):
        kraus = fe.loss_kraus(0.3, 6)
        completeness = np.einsum("kab,kac->bc", kraus, kraus)
        assert np.allclose(completeness, np.eye(6))


class TestBeamSplitter:
    def test_vacuum(self):
        out = fe.beam_splitter(fe.vacuum(2, 3), (0, 1))
        assert np.allclose(out.tensor, fe.vacuum(2, 3).tensor)

    def test_single_photon(self):
        out = fe.beam_splitter(fe.fock_state([1, 0], 3), (0, 1))
        expected = pure({(1, 0): 1, (0, 1): 1}, 3)
        assert np.allclose(out.tensor, expected.tensor)

    def test_hong_ou_mandel(self):
        out = fe.beam_splitter(fe.fock_state([1, 1], 3), (0, 1))
        expected = pure({(2, 0): 1, (0, 2): -1}, 3)
        assert np.allclose(out.tensor, expected.tensor)

    def test_density_matches_pure(self):
        state = pure({(0, 0): 0.6, (1, 0): 0.3, (2, 1): 0.5}, 4)
        from_pure = fe.beam_splitter(state, (0, 1)).to_density()
        from_density = fe.beam_splitter(state.to_density(), (0, 1))
        assert np.allclose(from_pure.tensor, from_density.tensor)


class TestFilters:
    def test_n_minus_1_removes_single_photon(self):
        rho = fe.fock_state([1], 3).to_density()
        with pytest.raises(ZeroWeightError) as e:
            fe.fock_filter(rho, 0, FilterKind.N_MINUS_1)
        assert e.value.weight == 0

    def test_n_minus_1_on_vacuum(self):
        rho = fe.vacuum(1, 3).to_density()
        out = fe.fock_filter(rho, 0, FilterKind.N_MINUS_1)
        assert out.weight == pytest.approx(1.0)
        assert out.rho.element((0,), (0,)) == pytest.approx(1.0)

    def test_annihilate_and_create(self):
        rho = fe.fock_state([2], 4).to_density()
        lowered = fe.fock_filter(rho, 0, FilterKind.ANNIHILATE)
        assert lowered.weight == pytest.approx(2.0)
        raised = fe.fock_filter(rho, 0, FilterKind.CREATE)
        assert raised.weight == pytest.approx(3.0)

    def test_weights_accumulate(self):
        rho = fe.fock_state([1], 3).to_density()
        out = fe.fock_filter(rho, 0, FilterKind.N_PLUS_W, w=0.5)
        out = fe.fock_filter(out, 0, FilterKind.N_PLUS_W, w=0.5)
        assert out.weight == pytest.approx(1.5 ** 4)


class TestProjection:
    def test_vacuum_projection(self):
        out = fe.project(
            fe.vacuum(2, 3).to_density(), 1, fe.ProjectionTarget.vacuum()
        )
        assert out.weight == pytest.approx(1.0)
        assert out.rho.n_modes == 1

    def test_q_state_on_vacuum(self):
        out = fe.project(
            fe.vacuum(2, 3).to_density(), 0, fe.ProjectionTarget.q_state(0.7)
        )
        assert out.weight == pytest.approx(0.49)

    def test_q_state_on_superposition(self):
        q = 0.7
        state = pure({(0, 0): 1, (1, 0): 1}, 3)
        out = fe.project(state, 0, fe.ProjectionTarget.q_state(q))
        assert out.rho.tensor[0] == pytest.approx((q + 1) / np.sqrt(2))

        density = fe.project(
            state.to_density(), 0, fe.ProjectionTarget.q_state(q)
        )
        assert density.weight == pytest.approx(out.weight)
        assert density.rho.element((0,), (0,)) == pytest.approx(
            (q + 1) ** 2 / 2
        )

    def test_displacement_identity(self):
        """⟨0|D†(q) a D(q) = ⟨0|(a + q)."""
        q, d = 0.5, 6
        big = 30
        dq = fe.displacement_operator(q, big)
        shifted = dq.conj().T @ fe.annihilation(big) @ dq
        assert np.allclose(
            shifted[0, :d],
            fe.ProjectionTarget.q_state(q).functional(d),
            atol=1e-10,
        )


class TestAnalysis:
    def test_partial_trace_of_bell_state(self):
        reduced = fe.partial_trace(fe.truncated_tmsv(1.0, 2), [1])
        assert np.allclose(reduced.matrix(), np.eye(2) / 2)

    def test_partial_trace_nothing(self, lossy_state):
        assert np.allclose(
            fe.partial_trace(lossy_state, []).tensor, lossy_state.tensor
        )

    def test_reduced_purity(self):
        lam = 0.4
        reduced = fe.partial_trace(fe.tmsv(lam, 20), [0])
        assert reduced.purity() == pytest.approx(
            (1 - lam ** 2) / (1 + lam ** 2), rel=1e-8
        )

    def test_vacuum_covariance(self):
        assert np.allclose(fe.covariance_of(fe.vacuum(2, 3)), np.eye(4))

    def test_epsilon(self, lossy_state, truncated_lossy_state):
        assert fe.epsilon_from_rho(lossy_state) == pytest.approx(
            0.5 * np.tanh(1.0), rel=1e-10
        )
        assert fe.epsilon_from_rho(lossy_state) == pytest.approx(
            0.38080, abs=1e-5
        )
        assert fe.epsilon_from_rho(truncated_lossy_state) == pytest.approx(0.5)
        assert fe.epsilon_from_rho(fe.tmsv(0.5, 8)) == 0

    def test_trace_distance(self, lossy_state):
        assert fe.trace_distance(lossy_state, lossy_state) == pytest.approx(
            0.0, abs=1e-14
        )
        one = fe.fock_state([1, 0], 2)
        other = fe.fock_state([0, 1], 2)
        assert fe.trace_distance(one, other) == pytest.approx(1.0)

    def test_check_density(self):
        bad = FockArray(np.diag([1.5, -0.5]), FockKind.DENSITY)
        with pytest.raises(InadmissibleStateError):
            fe.check_density(bad)

    def test_leakage(self):
        state = fe.tmsv(0.5, 4, Tolerances(leakage_bound=1.0))
        assert state.leakage() == pytest.approx(
            0.75 * 0.5 ** 6 / (1 - 0.5 ** 8), rel=1e-12
        )

    def test_operator_has_no_density(self):
        with pytest.raises(DomainError):
            fe.filter_operator(FilterKind.CREATE, 3).to_density()


class TestTwoCopyContraction:
    def test_identity_map_gives_product(self):
        d = 3
        # K[j, a, c] = δ_ja δ_c0 keeps mode A and projects C on vacuum
        kraus = np.zeros((d, d, d))
        kraus[np.arange(d), np.arange(d), 0] = 1.0
        rho = fe.lossy_tmsv(0.3, 0.7, d)
        vac = fe.vacuum(2, d).to_density()
        out = fe.apply_two_copy_kraus(kraus, kraus, rho, vac)
        assert np.allclose(out.tensor, rho.tensor)

    def test_budget(self):
        rho = fe.lossy_tmsv(0.3, 0.7, 4)
        kraus = np.zeros((4, 4, 4))
        with pytest.raises(CutoffBudgetError):
            fe.apply_two_copy_kraus(kraus, kraus, rho, rho, budget=1000)

    def test_tolerances_are_forwarded(self):
        rho = fe.fock_state([1], 3).to_density()
        # (n + w)² = 1e-12 on |1⟩
        with pytest.raises(ZeroWeightError):
            fe.fock_filter(
                rho,
                0,
                FilterKind.N_PLUS_W,
                w=-0.999999,
                tolerances=Tolerances(weight_floor=1e-3),
            )
