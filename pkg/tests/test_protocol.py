import functools
import math

import numpy as np
import pytest

from gauss_distill import gaussian_core as gc
from gauss_distill import fock_engine, protocol, validation
from gauss_distill.configuration import Tolerances
from gauss_distill.errors import (
    CutoffTooSmallError,
    InvariantViolationError,
    NoConvergenceError,
    NoRootInBracketError,
)
from gauss_distill.gaussian_core import ChannelParametrization


def analytic_q(r, T, target_r):
    """q for which a stage on (r, T) outputs squeezing target_r.

    The de-Gaussified state has σ₁₁,₀₀ = g²/q² with g = λT/(1 − x),
    x = λ²(1 − T)², and the output ε is the squared input ε.
    """
    lam = np.tanh(r)
    x = lam ** 2 * (1 - T) ** 2
    g = lam * T / (1 - x)
    eps_out = ((1 - T) * lam) ** 2
    s2 = (np.tanh(target_r) - eps_out) / (1 - eps_out ** 2)
    return g / np.sqrt(s2)


def state_with_epsilon(eps, r=1.0):
    return gc.cs_from_rt(r, 1 - eps / np.tanh(r))


class TestSummary:
    def test_lossy(self):
        summary = protocol.summarize(gc.cs_from_rt(1.0, 0.5))
        assert summary.r == pytest.approx(1.0)
        assert summary.T == pytest.approx(0.5)
        assert summary.epsilon == pytest.approx(0.38080, abs=1e-5)
        assert summary.purity == pytest.approx(0.41998, abs=1e-5)

    def test_vacuum_has_no_decomposition(self):
        summary = protocol.summarize(gc.SymmetricGaussianState(1.0, 0.0))
        assert math.isnan(summary.r)
        assert math.isnan(summary.epsilon)
        assert summary.purity == pytest.approx(1.0)
        assert summary.eof == 0.0

    def test_q_for(self):
        config = protocol.ProtocolConfig(
            ChannelParametrization(1.0, 0.5), stages=3, q_per_stage=(0.5,)
        )
        assert config.q_for(3) == 0.5
        config = config._replace(q_per_stage=(0.5, 1.0, 2.0))
        assert config.q_for(2) == 1.0
        assert config._replace(q_per_stage=None).q_for(1) is None


@pytest.mark.slow
class TestStage:
    def test_epsilon_is_squared(self):
        report = protocol.run_stage(gc.cs_from_rt(1.0, 0.5), 1.0, 6)
        assert report.output.epsilon == pytest.approx(
            (0.5 * np.tanh(1.0)) ** 2, rel=1e-9
        )
        assert report.output.epsilon == pytest.approx(0.14501, abs=1e-5)
        assert report.copies_consumed == 4
        assert report.weight == pytest.approx(
            report.degauss_weight * report.gaussification_weight
        )
        assert not report.tuned

    def test_output_is_admissible_and_entangled(self):
        for T in (0.1, 0.4, 0.8):
            state = gc.cs_from_rt(1.0, T)
            q = analytic_q(1.0, T, 1.0)
            out = protocol.run_stage(state, q, 6).output.state
            gc.validate_state(out)
            assert gc.is_entangled(out)

    def test_pure_input(self):
        report = protocol.run_stage(gc.cs_from_rt(1.0, 1.0), 1.0, 6)
        assert report.output.epsilon == pytest.approx(0.0, abs=1e-10)
        assert report.output.purity == pytest.approx(1.0, abs=1e-10)

    def test_negative_correlation(self):
        state = gc.cs_from_rt(0.8, 0.6)
        flipped = gc.SymmetricGaussianState(state.C, -state.S)
        plain = protocol.run_stage(state, 1.0, 5).output
        mirrored = protocol.run_stage(flipped, 1.0, 5).output
        assert mirrored.C == pytest.approx(plain.C)
        assert mirrored.S == pytest.approx(-plain.S)

    def test_inadmissible_q(self):
        # σ₁₁,₀₀ of the de-Gaussified state exceeds any Gaussian value
        with pytest.raises(NoConvergenceError):
            protocol.run_stage(gc.cs_from_rt(1.0, 0.7), 0.1, 6)

    def test_brute_force(self):
        report = protocol.run_stage(
            gc.cs_from_rt(0.1, 0.8), 1.0, 6, brute_force=True, max_iters=8
        )
        check = report.brute_force
        assert check.covariance_distance < 1e-4
        assert report.copies_consumed == 2 * 2 ** check.iterations
        assert 0 < check.weight <= report.weight

    def test_brute_force_enforces_leakage(self):
        with pytest.raises(CutoffTooSmallError):
            protocol.run_stage(
                gc.cs_from_rt(1.5, 0.9),
                1.0,
                4,
                Tolerances(leakage_bound=1e-8),
                brute_force=True,
                max_iters=3,
            )


class TestBrackets:
    @staticmethod
    def output_r(q):
        # undefined below q = 0.5, diverging at the edge and falling after
        return math.nan if q <= 0.5 else 0.1 / (q - 0.5)

    def sweep(self, qs):
        return [(q, self.output_r(q)) for q in qs]

    def test_edge_closes_bracket(self):
        sweep = self.sweep([0.1, 0.3, 0.7, 1.0, 2.0])
        brackets = list(protocol._brackets(sweep, 1.0, self.output_r))
        assert len(brackets) == 1
        q_lo, q_hi = brackets[0]
        assert 0.5 < q_lo < 0.6 < q_hi == 0.7
        assert self.output_r(q_lo) > 1.0

    def test_sign_change_between_defined_points(self):
        sweep = self.sweep([0.1, 0.52, 0.7, 1.0])
        brackets = list(protocol._brackets(sweep, 1.0, self.output_r))
        assert brackets == [(0.52, 0.7)]

    def test_no_bracket_above_target(self):
        sweep = self.sweep([0.1, 0.3, 0.55, 0.58])
        assert list(protocol._brackets(sweep, 1.0, self.output_r)) == []


@pytest.mark.slow
class TestTuning:
    @pytest.mark.parametrize("T", [0.5, 0.6])
    def test_reaches_target(self, T):
        state = gc.cs_from_rt(1.0, T)
        q = protocol.tune_q(state, 1.0, 6)
        assert q == pytest.approx(analytic_q(1.0, T, 1.0), rel=1e-6)

        report = protocol.run_stage(state, q, 6)
        assert report.output.r == pytest.approx(1.0, abs=1e-6)

    def test_root_next_to_inadmissible_q(self):
        # the coarse sweep has no defined point above the target
        state = gc.cs_from_rt(1.0, 0.5)
        sweep = protocol.sweep_q(state, 6)
        defined = [r for _, r in sweep if not math.isnan(r)]
        assert max(defined) < 1.0
        assert any(math.isnan(r) for _, r in sweep)

        q = protocol.tune_q(state, 1.0, 6)
        assert q == pytest.approx(0.561201, rel=1e-5)

    def test_sweep_is_monotone(self):
        sweep = protocol.sweep_q(gc.cs_from_rt(1.0, 0.5), 6, points=9)
        rs = [r for _, r in sweep if not math.isnan(r)]
        assert len(rs) >= 2
        assert protocol._is_monotone(rs)

    def test_no_root(self):
        with pytest.raises(NoRootInBracketError) as e:
            protocol.tune_q(
                gc.cs_from_rt(1.0, 0.5),
                1.0,
                6,
                bracket=(10.0, 100.0),
                points=4,
            )
        assert len(e.value.sweep) == 4


@pytest.mark.slow
class TestNested:
    def test_squaring_sequence(self):
        config = protocol.ProtocolConfig(
            initial=state_with_epsilon(0.5), stages=3, cutoff=6
        )
        reports = protocol.nested_protocol(config)
        eps = [report.output.epsilon for report in reports]
        assert eps == pytest.approx([0.25, 0.0625, 0.00390625], rel=1e-6)
        for report in reports:
            assert report.tuned
            assert report.output.r == pytest.approx(1.0, abs=1e-6)
        assert [r.copies_consumed for r in reports] == [4, 16, 64]

    def test_lossless_stays_lossless(self):
        config = protocol.ProtocolConfig(
            initial=ChannelParametrization(0.8, 1.0),
            stages=2,
            q_per_stage=(1.0,),
            cutoff=5,
        )
        for report in protocol.nested_protocol(config):
            assert report.output.epsilon == pytest.approx(0.0, abs=1e-10)

    def test_purity_grows_per_stage(self):
        config = protocol.ProtocolConfig(
            initial=ChannelParametrization(1.0, 0.5), stages=3, cutoff=6
        )
        purities = [protocol.summarize(config.initial_state()).purity]
        purities += [r.output.purity for r in protocol.nested_protocol(config)]
        assert np.all(np.diff(purities) > 0)

    def test_squaring_violation_is_detected(self):
        config = protocol.ProtocolConfig(
            initial=ChannelParametrization(1.0, 0.5),
            stages=1,
            q_per_stage=(1.0,),
            cutoff=6,
            tolerances=Tolerances(squaring=-1.0, algebraic=0.0),
        )
        with pytest.raises(InvariantViolationError):
            protocol.nested_protocol(config)


class TestFigureData:
    def test_figure3(self):
        rows = protocol.figure3_data([0.1 * k for k in range(1, 10)], 4)
        assert len(rows) == 36
        assert protocol.Figure3Row(0.5, 2, 0.0625) in rows
        for row in rows:
            assert row.eps_out == pytest.approx(row.eps_in ** (2 ** row.N))

    def test_grid_runner_keeps_order(self):
        runner = protocol.GridRunner(jobs=2)
        assert runner.map(math.sqrt, [1.0, 4.0, 9.0, 16.0]) == [
            1.0,
            2.0,
            3.0,
            4.0,
        ]

    def test_grid_runner_raises_worker_error(self):
        # every cutoff is far too small for lambda = 0.9
        tmsv = functools.partial(fock_engine.tmsv, 0.9)
        with pytest.raises(CutoffTooSmallError) as e:
            protocol.GridRunner(jobs=2).map(tmsv, [2, 3, 4])
        assert e.value.bound == Tolerances().leakage_bound

    @pytest.mark.slow
    def test_figure4(self):
        rows = protocol.figure4_data([0.5, 1.0], 2, d=6, jobs=2)
        assert [(row.T, row.N) for row in rows] == [
            (0.5, 0),
            (0.5, 1),
            (0.5, 2),
            (1.0, 0),
            (1.0, 1),
            (1.0, 2),
        ]
        lossy = [row for row in rows if row.T == 0.5]
        assert lossy[0].eof < lossy[1].eof < lossy[2].eof
        assert lossy[0].purity < lossy[1].purity < lossy[2].purity

        eof_r1 = gc.eof_symmetric(gc.cs_from_rt(1.0, 1.0))
        assert eof_r1 == pytest.approx(validation.TMSV_EOF_R1, rel=1e-10)
        for row in rows[3:]:
            assert row.purity == pytest.approx(1.0, abs=1e-4)
            assert row.eof == pytest.approx(eof_r1, abs=1e-4)
