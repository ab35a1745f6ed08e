import numpy as np
import pytest

from phrealize import (
    LtiSystem, brake_squeal_instance, build_t0, check_skew_case_conditions,
    feedthrough_reduce, ph_to_lti, random_ph_realization, realize_general, realize_skew_case,
    scramble,
)
from phrealize.errors import (
    ConditionsFailed, ConditionsFailedAtStep, InputError, NoStabilizingZ, NotPsd, NotStable,
    StorageInfeasible,
)

from conftest import lmi_lambda_max, lmi_scale, tf


class TestFeedthrough:
    def test_skew(self):
        s = LtiSystem(-np.eye(2), np.eye(2), np.eye(2), [[0.0, 1.0], [-1.0, 0.0]])
        fs = feedthrough_reduce(s)
        assert fs.k0 == 2 and fs.S2.shape == (0, 0)
        np.testing.assert_array_equal(fs.V0, np.eye(2))

    def test_definite(self):
        s = LtiSystem(-np.eye(2), np.eye(2), np.eye(2), [[2.0, 1.0], [0.0, 3.0]])
        fs = feedthrough_reduce(s)
        assert fs.k0 == 0
        np.testing.assert_allclose(fs.S2, 0.5 * (s.D + s.D.T))

    def test_diag(self):
        s = LtiSystem(-np.eye(2), np.eye(2), np.eye(2), np.diag([0.0, 1.0]))
        fs = feedthrough_reduce(s)
        assert fs.k0 == 1
        np.testing.assert_allclose(np.abs(fs.V0), np.eye(2))
        np.testing.assert_allclose(fs.S2, [[1.0]])
        blk = 0.5 * fs.V0.T @ s.S @ fs.V0
        np.testing.assert_allclose(blk, np.diag([0.0, 1.0]), atol=1e-15)


class TestSkewConditions:
    def test_symmetric(self, rng):
        B = rng.standard_normal((4, 2))
        v = check_skew_case_conditions(B, B.T)
        assert v.ok and v.witnesses["lambda_min_C1B1"] > 0

    def test_kernel_mismatch(self):
        v = check_skew_case_conditions(np.array([[1.0], [0.0]]), np.array([[0.0, 1.0]]))
        assert not v.ok
        assert "lemT_a_rank" in v.failed

    def test_kernel_mismatch_two_inputs(self):
        B = np.array([[1.0, 0.0], [0.0, 0.0]])
        C = np.array([[1.0, 0.0], [1.0, 0.0]])
        v = check_skew_case_conditions(B, C)
        assert not v.kernel_ok

    def test_negative(self):
        v = check_skew_case_conditions(np.array([[1.0], [0.0]]), np.array([[-1.0, 0.0]]))
        assert v.failed == ["lemT_a_psd"]


class TestT0:
    def test_scalar(self):
        f = build_t0([[1.0]], [[1.0]])
        np.testing.assert_allclose(f.T0, [[1.0]])
        np.testing.assert_allclose(f.Y, [[1.0]])

    def test_asymmetric_product(self):
        with pytest.raises(NotPsd):
            build_t0(np.eye(2), np.array([[1.0, 1.0], [0.0, 1.0]]))

    def test_two_by_two(self):
        B = np.array([[1.0], [0.0]])
        f = build_t0(B, B.T)
        np.testing.assert_allclose(np.abs(f.T0), [[0.0, 1.0], [1.0, 0.0]], atol=1e-15)
        np.testing.assert_allclose(f.T0 @ f.T0_inv, np.eye(2), atol=1e-15)
        np.testing.assert_allclose((f.T0 @ B).T, B.T @ f.T0_inv, atol=1e-15)

    def test_random(self, rng):
        n, r = 6, 2
        B = rng.standard_normal((n, r))
        G = rng.standard_normal((n, n))
        C = B.T @ (G @ G.T + np.eye(n))    # C B = B^T X B > 0
        f = build_t0(B, C)
        assert np.linalg.norm(f.T0 @ f.T0_inv - np.eye(n)) <= 1e-11
        assert f.constraint_residual(B, C) <= 1e-11


class TestSkewCase:
    def test_dissipative(self):
        e1 = np.array([[1.0], [0.0]])
        s = LtiSystem(-np.eye(2), e1, e1.T, [[0.0]])
        tr, ph = realize_skew_case(s)
        assert ph.violations() == []
        np.testing.assert_allclose(ph.R, np.eye(2), atol=1e-12)

    def test_lossless(self):
        e1 = np.array([[1.0], [0.0]])
        A = np.array([[0.0, 1.0], [-1.0, 0.0]])
        s = LtiSystem(A, e1, e1.T, [[0.0]])
        tr, ph = realize_skew_case(s)
        assert np.abs(ph.R).max() <= 1e-12
        Q = tr.T.T @ tr.T
        assert np.abs(A.T @ Q + Q @ A).max() <= 1e-12

    def test_unstable(self):
        s = LtiSystem([[1.0]], [[1.0]], [[1.0]], [[0.0]])
        with pytest.raises(NoStabilizingZ):
            realize_skew_case(s)

    def test_conditions(self):
        s = LtiSystem(-np.eye(2), [[1.0], [0.0]], [[0.0, 1.0]], [[0.0]])
        with pytest.raises(ConditionsFailed):
            realize_skew_case(s)

    def test_not_skew(self):
        with pytest.raises(InputError):
            realize_skew_case(LtiSystem([[-1.0]], [[1.0]], [[1.0]], [[1.0]]))


class TestGeneral:
    def test_definite_feedthrough(self):
        s = LtiSystem([[-3.0]], [[1.0]], [[-1.0]], [[0.5]])
        tr, ph, trace = realize_general(s)
        assert trace.steps == ()
        assert ph.violations() == []

    def test_notepass(self):
        s = LtiSystem([[-1.0]], [[2.0]], [[0.0]], [[0.0]])
        with pytest.raises(ConditionsFailedAtStep) as exc:
            realize_general(s)
        assert exc.value.step == 0
        assert "singular" in str(exc.value)

    def test_unstable(self):
        with pytest.raises(NotStable):
            realize_general(LtiSystem([[0.5]], [[1.0]], [[1.0]], [[1.0]]))

    def test_storage_infeasible(self):
        s = LtiSystem([[-1.0]], [[1.0]], [[-4.0]], [[0.5]])
        with pytest.raises(StorageInfeasible) as exc:
            realize_general(s)
        assert exc.value.condition_id == "thm_b"

    @pytest.mark.parametrize("seed,lossless,singular", [
        (0, False, False), (1, False, True), (2, True, False), (3, True, True), (4, False, True)])
    def test_scrambled_round_trip(self, seed, lossless, singular):
        rng = np.random.default_rng(seed)
        ph0 = random_ph_realization(8, 2, seed=seed, lossless=lossless, singular_S=singular)
        s, Ts, Vs = scramble(ph_to_lti(ph0), seed=seed)
        tr, ph, trace = realize_general(s)
        assert ph.violations() == []
        assert tr.orthogonality_residual() <= 1e-12
        Q = tr.T.T @ tr.T
        assert lmi_lambda_max(s, Q) <= 1e-8 * lmi_scale(s, Q)
        ells = [st["ell"] for st in trace.steps if st["r"]]
        assert all(a > b for a, b in zip([s.n] + ells, ells))
        assert trace.constraint_residual <= 1e-10 * s.norm() * max(1.0, np.linalg.norm(Q))
        lti = ph_to_lti(ph)
        for w in rng.uniform(-5, 5, 10):
            z = 0.1 + 1j * w
            G = tf(s.A, s.B, s.C, s.D, z)
            Gp = tr.V @ tf(lti.A, lti.B, lti.C, lti.D, z) @ tr.V.T
            assert np.linalg.norm(G - Gp) <= 1e-8 * np.linalg.norm(G)


class TestBrake:
    def test_no_circulation(self):
        s, rep = brake_squeal_instance(4, seed=0)
        assert rep["lambda_min_R"] >= -1e-12
        assert rep["substitution_residual"] <= 1e-14
        tr, ph, _ = realize_general(s)
        assert ph.violations() == []

    def test_amplified_circulation(self):
        s, rep = brake_squeal_instance(4, rank_n=1, n_scale=5.0, seed=0)
        assert rep["lambda_min_R"] < 0
        assert rep["substitution_residual"] <= 1e-13
        unstable = np.linalg.eigvals(s.A).real.max() > 0
        if unstable:
            with pytest.raises(NotStable):
                realize_general(s)

    def test_printed_pattern_reported(self):
        _, rep = brake_squeal_instance(3, rank_n=1, seed=2)
        # the printed pattern does not reproduce the dynamics
        assert rep["printed_pattern"]["dynamics_residual"] > 1e-6
        assert np.linalg.norm(rep["J"] + rep["J"].T) <= 1e-14
        assert np.linalg.norm(rep["R"] - rep["R"].T) <= 1e-14

    def test_stability_cross_check(self):
        for seed in range(4):
            s, rep = brake_squeal_instance(3, rank_n=1, n_scale=0.05, seed=seed)
            stable = np.linalg.eigvals(s.A).real.max() < 0
            try:
                realize_general(s)
                ok = True
            except NotStable:
                ok = False
            except (StorageInfeasible, ConditionsFailedAtStep):
                ok = None
            if not stable:
                assert ok is False
