import math

import numpy as np
import pytest

from swlyap import (
    ContractViolation,
    DegenerateInputError,
    SignalFamily,
    StructuralError,
    SwitchingSignal,
    UnstableTailError,
    argmax_set,
    candidates_from_family,
    directional_derivative,
    euclidean_state,
    fit_decay,
    gram_of_signal,
    lyapunov_solve,
    matrix_mode,
    segment_energy,
    trajectory_cost,
    v_max,
)
from swlyap.gram import GramOperator
from swlyap.presets import commuting_diag_pair, scalar_mode_system

from oracle_quadrature import (
    quadrature_gram,
    quadrature_segment_energy,
    quadrature_stationary_energy,
    random_hurwitz,
)


class TestLyapunovSolve:
    def test_scalar(self):
        P = lyapunov_solve([[-1.0]], [[1.0]])
        assert P[0, 0] == pytest.approx(0.5, rel=1e-14)

    def test_negated_identity(self):
        P = lyapunov_solve(-np.eye(3), np.eye(3))
        assert np.allclose(P, 0.5 * np.eye(3), rtol=1e-14)

    def test_residual_and_quadrature_oracle(self):
        A = np.array([[-1.0, 1.0], [0.0, -2.0]])
        P = lyapunov_solve(A, np.eye(2))
        assert np.linalg.norm(A.T @ P + P @ A + np.eye(2)) <= 1e-10 * np.sqrt(2.0)
        W = quadrature_stationary_energy(A)
        rng = np.random.default_rng(0)
        for _ in range(5):
            x = rng.standard_normal(2)
            assert float(x @ P @ x) == pytest.approx(float(x @ W @ x), rel=1e-8)

    def test_rejects_non_hurwitz(self):
        with pytest.raises(UnstableTailError):
            lyapunov_solve([[1.0]], [[1.0]])
        with pytest.raises(UnstableTailError):
            lyapunov_solve([[0.0, 1.0], [-1.0, 0.0]], np.eye(2))


class TestSegmentEnergy:
    def test_zero_matrix_gives_identity_scaled(self):
        E = segment_energy(np.zeros((2, 2)), 1.0)
        assert np.allclose(E, np.eye(2), atol=1e-14)

    def test_scalar_long_segment_approaches_half(self):
        E = segment_energy([[-1.0]], 40.0)
        assert E[0, 0] == pytest.approx(0.5, rel=1e-12)

    def test_rotation_preserves_norm(self):
        A = np.array([[0.0, 1.0], [-1.0, 0.0]])
        E = segment_energy(A, 2.0 * math.pi)
        assert np.allclose(E, 2.0 * math.pi * np.eye(2), rtol=1e-10)
        assert np.allclose(E, quadrature_segment_energy(A, 2.0 * math.pi), rtol=1e-8)

    def test_against_quadrature_random(self):
        rng = np.random.default_rng(1)
        for _ in range(5):
            A = rng.standard_normal((3, 3))
            d = float(rng.uniform(0.2, 2.0))
            assert np.allclose(
                segment_energy(A, d), quadrature_segment_energy(A, d), rtol=1e-8, atol=1e-10
            )

    def test_positive_length_required(self):
        with pytest.raises(ContractViolation):
            segment_energy([[-1.0]], 0.0)


class TestGramOfSignal:
    def test_constant_scalar(self):
        sys_ = scalar_mode_system((-1.0,))
        g = gram_of_signal(sys_, SwitchingSignal((), 0))
        assert g.B[0, 0] == pytest.approx(0.5, rel=1e-12)

    def test_constant_signal_equals_lyapunov_solve(self):
        A = np.array([[-1.0, 0.5], [0.0, -2.0]])
        sys_ = commuting_diag_pair()
        sys_ = type(sys_)((matrix_mode(A),), sys_.norm)
        g = gram_of_signal(sys_, SwitchingSignal((), 0))
        assert np.allclose(g.B, lyapunov_solve(A, np.eye(2)), rtol=1e-12)

    def test_one_switch_matches_quadrature(self):
        sys_ = commuting_diag_pair()
        sig = SwitchingSignal(((0, 1.0),), 1)
        g = gram_of_signal(sys_, sig)
        W = quadrature_gram(sys_, sig)
        assert np.allclose(g.B, W, rtol=1e-8, atol=1e-10)

    def test_unstable_tail_names_mode(self):
        sys_ = scalar_mode_system((-1.0, 1.0))
        with pytest.raises(UnstableTailError, match="tail mode 1"):
            gram_of_signal(sys_, SwitchingSignal(((0, 1.0),), 1))

    def test_oracle_equivalence_with_trajectory_cost(self):
        rng = np.random.default_rng(2)
        for _ in range(5):
            dim = int(rng.integers(2, 5))
            sys_ = type(commuting_diag_pair())(
                (matrix_mode(random_hurwitz(rng, dim)), matrix_mode(random_hurwitz(rng, dim))),
                commuting_diag_pair().norm,
            )
            n_seg = int(rng.integers(0, 4))
            sig = SwitchingSignal(
                tuple((int(rng.integers(0, 2)), float(rng.uniform(0.1, 1.5))) for _ in range(n_seg)),
                int(rng.integers(0, 2)),
            )
            g = gram_of_signal(sys_, sig)
            for _ in range(20):
                x = euclidean_state(rng.standard_normal(dim))
                quad, _ = trajectory_cost(sys_, sig, x, horizon=60.0, quad_tol=1e-10)
                assert float(x @ g.B @ x) == pytest.approx(quad, rel=1e-6)

    def test_norm_bounded_by_decay_constants(self):
        sys_ = commuting_diag_pair()
        fam = SignalFamily((0.5, 1.0), 1, (0, 1))
        witnesses = [euclidean_state(v) for v in ([1.0, 0.0], [0.0, 1.0], [0.7, 0.7])]
        decay = fit_decay(sys_, fam, [0.25 * k for k in range(1, 41)], witnesses)
        cands = candidates_from_family(sys_, fam)
        bound = decay.K**2 / (2.0 * decay.mu)
        for c in cands:
            top = float(np.max(np.linalg.eigvalsh(c.B)))
            assert top <= bound * (1.0 + 1e-6)


class TestGramOperatorInvariants:
    def test_symmetry_enforced(self):
        with pytest.raises(StructuralError):
            GramOperator(np.array([[1.0, 0.5], [0.0, 1.0]]), SwitchingSignal((), 0))

    def test_psd_enforced(self):
        with pytest.raises(StructuralError):
            GramOperator(np.array([[-1.0, 0.0], [0.0, 1.0]]), SwitchingSignal((), 0))


def diag_candidates():
    sig = SwitchingSignal((), 0)
    return (
        GramOperator(np.diag([1.0, 0.0]), sig),
        GramOperator(np.diag([0.0, 1.0]), sig),
    )


class TestVMaxAndArgmax:
    def test_single_candidate(self):
        sys_ = scalar_mode_system((-1.0,))
        cands = candidates_from_family(sys_, SignalFamily((1.0,), 0, (0,)))
        x = euclidean_state([2.0])
        assert v_max(cands, x) == pytest.approx(2.0, rel=1e-12)

    def test_zero_state(self):
        assert v_max(diag_candidates(), euclidean_state([0.0, 0.0])) == 0.0

    def test_ordering(self):
        sig = SwitchingSignal((), 0)
        cands = (
            GramOperator(0.5 * np.eye(2), sig),
            GramOperator(0.25 * np.eye(2), sig),
        )
        assert v_max(cands, euclidean_state([1.0, 0.0])) == 0.5

    def test_argmax_singleton_for_distinct_forms(self):
        s = argmax_set(diag_candidates(), euclidean_state([1.0, 0.25]), tol=1e-12)
        assert s.indices == (0,)

    def test_argmax_tie(self):
        x = euclidean_state([1.0, 1.0]) / math.sqrt(2.0)
        s = argmax_set(diag_candidates(), euclidean_state(x), tol=1e-12)
        assert s.indices == (0, 1)

    def test_duplicated_candidate_both_present(self):
        sig = SwitchingSignal((), 0)
        cands = (
            GramOperator(np.eye(2), sig),
            GramOperator(np.eye(2), sig),
        )
        s = argmax_set(cands, euclidean_state([1.0, 0.0]))
        assert s.indices == (0, 1)

    def test_zero_state_degenerate(self):
        with pytest.raises(DegenerateInputError):
            argmax_set(diag_candidates(), euclidean_state([0.0, 0.0]))


class TestDirectionalDerivative:
    def test_single_candidate_pairing(self):
        sig = SwitchingSignal((), 0)
        B = np.array([[2.0, 0.5], [0.5, 1.0]])
        cands = (GramOperator(B, sig),)
        x = euclidean_state([1.0, -1.0])
        psi = euclidean_state([0.5, 2.0])
        assert directional_derivative(cands, x, psi) == pytest.approx(
            2.0 * float(psi @ B @ x), rel=1e-14
        )

    def test_zero_direction(self):
        assert (
            directional_derivative(diag_candidates(), euclidean_state([1.0, 0.5]), np.zeros(2))
            == 0.0
        )

    def test_tie_case_exact(self):
        x = euclidean_state([1.0, 1.0] / np.sqrt(2.0))
        psi = euclidean_state([1.0, 0.0])
        val = directional_derivative(diag_candidates(), x, psi, tol=1e-9)
        assert val == pytest.approx(math.sqrt(2.0), abs=1e-10)

    def test_matches_one_sided_difference_at_smooth_points(self):
        # smooth means the tied maximizers are one matrix (duplicated grams
        # from trajectory-equal signals do not break differentiability)
        rng = np.random.default_rng(3)
        sys_ = commuting_diag_pair()
        cands = candidates_from_family(sys_, SignalFamily((0.5, 1.0), 1, (0, 1)))
        checked = 0
        for _ in range(200):
            if checked >= 10:
                break
            x = euclidean_state(rng.standard_normal(2))
            if np.linalg.norm(x) < 0.1:
                continue
            s = argmax_set(cands, x, tol=1e-6)
            tied = [cands[i].B for i in s.indices]
            spread = max(float(np.linalg.norm(b - tied[0], 2)) for b in tied)
            if spread > 1e-9:
                continue
            psi = euclidean_state(rng.standard_normal(2))
            dd = directional_derivative(cands, x, psi)
            h = 1e-5
            fd = (v_max(cands, euclidean_state(x + h * psi)) - v_max(cands, x)) / h
            assert fd == pytest.approx(dd, rel=1e-4, abs=1e-8)
            checked += 1
        assert checked == 10

    def test_difference_quotient_at_tie_converges_to_max(self):
        cands = diag_candidates()
        x = euclidean_state([1.0, 1.0] / np.sqrt(2.0))
        psi = euclidean_state([1.0, 0.0])
        dd = directional_derivative(cands, x, psi)
        for h in (1e-3, 1e-4, 1e-5):
            fd = (v_max(cands, euclidean_state(x + h * psi)) - v_max(cands, x)) / h
            assert abs(fd - dd) <= 4.0 * h

    def test_subderivative_inequality(self):
        rng = np.random.default_rng(4)
        sys_ = commuting_diag_pair()
        cands = candidates_from_family(sys_, SignalFamily((0.5, 1.0), 1, (0, 1)))
        for _ in range(20):
            x = euclidean_state(rng.standard_normal(2))
            if np.linalg.norm(x) < 0.1:
                continue
            psi = euclidean_state(0.01 * rng.standard_normal(2))
            gain = v_max(cands, euclidean_state(x + psi)) - v_max(cands, x)
            dd = directional_derivative(cands, x, psi)
            assert gain >= dd - 1e-3 * np.linalg.norm(psi)


class TestVMaxIsSquaredNorm:
    def test_homogeneity_exact(self):
        cands = diag_candidates()
        rng = np.random.default_rng(5)
        for _ in range(20):
            x = euclidean_state(rng.standard_normal(2))
            for c in (2.0, -2.0, 0.5):
                assert v_max(cands, euclidean_state(c * x)) == c * c * v_max(cands, x)

    def test_sqrt_triangle_inequality(self):
        sys_ = commuting_diag_pair()
        cands = candidates_from_family(sys_, SignalFamily((0.5, 1.0), 1, (0, 1)))
        rng = np.random.default_rng(6)
        for _ in range(30):
            x = euclidean_state(rng.standard_normal(2))
            y = euclidean_state(rng.standard_normal(2))
            lhs = math.sqrt(v_max(cands, euclidean_state(x + y)))
            rhs = math.sqrt(v_max(cands, x)) + math.sqrt(v_max(cands, y))
            assert lhs <= rhs + 1e-10
