import math

import numpy as np
import pytest

from gmur import linalg
from gmur.errors import DomainError, InputError
from gmur.sampling import random_directions, random_state
from gmur.states import (GaussianState, PhysContext, ValidationFailure,
                         char_function, make_state_from_blocks,
                         make_state_with_scalar_variances, purity_info, rescale,
                         scalar_moments, state_from_json, state_to_json,
                         validate_state)

CTX1 = PhysContext(hbar=1.0, n=1)


class TestValidateState:
    def test_minimum_uncertainty_valid(self):
        st = validate_state([0], [0], [[0.5]], [[0.5]], [[0.0]], CTX1)
        assert isinstance(st, GaussianState)

    def test_squeezed_below_bound_invalid(self):
        failure = validate_state([0], [0], [[0.1]], [[0.1]], [[0.0]], CTX1)
        assert isinstance(failure, ValidationFailure)
        np.testing.assert_allclose(failure.min_eigenvalue, -0.4, atol=1e-12)
        assert "quantum_positivity" in failure.failed

    def test_isotropic_two_mode_valid(self):
        ctx = PhysContext(hbar=1.0, n=2)
        st = validate_state([0, 0], [0, 0], np.eye(2), np.eye(2), np.zeros((2, 2)), ctx)
        assert isinstance(st, GaussianState)
        # eigenvalues of the uncertainty matrix are 1 +/- 1/2
        w = np.linalg.eigvalsh(st.uncertainty_matrix())
        np.testing.assert_allclose(sorted(set(np.round(w, 12))), [0.5, 1.5])

    def test_dimension_mismatch_raises(self):
        with pytest.raises(InputError):
            validate_state([0, 0], [0], [[1.0]], [[1.0]], [[0.0]], CTX1)

    def test_block_diagnostics(self):
        failure = validate_state([0], [0], [[-1.0]], [[1.0]], [[0.0]], CTX1)
        assert isinstance(failure, ValidationFailure)
        assert "A_not_positive_definite" in failure.failed

    def test_matches_direct_eigensolve_on_1000_candidates(self):
        rng = np.random.default_rng(101)
        agree = 0
        for k in range(1000):
            n = int(rng.integers(1, 4))
            ctx = PhysContext(hbar=1.0, n=n)
            if k % 2 == 0:
                w1 = rng.standard_normal((n, n))
                w2 = rng.standard_normal((n, n))
                a_block = linalg.symmetrize(w1 @ w1.T + 0.4 * np.eye(n))
                b_block = linalg.symmetrize(0.25 * linalg.inv_pd(a_block) + 0.3 * w2 @ w2.T)
                candidate = make_state_from_blocks(a_block, b_block, ctx)
                A, B, C = candidate.A, candidate.B, candidate.C
            else:
                base = random_state(rng, ctx)
                A = base.A - rng.uniform(0.05, 0.5) * np.eye(n)
                B, C = base.B, base.C
            result = validate_state(np.zeros(n), np.zeros(n), A, B, C, ctx)
            v_plus = np.block([[A, C], [C.T, B]]) + 0.5j * ctx.omega()
            w = np.linalg.eigvalsh((v_plus + v_plus.conj().T) / 2)
            tol = 1e-9 * max(1.0, np.max(np.abs(w)))
            expected_valid = w[0] >= -tol
            agree += (isinstance(result, GaussianState) == expected_valid)
        assert agree == 1000

    def test_plus_minus_equivalence_on_constructed_states(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            n = int(rng.integers(1, 4))
            st = random_state(rng, PhysContext(hbar=1.0, n=n))
            plus = linalg.herm_psd(st.uncertainty_matrix(+1))
            minus = linalg.herm_psd(st.uncertainty_matrix(-1))
            assert plus.is_psd and minus.is_psd


class TestScalarMoments:
    def test_one_dimension_passthrough(self):
        st = validate_state([0.3], [-0.2], [[0.7]], [[0.9]], [[0.1]], CTX1)
        mom = scalar_moments(st, [1.0], [1.0])
        assert (mom.mean_q, mom.mean_p) == (0.3, -0.2)
        assert (mom.var_q, mom.var_p, mom.cov_qp, mom.cos_alpha) == (0.7, 0.9, 0.1, 1.0)

    def test_coordinate_projection(self):
        ctx = PhysContext(hbar=1.0, n=2)
        st = validate_state([0, 0], [0, 0], np.diag([1.0, 4.0]), np.diag([1.0, 1.0]),
                            np.zeros((2, 2)), ctx)
        assert scalar_moments(st, [0.0, 1.0], [0.0, 1.0]).var_q == 4.0

    def test_bilinear_form(self):
        ctx = PhysContext(hbar=1.0, n=2)
        A = np.array([[2.0, 1.0], [1.0, 2.0]])
        st = validate_state([0, 0], [0, 0], A, 2.0 * np.eye(2), np.zeros((2, 2)), ctx)
        u = np.array([1.0, 1.0]) / math.sqrt(2.0)
        np.testing.assert_allclose(scalar_moments(st, u, u).var_q, 3.0, atol=1e-12)

    def test_non_unit_direction_rejected(self):
        st = validate_state([0], [0], [[0.5]], [[0.5]], [[0.0]], CTX1)
        with pytest.raises(InputError):
            scalar_moments(st, [2.0], [1.0])

    def test_robertson_inequality_holds(self):
        rng = np.random.default_rng(13)
        for _ in range(300):
            n = int(rng.integers(1, 4))
            ctx = PhysContext(hbar=float(10.0 ** rng.uniform(-1, 1)), n=n)
            st = random_state(rng, ctx)
            u, v = random_directions(rng, n)
            mom = scalar_moments(st, u, v)
            bound = mom.cov_qp ** 2 + (ctx.hbar * mom.cos_alpha / 2.0) ** 2
            assert mom.var_q * mom.var_p >= bound * (1.0 - 1e-9)


class TestPurityInfo:
    def test_minimum_uncertainty(self):
        st = validate_state([0], [0], [[0.5]], [[0.5]], [[0.0]], CTX1)
        det_v, pure, min_unc = purity_info(st)
        assert det_v == pytest.approx(0.25, abs=1e-12)
        assert pure and min_unc

    def test_mixed(self):
        st = validate_state([0], [0], [[1.0]], [[1.0]], [[0.0]], CTX1)
        det_v, pure, min_unc = purity_info(st)
        assert det_v == pytest.approx(1.0, abs=1e-12)
        assert not pure and not min_unc

    def test_pure_but_not_minimum_uncertainty(self):
        # Schur determinant: det V = det A * (B - C^2/A) = 1 * (0.5 - 0.25)
        st = validate_state([0], [0], [[1.0]], [[0.5]], [[0.5]], CTX1)
        det_v, pure, min_unc = purity_info(st)
        assert det_v == pytest.approx(0.25, abs=1e-12)
        assert pure and not min_unc

    def test_determinant_inequalities_on_random_states(self):
        rng = np.random.default_rng(19)
        for _ in range(300):
            n = int(rng.integers(1, 4))
            ctx = PhysContext(hbar=float(10.0 ** rng.uniform(-0.5, 0.5)), n=n)
            st = random_state(rng, ctx)
            det_v = np.linalg.det(st.variance_matrix())
            det_ab = np.linalg.det(st.A) * np.linalg.det(st.B)
            target = (ctx.hbar / 2.0) ** (2 * n)
            assert det_ab >= det_v * (1.0 - 1e-9)
            assert det_v >= target * (1.0 - 1e-9)

    def test_saturated_determinant_implies_commuting_blocks(self):
        # pure states built with C commuting with A saturate det V
        rng = np.random.default_rng(23)
        for _ in range(100):
            n = int(rng.integers(1, 4))
            ctx = PhysContext(hbar=1.0, n=n)
            w = rng.standard_normal((n, n))
            a_block = linalg.symmetrize(w @ w.T + 0.4 * np.eye(n))
            c_block = rng.normal() * np.eye(n) + rng.normal() * a_block
            a_inv = linalg.inv_pd(a_block)
            b_block = linalg.symmetrize(c_block.T @ a_inv @ c_block + 0.25 * a_inv)
            st = validate_state(np.zeros(n), np.zeros(n), a_block, b_block, c_block, ctx)
            assert isinstance(st, GaussianState)
            det_v, pure, _ = purity_info(st)
            assert pure
            comm = c_block @ a_block - a_block @ c_block.T
            assert np.max(np.abs(comm)) <= 1e-9 * max(1.0, np.max(np.abs(a_block)))


class TestMakeStateFromBlocks:
    def test_minimum_uncertainty_blocks(self):
        st = make_state_from_blocks([[0.5]], [[0.5]], CTX1)
        assert purity_info(st)[2]

    def test_comfortable_blocks(self):
        ctx = PhysContext(hbar=1.0, n=2)
        st = make_state_from_blocks(np.eye(2), np.eye(2), ctx)
        assert isinstance(st, GaussianState)

    def test_violating_blocks_rejected(self):
        ctx = PhysContext(hbar=1.0, n=2)
        with pytest.raises(DomainError, match="min eigenvalue"):
            make_state_from_blocks(np.eye(2), np.eye(2) / 8.0, ctx)


class TestMakeStateWithScalarVariances:
    def test_parallel_branch(self):
        st = make_state_with_scalar_variances(0.5, 0.5, [1.0], [1.0], CTX1)
        np.testing.assert_allclose(st.A, [[0.5]])
        np.testing.assert_allclose(st.B, [[0.5]])

    def test_orthogonal_branch_matches_construction(self):
        ctx = PhysContext(hbar=1.0, n=2)
        u, v = np.array([1.0, 0.0]), np.array([0.0, 1.0])
        st = make_state_with_scalar_variances(1.0, 1.0, u, v, ctx)
        np.testing.assert_allclose(st.A, np.outer(u, u) + 0.25 * np.outer(v, v), atol=1e-12)
        np.testing.assert_allclose(st.B, 0.25 * np.outer(u, u) + np.outer(v, v), atol=1e-12)

    def test_below_robertson_rejected(self):
        with pytest.raises(DomainError):
            make_state_with_scalar_variances(0.1, 0.1, [1.0], [1.0], CTX1)

    @pytest.mark.parametrize("n,alpha", [(2, 0.0), (2, math.pi / 3), (3, math.pi / 4),
                                         (3, math.pi / 2), (1, 0.0), (4, 2.0)])
    def test_branches_hit_requested_variances(self, n, alpha):
        rng = np.random.default_rng(hash((n, round(alpha, 6))) % 2 ** 32)
        ctx = PhysContext(hbar=1.0, n=n)
        if n == 1:
            u = v = np.array([1.0])
        else:
            u = np.zeros(n)
            u[0] = 1.0
            v = np.zeros(n)
            v[0], v[1] = math.cos(alpha), math.sin(alpha)
        cos_alpha = float(u @ v)
        floor = (ctx.hbar * cos_alpha / 2.0) ** 2
        for _ in range(30):
            c_q = float(10.0 ** rng.uniform(-1, 1))
            c_p = float(max(10.0 ** rng.uniform(-1, 1), floor / c_q * (1 + rng.uniform(0, 3))))
            st = make_state_with_scalar_variances(c_q, c_p, u, v, ctx)
            mom = scalar_moments(st, u, v)
            assert mom.var_q == pytest.approx(c_q, rel=1e-9)
            assert mom.var_p == pytest.approx(c_p, rel=1e-9)

    def test_custom_padding(self):
        ctx = PhysContext(hbar=1.0, n=3)
        u = np.array([1.0, 0.0, 0.0])
        v = np.array([0.0, 1.0, 0.0])
        st = make_state_with_scalar_variances(1.0, 1.0, u, v, ctx, padding=(2.0, 0.5))
        assert st.A[2, 2] == pytest.approx(2.0)
        assert st.B[2, 2] == pytest.approx(0.5)
        with pytest.raises(DomainError):
            make_state_with_scalar_variances(1.0, 1.0, u, v, ctx, padding=(2.0, 0.01))


class TestCharFunction:
    def test_normalization_at_zero(self):
        rng = np.random.default_rng(3)
        st = random_state(rng, PhysContext(hbar=1.0, n=2))
        assert char_function(st, [0.0, 0.0], [0.0, 0.0]) == 1.0 + 0.0j

    def test_centered_state_real_positive(self):
        st = make_state_from_blocks([[0.7]], [[0.8]], CTX1)
        val = char_function(st, [0.4], [-0.3])
        assert val.imag == 0.0 and 0.0 < val.real <= 1.0

    def test_hand_computed_value(self):
        st = make_state_from_blocks([[0.5]], [[0.5]], CTX1)
        np.testing.assert_allclose(char_function(st, [1.0], [1.0]),
                                   math.exp(-0.5), atol=1e-12)

    def test_modulus_bounded(self):
        rng = np.random.default_rng(5)
        st = random_state(rng, PhysContext(hbar=1.0, n=2), mean_scale=2.0)
        for _ in range(50):
            val = char_function(st, rng.standard_normal(2), rng.standard_normal(2))
            assert abs(val) <= 1.0 + 1e-12


class TestRescale:
    def test_unit_scales_identity(self):
        rng = np.random.default_rng(7)
        st = random_state(rng, PhysContext(hbar=1.0, n=2))
        out = rescale(st, 1.0, 1.0)
        np.testing.assert_array_equal(out.A, st.A)
        np.testing.assert_array_equal(out.B, st.B)
        assert out.ctx.hbar == st.ctx.hbar

    def test_length_scale_squares_on_A(self):
        st = make_state_from_blocks([[1.0]], [[1.0]], CTX1)
        out = rescale(st, 2.0, 1.0)
        np.testing.assert_allclose(out.A, [[4.0]])
        assert out.ctx.hbar == 2.0

    def test_minimum_uncertainty_preserved(self):
        st = make_state_from_blocks([[0.5]], [[0.5]], CTX1)
        out = rescale(st, 3.0, 0.2)
        assert purity_info(out)[2]

    def test_commutes_with_scalar_moments(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            n = int(rng.integers(1, 4))
            st = random_state(rng, PhysContext(hbar=1.0, n=n), mean_scale=1.0)
            u, v = random_directions(rng, n)
            s_l, s_p = 10.0 ** rng.uniform(-2, 2, size=2)
            before = scalar_moments(st, u, v)
            after = scalar_moments(rescale(st, s_l, s_p), u, v)
            np.testing.assert_allclose(after.var_q, s_l ** 2 * before.var_q, rtol=1e-12)
            np.testing.assert_allclose(after.var_p, s_p ** 2 * before.var_p, rtol=1e-12)
            np.testing.assert_allclose(after.cov_qp, s_l * s_p * before.cov_qp, rtol=1e-12)
            np.testing.assert_allclose(after.mean_q, s_l * before.mean_q, rtol=1e-12)

    def test_rejects_nonpositive_scale(self):
        st = make_state_from_blocks([[0.5]], [[0.5]], CTX1)
        with pytest.raises(InputError):
            rescale(st, 0.0, 1.0)


class TestJsonRoundTrip:
    def test_round_trip(self):
        rng = np.random.default_rng(13)
        st = random_state(rng, PhysContext(hbar=0.7, n=3), mean_scale=1.0)
        data = state_to_json(st)
        back = state_from_json(data)
        assert isinstance(back, GaussianState)
        np.testing.assert_allclose(back.A, st.A, atol=1e-15)
        np.testing.assert_allclose(back.C, st.C, atol=1e-15)
        assert back.ctx == st.ctx

    def test_malformed_raises(self):
        with pytest.raises(InputError):
            state_from_json({"hbar": 1.0})

    def test_invalid_returns_failure(self):
        data = {"hbar": 1.0, "n": 1, "a": [0], "b": [0],
                "A": [[0.1]], "B": [[0.1]], "C": [[0.0]]}
        assert isinstance(state_from_json(data), ValidationFailure)
