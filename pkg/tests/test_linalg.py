import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entroflow import (
    DensityMatrix,
    LinalgError,
    is_infinite,
    matrix_log_on_support,
    partial_trace,
    relative_entropy,
    schatten_norm,
    spectral_decompose,
    support_projector,
    trace_function_derivative,
    von_neumann_entropy,
)
from entroflow.linalg import INFINITE_DIVERGENCE, dagger
from entroflow.sampling import haar_pure_state, random_cptp_channel, random_mixed_state

from conftest import brute_force_partial_trace

LOG2 = np.log(2.0)


def random_hermitian(rng, d):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return 0.5 * (g + dagger(g))


def bell_state():
    return DensityMatrix.pure([1, 0, 0, 1])


class TestSpectralDecompose:
    def test_identity(self):
        es = spectral_decompose(np.eye(2))
        np.testing.assert_allclose(es.eigenvalues, [1.0, 1.0])
        np.testing.assert_allclose(es.eigenvectors @ dagger(es.eigenvectors), np.eye(2), atol=1e-14)

    def test_diagonal(self):
        es = spectral_decompose(np.diag([0.75, 0.25]))
        np.testing.assert_allclose(es.eigenvalues, [0.75, 0.25])

    def test_random_residual(self, rng):
        for d in (2, 3, 5):
            h = random_hermitian(rng, d)
            es = spectral_decompose(h)
            for lam, v in zip(es.eigenvalues, es.eigenvectors.T):
                assert np.linalg.norm(h @ v - lam * v) <= 1e-12 * max(1.0, np.abs(es.eigenvalues).max())
            np.testing.assert_allclose(es.reconstruct(), h, atol=1e-12)

    def test_rejects_asymmetric(self):
        with pytest.raises(LinalgError):
            spectral_decompose(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestSupportProjector:
    def test_pure_state(self):
        pi = support_projector(DensityMatrix.pure([1, 0]))
        assert pi.rank == 1
        np.testing.assert_allclose(pi.entries, np.diag([1.0, 0.0]), atol=1e-14)

    def test_full_rank(self):
        pi = support_projector(DensityMatrix.maximally_mixed(2))
        assert pi.rank == 2
        np.testing.assert_allclose(pi.entries, np.eye(2), atol=1e-14)

    def test_rank_two_with_kernel(self):
        rho = DensityMatrix.diagonal([1 - np.exp(-1), np.exp(-1), 0.0])
        pi = support_projector(rho)
        assert pi.rank == 2
        np.testing.assert_allclose(pi.entries, np.diag([1.0, 1.0, 0.0]), atol=1e-12)
        # Pi rho Pi = rho
        np.testing.assert_allclose(pi.entries @ rho.entries @ pi.entries, rho.entries, atol=1e-12)

    def test_idempotent(self, rng):
        rho = random_mixed_state(rng, 4)
        pi = support_projector(rho).entries
        np.testing.assert_allclose(pi @ pi, pi, atol=1e-12)


class TestMatrixLogOnSupport:
    def test_maximally_mixed(self):
        log = matrix_log_on_support(DensityMatrix.maximally_mixed(2))
        np.testing.assert_allclose(log, -LOG2 * np.eye(2), atol=1e-14)

    def test_pure_state_vanishes(self):
        log = matrix_log_on_support(DensityMatrix.pure([0, 1]))
        np.testing.assert_allclose(log, np.zeros((2, 2)), atol=1e-14)

    def test_diagonal(self):
        log = matrix_log_on_support(DensityMatrix.diagonal([0.75, 0.25]))
        np.testing.assert_allclose(np.diagonal(log), [np.log(0.75), np.log(0.25)])


class TestVonNeumannEntropy:
    def test_pure(self):
        assert von_neumann_entropy(DensityMatrix.pure([1, 1j])) == pytest.approx(0.0, abs=1e-13)

    def test_maximally_mixed(self):
        assert von_neumann_entropy(DensityMatrix.maximally_mixed(2)) == pytest.approx(LOG2)

    def test_damping_profile_value(self):
        # -(1-1/e) log(1-1/e) + 1/e, evaluated independently
        rho = DensityMatrix.diagonal([1 - np.exp(-1), np.exp(-1)])
        assert von_neumann_entropy(rho) == pytest.approx(0.6578174303942945, abs=1e-12)

    def test_bounds(self, rng):
        for d in (2, 3, 4):
            for _ in range(20):
                s = von_neumann_entropy(random_mixed_state(rng, d))
                assert -1e-12 <= s <= np.log(d) + 1e-12


class TestRelativeEntropy:
    def test_self_is_zero(self, rng):
        rho = random_mixed_state(rng, 3)
        assert relative_entropy(rho, rho) == pytest.approx(0.0, abs=1e-12)

    def test_pure_vs_maximally_mixed(self):
        d = relative_entropy(DensityMatrix.pure([1, 0]), DensityMatrix.maximally_mixed(2))
        assert d == pytest.approx(LOG2, abs=1e-12)

    def test_orthogonal_supports_are_infinite(self):
        d = relative_entropy(DensityMatrix.pure([1, 0]), DensityMatrix.pure([0, 1]))
        assert is_infinite(d)

    def test_sentinel_blocks_arithmetic(self):
        with pytest.raises(TypeError):
            INFINITE_DIVERGENCE + 1.0

    def test_positivity_on_states(self, rng):
        for _ in range(40):
            d = relative_entropy(random_mixed_state(rng, 3), random_mixed_state(rng, 3))
            assert is_infinite(d) or d >= -1e-10

    def test_faithfulness(self, rng):
        rho = random_mixed_state(rng, 2)
        sigma = random_mixed_state(rng, 2)
        dist = schatten_norm(rho.entries - sigma.entries, 1)
        if dist > 1e-6:
            assert relative_entropy(rho, sigma) > 0.0

    def test_data_processing(self, rng):
        for _ in range(15):
            n = random_cptp_channel(rng, 3)
            rho, sigma = random_mixed_state(rng, 3), random_mixed_state(rng, 3)
            before = relative_entropy(rho, sigma)
            after = relative_entropy(n.apply(rho), n.apply(sigma))
            assert float(after) <= float(before) + 1e-9

    def test_rank_deficient_double_sum(self, rng):
        # rank-deficient sigma with supp(rho) inside supp(sigma)
        v1, v2 = np.array([1, 0, 0]), np.array([0, 1, 0])
        sigma = 0.7 * np.outer(v1, v1) + 0.3 * np.outer(v2, v2)
        rho = 0.5 * np.outer(v1, v1) + 0.5 * np.outer(v2, v2)
        expected = 0.5 * np.log(0.5 / 0.7) + 0.5 * np.log(0.5 / 0.3)
        assert relative_entropy(DensityMatrix(rho.astype(complex)), sigma) == pytest.approx(expected, abs=1e-12)


class TestSchattenNorm:
    def test_trace_norm_identity(self):
        assert schatten_norm(np.eye(2), 1) == pytest.approx(2.0)

    def test_operator_norm(self):
        assert schatten_norm(np.diag([3.0, -4.0]), np.inf) == pytest.approx(4.0)

    def test_bell_vs_maximally_mixed(self):
        diff = bell_state().entries - np.eye(4) / 4
        assert schatten_norm(diff, 1) == pytest.approx(1.5, abs=1e-12)

    def test_rejects_p_below_one(self):
        with pytest.raises(LinalgError):
            schatten_norm(np.eye(2), 0.5)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10**6), st.sampled_from([(1.0, np.inf), (2.0, 2.0)]))
    def test_hoelder(self, seed, pq):
        p, q = pq
        gen = np.random.default_rng(seed)
        a = gen.normal(size=(3, 3)) + 1j * gen.normal(size=(3, 3))
        b = gen.normal(size=(3, 3)) + 1j * gen.normal(size=(3, 3))
        lhs = abs(np.trace(dagger(a) @ b))
        assert lhs <= schatten_norm(a, p) * schatten_norm(b, q) + 1e-10


class TestPartialTrace:
    def test_product_state(self, rng):
        rho_a = random_mixed_state(rng, 2)
        rho_b = random_mixed_state(rng, 3)
        joint = DensityMatrix(np.kron(rho_a.entries, rho_b.entries))
        np.testing.assert_allclose(partial_trace(joint, (2, 3), "B").entries,
                                   rho_b.entries, atol=1e-12)
        np.testing.assert_allclose(partial_trace(joint, (2, 3), "A").entries,
                                   rho_a.entries, atol=1e-12)

    def test_bell_marginal(self):
        reduced = partial_trace(bell_state(), (2, 2), "B")
        np.testing.assert_allclose(reduced.entries, np.eye(2) / 2, atol=1e-12)

    def test_against_index_summation(self, rng):
        rho = random_mixed_state(rng, 6)
        for keep in ("A", "B"):
            lib = partial_trace(rho, (2, 3), keep).entries
            ref = brute_force_partial_trace(rho.entries, (2, 3), keep)
            np.testing.assert_allclose(lib, ref, atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(LinalgError):
            partial_trace(DensityMatrix.maximally_mixed(4), (2, 3), "B")


class TestTraceFunctionDerivative:
    def test_traceless_direction_at_maximally_mixed(self):
        val = trace_function_derivative(np.eye(2) / 2, np.diag([0.5, -0.5]), "xlogx")
        assert val == pytest.approx(0.0, abs=1e-14)

    def test_diagonal_value(self):
        val = trace_function_derivative(np.diag([0.75, 0.25]), np.diag([1.0, -1.0]), "xlogx")
        assert val == pytest.approx(np.log(3.0), abs=1e-12)

    def test_zero_direction(self, rng):
        a = random_mixed_state(rng, 3).entries
        assert trace_function_derivative(a, np.zeros((3, 3)), "xlogx") == 0.0

    def test_power_family_against_finite_differences(self, rng):
        a = random_mixed_state(rng, 3).entries + 0.2 * np.eye(3)
        direction = random_hermitian(rng, 3)
        for tag, h_exp, f in [("xlogx", 0.0, lambda x: x * np.log(x)),
                              ("power", 0.35, lambda x: x**1.35)]:
            val = trace_function_derivative(a, direction, tag, h=h_exp)
            step = 1e-5

            def tr_f(s):
                lam = np.linalg.eigvalsh(a + s * direction)
                return float(np.sum(f(lam)))

            fd = (tr_f(step) - tr_f(-step)) / (2 * step)
            assert val == pytest.approx(fd, abs=1e-7)

    def test_unknown_tag(self):
        with pytest.raises(LinalgError):
            trace_function_derivative(np.eye(2), np.eye(2), "exp")


class TestOperatorConcavity:
    def test_log_concavity_for_unital_adjoints(self, rng):
        # adjoint of a CPTP map is unital; log(N^dag(sigma)) >= N^dag(log sigma)
        for _ in range(10):
            n_dag = random_cptp_channel(rng, 3).adjoint()
            sigma = random_mixed_state(rng, 3).entries + 0.1 * np.eye(3)
            gap = matrix_log_on_support(n_dag.apply(sigma)) - n_dag.apply(
                matrix_log_on_support(sigma))
            assert np.linalg.eigvalsh(0.5 * (gap + dagger(gap)))[0] >= -1e-9


class TestDensityMatrixValidation:
    def test_rejects_negative(self):
        with pytest.raises(LinalgError):
            DensityMatrix(np.diag([1.5, -0.5]))

    def test_rejects_bad_trace(self):
        with pytest.raises(LinalgError):
            DensityMatrix(np.diag([0.6, 0.6]))

    def test_subnormalized_flag(self):
        sub = DensityMatrix(np.diag([0.3, 0.3]), subnormalized=True)
        assert sub.trace() == pytest.approx(0.6)
        with pytest.raises(LinalgError):
            DensityMatrix(np.diag([0.8, 0.8]), subnormalized=True)
