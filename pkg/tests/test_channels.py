import json

import numpy as np
import pytest

from entroflow import (
    ChannelError,
    DensityMatrix,
    LindbladGenerator,
    QuantumChannel,
    UnitalityTag,
    annihilation_operator,
    bosonic_generator,
    dephasing_generator,
    depolarizing,
    gadc,
    gadc_coherence,
    identity_channel,
    is_cptp,
    partial_trace_channel,
    thermal_state,
    transpose_superoperator,
    unitality_class,
    unitary_channel,
    von_neumann_entropy,
)
from entroflow.channels import (
    ConstantCoefficient,
    CosineSquaredCoefficient,
    ExponentialCoefficient,
    JumpTerm,
    SIGMA_X,
    SIGMA_Z,
)
from entroflow.linalg import dagger
from entroflow.sampling import random_cptp_channel, random_mixed_state, random_unitary
from entroflow.serialize import (
    SerializationError,
    channel_from_document,
    channel_to_document,
    dump,
    generator_from_document,
    generator_to_document,
    load,
)


class TestApply:
    def test_identity(self, rng):
        rho = random_mixed_state(rng, 3)
        np.testing.assert_allclose(identity_channel(3).apply(rho), rho.entries, atol=1e-14)

    def test_full_depolarizing(self, rng):
        d = depolarizing(2, 1.0)
        rho = random_mixed_state(rng, 2)
        np.testing.assert_allclose(d.apply(rho), np.eye(2) / 2, atol=1e-12)

    def test_gadc_on_maximally_mixed(self):
        t, omega = 0.5, 5.0
        w = gadc_coherence(t, omega)
        assert w == pytest.approx(0.11161237297868826, abs=1e-12)
        out = gadc(t, omega).apply(DensityMatrix.maximally_mixed(2))
        np.testing.assert_allclose(out, 0.5 * np.diag([1 + w, 1 - w]), atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ChannelError):
            identity_channel(2).apply(np.eye(3))


class TestAdjoint:
    def test_partial_trace_adjoint_tensors_identity(self, rng):
        tr_a = partial_trace_channel(dim_keep=2, dim_drop=3, keep="B")
        y = random_mixed_state(rng, 2).entries
        np.testing.assert_allclose(tr_a.adjoint().apply(y), np.kron(np.eye(3), y), atol=1e-12)

    def test_unitary_adjoint_inverts(self, rng):
        u = random_unitary(rng, 3)
        ch = unitary_channel(u)
        rho = random_mixed_state(rng, 3)
        np.testing.assert_allclose(ch.adjoint().apply(ch.apply(rho)), rho.entries, atol=1e-12)

    def test_depolarizing_self_adjoint(self):
        for q in (0.3, 1.0, 4 / 3):
            d = depolarizing(2, q)
            np.testing.assert_allclose(d.superoperator().matrix,
                                       d.adjoint().superoperator().matrix, atol=1e-12)

    def test_duality_on_builtins(self, rng):
        channels = [depolarizing(2, 0.7), gadc(0.8, 5.0), identity_channel(2),
                    unitary_channel(random_unitary(rng, 2))]
        for ch in channels:
            adj = ch.adjoint()
            for _ in range(25):
                x = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
                y = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
                lhs = np.trace(dagger(y) @ ch.apply(x))
                rhs = np.trace(dagger(adj.apply(y)) @ x)
                assert abs(lhs - rhs) <= 1e-10

    def test_adjoint_of_tp_is_unital(self, rng):
        n = random_cptp_channel(rng, 3)
        np.testing.assert_allclose(n.adjoint().on_identity(), np.eye(3), atol=1e-10)


class TestCompose:
    def test_identity_neutral(self, rng):
        n = random_cptp_channel(rng, 2)
        composed = identity_channel(2).compose(n)
        np.testing.assert_allclose(composed.superoperator().matrix,
                                   n.superoperator().matrix, atol=1e-13)

    def test_unitary_reversibility(self, rng):
        u = unitary_channel(random_unitary(rng, 3))
        round_trip = u.adjoint().compose(u)
        np.testing.assert_allclose(round_trip.superoperator().matrix,
                                   np.eye(9), atol=1e-10)

    def test_depolarizing_composition_law(self):
        q = 0.6
        twice = depolarizing(2, q).compose(depolarizing(2, q))
        target = depolarizing(2, 2 * q - q * q)
        np.testing.assert_allclose(twice.superoperator().matrix,
                                   target.superoperator().matrix, atol=1e-12)

    def test_sequential_apply_consistency(self, rng):
        n1 = random_cptp_channel(rng, 2)
        n2 = random_cptp_channel(rng, 2)
        rho = random_mixed_state(rng, 2)
        np.testing.assert_allclose(n2.compose(n1).apply(rho),
                                   n2.apply(n1.apply(rho)), atol=1e-12)


class TestChoiAndCptp:
    def test_identity_choi(self):
        # (id x id) of the unnormalized maximally entangled operator
        expected = np.zeros((4, 4), dtype=complex)
        for i in range(2):
            for j in range(2):
                expected[i * 2 + i, j * 2 + j] = 1.0
        np.testing.assert_allclose(identity_channel(2).choi(), expected, atol=1e-14)
        assert is_cptp(identity_channel(2)).passed

    def test_transpose_not_cp(self):
        report = is_cptp(transpose_superoperator(2))
        assert report.choi_min_eigenvalue == pytest.approx(-1.0, abs=1e-12)
        assert not report.completely_positive
        assert report.trace_preserving

    def test_gadc_cptp(self):
        assert is_cptp(gadc(0.5, 5.0)).passed

    def test_choi_psd_for_builtins(self, rng):
        for ch in (depolarizing(3, 0.9), gadc(1.3, 2.0), random_cptp_channel(rng, 3)):
            assert np.linalg.eigvalsh(ch.choi())[0] >= -1e-10

    def test_superoperator_choi_agree(self, rng):
        ch = random_cptp_channel(rng, 3)
        np.testing.assert_allclose(ch.superoperator().choi(), ch.choi(), atol=1e-12)

    def test_kraus_superoperator_consistency(self, rng):
        ch = random_cptp_channel(rng, 3)
        rho = random_mixed_state(rng, 3)
        np.testing.assert_allclose(ch.superoperator().apply(rho), ch.apply(rho), atol=1e-10)


class TestUnitality:
    def test_depolarizing_unital(self):
        assert unitality_class(depolarizing(3, 0.8)).tag is UnitalityTag.UNITAL

    def test_gadc_generic_is_neither(self):
        # away from p_t = 1/2 and eta_t = 1 the image of I tilts both ways
        cls = unitality_class(gadc(0.8, 5.0))
        assert cls.tag is UnitalityTag.NEITHER

    def test_gadc_identity_at_t_zero(self):
        assert unitality_class(gadc(0.0, 5.0)).tag is UnitalityTag.UNITAL

    def test_unitary_unital(self, rng):
        assert unitality_class(unitary_channel(random_unitary(rng, 2))).is_unital

    def test_strict_subunital(self):
        half = QuantumChannel([np.sqrt(0.5) * np.eye(2)])
        assert unitality_class(half).tag is UnitalityTag.STRICTLY_SUB_UNITAL


class TestDepolarizing:
    def test_q_zero_is_identity(self, rng):
        rho = random_mixed_state(rng, 3)
        np.testing.assert_allclose(depolarizing(3, 0.0).apply(rho), rho.entries, atol=1e-12)

    def test_boundary_q_still_cptp(self):
        assert is_cptp(depolarizing(2, 4 / 3)).passed

    def test_out_of_range(self):
        with pytest.raises(ChannelError):
            depolarizing(2, 1.5)


class TestGadc:
    def test_identity_at_t_zero(self, rng):
        rho = random_mixed_state(rng, 2)
        np.testing.assert_allclose(gadc(0.0, 7.0).apply(rho), rho.entries, atol=1e-14)

    def test_kraus_completeness(self, rng):
        for _ in range(100):
            t = rng.uniform(0, 4)
            omega = rng.uniform(-8, 8)
            ch = gadc(t, omega)
            total = sum(dagger(k) @ k for k in ch.kraus)
            assert np.max(np.abs(total - np.eye(2))) <= 1e-12

    def test_rejects_negative_time(self):
        with pytest.raises(ChannelError):
            gadc(-0.1, 5.0)


class TestDephasingGenerator:
    def test_diagonal_states_invariant(self):
        gen = dephasing_generator(1.0)
        np.testing.assert_allclose(gen.apply(0.0, np.diag([0.3, 0.7])), np.zeros((2, 2)), atol=1e-14)

    def test_sigma_x_flips_sign(self):
        gen = dephasing_generator(1.0)
        np.testing.assert_allclose(gen.apply(0.0, SIGMA_X), -SIGMA_X, atol=1e-14)

    def test_unital(self):
        gen = dephasing_generator(2.0)
        np.testing.assert_allclose(gen.apply(0.3, np.eye(2)), np.zeros((2, 2)), atol=1e-14)


class TestBosonic:
    def test_annihilation_matrix_elements(self):
        a = annihilation_operator(5)
        for n in range(1, 5):
            assert a[n - 1, n] == pytest.approx(np.sqrt(n))

    def test_commutator_below_cutoff(self):
        cutoff = 10
        a = annihilation_operator(cutoff)
        comm = a @ dagger(a) - dagger(a) @ a
        np.testing.assert_allclose(comm[:cutoff - 1, :cutoff - 1],
                                   np.eye(cutoff - 1), atol=1e-12)

    def test_trace_annihilation_on_trusted_states(self, rng):
        gen = bosonic_generator(1.2, 0.2, 12)
        probs = np.zeros(12)
        probs[:6] = rng.dirichlet(np.ones(6))
        rho = DensityMatrix.diagonal(probs)
        assert abs(np.trace(gen.apply(0.0, rho.entries))) <= 1e-9

    def test_rate_conventions(self):
        # amplifier gamma_+ = N+1, gamma_- = N; lossy swaps them; additive ties them
        n = 0.5
        amp = bosonic_generator(n + 1, n, 8)
        assert amp.jumps[0].rate_at(0.0) == pytest.approx(n + 1)
        assert amp.jumps[1].rate_at(0.0) == pytest.approx(n)

    def test_rejects_negative_rates(self):
        with pytest.raises(ChannelError):
            bosonic_generator(-0.1, 1.0, 8)


class TestThermalState:
    def test_vacuum(self):
        rho = thermal_state(0.0, 6)
        np.testing.assert_allclose(np.diagonal(rho.entries), np.eye(6)[0], atol=1e-14)

    def test_mean_photon_number(self):
        rho = thermal_state(0.5, 40)
        number_op = np.diag(np.arange(40.0))
        mean = float(np.real(np.trace(number_op @ rho.entries)))
        assert mean == pytest.approx(0.5, abs=1e-6)

    def test_entropy_closed_form(self):
        n = 0.5
        expected = (n + 1) * np.log(n + 1) - n * np.log(n)
        assert von_neumann_entropy(thermal_state(n, 40)) == pytest.approx(expected, abs=1e-8)

    def test_insufficient_cutoff(self):
        with pytest.raises(ChannelError):
            thermal_state(5.0, 8)


class TestLindbladApply:
    def test_unital_generator_kills_maximally_mixed(self):
        gen = dephasing_generator(1.3)
        np.testing.assert_allclose(gen.apply(0.0, np.eye(2) / 2), np.zeros((2, 2)), atol=1e-14)

    def test_adjoint_duality(self, rng):
        gen = LindbladGenerator(
            3,
            hamiltonian=0.5 * (lambda g: g + dagger(g))(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))),
            jumps=[JumpTerm(0.7, rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))],
        )
        for t in (0.0, 0.4):
            for _ in range(20):
                x = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
                rho = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
                lhs = np.trace(dagger(x) @ gen.apply(t, rho))
                rhs = np.trace(dagger(gen.adjoint_apply(t, x)) @ rho)
                assert abs(lhs - rhs) <= 1e-10

    def test_trace_annihilation(self, rng):
        gen = bosonic_generator(0.8, 0.3, 6)
        for t in (0.0, 1.0):
            rho = random_mixed_state(rng, 6)
            assert abs(np.trace(gen.apply(t, rho.entries))) <= 1e-10

    def test_superoperator_matches_structural_form(self, rng):
        gen = dephasing_generator(lambda t: 0.5 + np.cos(2 * t))
        rho = random_mixed_state(rng, 2).entries
        for t in (0.0, 0.9):
            np.testing.assert_allclose(gen.superoperator(t).apply(rho),
                                       gen.apply(t, rho), atol=1e-12)


class TestSerialization:
    def test_channel_round_trip_bit_exact(self, rng):
        ch = gadc(0.731, 5.0)
        doc = json.loads(json.dumps(channel_to_document(ch)))
        back = channel_from_document(doc)
        assert len(back.kraus) == len(ch.kraus)
        for a, b in zip(ch.kraus, back.kraus):
            assert np.array_equal(a, b)

    def test_generator_round_trip_with_tagged_rates(self):
        gen = LindbladGenerator(
            2,
            hamiltonian=0.5 * SIGMA_Z,
            jumps=[
                JumpTerm(ConstantCoefficient(0.25), SIGMA_Z),
                JumpTerm(CosineSquaredCoefficient(omega=1.0, scale=2.0), SIGMA_Z),
                JumpTerm(ExponentialCoefficient(decay=1.0, scale=0.3), SIGMA_X),
            ],
        )
        doc = json.loads(json.dumps(generator_to_document(gen)))
        back = generator_from_document(doc)
        assert back.dim == 2
        assert np.array_equal(np.asarray(back.hamiltonian), 0.5 * SIGMA_Z)
        for t in (0.0, 0.7, 2.0):
            for orig, copy in zip(gen.jumps, back.jumps):
                assert copy.rate_at(t) == orig.rate_at(t)
                assert np.array_equal(copy.operator_at(t), orig.operator_at(t))

    def test_unserializable_rate_rejected(self):
        gen = dephasing_generator(lambda t: np.sin(t))
        with pytest.raises(SerializationError):
            generator_to_document(gen)

    def test_file_round_trip(self, tmp_path):
        gen = bosonic_generator(1.2, 0.2, 5)
        path = tmp_path / "generator.json"
        dump(gen, path)
        back = load(path)
        assert back.tail_guard is not None
        assert back.tail_guard.bound == gen.tail_guard.bound
        for orig, copy in zip(gen.jumps, back.jumps):
            assert np.array_equal(copy.operator_at(0.0), orig.operator_at(0.0))
        # a second dump is byte-identical
        path2 = tmp_path / "generator2.json"
        dump(back, path2)
        assert path.read_bytes() == path2.read_bytes()
