import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose

from core.services import qcore
from core.services.qcore import (
    DensityMatrix,
    Mixture,
    PureState,
    StateError,
)

HALF_I = np.eye(2) / 2.0


def _singlet() -> PureState:
    h = 1.0 / np.sqrt(2.0)
    return PureState((2, 2), [0.0, h, -h, 0.0])


class StateInvariantTests(SimpleTestCase):
    def test_unnormalized_state_rejected(self):
        with self.assertRaises(StateError):
            PureState((2,), [1.0, 1.0])

    def test_length_must_match_dims(self):
        with self.assertRaises(StateError):
            PureState((2, 2), [1.0, 0.0])

    def test_non_finite_rejected(self):
        with self.assertRaises(StateError):
            PureState((2,), [np.nan, 1.0])

    def test_mixture_probabilities_must_sum_to_one(self):
        with self.assertRaises(StateError):
            Mixture.of((qcore.ket("0"), 0.5), (qcore.ket("1"), 0.4))

    def test_mixture_dims_must_agree(self):
        with self.assertRaises(StateError):
            Mixture.of((qcore.ket("0"), 0.5), (qcore.ket("01"), 0.5))

    def test_empty_mixture_rejected(self):
        with self.assertRaises(StateError):
            Mixture(())

    def test_density_matrix_invariants(self):
        with self.assertRaises(StateError):
            DensityMatrix((2,), [[0.5, 0.5], [0.0, 0.5]])
        with self.assertRaises(StateError):
            DensityMatrix((2,), [[1.0, 0.0], [0.0, 1.0]])
        with self.assertRaises(StateError):
            DensityMatrix((2,), [[1.5, 0.0], [0.0, -0.5]])

    def test_arrays_are_read_only(self):
        s = qcore.ket("0")
        with self.assertRaises(ValueError):
            s.amplitudes[0] = 0.0

    def test_ket_rejects_digits_outside_dims(self):
        with self.assertRaises(StateError):
            qcore.ket("2")
        self.assertEqual(qcore.ket("21", dims=(3, 2)).amplitudes[5], 1.0)


class DensityTests(SimpleTestCase):
    def test_computational_mixture_is_maximally_mixed(self):
        assert_allclose(qcore.density_of(qcore.computational_mixture()).entries, HALF_I, atol=1e-10)

    def test_trine_mixture_is_maximally_mixed(self):
        r = np.sqrt(3.0) / 2.0
        explicit = sum(np.outer(v, v) / 3.0 for v in ([1.0, 0.0], [0.5, r], [0.5, -r]))
        rho = qcore.density_of(qcore.trine_mixture()).entries
        assert_allclose(rho, explicit, atol=1e-12)
        assert_allclose(rho, HALF_I, atol=1e-10)

    def test_single_pure_state(self):
        rho = qcore.density_of(Mixture.of((qcore.ket("0"), 1.0)))
        assert_allclose(rho.entries, [[1, 0], [0, 0]], atol=1e-12)

    def test_density_equal_examples(self):
        e1 = qcore.density_of(qcore.computational_mixture())
        e2 = qcore.density_of(qcore.hadamard_mixture())
        ket0 = qcore.density_of(Mixture.of((qcore.ket("0"), 1.0)))
        self.assertTrue(qcore.density_equal(e1, e2, 1e-10))
        self.assertFalse(qcore.density_equal(e1, ket0, 1e-10))

    def test_bell_mixture_equals_classical_pairs(self):
        bell = qcore.density_of(qcore.bell_mixture())
        pairs = qcore.density_of(qcore.classical_pairs_mixture())
        self.assertTrue(qcore.density_equal(bell, pairs, 1e-10))
        assert_allclose(bell.entries, np.eye(4) / 4.0, atol=1e-10)

    def test_density_equal_dimension_mismatch(self):
        with self.assertRaises(StateError):
            qcore.density_equal(
                qcore.density_of(qcore.computational_mixture()),
                qcore.density_of(qcore.bell_mixture()),
            )

    def test_random_mixtures_give_valid_densities(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            rho = qcore.density_of(qcore.random_mixture(rng))
            self.assertAlmostEqual(float(np.trace(rho.entries).real), 1.0, delta=1e-10)
            self.assertGreaterEqual(np.linalg.eigvalsh(rho.entries).min(), -1e-10)

    def test_purity(self):
        self.assertAlmostEqual(qcore.purity(qcore.density_of(qcore.computational_mixture())), 0.5)
        self.assertAlmostEqual(qcore.purity(qcore.density_of_state(qcore.ket("1"))), 1.0)


class MeasurementTests(SimpleTestCase):
    def setUp(self):
        self.h0 = qcore.hadamard_basis().vectors[0]

    def test_h0_in_hadamard_basis_is_deterministic(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            rec = qcore.measure(self.h0, 0, qcore.hadamard_basis(), rng)
            self.assertEqual(rec.outcome_index, 0)
            self.assertAlmostEqual(rec.probability, 1.0, delta=1e-10)

    def test_h0_in_computational_basis_is_fair(self):
        rng = np.random.default_rng(2)
        rec = qcore.measure(self.h0, 0, qcore.computational_basis(), rng)
        self.assertAlmostEqual(rec.probability, 0.5, delta=1e-10)
        self.assertTrue(qcore.equal_up_to_phase(rec.post_state, qcore.ket(str(rec.outcome_index))))

    def test_eigenstate_stays_put(self):
        rec = qcore.measure(qcore.ket("0"), 0, qcore.computational_basis(), np.random.default_rng(0))
        self.assertEqual(rec.outcome_index, 0)
        self.assertAlmostEqual(rec.probability, 1.0)
        assert_allclose(rec.post_state.amplitudes, [1.0, 0.0])

    def test_measuring_one_subsystem_collapses_only_that_subsystem(self):
        s = qcore.tensor(qcore.ket("0"), self.h0)
        rec = qcore.measure(s, 1, qcore.computational_basis(), np.random.default_rng(5))
        expected = qcore.ket("0" + str(rec.outcome_index))
        self.assertTrue(qcore.equal_up_to_phase(rec.post_state, expected))

    def test_invalid_subsystem_and_basis(self):
        rng = np.random.default_rng(0)
        with self.assertRaises(StateError):
            qcore.measure(self.h0, 1, qcore.computational_basis(), rng)
        with self.assertRaises(StateError):
            qcore.measure(self.h0, 0, qcore.computational_basis(3), rng)

    def test_same_seed_same_outcomes(self):
        def run(seed):
            rng = np.random.default_rng(seed)
            return [qcore.measure(self.h0, 0, qcore.computational_basis(), rng).outcome_index for _ in range(50)]

        self.assertEqual(run(11), run(11))

    def test_born_completeness(self):
        rng = np.random.default_rng(8)
        for d in (2, 3, 4):
            s = qcore.random_state(rng, d * 2)
            s = PureState((d, 2), s.amplitudes)
            q, _ = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
            probs = qcore.born_probabilities(s, 0, qcore.MeasurementBasis.from_rows(q.T))
            self.assertAlmostEqual(float(probs.sum()), 1.0, delta=1e-10)

    def test_maximally_mixed_is_fair_in_every_basis(self):
        half = qcore.density_of(qcore.computational_mixture())
        rng = np.random.default_rng(9)
        for _ in range(20):
            q, _ = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
            for v in qcore.MeasurementBasis.from_rows(q.T).vectors:
                self.assertAlmostEqual(qcore.outcome_probability(half, v), 0.5, delta=1e-10)

    def test_non_orthonormal_basis_rejected(self):
        with self.assertRaises(StateError):
            qcore.MeasurementBasis.from_rows([[1.0, 0.0], [np.sqrt(0.5), np.sqrt(0.5)]])

    def test_daemon_emits_members(self):
        m = qcore.trine_mixture()
        rng = np.random.default_rng(4)
        for _ in range(10):
            s = qcore.daemon_emit(m, rng)
            self.assertTrue(any(s is member for member in m.states))


class PurityTests(SimpleTestCase):
    def test_peres_examples(self):
        self.assertFalse(qcore.is_pure_by_peres(qcore.computational_mixture()))
        self.assertFalse(qcore.is_pure_by_peres(qcore.hadamard_mixture()))
        h0 = qcore.hadamard_basis().vectors[0]
        self.assertTrue(qcore.is_pure_by_peres(Mixture.of((h0, 1.0))))

    def test_peres_agrees_with_rank(self):
        rng = np.random.default_rng(12)
        for _ in range(50):
            m = qcore.random_mixture(rng)
            rank = np.linalg.matrix_rank(qcore.density_of(m).entries, tol=1e-8)
            self.assertEqual(qcore.is_pure_by_peres(m), rank == 1)

    def test_duplicate_states_are_still_pure(self):
        m = Mixture.of((qcore.ket("1"), 0.3), (qcore.ket("1"), 0.7))
        self.assertTrue(qcore.is_pure_by_peres(m))


class PurifyAndTraceTests(SimpleTestCase):
    def test_purify_computational_mixture_is_bell_state(self):
        psi = qcore.purify(qcore.computational_mixture())
        self.assertEqual(psi.dims, (2, 2))
        phi_plus = PureState((2, 2), [1 / np.sqrt(2), 0, 0, 1 / np.sqrt(2)])
        self.assertTrue(qcore.equal_up_to_phase(psi, phi_plus))
        back = qcore.partial_trace(qcore.density_of_state(psi), [0])
        assert_allclose(back.entries, HALF_I, atol=1e-10)

    def test_purify_pure_state_is_product(self):
        psi = qcore.purify(Mixture.of((qcore.ket("0"), 1.0)))
        self.assertEqual(psi.dims, (2, 1))
        assert_allclose(psi.amplitudes, [1.0, 0.0])

    def test_purify_trine(self):
        psi = qcore.purify(qcore.trine_mixture())
        self.assertEqual(psi.dims, (2, 3))
        self.assertEqual(psi.dim, 6)
        back = qcore.partial_trace(qcore.density_of_state(psi), [0])
        assert_allclose(back.entries, HALF_I, atol=1e-10)

    def test_zero_probability_entries_dropped(self):
        psi = qcore.purify(Mixture.of((qcore.ket("0"), 1.0), (qcore.ket("1"), 0.0)))
        self.assertEqual(psi.dims, (2, 1))

    def test_round_trip_random_mixtures(self):
        rng = np.random.default_rng(2024)
        for _ in range(200):
            m = qcore.random_mixture(rng, max_states=5, max_dim=4)
            back = qcore.partial_trace(qcore.density_of_state(qcore.purify(m)), [0])
            self.assertTrue(qcore.density_equal(back, qcore.density_of(m), 1e-10))

    def test_partial_trace_of_singlet(self):
        rho = qcore.density_of_state(_singlet())
        assert_allclose(qcore.partial_trace(rho, [0]).entries, HALF_I, atol=1e-10)
        assert_allclose(qcore.partial_trace(rho, [1]).entries, HALF_I, atol=1e-10)

    def test_partial_trace_of_product(self):
        rho = qcore.density_of_state(qcore.ket("01"))
        assert_allclose(qcore.partial_trace(rho, [0]).entries, [[1, 0], [0, 0]], atol=1e-12)
        assert_allclose(qcore.partial_trace(rho, [1]).entries, [[0, 0], [0, 1]], atol=1e-12)

    def test_partial_trace_keep_everything_is_identity(self):
        rho = qcore.density_of_state(_singlet())
        assert_allclose(qcore.partial_trace(rho, [1, 0]).entries, rho.entries)

    def test_partial_trace_invalid_keep(self):
        rho = qcore.density_of_state(_singlet())
        for keep in ([], [0, 0], [2], [-1]):
            with self.assertRaises(StateError):
                qcore.partial_trace(rho, keep)


class TensorTests(SimpleTestCase):
    def test_kronecker_examples(self):
        s = qcore.tensor(qcore.ket("0"), qcore.ket("1"))
        self.assertEqual(s.dims, (2, 2))
        assert_allclose(s.amplitudes, [0, 1, 0, 0])

        h0 = qcore.hadamard_basis().vectors[0]
        h = 1 / np.sqrt(2)
        assert_allclose(qcore.tensor(h0, qcore.ket("0")).amplitudes, [h, 0, h, 0], atol=1e-15)

    def test_norm_is_multiplicative(self):
        rng = np.random.default_rng(6)
        s = qcore.tensor(qcore.random_state(rng, 3), qcore.random_state(rng, 4))
        self.assertAlmostEqual(float(np.linalg.norm(s.amplitudes)), 1.0, delta=1e-12)

    def test_phase_equality(self):
        s = _singlet()
        self.assertTrue(qcore.equal_up_to_phase(s, PureState(s.dims, 1j * s.amplitudes)))
        self.assertFalse(qcore.equal_up_to_phase(qcore.ket("0"), qcore.ket("1")))

    def test_apply_unitary(self):
        s = qcore.apply_unitary(qcore.hadamard(), qcore.ket("0"))
        self.assertTrue(qcore.equal_up_to_phase(s, qcore.hadamard_basis().vectors[0]))
        with self.assertRaises(StateError):
            qcore.apply_unitary(np.array([[1.0, 1.0], [0.0, 1.0]]), qcore.ket("0"))

    def test_hadamard_basis_is_hadamard_columns(self):
        basis = qcore.hadamard_basis()
        r = np.sqrt(0.5)
        assert_allclose(basis.vectors[0].amplitudes, [r, r], atol=1e-12)
        assert_allclose(basis.vectors[1].amplitudes, [r, -r], atol=1e-12)
        assert_allclose(np.array([v.amplitudes for v in basis.vectors]).T, qcore.hadamard(), atol=1e-12)
