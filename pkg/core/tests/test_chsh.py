import numpy as np
from django.test import SimpleTestCase

from core.services.chsh import (
    ChshResult,
    ChshSettings,
    DeterministicStrategy,
    all_strategies,
    box_chsh,
    chsh_values,
    complete_box,
    lhv_exhaustive,
    lhv_result,
    parallel_lives_chsh,
    quantum_chsh,
    quantum_optimize,
    record_box_weights,
)
from core.services.entanglement import CorrelatorEstimate
from core.services.parallel_lives import run_protocol
from core.services.refine import hill_climb

TSIRELSON = 2.0 * np.sqrt(2.0)


def optimal_settings():
    return ChshSettings.from_angles(0.0, np.pi / 4, 5 * np.pi / 8, 3 * np.pi / 8)


class LhvTests(SimpleTestCase):
    def test_exhaustive_bound(self):
        summary = lhv_exhaustive()
        self.assertEqual(summary.n_strategies, 16)
        self.assertEqual(summary.max_S, 2.0)
        self.assertEqual(summary.min_S, -2.0)
        self.assertEqual(summary.max_success, 0.75)
        self.assertTrue(summary.consistent)
        self.assertGreater(len(summary.argmax), 0)

    def test_constant_strategy(self):
        result = lhv_result(DeterministicStrategy((0, 0), (0, 0)))
        self.assertEqual(result.S, 2.0)
        self.assertEqual(result.success_prob, 0.75)
        self.assertEqual(result.strategy_class, "lhv")

    def test_every_strategy_within_bound(self):
        for st in all_strategies():
            s, success = box_chsh(st.box())
            self.assertLessEqual(abs(s), 2.0)
            self.assertEqual(s, 8 * success - 4)

    def test_strategy_validation(self):
        with self.assertRaises(ValueError):
            DeterministicStrategy((0, 2), (0, 0))
        with self.assertRaises(ValueError):
            DeterministicStrategy((0,), (0, 0))


class BoxTests(SimpleTestCase):
    def test_pr_box(self):
        box = np.zeros((2, 2, 2, 2))
        for x in (0, 1):
            for y in (0, 1):
                for a in (0, 1):
                    box[x, y, a, a ^ (x & y)] = 0.5
        self.assertEqual(box_chsh(box), (4.0, 1.0))

    def test_unnormalized_weights(self):
        st = DeterministicStrategy((0, 1), (1, 0))
        s1, p1 = box_chsh(st.box())
        s2, p2 = box_chsh(3.5 * st.box())
        self.assertEqual((s1, p1), (s2, p2))

    def test_rejects_bad_boxes(self):
        with self.assertRaises(ValueError):
            box_chsh(np.zeros((2, 2, 2)))
        with self.assertRaises(ValueError):
            box_chsh(np.zeros((2, 2, 2, 2)))


class QuantumTests(SimpleTestCase):
    def test_standard_angles_reach_tsirelson(self):
        result = quantum_chsh(optimal_settings())
        self.assertAlmostEqual(result.abs_S, TSIRELSON, delta=1e-12)
        self.assertAlmostEqual(result.success_prob, (2 + np.sqrt(2)) / 4, delta=1e-12)
        self.assertEqual(result.strategy_class, "quantum")

    def test_monte_carlo_cross_check(self):
        rng = np.random.default_rng(17)
        result = quantum_chsh(optimal_settings(), n_samples=20_000, rng=rng)
        self.assertEqual(len(result.cross_check), 4)
        for exact, sampled in zip(result.per_term, result.cross_check):
            self.assertLessEqual(abs(exact.value - sampled.value), 4 * sampled.std_err + 1e-3)

    def test_vectorized_values_match_scalar(self):
        rng = np.random.default_rng(3)
        angles = rng.uniform(0, np.pi, size=(10, 3))
        vals = chsh_values(angles[:, 0], angles[:, 1], angles[:, 2])
        for (ap, b, bp), v in zip(angles, vals):
            s = quantum_chsh(ChshSettings.from_angles(0.0, ap, b, bp)).S
            self.assertAlmostEqual(float(v), s, delta=1e-12)

    def test_optimizer_finds_tsirelson(self):
        opt = quantum_optimize(seed=0)
        self.assertAlmostEqual(abs(opt.S_max), TSIRELSON, delta=1e-9)
        self.assertAlmostEqual(opt.success, (opt.S_max + 4) / 8, delta=1e-15)
        self.assertLessEqual(opt.resolution, 1e-3)
        self.assertGreaterEqual(opt.grid_points, 32 ** 3)
        self.assertAlmostEqual(quantum_chsh(opt.settings).S, opt.S_max, delta=1e-12)

    def test_restricted_optimizer(self):
        opt = quantum_optimize(restrict_a_prime=True, seed=1)
        self.assertAlmostEqual(opt.S_max, 2.0, delta=1e-9)
        self.assertEqual(opt.settings.a_prime.theta, opt.settings.a.theta)

    def test_result_consistency_enforced(self):
        terms = tuple(CorrelatorEstimate(0.5, "analytic", 0, 0.0) for _ in range(4))
        with self.assertRaises(ValueError):
            ChshResult(2.0, terms, 0.5, "quantum")
        with self.assertRaises(ValueError):
            ChshResult(1.0, terms, 0.5, "magic")
        self.assertEqual(ChshResult(1.0, terms, 0.5, "quantum").S, 1.0)


class ParallelLivesChshTests(SimpleTestCase):
    def test_reaches_algebraic_maximum(self):
        result = parallel_lives_chsh(200, np.random.default_rng(99))
        self.assertEqual(result.S, 4.0)
        self.assertEqual(result.success_prob, 1.0)
        self.assertEqual(result.meta["audits_passed"], 200)
        self.assertEqual(result.to_dict()["n_trials"], 200)

    def test_multi_round(self):
        result = parallel_lives_chsh(50, np.random.default_rng(5), n_rounds=3, check_locality=False)
        self.assertEqual(result.S, 4.0)
        self.assertNotIn("audits_passed", result.meta)

    def test_identity_rule_is_classical(self):
        box = sum(record_box_weights(run_protocol((x,), (y,), rule="identity")) for x in (0, 1) for y in (0, 1))
        s, success = box_chsh(box)
        self.assertEqual(s, 2.0)
        self.assertEqual(success, 0.75)

    def test_needs_trials(self):
        with self.assertRaises(ValueError):
            parallel_lives_chsh(0, np.random.default_rng(0))

    def test_single_trial_fills_missing_pairs(self):
        for seed in range(6):
            result = parallel_lives_chsh(1, np.random.default_rng(seed))
            self.assertEqual(result.S, 4.0)
            self.assertEqual(result.success_prob, 1.0)
            self.assertEqual(len(result.meta["filled_pairs"]), 3)
            self.assertEqual(result.meta["audits_passed"], 1)

    def test_complete_box_keeps_sampled_pairs(self):
        sampled = record_box_weights(run_protocol((1,), (1,)))
        box, filled = complete_box(sampled)
        self.assertEqual(filled, [[0, 0], [0, 1], [1, 0]])
        np.testing.assert_array_equal(box[1, 1], sampled[1, 1])
        self.assertEqual(box_chsh(box), (4.0, 1.0))
        full, none = complete_box(box)
        self.assertEqual(none, [])
        np.testing.assert_array_equal(full, box)

    def test_complete_box_follows_rule(self):
        box, _ = complete_box(np.zeros((2, 2, 2, 2)), rule="identity")
        self.assertEqual(box_chsh(box), (2.0, 0.75))


class HillClimbTests(SimpleTestCase):
    def test_finds_quadratic_minimum(self):
        res = hill_climb(lambda v: float(np.sum((v - 1.5) ** 2)), [0.0, 0.0], seed=4, step=0.5, mode="min")
        np.testing.assert_allclose(res["point"], [1.5, 1.5], atol=1e-8)
        self.assertLess(res["final_step"], 1e-10)

    def test_deterministic_for_seed(self):
        f = lambda v: -float(np.sum(np.cos(v)))
        a = hill_climb(f, [0.3, 0.2], seed=8, step=0.1)
        b = hill_climb(f, [0.3, 0.2], seed=8, step=0.1)
        self.assertEqual(a["iterations"], b["iterations"])
        np.testing.assert_array_equal(a["point"], b["point"])
