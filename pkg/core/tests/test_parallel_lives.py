import numpy as np
from django.test import SimpleTestCase

from core.services.locality import ScheduleError
from core.services.parallel_lives import (
    ALICE,
    BOB,
    Bubble,
    depart,
    exhaustive_matching_check,
    fresh_world,
    is_bijection,
    match_bubbles,
    output_marginals,
    pr_success_probability,
    press_button,
    run_experiment,
    run_protocol,
    skip_round,
    unilateral_partner,
)


class WorldTests(SimpleTestCase):
    def test_press_splits_every_bubble(self):
        w = fresh_world(ALICE, "A", 0.0)
        w = press_button(w, 1)
        w = press_button(w, 0)
        self.assertEqual(len(w.bubbles), 4)
        self.assertEqual({b.weight for b in w.bubbles}, {0.25})
        self.assertEqual(w.total_weight(), 1.0)
        self.assertEqual({b.outputs for b in w.bubbles}, {(0, 0), (0, 1), (1, 0), (1, 1)})
        self.assertTrue(all(tuple(x for x, _ in b.transcript) == (1, 0) for b in w.bubbles))

    def test_press_events(self):
        w = press_button(fresh_world(BOB, "B", 10.0), 0, time=1.0, flash_delay=0.4)
        kinds = [e.kind for e in w.events]
        self.assertEqual(kinds, ["coin_flip", "button_press", "split", "light_flash", "light_flash"])
        self.assertEqual([e.id for e in w.events], ["B0", "B1", "B2", "B3", "B4"])
        self.assertEqual([e.time for e in w.events], [1.0, 1.1, 1.2, 1.4, 1.4])
        self.assertEqual(w.events[0].deps, ())
        self.assertTrue(all(e.site == "B" and e.position == 10.0 for e in w.events))
        self.assertAlmostEqual(w.clock, 1.4)

    def test_second_press_depends_on_previous_local_event(self):
        w = press_button(fresh_world(ALICE, "A", 0.0), 0, time=1.0)
        last = w.last_event_id
        w = press_button(w, 1, time=2.0)
        press = next(e for e in w.events if e.kind == "button_press" and e.time > 2.0)
        self.assertIn(last, press.deps)

    def test_press_validation(self):
        w = fresh_world(ALICE, "A", 0.0)
        with self.assertRaises(ValueError):
            press_button(w, 2)
        w = press_button(w, 0, time=1.0)
        with self.assertRaises(ValueError):
            press_button(w, 0, time=1.0)
        with self.assertRaises(ValueError):
            depart(w, 0.5)
        with self.assertRaises(ValueError):
            fresh_world("Eve", "A", 0.0)
        with self.assertRaises(ValueError):
            Bubble(ALICE, 0.0)

    def test_skip_round_keeps_bubbles(self):
        w = skip_round(fresh_world(ALICE, "A", 0.0))
        self.assertEqual(w.rounds, 1)
        self.assertEqual(w.presses, 0)
        self.assertEqual(len(w.bubbles), 1)


class MatchingTests(SimpleTestCase):
    def test_single_round_examples(self):
        for x, y in [(0, 0), (0, 1), (1, 0), (1, 1)]:
            record = run_protocol((x,), (y,))
            self.assertEqual(len(record.pairs), 2)
            for p in record.pairs:
                (xa, a, yb, b), = p.rounds
                self.assertEqual(a ^ b, x & y)
                self.assertEqual(p.pair_weight, 0.5)
            self.assertEqual(pr_success_probability(record), 1.0)

    def test_bijection_and_weights(self):
        rng = np.random.default_rng(5)
        for n in (1, 2, 3, 4):
            record = run_experiment(n, rng)
            self.assertTrue(is_bijection(record.alice, record.bob, list(record.pairs)))
            self.assertEqual(len(record.pairs), 2 ** n)
            self.assertEqual(sum(p.pair_weight for p in record.pairs), 1.0)
            self.assertTrue(all(p.satisfied for p in record.pairs))

    def test_exhaustive_small(self):
        for n in (1, 2, 3):
            checked, ok = exhaustive_matching_check(n)
            self.assertEqual(checked, 4 ** n)
            self.assertTrue(ok)

    def test_exhaustive_up_to_six_rounds(self):
        for n in (4, 5, 6):
            checked, ok = exhaustive_matching_check(n)
            self.assertEqual(checked, 4 ** n)
            self.assertTrue(ok, n)

    def test_identity_rule_fails_on_both_ones(self):
        record = run_protocol((1,), (1,), rule="identity")
        self.assertEqual(pr_success_probability(record), 0.0)
        record = run_protocol((0,), (1,), rule="identity")
        self.assertEqual(pr_success_probability(record), 1.0)
        self.assertFalse(exhaustive_matching_check(1, rule="identity")[1])

    def test_round_mismatch_and_bad_rule(self):
        a = press_button(fresh_world(ALICE, "A", 0.0), 0)
        b = fresh_world(BOB, "B", 1.0)
        with self.assertRaises(ValueError):
            match_bubbles(a, b)
        with self.assertRaises(ValueError):
            match_bubbles(a, press_button(b, 0), rule="xor")

    def test_unilateral_partner_agrees_with_join(self):
        x, y = (1, 0, 1), (1, 1, 1)
        record = run_protocol(x, y)
        for p in record.pairs:
            self.assertEqual(unilateral_partner(p.alice_bubble, x, y), p.bob_bubble.outputs)


class MarginalTests(SimpleTestCase):
    def test_marginals_are_half(self):
        rng = np.random.default_rng(9)
        for n in (1, 3):
            record = run_experiment(n, rng)
            for agent in (ALICE, BOB):
                self.assertEqual(output_marginals(record, agent), [0.5] * n)

    def test_order_independence(self):
        x, y = (1, 0, 1), (0, 1, 1)
        base = run_protocol(x, y).to_dict(include_events=True)
        for order in ("alice_first", "bob_first"):
            self.assertEqual(run_protocol(x, y, order=order).to_dict(include_events=True), base)


class OneSidedTests(SimpleTestCase):
    def test_one_sided_round(self):
        record = run_protocol((1, 0), (None, 1))
        self.assertTrue(record.one_sided)
        self.assertEqual(record.joint_rounds, 1)
        self.assertEqual(len(record.alice.bubbles), 4)
        self.assertEqual(len(record.bob.bubbles), 2)
        self.assertEqual(len(record.pairs), 4)
        self.assertEqual(sum(p.pair_weight for p in record.pairs), 1.0)
        self.assertEqual(pr_success_probability(record), 1.0)

    def test_no_joint_rounds(self):
        record = run_protocol((1,), (None,))
        self.assertEqual(record.joint_rounds, 0)
        self.assertEqual(len(record.pairs), 2)
        with self.assertRaises(ValueError):
            pr_success_probability(record)


class ProtocolValidationTests(SimpleTestCase):
    def test_inputs(self):
        with self.assertRaises(ValueError):
            run_protocol((), ())
        with self.assertRaises(ValueError):
            run_protocol((0,), (0, 1))
        with self.assertRaises(ValueError):
            run_protocol((0,), (0,), order="random")
        with self.assertRaises(ValueError):
            run_experiment(0, np.random.default_rng(0))

    def test_infeasible_separation(self):
        with self.assertRaises(ScheduleError):
            run_protocol((0,), (0,), separation=0.1)

    def test_deterministic_for_seed(self):
        a = run_experiment(4, np.random.default_rng(123)).to_dict()
        b = run_experiment(4, np.random.default_rng(123)).to_dict()
        self.assertEqual(a, b)
