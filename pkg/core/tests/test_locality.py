import numpy as np
from django.test import SimpleTestCase

from core.services.connectivity import components
from core.services.locality import (
    MalformedLogError,
    ScheduleError,
    SpacetimeEvent,
    audit,
    export_log,
    plant_signal,
    schedule_protocol,
    sites_isolated,
)
from core.services.parallel_lives import run_protocol


def ev(id, site, position, time, kind="button_press", deps=()):
    return SpacetimeEvent(id, site, position, time, kind, tuple(deps))


class AuditTests(SimpleTestCase):
    def test_local_chain_passes(self):
        log = [
            ev("A0", "A", 0.0, 1.0, "coin_flip"),
            ev("A1", "A", 0.0, 1.1, deps=["A0"]),
        ]
        report = audit(log)
        self.assertTrue(report.passed)
        self.assertEqual(report.n_events, 2)

    def test_spacelike_dependency_flagged(self):
        log = [
            ev("A0", "A", 0.0, 1.0, "coin_flip"),
            ev("B0", "B", 10.0, 1.0, "coin_flip"),
            ev("B1", "B", 10.0, 2.0, deps=["B0", "A0"]),
        ]
        report = audit(log)
        self.assertEqual(len(report.violations), 1)
        v = report.violations[0]
        self.assertEqual((v.event_id, v.dep_id), ("B1", "A0"))
        self.assertEqual(v.reasons, ("light_cone", "cross_site"))
        self.assertEqual(v.reason, "light_cone")
        self.assertAlmostEqual(v.required_time, 11.0)
        self.assertEqual(v.actual_time, 2.0)

    def test_timelike_cross_site_still_flagged(self):
        log = [
            ev("A0", "A", 0.0, 0.0, "coin_flip"),
            ev("B0", "B", 1.0, 5.0, deps=["A0"]),
        ]
        report = audit(log)
        self.assertEqual([v.reasons for v in report.violations], [("cross_site",)])

    def test_dependency_on_later_event_flagged(self):
        log = [
            ev("A0", "A", 0.0, 2.0, "coin_flip"),
            ev("A1", "A", 0.0, 1.0, deps=["A0"]),
        ]
        report = audit(log)
        self.assertEqual(report.violations[0].reasons, ("time_order", "light_cone"))

    def test_simultaneous_same_place_is_time_order_only(self):
        log = [
            ev("A0", "A", 0.0, 1.0, "coin_flip"),
            ev("A1", "A", 0.0, 1.0, deps=["A0"]),
        ]
        self.assertEqual(audit(log).violations[0].reasons, ("time_order",))

    def test_meeting_may_depend_on_both_sites(self):
        log = [
            ev("A0", "A", 0.0, 1.0, "depart"),
            ev("B0", "B", 10.0, 1.0, "depart"),
            ev("Meeting0", "Meeting", 5.0, 6.0, "meet", deps=["A0", "B0"]),
        ]
        self.assertTrue(audit(log).passed)

    def test_faster_signal_relaxes_cone(self):
        log = [
            ev("Meeting0", "Meeting", 5.0, 0.0, "meet"),
            ev("Meeting1", "Meeting", 6.0, 0.5, "match", deps=["Meeting0"]),
        ]
        self.assertFalse(audit(log, c=1.0).passed)
        self.assertTrue(audit(log, c=2.0).passed)

    def test_malformed_logs(self):
        with self.assertRaises(MalformedLogError):
            audit([ev("A0", "A", 0, 0, "coin_flip"), ev("A0", "A", 0, 1, "coin_flip")])
        with self.assertRaises(MalformedLogError):
            audit([ev("A0", "A", 0, 0, deps=["X"])])
        with self.assertRaises(MalformedLogError):
            audit([ev("A0", "A", 0, 0, deps=["A1"]), ev("A1", "A", 0, 1, deps=["A0"])])
        with self.assertRaises(ValueError):
            audit([], c=0.0)

    def test_event_validation(self):
        with self.assertRaises(MalformedLogError):
            ev("X0", "Mars", 0.0, 0.0)
        with self.assertRaises(MalformedLogError):
            ev("A0", "A", 0.0, 0.0, "teleport")
        with self.assertRaises(MalformedLogError):
            ev("A0", "A", 0.0, float("nan"))

    def test_report_serializes(self):
        d = audit([ev("A0", "A", 0, 1, "coin_flip"), ev("A1", "A", 0, 0.5, deps=["A0"])]).to_dict()
        self.assertFalse(d["passed"])
        self.assertEqual(d["violations"][0]["reasons"], ["time_order", "light_cone"])


class ProtocolLogTests(SimpleTestCase):
    def test_honest_protocol_passes(self):
        for x, y in [((0,), (1,)), ((1, 1, 0), (1, 0, 1)), ((1, None), (None, 0))]:
            record = run_protocol(x, y)
            self.assertTrue(audit(record.events).passed)
            self.assertTrue(sites_isolated(record.events))

    def test_event_ids_are_site_prefixed(self):
        record = run_protocol((1,), (0,))
        ids = {e.id for e in record.events}
        self.assertIn("A0", ids)
        self.assertIn("B0", ids)
        self.assertIn("Meeting0", ids)
        self.assertIn("Meeting1", ids)

    def test_planted_signal_detected(self):
        rng = np.random.default_rng(21)
        for _ in range(20):
            honest = run_protocol((1, 0), (1, 1)).events
            faulty = plant_signal(honest, rng)
            report = audit(faulty)
            self.assertEqual(len(report.violations), 1)
            self.assertIn("cross_site", report.violations[0].reasons)
            self.assertIn("light_cone", report.violations[0].reasons)
            self.assertFalse(sites_isolated(faulty))
            self.assertTrue(audit(honest).passed)

    def test_plant_needs_two_sites(self):
        log = [ev("A0", "A", 0.0, 0.0, "coin_flip"), ev("A1", "A", 0.0, 1.0, deps=["A0"])]
        with self.assertRaises(ValueError):
            plant_signal(log, np.random.default_rng(0))

    def test_export_log(self):
        rows = export_log(run_protocol((0,), (0,)).events)
        self.assertTrue(all(set(r) == {"id", "site", "position", "time", "kind", "deps"} for r in rows))


class ComponentTests(SimpleTestCase):
    def test_components_follow_node_order(self):
        comps = components(["a", "b", "c", "d"], [("c", "a"), ("d", "x")])
        self.assertEqual(comps, [["a", "c"], ["b"], ["d"]])

    def test_empty_graph(self):
        self.assertEqual(components([], []), [])


class ScheduleTests(SimpleTestCase):
    def test_plan_geometry(self):
        plan = schedule_protocol(10.0, [1.0, 2.0], c=1.0, flash_delay=0.3)
        self.assertEqual(plan.alice_position, 0.0)
        self.assertEqual(plan.bob_position, 10.0)
        self.assertEqual(plan.meeting_position, 5.0)
        self.assertAlmostEqual(plan.alice_depart, 2.6)
        self.assertAlmostEqual(plan.meet_time, 7.6)
        self.assertGreater(plan.match_time, plan.meet_time)
        for gap in plan.round_gaps():
            self.assertLess(gap, 10.0)

    def test_offset_shifts_bob(self):
        plan = schedule_protocol(10.0, [1.0], offset=2.0)
        self.assertEqual(plan.bob_rounds, (3.0,))
        self.assertAlmostEqual(plan.round_gaps()[0], 2.3)

    def test_infeasible_schedules(self):
        with self.assertRaises(ScheduleError):
            schedule_protocol(0.2, [1.0])
        with self.assertRaises(ScheduleError):
            schedule_protocol(10.0, [1.0], offset=9.8)
        with self.assertRaises(ScheduleError):
            schedule_protocol(10.0, [1.0, 1.2])
        with self.assertRaises(ScheduleError):
            schedule_protocol(10.0, [])
        with self.assertRaises(ScheduleError):
            schedule_protocol(-1.0, [1.0])
        with self.assertRaises(ScheduleError):
            schedule_protocol(10.0, [1.0], c=0.0)
