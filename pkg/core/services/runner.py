from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from core.conf import lives_setting

from . import qcore
from .chsh import (
    ChshSettings,
    DeterministicStrategy,
    box_chsh,
    complete_box,
    lhv_exhaustive,
    parallel_lives_chsh,
    quantum_chsh,
    quantum_optimize,
)
from .entanglement import (
    AngleBasis,
    apparatus_chain,
    classical_singlet_mixture,
    correlator,
    joint_measure_same_basis,
    rewrite_in_basis,
    singlet,
    unrecorded_measurement,
)
from .locality import (
    MalformedLogError,
    ScheduleError,
    SpacetimeEvent,
    audit,
    schedule_protocol,
)
from .parallel_lives import (
    exhaustive_matching_check,
    pr_success_probability,
    run_protocol,
)
from .reports import Check, Report
from .spectrum import top_eigenvalue
from .sweep import run_fault_suite, run_sweep

logger = logging.getLogger(__name__)

COMMANDS = ("mixtures", "purify", "singlet", "chsh", "parallel-lives", "audit", "choose", "all")
SAMPLED = frozenset({"purify", "singlet", "chsh", "parallel-lives", "audit", "choose", "all"})
FORMATS = ("json", "csv", "text")

TSIRELSON = 2.0 * np.sqrt(2.0)
QUANTUM_SUCCESS = float(np.cos(np.pi / 8.0) ** 2)


class UsageError(ValueError):
    """Błędne argumenty komendy (kod wyjścia 2)."""


@dataclass(frozen=True)
class RunConfig:
    """
    @brief Konfiguracja jednego uruchomienia komendy

    Ziarno jest obowiązkowe dla każdej komendy losującej; nigdy nie jest
    brane z zegara.
    """

    command: str
    seed: int | None = None
    rounds: int | None = None
    trials: int | None = None
    tol: float | None = None
    fmt: str = "json"
    out: str | None = None
    between: tuple[str, str] | None = None
    workers: int = 1

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command: {self.command}")
        if self.command in SAMPLED and self.seed is None:
            raise UsageError(f"command {self.command} requires --seed")
        if self.seed is not None and not 0 <= self.seed < 2 ** 64:
            raise UsageError("seed must be an unsigned 64-bit integer")
        if self.rounds is not None and self.rounds < 1:
            raise UsageError("--rounds must be >= 1")
        if self.trials is not None and self.trials < 1:
            raise UsageError("--trials must be >= 1")
        if self.tol is not None and not self.tol >= 0:
            raise UsageError("--tol must be >= 0")
        if self.fmt not in FORMATS:
            raise UsageError(f"unknown format: {self.fmt}")
        if self.workers < 1:
            raise UsageError("--workers must be >= 1")
        if self.command == "choose":
            if self.between is None or any(not opt.strip() for opt in self.between):
                raise UsageError("choose needs two non-empty options (--between A B)")
        return self

    def echo(self) -> dict:
        """Echo do raportu: bez ścieżki wyjścia i liczby procesów."""
        d = {"command": self.command, "seed": self.seed, "format": self.fmt}
        for k in ("rounds", "trials", "tol"):
            v = getattr(self, k)
            if v is not None:
                d[k] = v
        if self.between is not None:
            d["between"] = list(self.between)
        return d

    @property
    def atol(self) -> float:
        return float(self.tol) if self.tol is not None else float(lives_setting("ATOL"))


def _rng(cfg: RunConfig, stream: int) -> np.random.Generator:
    # osobny strumień na podkomendę, niezależny od tego, czy uruchamia ją `all`
    return np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(stream,)))


def _new_report(cfg: RunConfig, command: str | None = None) -> Report:
    return Report(
        command=command or cfg.command,
        config=cfg.echo(),
        schema_version=int(lives_setting("SCHEMA_VERSION")),
    )


def _random_basis(rng: np.random.Generator, dim: int) -> qcore.MeasurementBasis:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, _ = np.linalg.qr(z)
    return qcore.MeasurementBasis.from_rows(q.T)


# ---------------------------------------------------------------------------
# mixtures
# ---------------------------------------------------------------------------

def cmd_mixtures(cfg: RunConfig) -> Report:
    """
    @brief Mieszaniny o tej samej macierzy gęstości

    𝓔₁, 𝓔₂, 𝓔₃ oraz mieszanina stanów Bella vs klasyczne pary bitów.
    """
    tol = cfg.atol
    rep = _new_report(cfg, "mixtures")

    named = {
        "E1": qcore.computational_mixture(),
        "E2": qcore.hadamard_mixture(),
        "E3": qcore.trine_mixture(),
        "bell": qcore.bell_mixture(),
        "classical_pairs": qcore.classical_pairs_mixture(),
    }
    rho = {k: qcore.density_of(m) for k, m in named.items()}

    rep.add(
        Check.deviation_within("E1_equals_E2", qcore.density_distance(rho["E1"], rho["E2"]), tol),
        Check.deviation_within("E1_equals_E3", qcore.density_distance(rho["E1"], rho["E3"]), tol),
        Check.deviation_within("E2_equals_E3", qcore.density_distance(rho["E2"], rho["E3"]), tol),
        Check.deviation_within(
            "bell_equals_classical_pairs",
            qcore.density_distance(rho["bell"], rho["classical_pairs"]),
            tol,
            note="both equal I/4",
        ),
    )
    for k in ("E1", "E2", "E3"):
        rep.add(Check.flag(f"{k}_not_pure", not qcore.is_pure_by_peres(named[k])))

    rep.tables["mixtures"] = [
        {
            "mixture": k,
            "members": len(named[k].entries),
            "purity": qcore.purity(rho[k]),
            "top_eigenvalue": top_eigenvalue(rho[k].entries),
            "pure": qcore.is_pure_by_peres(named[k]),
        }
        for k in named
    ]
    rep.data["density"] = {k: r.to_json() for k, r in rho.items()}
    return rep


# ---------------------------------------------------------------------------
# purify
# ---------------------------------------------------------------------------

def cmd_purify(cfg: RunConfig) -> Report:
    """
    @brief Puryfikacja i ślad częściowy, czystość wg Peresa, reguła Borna
    """
    tol = cfg.atol
    eig_tol = float(lives_setting("EIG_ATOL"))
    rng = _rng(cfg, 1)
    rep = _new_report(cfg, "purify")

    n = int(lives_setting("PURIFY_MIXTURES"))
    worst = 0.0
    peres_agree = True
    born_worst = 0.0
    for _ in range(n):
        m = qcore.random_mixture(rng)
        psi = qcore.purify(m)
        back = qcore.partial_trace(qcore.density_of_state(psi), [0])
        worst = max(worst, qcore.density_distance(back, qcore.density_of(m)))

        rank_one = int(np.linalg.matrix_rank(qcore.density_of(m).entries, tol=eig_tol)) == 1
        peres_agree &= qcore.is_pure_by_peres(m, eig_tol) == rank_one

        s = qcore.random_state(rng, m.dims[0] * 2)
        s = qcore.PureState((m.dims[0], 2), s.amplitudes)
        probs = qcore.born_probabilities(s, 0, _random_basis(rng, m.dims[0]))
        born_worst = max(born_worst, abs(float(probs.sum()) - 1.0))

    rep.add(
        Check.deviation_within("purification_round_trip", worst, tol, note=f"{n} random mixtures, k<=5, d<=4"),
        Check.flag("peres_agrees_with_rank", peres_agree),
        Check.deviation_within("born_completeness", born_worst, tol),
    )

    e1 = qcore.computational_mixture()
    phi_plus = qcore.PureState((2, 2), [1 / np.sqrt(2), 0, 0, 1 / np.sqrt(2)])
    rep.add(
        Check.deviation_within("purify_E1_is_bell_state", qcore.phase_distance(qcore.purify(e1), phi_plus), tol),
        Check.close(
            "purify_pure_is_product",
            qcore.purity(qcore.partial_trace(qcore.density_of_state(qcore.purify(qcore.Mixture.of((qcore.ket("0"), 1.0)))), [0])),
            1.0,
            tol,
        ),
        Check.flag("purify_E3_dims", qcore.purify(qcore.trine_mixture()).dims == (2, 3)),
    )

    h0 = qcore.hadamard_basis().vectors[0]
    rep.add(
        Check.flag("peres_E1_mixed", not qcore.is_pure_by_peres(e1)),
        Check.flag("peres_E2_mixed", not qcore.is_pure_by_peres(qcore.hadamard_mixture())),
        Check.flag("peres_H0_pure", qcore.is_pure_by_peres(qcore.Mixture.of((h0, 1.0)))),
    )

    half = qcore.density_of(e1)
    uni = 0.0
    for _ in range(50):
        for v in _random_basis(rng, 2).vectors:
            uni = max(uni, abs(qcore.outcome_probability(half, v) - 0.5))
    rep.add(Check.deviation_within("maximally_mixed_universality", uni, tol, note="50 random qubit bases"))

    rec = qcore.measure(h0, 0, qcore.hadamard_basis(), rng)
    rep.add(
        Check.close("H0_in_H_basis_outcome", rec.outcome_index, 0, 0),
        Check.close("H0_in_H_basis_probability", rec.probability, 1.0, tol),
    )
    comp = qcore.born_probabilities(h0, 0, qcore.computational_basis())
    rep.add(Check.deviation_within("H0_in_computational_basis_half", float(np.max(np.abs(comp - 0.5))), tol))

    seq = []
    for _ in range(2):
        r = _rng(cfg, 2)
        seq.append([qcore.measure(h0, 0, qcore.computational_basis(), r).outcome_index for _ in range(100)])
    rep.add(Check.flag("measurement_deterministic_given_seed", seq[0] == seq[1]))
    return rep


# ---------------------------------------------------------------------------
# singlet
# ---------------------------------------------------------------------------

def cmd_singlet(cfg: RunConfig) -> Report:
    """
    @brief Antykorelacja singletu w każdej bazie, kontrast z 𝓔₀, łańcuch aparatów
    """
    tol = cfg.atol
    n = cfg.trials if cfg.trials is not None else int(lives_setting("SINGLET_TRIALS"))
    rng = _rng(cfg, 3)
    rep = _new_report(cfg, "singlet")

    n_bases = min(int(lives_setting("SINGLET_BASES")), n)
    thetas = rng.uniform(0.0, np.pi, size=n_bases)

    equal = 0
    left_zero = 0
    for i, th in enumerate(thetas):
        per = n // n_bases + (1 if i < n % n_bases else 0)
        for _ in range(per):
            a, b = joint_measure_same_basis(float(th), rng)
            equal += int(a == b)
            left_zero += int(a == 0)

    equal_rev = 0
    for i in range(n):
        a, b = joint_measure_same_basis(float(thetas[i % n_bases]), rng, left_first=False)
        equal_rev += int(a == b)

    e0 = classical_singlet_mixture()
    e0_equal = sum(
        int(a == b)
        for a, b in (joint_measure_same_basis(np.pi / 4.0, rng, source=e0) for _ in range(n))
    )

    sigma = 0.5 / np.sqrt(n)
    rep.add(
        Check.close("equal_outcomes", equal, 0, 0, note=f"{n} trials over {n_bases} random bases"),
        Check.close("equal_outcomes_right_first", equal_rev, 0, 0),
        Check.close("left_marginal", left_zero / n, 0.5, 3.0 * sigma, note="3 sigma"),
        Check.close("E0_contrast_equal_fraction", e0_equal / n, 0.5, max(0.02, 4.0 * sigma),
                    note="classical mixture under the Hadamard-like basis"),
    )

    s = singlet()
    rho = qcore.density_of_state(s)
    half = qcore.density_of(qcore.computational_mixture())
    basis_dev = max(qcore.phase_distance(rewrite_in_basis(float(t)), s) for t in rng.uniform(0, 2 * np.pi, 50))
    nosig = max(
        qcore.density_distance(unrecorded_measurement(s, AngleBasis(float(t)), 0), half)
        for t in rng.uniform(0, 2 * np.pi, 50)
    )
    rep.add(
        Check.deviation_within("basis_invariance", basis_dev, tol, note="50 random angles"),
        Check.deviation_within("reduced_left_maximally_mixed", qcore.density_distance(qcore.partial_trace(rho, [0]), half), tol),
        Check.deviation_within("reduced_right_maximally_mixed", qcore.density_distance(qcore.partial_trace(rho, [1]), half), tol),
        Check.deviation_within("no_signalling", nosig, tol, note="unrecorded left measurement in 50 bases"),
    )

    pairs = rng.uniform(0, 2 * np.pi, size=(50, 2))
    formula_dev = max(
        abs(correlator(float(a), float(b)).value + np.cos(2.0 * (a - b))) for a, b in pairs
    )
    within = all(abs(correlator(float(a), float(b)).value) <= 1.0 + tol for a, b in pairs)
    rep.add(
        Check.close("correlator_same_basis", correlator(0.4, 0.4).value, -1.0, tol),
        Check.close("correlator_quarter_pi", correlator(0.4, 0.4 + np.pi / 4).value, 0.0, tol),
        Check.close("correlator_half_pi", correlator(0.4, 0.4 + np.pi / 2).value, 1.0, tol),
        Check.deviation_within("correlator_matches_cosine", formula_dev, tol),
        Check.flag("correlator_bounded", within),
    )

    for theta in (0.0, 0.3):
        chain = apparatus_chain(theta, tol)
        label = f"chain_{theta:g}"
        rep.add(*(c.renamed(label) for c in chain.checks))
        rep.data[label] = chain.to_dict()

    rep.tables["singlet"] = [
        {"quantity": "equal outcomes (singlet)", "value": equal, "expected": 0},
        {"quantity": "equal outcomes (E0)", "value": e0_equal, "expected": n // 2},
        {"quantity": "trials", "value": n, "expected": n},
    ]
    return rep


# ---------------------------------------------------------------------------
# chsh
# ---------------------------------------------------------------------------

def cmd_chsh(cfg: RunConfig) -> Report:
    """
    @brief Hierarchia 2 / 2√2 / 4 i 75% / ≈85% / 100%
    """
    rng = _rng(cfg, 4)
    rep = _new_report(cfg, "chsh")

    lhv = lhv_exhaustive()
    zero = box_chsh(DeterministicStrategy((0, 0), (0, 0)).box())
    rep.add(
        Check.close("lhv_strategies", lhv.n_strategies, 16, 0),
        Check.close("lhv_max_S", lhv.max_S, 2.0, 0),
        Check.close("lhv_min_S", lhv.min_S, -2.0, 0),
        Check.close("lhv_max_success", lhv.max_success, 0.75, 0),
        Check.close("lhv_constant_zero_success", zero[1], 0.75, 0),
        Check.flag("lhv_S_success_consistent", lhv.consistent),
    )

    opt = quantum_optimize(
        grid_steps=int(lives_setting("GRID_STEPS")),
        resolution=float(lives_setting("GRID_RESOLUTION")),
        seed=cfg.seed,
    )
    restricted = quantum_optimize(
        restrict_a_prime=True,
        grid_steps=int(lives_setting("GRID_STEPS")),
        resolution=float(lives_setting("GRID_RESOLUTION")),
        seed=cfg.seed,
    )
    q = quantum_chsh(opt.settings, n_samples=int(lives_setting("MC_SAMPLES")), rng=rng)
    rep.add(
        Check.close("quantum_S_max", opt.S_max, TSIRELSON, 1e-6),
        Check.close("quantum_success", opt.success, QUANTUM_SUCCESS, 1e-6),
        Check.close("quantum_S_at_optimum", q.S, opt.S_max, 1e-9),
        Check.close("quantum_S_success_consistent", q.S, 8.0 * q.success_prob - 4.0, 1e-9),
        Check.close("quantum_restricted_S_max", restricted.S_max, 2.0, 1e-6, note="A' = A"),
    )
    for i, (exact, sampled) in enumerate(zip(q.per_term, q.cross_check)):
        rep.add(Check.close(f"quantum_mc_term_{i}", sampled.value, exact.value, 4.0 * sampled.std_err, note="4 std_err"))

    degenerate = quantum_chsh(ChshSettings.from_angles(0.7, 0.7, 0.7, 0.7))
    rep.add(Check.close("quantum_all_angles_equal", degenerate.S, -2.0, cfg.atol))

    n_trials = cfg.trials if cfg.trials is not None else int(lives_setting("CHSH_TRIALS"))
    pl = parallel_lives_chsh(
        n_trials,
        rng,
        audit_eps=float(lives_setting("AUDIT_EPS")),
        **_protocol_kwargs(),
    )
    rep.add(
        Check.close("parallel_lives_S", pl.S, 4.0, 0),
        Check.close("parallel_lives_success", pl.success_prob, 1.0, 0),
        Check.close("parallel_lives_S_success_consistent", pl.S, 8.0 * pl.success_prob - 4.0, 0),
        Check.close("parallel_lives_audits_passed", pl.meta["audits_passed"], n_trials, 0),
        Check.flag("hierarchy", lhv.max_S < opt.S_max < pl.S),
    )

    rep.tables["hierarchy"] = [
        {"class": "lhv", "S": lhv.max_S, "abs_S": abs(lhv.max_S), "success": lhv.max_success,
         "tolerance": 0.0, "passed": lhv.max_S == 2.0 and lhv.max_success == 0.75},
        {"class": "quantum", "S": opt.S_max, "abs_S": abs(opt.S_max), "success": opt.success,
         "tolerance": 1e-6, "passed": abs(opt.S_max - TSIRELSON) <= 1e-6},
        {"class": "parallel_lives", "S": pl.S, "abs_S": abs(pl.S), "success": pl.success_prob,
         "tolerance": 0.0, "passed": pl.S == 4.0 and pl.success_prob == 1.0},
    ]
    rep.data["quantum"] = {"optimum": opt.to_dict(), "result": q.to_dict(), "restricted": restricted.to_dict()}
    rep.data["parallel_lives"] = pl.to_dict()
    rep.data["lhv_note"] = "shared randomness is a convex mixture of deterministic strategies and cannot exceed their maximum"
    rep.data["sign_convention"] = {"0": 1, "1": -1}
    return rep


# ---------------------------------------------------------------------------
# parallel lives + audit
# ---------------------------------------------------------------------------

def _protocol_kwargs() -> dict:
    return {
        "separation": float(lives_setting("SEPARATION")),
        "c": float(lives_setting("SIGNAL_SPEED")),
        "flash_delay": float(lives_setting("FLASH_DELAY")),
    }


def _sweep_kwargs() -> dict:
    return {**_protocol_kwargs(), "audit_eps": float(lives_setting("AUDIT_EPS"))}


def _lives_sweep(cfg: RunConfig) -> list[dict]:
    n = cfg.trials if cfg.trials is not None else int(lives_setting("LIVES_EXPERIMENTS"))
    max_rounds = cfg.rounds if cfg.rounds is not None else int(lives_setting("MAX_ROUNDS"))
    return run_sweep(cfg.seed, n, max_rounds, workers=cfg.workers, **_sweep_kwargs())


def cmd_parallel_lives(cfg: RunConfig, summaries: list[dict] | None = None) -> Report:
    """
    @brief Seria eksperymentów równoległych żyć i pełny przegląd łączeń
    """
    rep = _new_report(cfg, "parallel-lives")
    max_rounds = cfg.rounds if cfg.rounds is not None else int(lives_setting("MAX_ROUNDS"))
    summaries = summaries if summaries is not None else _lives_sweep(cfg)
    n = len(summaries)

    def count(key: str) -> int:
        return sum(1 for s in summaries if s[key])

    box, filled = complete_box(np.sum([np.array(s["box"]) for s in summaries], axis=0), **_protocol_kwargs())
    s_val, success = box_chsh(box)

    rep.add(
        Check.close("experiments_all_pairs_satisfied", count("all_pairs_satisfied"), n, 0),
        Check.close("min_success", min(s["success"] for s in summaries), 1.0, 0),
        Check.close("matching_bijection", count("bijection"), n, 0),
        Check.deviation_within("pair_weights_sum_to_one", max(abs(s["weight_total"] - 1.0) for s in summaries), 1e-12),
        Check.close("marginals_uniform", count("marginals_uniform"), n, 0),
        Check.close("unilateral_matches_global", count("unilateral_matches"), n, 0),
        Check.close("order_independent", count("order_independent"), n, 0),
        Check.close("honest_audits_passed", count("audit_passed"), n, 0),
        Check.close("sites_isolated", count("isolated"), n, 0),
        Check.close("S", s_val, 4.0, 0),
        Check.close("success", success, 1.0, 0),
        Check.close("S_success_consistent", s_val, 8.0 * success - 4.0, 0),
    )

    again = run_sweep(cfg.seed, min(n, 20), max_rounds, workers=1, **_sweep_kwargs())
    rep.add(Check.flag("deterministic", again == summaries[: len(again)]))

    for r in range(1, max_rounds + 1):
        checked, ok = exhaustive_matching_check(r)
        rep.add(Check.flag(f"exhaustive_matching_n{r}", ok, note=f"{checked} input assignments"))

    stub = [pr_success_probability(run_protocol([x], [y], rule="identity")) for x in (0, 1) for y in (0, 1)]
    rep.add(Check.close("identity_stub_success", float(np.mean(stub)), 0.75, 0))

    one_sided = run_protocol([1, 0], [None, 1])
    rep.add(
        Check.flag("one_sided_flagged", one_sided.one_sided),
        Check.close("one_sided_success", pr_success_probability(one_sided), 1.0, 0),
        Check.close("one_sided_weight_total", sum(p.pair_weight for p in one_sided.pairs), 1.0, 0),
    )

    rep.tables["by_rounds"] = [
        {
            "rounds": r,
            "experiments": sum(1 for s in summaries if s["rounds"] == r),
            "min_success": min((s["success"] for s in summaries if s["rounds"] == r), default=None),
            "events": sum(s["n_events"] for s in summaries if s["rounds"] == r),
            "violations": sum(s["violations"] for s in summaries if s["rounds"] == r),
        }
        for r in range(1, max_rounds + 1)
    ]
    rep.data["conventions"] = {"green": 0, "red": 1, "bubble_weights": "halving", "pair_weight": "wA * wB * 2**j, j = joint rounds"}
    rep.data["filled_pairs"] = filled
    rep.data["example"] = run_protocol([1], [1]).to_dict(include_events=True)
    return rep


def _planted_example() -> list[SpacetimeEvent]:
    rec = run_protocol([0], [0])
    bob_coin = next(e for e in rec.events if e.site == "B" and e.kind == "coin_flip")
    out = []
    for e in rec.events:
        if e.site == "A" and e.kind == "split":
            e = SpacetimeEvent(e.id, e.site, e.position, e.time, e.kind, e.deps + (bob_coin.id,))
        out.append(e)
    return out


def cmd_audit(cfg: RunConfig, summaries: list[dict] | None = None) -> Report:
    """
    @brief Audyt przyczynowy: uczciwe logi, wstrzyknięte sygnały, harmonogramy
    """
    rep = _new_report(cfg, "audit")
    max_rounds = cfg.rounds if cfg.rounds is not None else int(lives_setting("MAX_ROUNDS"))
    summaries = summaries if summaries is not None else _lives_sweep(cfg)
    n = len(summaries)

    rep.add(
        Check.close("honest_logs_passed", sum(1 for s in summaries if s["audit_passed"]), n, 0),
        Check.close("honest_violations", sum(s["violations"] for s in summaries), 0, 0),
        Check.close("cross_site_isolation", sum(1 for s in summaries if s["isolated"]), n, 0),
    )

    n_faults = int(lives_setting("FAULTS"))
    faults = run_fault_suite(cfg.seed, n_faults, max_rounds,
                             workers=cfg.workers, **_sweep_kwargs())
    rep.add(
        Check.close("faults_detected", sum(1 for f in faults if f["violations"] >= 1), n_faults, 0,
                    note="planted cross-site dependencies"),
        Check.close("faults_break_isolation", sum(1 for f in faults if not f["isolated"]), n_faults, 0),
    )

    eps = float(lives_setting("AUDIT_EPS"))
    planted = audit(_planted_example(), eps=eps)
    rep.add(
        Check.close("planted_split_violations", len(planted.violations), 1, 0),
        Check.flag("planted_split_is_light_cone", bool(planted.violations) and "light_cone" in planted.violations[0].reasons),
    )

    plan = schedule_protocol(10.0, [1.0, 2.0, 3.0], c=1.0)
    rep.add(
        Check.flag("schedule_simultaneous_spacelike", all(g < 10.0 for g in plan.round_gaps())),
        Check.close("schedule_meeting_position", plan.meeting_position, 5.0, 0),
        Check.at_least("schedule_meeting_time", plan.meet_time, 3.0 + 5.0),
    )
    try:
        schedule_protocol(10.0, [1.0, 2.0, 3.0], c=1.0, offset=20.0)
        rejected = False
    except ScheduleError:
        rejected = True
    rep.add(Check.flag("schedule_offset_20_rejected", rejected))

    cyc = [
        SpacetimeEvent("A0", "A", 0.0, 1.0, "split", ("A1",)),
        SpacetimeEvent("A1", "A", 0.0, 2.0, "split", ("A0",)),
    ]
    try:
        audit(cyc, eps=eps)
        cyc_rejected = False
    except MalformedLogError:
        cyc_rejected = True
    rep.add(Check.flag("cyclic_log_rejected", cyc_rejected))

    rep.tables["faults"] = [
        {"fault": f["index"], "rounds": f["rounds"], "violations": f["violations"], "reasons": ",".join(f["reasons"])}
        for f in faults
    ]
    rep.data["planted_example"] = planted.to_dict()
    return rep


# ---------------------------------------------------------------------------
# choose + all
# ---------------------------------------------------------------------------

def cmd_choose(option_a: str, option_b: str, seed: int) -> str:
    """
    @brief Wybór kwantowy: pomiar H|0⟩ w bazie obliczeniowej

    Wynik 0 wybiera pierwszą opcję, 1 drugą. Deterministyczny dla ziarna.

    @param option_a Pierwsza opcja
    @param option_b Druga opcja
    @param seed Ziarno
    @return Tekst z wybraną opcją i bilansem amplitud
    @throws UsageError Gdy któraś opcja jest pusta
    """
    if not option_a.strip() or not option_b.strip():
        raise UsageError("choose needs two non-empty options")

    h0 = qcore.hadamard_basis().vectors[0]
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(7,)))
    rec = qcore.measure(h0, 0, qcore.computational_basis(), rng)
    chosen = (option_a, option_b)[rec.outcome_index]
    amp = h0.amplitudes

    return (
        f"{chosen}\n"
        f"  |{option_a}> amplitude {amp[0].real:.6f}, probability {abs(amp[0]) ** 2:.6f}\n"
        f"  |{option_b}> amplitude {amp[1].real:.6f}, probability {abs(amp[1]) ** 2:.6f}\n"
        f"  outcome {rec.outcome_index} observed; both branches persist in the state vector\n"
    )


def cmd_all(cfg: RunConfig) -> Report:
    rep = _new_report(cfg, "all")
    summaries = _lives_sweep(cfg)
    parts: list[tuple[str, Callable[[], Report]]] = [
        ("mixtures", lambda: cmd_mixtures(cfg)),
        ("purify", lambda: cmd_purify(cfg)),
        ("singlet", lambda: cmd_singlet(cfg)),
        ("chsh", lambda: cmd_chsh(cfg)),
        ("parallel-lives", lambda: cmd_parallel_lives(cfg, summaries)),
        ("audit", lambda: cmd_audit(cfg, summaries)),
    ]
    for name, fn in parts:
        rep.merge(fn(), name)
    return rep


REPORT_COMMANDS: dict[str, Callable[[RunConfig], Report]] = {
    "mixtures": cmd_mixtures,
    "purify": cmd_purify,
    "singlet": cmd_singlet,
    "chsh": cmd_chsh,
    "parallel-lives": cmd_parallel_lives,
    "audit": cmd_audit,
    "all": cmd_all,
}


def run_command(cfg: RunConfig) -> tuple[Report | str, int]:
    """
    @brief Uruchamia komendę wg nazwy

    @param cfg Konfiguracja (walidowana tutaj)
    @return (raport lub tekst dla `choose`, czas w ms)
    @throws UsageError Przy błędnych argumentach
    """
    cfg.validate()
    t0 = time.perf_counter()

    if cfg.command == "choose":
        a, b = cfg.between
        result: Report | str = cmd_choose(a, b, cfg.seed)
    else:
        result = REPORT_COMMANDS[cfg.command](cfg)

    ms = int((time.perf_counter() - t0) * 1000)
    if isinstance(result, Report):
        logger.info("%s: %s in %d ms", cfg.command, "pass" if result.passed else "FAIL", ms)
    return result, ms
