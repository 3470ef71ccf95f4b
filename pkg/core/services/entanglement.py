from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .qcore import (
    ATOL,
    Mixture,
    MeasurementBasis,
    PureState,
    StateError,
    basis_state,
    daemon_emit,
    density_of,
    density_of_state,
    density_distance,
    ket,
    measure,
    partial_trace,
    phase_distance,
    tensor,
)
from .reports import Check

logger = logging.getLogger(__name__)

BASIS_ATOL = 1e-12

# wynik pomiaru -> znak w korelatorze
SIGNS = np.array([1.0, -1.0])

# stany rejestru aparatu
READY, RECORDED_PSI, RECORDED_PHI = 0, 1, 2


@dataclass(frozen=True)
class AngleBasis:
    """
    @brief Baza jednego kubitu obrócona o kąt θ

    |ψ⟩ = cosθ|0⟩ + sinθ|1⟩, |φ⟩ = -sinθ|0⟩ + cosθ|1⟩.
    θ = 0 to baza obliczeniowa, θ = π/4 to (z dokładnością do znaków) baza H.
    """

    theta: float

    def __post_init__(self):
        t = float(self.theta)
        if not np.isfinite(t):
            raise StateError(f"angle must be finite, got {self.theta!r}")
        object.__setattr__(self, "theta", t)
        m = self.matrix()
        if float(np.max(np.abs(m @ m.T - np.eye(2)))) > BASIS_ATOL:
            raise StateError("angle basis is not orthonormal")

    def matrix(self) -> np.ndarray:
        return rotation_rows(self.theta)

    @property
    def psi(self) -> PureState:
        return PureState((2,), self.matrix()[0])

    @property
    def phi(self) -> PureState:
        return PureState((2,), self.matrix()[1])

    def as_measurement_basis(self) -> MeasurementBasis:
        return MeasurementBasis(2, (self.psi, self.phi))


def _as_angle_basis(theta: AngleBasis | float) -> AngleBasis:
    return theta if isinstance(theta, AngleBasis) else AngleBasis(float(theta))


def rotation_rows(theta) -> np.ndarray:
    """
    @brief Wektory bazy obróconej jako wiersze macierzy, wektorowo po θ

    @param theta Kąt lub tablica kątów
    @return Tablica o kształcie theta.shape + (2, 2)
    """
    t = np.asarray(theta, dtype=np.float64)
    c, s = np.cos(t), np.sin(t)
    return np.stack([np.stack([c, s], axis=-1), np.stack([-s, c], axis=-1)], axis=-2)


@dataclass(frozen=True)
class CorrelatorEstimate:
    value: float
    method: str
    n_samples: int
    std_err: float

    def __post_init__(self):
        if self.method not in ("analytic", "sampled"):
            raise ValueError(f"unknown correlator method: {self.method}")
        if abs(self.value) > 1.0 + 3.0 * self.std_err + 1e-12:
            raise ValueError(f"correlator out of range: {self.value!r}")

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "method": self.method,
            "n_samples": self.n_samples,
            "std_err": self.std_err,
        }


# ---------------------------------------------------------------------------
# singlet
# ---------------------------------------------------------------------------

def singlet() -> PureState:
    """|Ψ⁻⟩ = (|01⟩ - |10⟩)/√2"""
    h = 1.0 / np.sqrt(2.0)
    return PureState((2, 2), [0.0, h, -h, 0.0])


def classical_singlet_mixture() -> Mixture:
    """
    @brief Klasyczna mieszanina {(|01⟩,½), (|10⟩,½)}

    Daje te same antykorelacje co singlet w bazie obliczeniowej,
    ale w każdej innej bazie wyniki są nieskorelowane.
    """
    return Mixture.of((ket("01"), 0.5), (ket("10"), 0.5))


def rewrite_in_basis(theta: AngleBasis | float) -> PureState:
    """
    @brief Singlet zapisany w bazie {|ψ⟩, |φ⟩}: (|ψ⟩|φ⟩ - |φ⟩|ψ⟩)/√2

    Wektor jest budowany jawnie z iloczynów tensorowych, więc porównanie
    z singlet() jest prawdziwym testem niezależności od bazy.

    @param theta Kąt bazy lub AngleBasis
    @return PureState na dims (2, 2)
    """
    b = _as_angle_basis(theta)
    psi, phi = b.psi, b.phi
    v = tensor(psi, phi).amplitudes - tensor(phi, psi).amplitudes
    return PureState((2, 2), v / np.sqrt(2.0))


def joint_measure_same_basis(
    theta: AngleBasis | float,
    rng: np.random.Generator,
    source: PureState | Mixture | None = None,
    left_first: bool = True,
) -> tuple[int, int]:
    """
    @brief Pomiar obu cząstek w tej samej bazie, sekwencyjnie z kolapsem

    Najpierw mierzona jest jedna strona (reguła Borna, kolaps), potem
    druga na stanie po pomiarze. Dla mieszaniny Demon najpierw wybiera
    członka mieszaniny.

    @param theta Baza pomiaru
    @param rng Generator numpy
    @param source Stan lub mieszanina na dims (2, 2); domyślnie singlet
    @param left_first Kolejność pomiarów
    @return (wynik lewy, wynik prawy)
    """
    basis = _as_angle_basis(theta).as_measurement_basis()
    if source is None:
        s = singlet()
    elif isinstance(source, Mixture):
        s = daemon_emit(source, rng)
    else:
        s = source
    if s.dims != (2, 2):
        raise StateError(f"joint measurement needs a two-qubit state, got dims {s.dims}")

    order = (0, 1) if left_first else (1, 0)
    out = [0, 0]
    for side in order:
        rec = measure(s, side, basis, rng)
        out[side] = rec.outcome_index
        s = rec.post_state
    return out[0], out[1]


def born_tables(theta_a, theta_b, state: PureState | None = None) -> np.ndarray:
    """
    @brief Łączne prawdopodobieństwa P(j, k) wyników w bazach θa i θb

    P(j, k) = |(⟨aⱼ| ⊗ ⟨bₖ|)|s⟩|². Działa wektorowo: θa i θb mogą być
    tablicami (broadcasting), wynik ma kształt (..., 2, 2).
    """
    s = state if state is not None else singlet()
    if s.dims != (2, 2):
        raise StateError(f"correlator needs a two-qubit state, got dims {s.dims}")
    ua, ub = np.broadcast_arrays(np.asarray(theta_a, dtype=np.float64), np.asarray(theta_b, dtype=np.float64))
    u, v = rotation_rows(ua), rotation_rows(ub)
    amp = np.einsum("...ja,...kb,ab->...jk", u.conj(), v.conj(), s.tensor())
    return np.abs(amp) ** 2


def correlation_from_tables(p: np.ndarray) -> np.ndarray:
    """E = Σⱼₖ sⱼ sₖ P(j, k) przy znakach {0→+1, 1→-1}."""
    return np.einsum("...jk,j,k->...", p, SIGNS, SIGNS)


def correlator(
    theta_a: AngleBasis | float,
    theta_b: AngleBasis | float,
    n_samples: int = 0,
    rng: np.random.Generator | None = None,
    state: PureState | None = None,
) -> CorrelatorEstimate:
    """
    @brief Korelator E(A, B) dla stanu dwukubitowego (domyślnie singletu)

    Tryb analityczny liczy E z tabeli prawdopodobieństw Borna. Tryb
    próbkowany (n_samples > 0) losuje n par wyników z tej samej tabeli;
    błąd standardowy to √((1 - E²)/n).

    @param theta_a Baza Alicji
    @param theta_b Baza Boba
    @param n_samples 0 = analitycznie
    @param rng Generator (wymagany w trybie próbkowanym)
    @param state Stan; domyślnie singlet
    @return CorrelatorEstimate
    @throws ValueError Gdy n_samples < 0 lub brak rng w trybie próbkowanym
    """
    a = _as_angle_basis(theta_a).theta
    b = _as_angle_basis(theta_b).theta
    p = born_tables(a, b, state)

    if n_samples == 0:
        return CorrelatorEstimate(float(correlation_from_tables(p)), "analytic", 0, 0.0)

    if n_samples < 0:
        raise ValueError(f"n_samples must be >= 0, got {n_samples}")
    if rng is None:
        raise ValueError("sampled correlator needs an rng")

    flat = p.reshape(-1)
    draws = rng.choice(4, size=n_samples, p=flat / flat.sum())
    products = np.outer(SIGNS, SIGNS).reshape(-1)[draws]
    e = float(products.mean())
    return CorrelatorEstimate(e, "sampled", int(n_samples), float(np.sqrt(max(0.0, 1.0 - e * e) / n_samples)))


def steered_ensemble(state: PureState, basis: MeasurementBasis | AngleBasis, subsystem: int = 0) -> Mixture:
    """
    @brief Zespół, w którym zostaje druga strona po nieodnotowanym pomiarze

    Mierzymy podsystem `subsystem` stanu dwudzielnego i zapominamy wynik:
    druga strona jest w stanie warunkowym |χₖ⟩ z prawdopodobieństwem pₖ.
    Wyniki o pₖ ≈ 0 są pomijane.

    @param state Stan dwudzielny
    @param basis Baza pomiaru mierzonej strony
    @param subsystem 0 lub 1
    @return Mixture na pozostałym podsystemie
    """
    if isinstance(basis, AngleBasis):
        basis = basis.as_measurement_basis()
    if len(state.dims) != 2 or subsystem not in (0, 1):
        raise StateError("steering needs a bipartite state and subsystem 0 or 1")
    if basis.dim != state.dims[subsystem]:
        raise StateError(f"basis dim {basis.dim} does not match subsystem dim {state.dims[subsystem]}")

    other = 1 - subsystem
    entries = []
    for v in basis.vectors:
        branch = np.tensordot(v.amplitudes.conj(), state.tensor(), axes=([0], [subsystem]))
        p = float(np.vdot(branch, branch).real)
        if p > ATOL:
            entries.append((PureState.from_vector(branch, (state.dims[other],)), p))

    total = sum(p for _, p in entries)
    return Mixture(tuple((s, p / total) for s, p in entries))


def unrecorded_measurement(state: PureState, basis: MeasurementBasis | AngleBasis, subsystem: int = 0):
    return density_of(steered_ensemble(state, basis, subsystem))


# ---------------------------------------------------------------------------
# łańcuch pomiar -> splątanie z aparatami
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChainStage:
    label: str
    state: PureState

    def to_dict(self) -> dict:
        return {"label": self.label, "dims": list(self.state.dims), "amplitudes": self.state.to_json()}


@dataclass(frozen=True)
class ChainReport:
    theta: float
    stages: tuple[ChainStage, ...]
    checks: tuple[Check, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "theta": self.theta,
            "stages": [s.to_dict() for s in self.stages],
            "checks": [c.to_dict() for c in self.checks],
            "passed": self.passed,
        }


def apparatus_state(flag: int) -> PureState:
    return basis_state(flag, (3,))


def _swap(i: int, j: int) -> np.ndarray:
    p = np.eye(3, dtype=np.complex128)
    p[[i, j]] = p[[j, i]]
    return p


def left_coupling(theta: AngleBasis | float) -> np.ndarray:
    """
    @brief Sprzężenie aparatu lewego z cząstką (kolejność: aparat, cząstka)

    U = S(?,Ψ) ⊗ |ψ⟩⟨ψ| + S(?,Φ) ⊗ |φ⟩⟨φ|, gdzie S(?,X) zamienia |?⟩ z |X⟩.
    Uzupełnienie izometrii |?⟩|ψ⟩ → |Ψ⟩|ψ⟩, |?⟩|φ⟩ → |Φ⟩|φ⟩ do unitarnej.
    """
    b = _as_angle_basis(theta)
    pp = np.outer(b.psi.amplitudes, b.psi.amplitudes.conj())
    pf = np.outer(b.phi.amplitudes, b.phi.amplitudes.conj())
    return np.kron(_swap(READY, RECORDED_PSI), pp) + np.kron(_swap(READY, RECORDED_PHI), pf)


def right_coupling(theta: AngleBasis | float) -> np.ndarray:
    """Lustrzane odbicie left_coupling (kolejność: cząstka, aparat)."""
    b = _as_angle_basis(theta)
    pp = np.outer(b.psi.amplitudes, b.psi.amplitudes.conj())
    pf = np.outer(b.phi.amplitudes, b.phi.amplitudes.conj())
    return np.kron(pp, _swap(READY, RECORDED_PSI)) + np.kron(pf, _swap(READY, RECORDED_PHI))


def _unitarity_defect(u: np.ndarray) -> float:
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def _product(*states: PureState) -> PureState:
    out = states[0]
    for s in states[1:]:
        out = tensor(out, s)
    return out


def apparatus_chain(theta: AngleBasis | float = 0.0, tol: float = ATOL) -> ChainReport:
    """
    @brief Pomiar jako splątanie: aparat ⊗ cząstka ⊗ cząstka ⊗ aparat

    Etapy:
    - start: oba aparaty w |?⟩, cząstki w singlecie zapisanym w bazie θ;
    - po sprzężeniu lewym: lewy aparat splątany, prawy wciąż w |?⟩;
    - po sprzężeniu prawym: (|Ψψφ Φ⟩ - |Φφψ Ψ⟩)/√2;
    - ślad po cząstkach: para detektorów w mieszaninie
      {(|ΨΦ⟩,½), (|ΦΨ⟩,½)}.

    @param theta Baza, w której aparaty rozróżniają |ψ⟩ i |φ⟩
    @param tol Tolerancja sprawdzeń
    @return ChainReport z etapami i sprawdzeniami
    """
    b = _as_angle_basis(theta)
    psi, phi = b.psi, b.phi
    ready = apparatus_state(READY)
    rec_psi = apparatus_state(RECORDED_PSI)
    rec_phi = apparatus_state(RECORDED_PHI)

    u_left = left_coupling(b)
    u_right = right_coupling(b)
    i2, i3 = np.eye(2), np.eye(3)

    checks: list[Check] = [
        Check.deviation_within("left_coupling_unitary", _unitarity_defect(u_left), tol),
        Check.deviation_within("right_coupling_unitary", _unitarity_defect(u_right), tol),
        Check.deviation_within(
            "left_coupling_action",
            max(
                float(np.max(np.abs(u_left @ tensor(ready, psi).amplitudes - tensor(rec_psi, psi).amplitudes))),
                float(np.max(np.abs(u_left @ tensor(ready, phi).amplitudes - tensor(rec_phi, phi).amplitudes))),
            ),
            tol,
        ),
        Check.deviation_within(
            "right_coupling_action",
            max(
                float(np.max(np.abs(u_right @ tensor(psi, ready).amplitudes - tensor(psi, rec_psi).amplitudes))),
                float(np.max(np.abs(u_right @ tensor(phi, ready).amplitudes - tensor(phi, rec_phi).amplitudes))),
            ),
            tol,
        ),
    ]

    dims = (3, 2, 2, 3)
    stage1 = PureState(dims, np.kron(np.kron(ready.amplitudes, rewrite_in_basis(b).amplitudes), ready.amplitudes))
    stage2 = PureState(dims, np.kron(np.kron(u_left, i2), i3) @ stage1.amplitudes)
    stage3 = PureState(dims, np.kron(np.kron(i3, i2), u_right) @ stage2.amplitudes)

    ready_rho = density_of_state(ready)
    checks.append(Check.deviation_within(
        "stage1_left_apparatus_ready",
        density_distance(partial_trace(density_of_state(stage1), [0]), ready_rho),
        tol,
    ))
    checks.append(Check.deviation_within(
        "stage2_right_apparatus_ready",
        density_distance(partial_trace(density_of_state(stage2), [3]), ready_rho),
        tol,
    ))

    expected3 = (
        _product(rec_psi, psi, phi, rec_phi).amplitudes
        - _product(rec_phi, phi, psi, rec_psi).amplitudes
    ) / np.sqrt(2.0)
    checks.append(Check.deviation_within(
        "stage3_matches_expected",
        phase_distance(stage3, PureState(dims, expected3)),
        tol,
    ))

    rho3 = density_of_state(stage3)
    detectors = density_of(Mixture.of((tensor(rec_psi, rec_phi), 0.5), (tensor(rec_phi, rec_psi), 0.5)))
    checks.append(Check.deviation_within(
        "detector_pair_mixture",
        density_distance(partial_trace(rho3, [0, 3]), detectors),
        tol,
    ))
    first = density_of(Mixture.of((rec_psi, 0.5), (rec_phi, 0.5)))
    checks.append(Check.deviation_within(
        "first_detector_reduced",
        density_distance(partial_trace(rho3, [0]), first),
        tol,
    ))

    report = ChainReport(
        theta=b.theta,
        stages=(
            ChainStage("unreacted", stage1),
            ChainStage("left_coupled", stage2),
            ChainStage("both_coupled", stage3),
        ),
        checks=tuple(checks),
    )
    logger.debug("apparatus chain theta=%s passed=%s", b.theta, report.passed)
    return report
