from __future__ import annotations

import logging
import string
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .spectrum import hermitian_defect, min_eigenvalue, top_eigenvalue

logger = logging.getLogger(__name__)

ATOL = 1e-10
EIG_ATOL = 1e-8

_SQRT_HALF = 1.0 / np.sqrt(2.0)
_HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=np.complex128) / np.sqrt(2.0)


class StateError(ValueError):
    """Naruszenie niezmiennika stanu czystego, mieszaniny lub macierzy gęstości."""


def _normalize_dims(dims: Iterable[int]) -> tuple[int, ...]:
    d = tuple(int(x) for x in dims)
    if not d or any(x < 1 for x in d):
        raise StateError(f"invalid dims: {d}")
    return d


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PureState:
    """
    @brief Znormalizowany wektor amplitud w bazie obliczeniowej

    Wektor ma długość ∏dims; kolejność indeksów jak w np.kron
    (pierwszy podsystem jest najbardziej znaczący).
    """

    dims: tuple[int, ...]
    amplitudes: np.ndarray

    def __post_init__(self):
        dims = _normalize_dims(self.dims)
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)

        if amps.size != int(np.prod(dims)):
            raise StateError(f"amplitude vector of length {amps.size} does not match dims {dims}")
        if not np.all(np.isfinite(amps)):
            raise StateError("amplitudes must be finite")

        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > ATOL:
            raise StateError(f"state not normalized: |psi|^2 = {norm2!r}")

        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amplitudes", _readonly(amps))

    @classmethod
    def from_vector(cls, vector, dims: Iterable[int] | None = None) -> "PureState":
        """
        @brief Buduje stan z dowolnego niezerowego wektora (normalizuje go)

        @param vector Wektor amplitud (nie musi być znormalizowany)
        @param dims Wymiary podsystemów; domyślnie jeden podsystem
        @return PureState
        @throws StateError Gdy wektor jest zerowy
        """
        v = np.array(vector, dtype=np.complex128).reshape(-1)
        norm = float(np.linalg.norm(v))
        if norm == 0.0 or not np.isfinite(norm):
            raise StateError("cannot normalize a zero vector")
        return cls(tuple(dims) if dims is not None else (v.size,), v / norm)

    @property
    def dim(self) -> int:
        return int(self.amplitudes.size)

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.dims)

    def to_json(self) -> list[list[float]]:
        return [[float(z.real), float(z.imag)] for z in self.amplitudes]


@dataclass(frozen=True, eq=False)
class Mixture:
    """
    @brief Mieszanina {(|Ψᵢ⟩, pᵢ)}: Demon wydaje |Ψᵢ⟩ z prawdopodobieństwem pᵢ

    Stany mogą się powtarzać i nie muszą być ortogonalne.
    """

    entries: tuple[tuple[PureState, float], ...]

    def __post_init__(self):
        entries = tuple((s, float(p)) for s, p in self.entries)
        if not entries:
            raise StateError("empty mixture")

        dims = entries[0][0].dims
        for s, p in entries:
            if not isinstance(s, PureState):
                raise StateError("mixture members must be PureState")
            if s.dims != dims:
                raise StateError(f"mixture members have different dims: {s.dims} vs {dims}")
            if not np.isfinite(p) or p < 0.0 or p > 1.0:
                raise StateError(f"probability out of [0, 1]: {p!r}")

        total = sum(p for _, p in entries)
        if abs(total - 1.0) > ATOL:
            raise StateError(f"probabilities sum to {total!r}, expected 1")

        object.__setattr__(self, "entries", entries)

    @classmethod
    def of(cls, *pairs: tuple[PureState, float]) -> "Mixture":
        return cls(tuple(pairs))

    @property
    def dims(self) -> tuple[int, ...]:
        return self.entries[0][0].dims

    @property
    def states(self) -> list[PureState]:
        return [s for s, _ in self.entries]

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([p for _, p in self.entries], dtype=np.float64)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """
    @brief Macierz gęstości ρ: hermitowska, dodatnio półokreślona, Tr ρ = 1

    Wszystko, co mierzalne w stanie, jest zapisane w ρ; różne mieszaniny
    o tej samej ρ są nierozróżnialne.
    """

    dims: tuple[int, ...]
    entries: np.ndarray

    def __post_init__(self):
        dims = _normalize_dims(self.dims)
        d = int(np.prod(dims))
        m = np.array(self.entries, dtype=np.complex128)

        if m.shape != (d, d):
            raise StateError(f"density matrix shape {m.shape} does not match dims {dims}")
        if not np.all(np.isfinite(m)):
            raise StateError("density matrix must be finite")
        if hermitian_defect(m) > ATOL:
            raise StateError("density matrix is not Hermitian")

        tr = complex(np.trace(m))
        if abs(tr - 1.0) > ATOL:
            raise StateError(f"density matrix trace is {tr!r}, expected 1")
        if min_eigenvalue(m) < -ATOL:
            raise StateError("density matrix is not positive semidefinite")

        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "entries", _readonly(m))

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])

    def to_json(self) -> list[list[list[float]]]:
        return [[[float(z.real), float(z.imag)] for z in row] for row in self.entries]


@dataclass(frozen=True, eq=False)
class MeasurementBasis:
    """Pełny pomiar jednego podsystemu: dim ortonormalnych wektorów."""

    dim: int
    vectors: tuple[PureState, ...]

    def __post_init__(self):
        vectors = tuple(self.vectors)
        dim = int(self.dim)
        if len(vectors) != dim:
            raise StateError(f"basis of dim {dim} needs {dim} vectors, got {len(vectors)}")
        if any(v.dims != (dim,) for v in vectors):
            raise StateError("basis vectors must live on a single subsystem of dimension dim")

        rows = np.array([v.amplitudes for v in vectors])
        gram = rows.conj() @ rows.T
        if float(np.max(np.abs(gram - np.eye(dim)))) > ATOL:
            raise StateError("basis vectors are not orthonormal")

        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "vectors", vectors)

    @classmethod
    def from_rows(cls, rows) -> "MeasurementBasis":
        rows = np.asarray(rows, dtype=np.complex128)
        return cls(rows.shape[0], tuple(PureState((rows.shape[1],), r) for r in rows))

    def matrix(self) -> np.ndarray:
        """Wiersze = wektory bazy."""
        return np.array([v.amplitudes for v in self.vectors])


@dataclass(frozen=True, eq=False)
class MeasurementRecord:
    outcome_index: int
    probability: float
    post_state: PureState

    def __post_init__(self):
        if not (0.0 <= self.probability <= 1.0 + ATOL):
            raise StateError(f"probability out of [0, 1]: {self.probability!r}")


# ---------------------------------------------------------------------------
# konstrukcja stanów
# ---------------------------------------------------------------------------

def basis_state(index: int, dims: Sequence[int]) -> PureState:
    dims = _normalize_dims(dims)
    d = int(np.prod(dims))
    if not 0 <= index < d:
        raise StateError(f"basis index {index} out of range for dims {dims}")
    v = np.zeros(d, dtype=np.complex128)
    v[index] = 1.0
    return PureState(dims, v)


def ket(digits: str, dims: Sequence[int] | None = None) -> PureState:
    """
    @brief Stan bazy obliczeniowej zapisany cyframi, np. ket("01") = |01⟩

    @param digits Ciąg cyfr, po jednej na podsystem
    @param dims Wymiary podsystemów; domyślnie kubity
    @return PureState
    """
    dims = _normalize_dims(dims if dims is not None else [2] * len(digits))
    idx = [int(c) for c in digits]
    if len(idx) != len(dims) or any(i >= d for i, d in zip(idx, dims)):
        raise StateError(f"ket {digits!r} does not fit dims {dims}")
    return basis_state(int(np.ravel_multi_index(idx, dims)), dims)


def hadamard() -> np.ndarray:
    return _HADAMARD.copy()


def apply_unitary(unitary: np.ndarray, s: PureState) -> PureState:
    """
    @brief Działa unitarną macierzą na cały wektor stanu

    @param unitary Macierz D×D, D = s.dim
    @param s Stan wejściowy
    @return U|s⟩
    @throws StateError Gdy macierz nie jest unitarna lub ma zły rozmiar
    """
    u = np.asarray(unitary, dtype=np.complex128)
    if u.shape != (s.dim, s.dim):
        raise StateError(f"unitary shape {u.shape} does not act on dim {s.dim}")
    if float(np.max(np.abs(u.conj().T @ u - np.eye(s.dim)))) > ATOL:
        raise StateError("matrix is not unitary")
    return PureState(s.dims, u @ s.amplitudes)


def tensor(a: PureState, b: PureState) -> PureState:
    """Iloczyn Kroneckera; wymiary są sklejane."""
    return PureState(a.dims + b.dims, np.kron(a.amplitudes, b.amplitudes))


def computational_basis(dim: int = 2) -> MeasurementBasis:
    return MeasurementBasis(dim, tuple(basis_state(i, (dim,)) for i in range(dim)))


def hadamard_basis() -> MeasurementBasis:
    """Baza H: H|0⟩ = (|0⟩+|1⟩)/√2, H|1⟩ = (|0⟩-|1⟩)/√2."""
    h = hadamard()
    return MeasurementBasis(2, (apply_unitary(h, ket("0")), apply_unitary(h, ket("1"))))


def random_state(rng: np.random.Generator, dim: int) -> PureState:
    z = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return PureState.from_vector(z)


def random_mixture(
    rng: np.random.Generator,
    max_states: int = 5,
    max_dim: int = 4,
) -> Mixture:
    """
    @brief Losowa mieszanina: k ≤ max_states stanów w wymiarze 2 ≤ d ≤ max_dim

    Stany losowane z rozkładu Haara (gaussowskie wektory zespolone
    po normalizacji), wagi z rozkładu Dirichleta.

    @param rng Generator numpy
    @param max_states Maksymalna liczba stanów k
    @param max_dim Maksymalny wymiar d
    @return Mixture
    """
    k = int(rng.integers(1, max_states + 1))
    d = int(rng.integers(2, max_dim + 1))
    probs = rng.dirichlet(np.ones(k))
    probs = probs / probs.sum()
    return Mixture(tuple((random_state(rng, d), float(p)) for p in probs))


# ---------------------------------------------------------------------------
# nazwane mieszaniny
# ---------------------------------------------------------------------------

def computational_mixture() -> Mixture:
    """{(|0⟩,½), (|1⟩,½)}"""
    return Mixture.of((ket("0"), 0.5), (ket("1"), 0.5))


def hadamard_mixture() -> Mixture:
    """{(H|0⟩,½), (H|1⟩,½)}"""
    h0, h1 = hadamard_basis().vectors
    return Mixture.of((h0, 0.5), (h1, 0.5))


def trine_mixture() -> Mixture:
    """Trzy nieortogonalne stany z wagą ⅓: |0⟩, ½|0⟩ ± (√3/2)|1⟩."""
    r = np.sqrt(3.0) / 2.0
    return Mixture.of(
        (ket("0"), 1.0 / 3.0),
        (PureState((2,), [0.5, r]), 1.0 / 3.0),
        (PureState((2,), [0.5, -r]), 1.0 / 3.0),
    )


def bell_states() -> list[PureState]:
    """|Φ+⟩, |Φ-⟩, |Ψ+⟩, |Ψ-⟩"""
    h = _SQRT_HALF
    return [
        PureState((2, 2), [h, 0, 0, h]),
        PureState((2, 2), [h, 0, 0, -h]),
        PureState((2, 2), [0, h, h, 0]),
        PureState((2, 2), [0, h, -h, 0]),
    ]


def bell_mixture() -> Mixture:
    return Mixture(tuple((s, 0.25) for s in bell_states()))


def classical_pairs_mixture() -> Mixture:
    """Pary niezależnych klasycznych bitów: |00⟩, |01⟩, |10⟩, |11⟩ po ¼."""
    return Mixture(tuple((ket(b), 0.25) for b in ("00", "01", "10", "11")))


# ---------------------------------------------------------------------------
# macierze gęstości
# ---------------------------------------------------------------------------

def density_of_state(s: PureState) -> DensityMatrix:
    return DensityMatrix(s.dims, np.outer(s.amplitudes, s.amplitudes.conj()))


def density_of(m: Mixture) -> DensityMatrix:
    """
    @brief Macierz gęstości mieszaniny: ρ = Σ pᵢ |Ψᵢ⟩⟨Ψᵢ|

    @param m Mieszanina (niezmienniki sprawdzone przy konstrukcji Mixture)
    @return DensityMatrix
    """
    rho = np.zeros((m.entries[0][0].dim,) * 2, dtype=np.complex128)
    for s, p in m.entries:
        rho += p * np.outer(s.amplitudes, s.amplitudes.conj())
    return DensityMatrix(m.dims, rho)


def density_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """Maksymalny moduł różnicy elementów |aᵢⱼ - bᵢⱼ|."""
    if a.dims != b.dims:
        raise StateError(f"dimension mismatch: {a.dims} vs {b.dims}")
    return float(np.max(np.abs(a.entries - b.entries)))


def density_equal(a: DensityMatrix, b: DensityMatrix, tol: float = ATOL) -> bool:
    return density_distance(a, b) <= tol


def outcome_probability(rho: DensityMatrix, vector: PureState) -> float:
    """⟨b|ρ|b⟩ dla wektora b o wymiarze całej macierzy."""
    if vector.dim != rho.dim:
        raise StateError(f"vector dim {vector.dim} does not match density dim {rho.dim}")
    b = vector.amplitudes
    return float(np.vdot(b, rho.entries @ b).real)


def purity(rho: DensityMatrix) -> float:
    """Tr ρ²; równe 1 tylko dla stanu czystego."""
    return float(np.trace(rho.entries @ rho.entries).real)


def is_pure_by_peres(m: Mixture, eig_tol: float = EIG_ATOL) -> bool:
    """
    @brief Czy mieszanina jest stanem czystym w sensie Peresa

    Stan jest czysty, gdy istnieje pełny pomiar o deterministycznym
    wyniku. Równoważnie ρ ma wartość własną 1 (rank ρ = 1): pomiar w bazie
    wektorów własnych daje wtedy zawsze ten sam wynik.

    @param m Mieszanina
    @param eig_tol Tolerancja dla testu λ_max = 1
    @return True jeśli mieszanina jest czysta
    """
    lam = top_eigenvalue(density_of(m).entries)
    return abs(lam - 1.0) <= eig_tol


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """
    @brief Ślad częściowy: zostawia podsystemy z keep, pozostałe wyśladowuje

    Macierz D×D jest przekształcana w tensor o indeksach
    (i₁..iₙ, j₁..jₙ); dla podsystemów wyśladowanych indeks kolumny
    jest utożsamiany z indeksem wiersza i sumowany (np.einsum).
    Zachowane podsystemy zwracane są w kolejności rosnącej.

    @param rho Macierz gęstości układu złożonego
    @param keep Indeksy podsystemów do zachowania
    @return Zredukowana macierz gęstości
    @throws StateError Gdy zbiór indeksów jest pusty, powtarza się lub wychodzi poza zakres
    """
    keep_list = [int(k) for k in keep]
    n = len(rho.dims)
    if not keep_list:
        raise StateError("keep must be non-empty")
    if len(set(keep_list)) != len(keep_list):
        raise StateError(f"duplicate subsystem index in {keep_list}")
    if any(k < 0 or k >= n for k in keep_list):
        raise StateError(f"subsystem index out of range in {keep_list} for {n} subsystems")

    kept = sorted(keep_list)
    letters = string.ascii_letters
    rows = [letters[i] for i in range(n)]
    cols = [letters[n + i] if i in kept else letters[i] for i in range(n)]
    out = [rows[i] for i in kept] + [cols[i] for i in kept]
    subscripts = "".join(rows) + "".join(cols) + "->" + "".join(out)

    t = rho.entries.reshape(rho.dims + rho.dims)
    reduced = np.einsum(subscripts, t)

    new_dims = tuple(rho.dims[i] for i in kept)
    d = int(np.prod(new_dims))
    return DensityMatrix(new_dims, reduced.reshape(d, d))


def purify(m: Mixture) -> PureState:
    """
    @brief Puryfikacja mieszaniny: |Ψ⟩ = Σ √pᵢ |Ψᵢ⟩|Φᵢ⟩

    Rejestr flag |Φᵢ⟩ to baza obliczeniowa k-wymiarowego układu dołączonego
    na końcu (dims = m.dims + (k,)). Składniki z pᵢ = 0 są pomijane.
    Ślad po rejestrze flag odtwarza density_of(m).

    @param m Mieszanina
    @return Stan czysty na układzie złożonym
    @throws StateError Gdy mieszanina nie ma składników o dodatnim prawdopodobieństwie
    """
    kept = [(s, p) for s, p in m.entries if p > 0.0]
    if not kept:
        raise StateError("empty mixture")

    k = len(kept)
    vec = np.zeros(kept[0][0].dim * k, dtype=np.complex128)
    for i, (s, p) in enumerate(kept):
        flag = np.zeros(k, dtype=np.complex128)
        flag[i] = 1.0
        vec += np.sqrt(p) * np.kron(s.amplitudes, flag)

    return PureState(m.dims + (k,), vec)


# ---------------------------------------------------------------------------
# pomiar
# ---------------------------------------------------------------------------

def _check_subsystem(s: PureState, subsystem: int, basis: MeasurementBasis) -> int:
    if isinstance(subsystem, bool) or not isinstance(subsystem, (int, np.integer)):
        raise StateError(f"subsystem index must be an integer, got {subsystem!r}")
    if not 0 <= subsystem < len(s.dims):
        raise StateError(f"subsystem index {subsystem} out of range for dims {s.dims}")
    if basis.dim != s.dims[subsystem]:
        raise StateError(f"basis dim {basis.dim} does not match subsystem dim {s.dims[subsystem]}")
    return int(subsystem)


def _branch(s: PureState, subsystem: int, vector: np.ndarray) -> np.ndarray:
    # ⟨b| działające tylko na wybrany podsystem
    return np.tensordot(vector.conj(), s.tensor(), axes=([0], [subsystem]))


def born_probabilities(s: PureState, subsystem: int, basis: MeasurementBasis) -> np.ndarray:
    """
    @brief Prawdopodobieństwa wyników pomiaru podsystemu (reguła Borna)

    pₖ = ‖(⟨bₖ| ⊗ I)|s⟩‖²

    @param s Stan
    @param subsystem Indeks mierzonego podsystemu
    @param basis Baza pomiaru
    @return Wektor pₖ, suma = 1
    """
    subsystem = _check_subsystem(s, subsystem, basis)
    out = []
    for v in basis.vectors:
        r = _branch(s, subsystem, v.amplitudes)
        out.append(float(np.vdot(r, r).real))
    return np.array(out, dtype=np.float64)


def measure(
    s: PureState,
    subsystem: int,
    basis: MeasurementBasis,
    rng: np.random.Generator,
) -> MeasurementRecord:
    """
    @brief Pomiar rzutowy jednego podsystemu z kolapsem

    Wynik k jest losowany z prawdopodobieństwem Borna; stan po pomiarze
    to znormalizowany rzut |bₖ⟩⟨bₖ| ⊗ I na |s⟩. Jedynym efektem ubocznym
    jest zużycie liczb z rng, więc wynik jest deterministyczny dla ziarna.

    @param s Stan przed pomiarem
    @param subsystem Indeks mierzonego podsystemu
    @param basis Baza pomiaru (basis.dim = dims[subsystem])
    @param rng Generator numpy
    @return MeasurementRecord(outcome_index, probability, post_state)
    @throws StateError Przy złym indeksie podsystemu lub wymiarze bazy
    """
    probs = born_probabilities(s, subsystem, basis)
    k = int(rng.choice(len(probs), p=probs / probs.sum()))

    b = basis.vectors[k].amplitudes
    post = np.multiply.outer(b, _branch(s, subsystem, b))
    post = np.moveaxis(post, 0, subsystem).reshape(-1)

    return MeasurementRecord(
        outcome_index=k,
        probability=float(probs[k]),
        post_state=PureState.from_vector(post, s.dims),
    )


def daemon_emit(m: Mixture, rng: np.random.Generator) -> PureState:
    """Demon z czarnej skrzynki: wydaje |Ψᵢ⟩ z prawdopodobieństwem pᵢ."""
    p = m.probabilities
    i = int(rng.choice(len(p), p=p / p.sum()))
    return m.entries[i][0]


def phase_distance(a: PureState, b: PureState) -> float:
    """
    @brief Odległość wektorów z dokładnością do fazy globalnej

    Faza dobierana jest z iloczynu skalarnego: e^{iφ} = ⟨a|b⟩/|⟨a|b⟩|,
    wynik to max |e^{iφ}aᵢ - bᵢ|. Dla stanów ortogonalnych zwraca
    max |aᵢ| + max |bᵢ| (na pewno > tolerancji).
    """
    if a.dims != b.dims:
        raise StateError(f"dimension mismatch: {a.dims} vs {b.dims}")
    overlap = np.vdot(a.amplitudes, b.amplitudes)
    if abs(overlap) < ATOL:
        return float(np.max(np.abs(a.amplitudes)) + np.max(np.abs(b.amplitudes)))
    phase = overlap / abs(overlap)
    return float(np.max(np.abs(a.amplitudes * phase - b.amplitudes)))


def equal_up_to_phase(a: PureState, b: PureState, tol: float = ATOL) -> bool:
    return phase_distance(a, b) <= tol
