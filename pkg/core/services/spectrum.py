from __future__ import annotations

import numpy as np


def hermitian_eigenvalues(matrix: np.ndarray) -> np.ndarray:
    """
    @brief Zwraca wartości własne macierzy hermitowskiej (rosnąco)

    Macierz jest najpierw symetryzowana: (M + M^†) / 2, tak aby szum
    numeryczny rzędu 1e-16 w części antyhermitowskiej nie psuł wyniku.
    Wartości własne macierzy hermitowskiej są rzeczywiste.

    @param matrix Kwadratowa macierz zespolona
    @return Wektor rzeczywistych wartości własnych posortowany rosnąco
    """
    m = np.asarray(matrix, dtype=np.complex128)
    h = (m + m.conj().T) / 2.0
    return np.linalg.eigvalsh(h)


def top_eigenvalue(matrix: np.ndarray) -> float:
    """
    @brief Największa wartość własna macierzy hermitowskiej

    Dla macierzy gęstości ρ: λ_max = 1 wtedy i tylko wtedy, gdy rank(ρ) = 1.

    @param matrix Kwadratowa macierz hermitowska
    @return λ_max
    """
    return float(np.max(hermitian_eigenvalues(matrix)))


def min_eigenvalue(matrix: np.ndarray) -> float:
    return float(np.min(hermitian_eigenvalues(matrix)))


def hermitian_defect(matrix: np.ndarray) -> float:
    """Maksymalny moduł elementu M - M^†."""
    m = np.asarray(matrix, dtype=np.complex128)
    return float(np.max(np.abs(m - m.conj().T)))
