from __future__ import annotations

from django.conf import settings

DEFAULTS: dict[str, object] = {
    "ATOL": 1e-10,
    "EIG_ATOL": 1e-8,
    "SIGNAL_SPEED": 1.0,
    "SEPARATION": 10.0,
    "FLASH_DELAY": 0.3,
    "AUDIT_EPS": 1e-9,
    "SCHEMA_VERSION": 1,
    "SINGLET_TRIALS": 10_000,
    "SINGLET_BASES": 50,
    "CHSH_TRIALS": 100,
    "LIVES_EXPERIMENTS": 1000,
    "MAX_ROUNDS": 6,
    "MC_SAMPLES": 100_000,
    "GRID_STEPS": 32,
    "GRID_RESOLUTION": 1e-3,
    "PURIFY_MIXTURES": 200,
    "FAULTS": 20,
    "WORKERS": 1,
}


def lives_setting(name: str):
    """
    @brief Zwraca wartość parametru symulacji

    Kolejność: settings.LIVES[name], potem DEFAULTS[name].

    @param name Nazwa parametru (np. "ATOL")
    @return Wartość parametru
    @throws KeyError Gdy parametr nie jest znany
    """
    if name not in DEFAULTS:
        raise KeyError(f"unknown LIVES setting: {name}")
    return getattr(settings, "LIVES", {}).get(name, DEFAULTS[name])
