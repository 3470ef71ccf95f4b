from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any

CSV_COLUMNS = ["name", "value", "expected", "tolerance", "passed", "deviation", "note"]


@dataclass(frozen=True)
class Check:
    """
    @brief Pojedyncza weryfikacja w raporcie: wartość, oczekiwanie, tolerancja

    Każda liczba w raporcie niesie wartość oczekiwaną i tolerancję, więc
    raport sam opisuje kryterium akceptacji.
    """

    name: str
    value: Any
    expected: Any
    tolerance: float
    passed: bool
    deviation: float = 0.0
    note: str = ""

    @classmethod
    def close(cls, name: str, value: float, expected: float, tolerance: float, note: str = "") -> "Check":
        """
        @brief Sprawdzenie liczbowe: |value - expected| ≤ tolerance

        @param name Nazwa sprawdzenia
        @param value Zmierzona / obliczona wartość
        @param expected Wartość oczekiwana
        @param tolerance Dopuszczalne odchylenie
        @param note Komentarz do raportu
        @return Check
        """
        dev = abs(float(value) - float(expected))
        ok = math.isfinite(dev) and dev <= tolerance
        return cls(name, _plain(value), _plain(expected), float(tolerance), bool(ok), dev, note)

    @classmethod
    def deviation_within(cls, name: str, deviation: float, tolerance: float, note: str = "") -> "Check":
        """Odchylenie (np. max |aᵢⱼ - bᵢⱼ|) porównywane z zerem."""
        return cls.close(name, deviation, 0.0, tolerance, note)

    @classmethod
    def at_least(cls, name: str, value: float, bound: float, note: str = "") -> "Check":
        ok = float(value) >= float(bound)
        return cls(name, _plain(value), _plain(bound), 0.0, ok, max(0.0, float(bound) - float(value)), note)

    @classmethod
    def flag(cls, name: str, ok: bool, note: str = "") -> "Check":
        return cls(name, bool(ok), True, 0.0, bool(ok), 0.0 if ok else 1.0, note)

    def renamed(self, prefix: str) -> "Check":
        return Check(f"{prefix}.{self.name}", self.value, self.expected, self.tolerance,
                     self.passed, self.deviation, self.note)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "value": self.value,
            "expected": self.expected,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "deviation": self.deviation,
            "note": self.note,
        }


def _plain(v: Any) -> Any:
    # numpy skalary -> typy wbudowane, żeby json.dumps działał deterministycznie
    if not isinstance(v, (bool, int, float, str)) and hasattr(v, "item"):
        return v.item()
    return v


@dataclass
class Report:
    """
    @brief Wynik komendy: sprawdzenia, tabele i echo konfiguracji

    passed ⇔ wszystkie sprawdzenia przeszły. Raport nie zawiera czasów
    wykonania ani niczego zależnego od zegara.
    """

    command: str
    config: dict
    schema_version: int = 1
    checks: list[Check] = field(default_factory=list)
    tables: dict[str, list[dict]] = field(default_factory=dict)
    data: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failing(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def add(self, *checks: Check) -> None:
        self.checks.extend(checks)

    def merge(self, other: "Report", prefix: str) -> None:
        """Dołącza sprawdzenia, tabele i dane innego raportu z prefiksem nazw."""
        self.checks.extend(c.renamed(prefix) for c in other.checks)
        for name, rows in other.tables.items():
            self.tables[f"{prefix}.{name}"] = rows
        for name, value in other.data.items():
            self.data[f"{prefix}.{name}"] = value

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "command": self.command,
            "config": self.config,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
            "tables": self.tables,
            "data": self.data,
        }


def render_json(report: Report) -> str:
    return json.dumps(report.to_dict(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def render_csv(report: Report) -> str:
    """
    @brief Płaska projekcja tabeli sprawdzeń do CSV

    @param report Raport
    @return Tekst CSV z nagłówkiem CSV_COLUMNS
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for c in report.checks:
        d = c.to_dict()
        w.writerow([_csv_cell(d[k]) for k in CSV_COLUMNS])
    return buf.getvalue()


def _csv_cell(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _fmt(v: Any) -> str:
    if isinstance(v, bool):
        return "pass" if v else "FAIL"
    if isinstance(v, float):
        return f"{v:.6g}"
    if v is None:
        return "-"
    return str(v)


def render_table(rows: list[dict], columns: list[str] | None = None) -> str:
    """
    @brief Wyrównana tabela tekstowa z listy słowników

    @param rows Wiersze (klucze = kolumny)
    @param columns Kolejność kolumn; domyślnie klucze pierwszego wiersza
    @return Tekst tabeli (bez końcowego znaku nowej linii)
    """
    if not rows:
        return "(empty)"
    cols = columns or list(rows[0].keys())
    cells = [[_fmt(r.get(c)) for c in cols] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]

    lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for row in cells:
        lines.append("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip())
    return "\n".join(lines)


def render_text(report: Report) -> str:
    out = [f"{report.command} (schema {report.schema_version})"]
    for name in sorted(report.tables):
        out.append("")
        out.append(f"[{name}]")
        out.append(render_table(report.tables[name]))
    out.append("")
    out.append("[checks]")
    out.append(render_table(
        [c.to_dict() for c in report.checks],
        ["name", "value", "expected", "tolerance", "passed"],
    ))
    out.append("")
    out.append("overall: " + ("PASS" if report.passed else "FAIL (" + ", ".join(report.failing) + ")"))
    return "\n".join(out) + "\n"


RENDERERS = {
    "json": render_json,
    "csv": render_csv,
    "text": render_text,
}


def render(report: Report, fmt: str) -> str:
    try:
        return RENDERERS[fmt](report)
    except KeyError:
        raise ValueError(f"unknown format: {fmt}") from None
