"""Telemetry records: one line per tick plus a final summary record.

Column order is part of the external interface and is stable:

    tick_index time_s pv_lower nv_lower pv_upper nv_upper
    chamber_supply_psi vortex_supply_bar membrane_force_N contact_temp_C
    vib_event clamped

vib_event is a count (several grid lines can be crossed within one tick).
Floats are written with repr so identical runs produce identical bytes.
"""

from __future__ import annotations

from dataclasses import dataclass

TELEMETRY_MAGIC = "# pneusim-telemetry v1"
COLUMNS = (
    "tick_index",
    "time_s",
    "pv_lower",
    "nv_lower",
    "pv_upper",
    "nv_upper",
    "chamber_supply_psi",
    "vortex_supply_bar",
    "membrane_force_N",
    "contact_temp_C",
    "vib_event",
    "clamped",
)


@dataclass(frozen=True)
class TelemetryRecord:
    tick_index: int
    time_s: float
    pv_lower: bool
    nv_lower: bool
    pv_upper: bool
    nv_upper: bool
    chamber_supply_psi: float
    vortex_supply_bar: float
    membrane_force_N: float
    contact_temp_C: float
    vib_event: int
    clamped: bool

    def to_line(self) -> str:
        return (
            f"{self.tick_index} {self.time_s!r} "
            f"{int(self.pv_lower)} {int(self.nv_lower)} "
            f"{int(self.pv_upper)} {int(self.nv_upper)} "
            f"{self.chamber_supply_psi!r} {self.vortex_supply_bar!r} "
            f"{self.membrane_force_N!r} {self.contact_temp_C!r} "
            f"{self.vib_event} {int(self.clamped)}"
        )

    def command_columns(self) -> tuple:
        """Everything except the timing columns (tick_index, time_s)."""
        return (
            self.pv_lower,
            self.nv_lower,
            self.pv_upper,
            self.nv_upper,
            self.chamber_supply_psi,
            self.vortex_supply_bar,
            self.membrane_force_N,
            self.contact_temp_C,
            self.vib_event,
            self.clamped,
        )


def parse_record(line: str) -> TelemetryRecord:
    p = line.split()
    if len(p) != len(COLUMNS):
        raise ValueError(f"telemetry record has {len(p)} columns, expected {len(COLUMNS)}")
    return TelemetryRecord(
        tick_index=int(p[0]),
        time_s=float(p[1]),
        pv_lower=bool(int(p[2])),
        nv_lower=bool(int(p[3])),
        pv_upper=bool(int(p[4])),
        nv_upper=bool(int(p[5])),
        chamber_supply_psi=float(p[6]),
        vortex_supply_bar=float(p[7]),
        membrane_force_N=float(p[8]),
        contact_temp_C=float(p[9]),
        vib_event=int(p[10]),
        clamped=bool(int(p[11])),
    )


@dataclass
class ReplaySummary:
    ticks: int = 0
    bursts: int = 0
    clamps: int = 0
    min_temp_C: float = 0.0
    max_force_N: float = 0.0

    def to_line(self) -> str:
        return (
            f"# summary ticks={self.ticks} bursts={self.bursts} clamps={self.clamps} "
            f"min_temp_C={self.min_temp_C!r} max_force_N={self.max_force_N!r}"
        )


def parse_summary(line: str) -> ReplaySummary:
    if not line.startswith("# summary "):
        raise ValueError("not a summary line")
    fields = dict(kv.split("=", 1) for kv in line[len("# summary ") :].split())
    return ReplaySummary(
        ticks=int(fields["ticks"]),
        bursts=int(fields["bursts"]),
        clamps=int(fields["clamps"]),
        min_temp_C=float(fields["min_temp_C"]),
        max_force_N=float(fields["max_force_N"]),
    )


def write_telemetry(records, summary: ReplaySummary) -> str:
    lines = [TELEMETRY_MAGIC, "# columns: " + " ".join(COLUMNS)]
    lines.extend(r.to_line() for r in records)
    lines.append(summary.to_line())
    return "\n".join(lines) + "\n"


def read_telemetry(text: str) -> tuple[list[TelemetryRecord], ReplaySummary]:
    records: list[TelemetryRecord] = []
    summary: ReplaySummary | None = None
    for line in text.splitlines():
        if line.startswith("# summary "):
            summary = parse_summary(line)
        elif line.startswith("#") or not line.strip():
            continue
        else:
            records.append(parse_record(line))
    if summary is None:
        raise ValueError("telemetry document lacks a summary record")
    return records, summary
