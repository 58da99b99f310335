"""Domain types for zoned neutral-atom scheduling.

An :class:`Architecture` describes a rectangular grid of interaction sites.
Each site holds one static (SLM) trap at its center surrounded by candidate
movable (AOD) traps at integer offsets.  Site rows are partitioned into an
entangling zone, where a global Rydberg beam drives CZ gates, and storage
rows, where qubits are shielded from the beam.

A :class:`Circuit` is the entangling core of a graph-state preparation
circuit: an unordered list of CZ pairs plus single-qubit metadata (every
qubit starts in ``|+>``, selected qubits get a final Hadamard).

A :class:`Schedule` is the compiled result: per-stage qubit placements,
a stage kind (execution or transfer), the gates fired per execution stage,
and the AOD line transfer flags per transfer stage.

All types are immutable values after construction and safe to share across
threads.  JSON (de)serialization is stable: ``loads(dumps(x)) == x``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Mapping

__all__ = [
    "FormatError",
    "ZoneKind",
    "StageKind",
    "FigureOfMeritTable",
    "Architecture",
    "Circuit",
    "QubitPlacement",
    "Stage",
    "Schedule",
    "load_architecture",
    "load_circuit",
    "load_schedule",
    "dump_architecture",
    "dump_circuit",
    "dump_schedule",
    "zone_of",
    "zone_boundaries",
    "gap_extra_um",
    "position_um",
    "default_architecture",
]


class FormatError(ValueError):
    """Malformed or invariant-violating external data (JSON files, fields)."""


class ZoneKind(Enum):
    ENTANGLING = "entangling"
    STORAGE = "storage"


class StageKind(Enum):
    EXECUTION = "execution"
    TRANSFER = "transfer"


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise FormatError(msg)


@dataclass(frozen=True)
class FigureOfMeritTable:
    """Per-operation fidelities, durations (us), and shuttle speed (us/um)."""

    f_cz: float = 0.995
    f_id_ryd: float = 0.998
    f_local_rz: float = 0.99912
    f_global_ry: float = 0.9999
    f_transfer: float = 0.999
    t_cz: float = 0.27
    t_local_rz: float = 5.0
    t_global_ry: float = 1.0
    t_transfer: float = 200.0
    shuttle_speed: float = 0.55
    t_eff: float = 1_000_000.0

    def __post_init__(self) -> None:
        for name in ("f_cz", "f_id_ryd", "f_local_rz", "f_global_ry", "f_transfer"):
            val = getattr(self, name)
            _require(0.0 < val <= 1.0, f"{name} must be in (0, 1], got {val}")
        for name in ("t_cz", "t_local_rz", "t_global_ry", "t_transfer", "shuttle_speed", "t_eff"):
            val = getattr(self, name)
            _require(val > 0.0, f"{name} must be positive, got {val}")


@dataclass(frozen=True)
class Architecture:
    """Zoned trap-grid geometry and its figures of merit.

    Coordinates count interaction sites: ``0 <= x <= x_max`` and
    ``0 <= y <= y_max``.  Intra-site offsets are trap steps with
    ``|h| <= h_max`` and ``|v| <= v_max`` (0 is the SLM center).  Site rows
    ``e_min..e_max`` form the entangling zone, the rest is storage.
    """

    x_max: int
    y_max: int
    h_max: int
    v_max: int
    c_max: int
    r_max: int
    e_min: int
    e_max: int
    interaction_radius: int
    num_stages_cap: int = 16
    site_pitch_um: float = 14.0
    trap_pitch_um: float = 1.0
    zone_gap_um: float = 20.0
    fom: FigureOfMeritTable = field(default_factory=FigureOfMeritTable)

    def __post_init__(self) -> None:
        _require(self.x_max >= 0, f"x_max must be >= 0, got {self.x_max}")
        _require(self.y_max >= 0, f"y_max must be >= 0, got {self.y_max}")
        _require(self.h_max >= 0, f"h_max must be >= 0, got {self.h_max}")
        _require(self.v_max >= 0, f"v_max must be >= 0, got {self.v_max}")
        _require(self.c_max >= 0, f"c_max must be >= 0, got {self.c_max}")
        _require(self.r_max >= 0, f"r_max must be >= 0, got {self.r_max}")
        _require(self.e_min >= 0, f"e_min must be >= 0, got {self.e_min}")
        _require(self.e_min <= self.e_max, f"e_min > e_max ({self.e_min} > {self.e_max})")
        _require(self.e_max <= self.y_max, f"e_max > y_max ({self.e_max} > {self.y_max})")
        _require(
            self.interaction_radius >= 1,
            f"interaction_radius must be >= 1, got {self.interaction_radius}",
        )
        _require(self.num_stages_cap >= 1, f"num_stages_cap must be >= 1, got {self.num_stages_cap}")
        for name in ("site_pitch_um", "trap_pitch_um", "zone_gap_um"):
            val = getattr(self, name)
            _require(val > 0.0, f"{name} must be positive, got {val}")

    @property
    def num_sites(self) -> int:
        return (self.x_max + 1) * (self.y_max + 1)

    @property
    def entangling_rows(self) -> range:
        return range(self.e_min, self.e_max + 1)


def default_architecture(e_min: int = 0, e_max: int = 6) -> Architecture:
    """The 8x7-site evaluation architecture with the given entangling rows."""
    return Architecture(
        x_max=7, y_max=6, h_max=2, v_max=2, c_max=5, r_max=5,
        e_min=e_min, e_max=e_max, interaction_radius=2,
    )


def zone_of(arch: Architecture, y: int) -> ZoneKind:
    """Classify site row ``y`` as entangling or storage."""
    if not 0 <= y <= arch.y_max:
        raise ValueError(f"row {y} outside [0, {arch.y_max}]")
    if arch.e_min <= y <= arch.e_max:
        return ZoneKind.ENTANGLING
    return ZoneKind.STORAGE


def zone_boundaries(arch: Architecture) -> tuple[int, ...]:
    """Rows ``b`` such that rows ``b-1`` and ``b`` lie in different zones."""
    return tuple(
        b for b in range(1, arch.y_max + 1)
        if zone_of(arch, b - 1) is not zone_of(arch, b)
    )


def gap_extra_um(arch: Architecture) -> float:
    """Extra vertical spacing inserted at each zone boundary.

    Chosen minimally so the nearest traps on opposite sides of a boundary
    (vertical offsets +v_max and -v_max) end up at least ``zone_gap_um``
    apart, while intra-zone geometry matches the single-zone case.
    """
    nearest = arch.site_pitch_um - 2.0 * arch.trap_pitch_um * arch.v_max
    return max(0.0, arch.zone_gap_um - nearest)


@dataclass(frozen=True)
class Circuit:
    """CZ pairs plus the single-qubit prologue/epilogue metadata.

    ``cz_gates`` is an ordered list of unordered pairs; gate *i* (1-based)
    refers to ``cz_gates[i-1]``.  Pairs are normalized to ``(lo, hi)``.
    """

    num_qubits: int
    cz_gates: tuple[tuple[int, int], ...]
    hadamard_qubits: frozenset[int] = frozenset()
    name: str = ""

    def __post_init__(self) -> None:
        _require(self.num_qubits >= 0, f"num_qubits must be >= 0, got {self.num_qubits}")
        norm = []
        for pair in self.cz_gates:
            a, b = pair
            _require(a != b, f"CZ pair ({a}, {b}) must have distinct qubits")
            _require(
                0 <= min(a, b) and max(a, b) < self.num_qubits,
                f"CZ pair ({a}, {b}) outside qubit range [0, {self.num_qubits})",
            )
            norm.append((min(a, b), max(a, b)))
        _require(len(set(norm)) == len(norm), "duplicate CZ pair in gate list")
        object.__setattr__(self, "cz_gates", tuple(norm))
        object.__setattr__(self, "hadamard_qubits", frozenset(self.hadamard_qubits))
        for q in self.hadamard_qubits:
            _require(0 <= q < self.num_qubits, f"hadamard qubit {q} outside range")

    @property
    def num_gates(self) -> int:
        return len(self.cz_gates)

    def gates_on(self, q: int) -> tuple[int, ...]:
        """1-based indices of gates acting on qubit ``q``."""
        return tuple(i for i, (a, b) in enumerate(self.cz_gates, start=1) if q in (a, b))


@dataclass(frozen=True)
class QubitPlacement:
    """One qubit's trap at the start of a stage.

    ``col``/``row`` are AOD line indices, meaningful only when ``in_aod``;
    they are kept at 0 for SLM qubits.
    """

    x: int
    y: int
    h: int = 0
    v: int = 0
    in_aod: bool = False
    col: int = 0
    row: int = 0

    def __post_init__(self) -> None:
        if not self.in_aod:
            _require(
                self.h == 0 and self.v == 0,
                f"SLM placement must have zero offsets, got h={self.h}, v={self.v}",
            )
            _require(
                self.col == 0 and self.row == 0,
                "SLM placement carries no AOD line indices",
            )


@dataclass(frozen=True)
class Stage:
    """Placements at stage start plus what the stage does.

    Execution stages fire the Rydberg beam (``executed_gates``); transfer
    stages may store/load qubits via the flagged AOD lines.  Both are
    followed by shuttling toward the next stage's placements.
    """

    kind: StageKind
    placements: tuple[QubitPlacement, ...]
    executed_gates: frozenset[int] = frozenset()
    store_cols: frozenset[int] = frozenset()
    store_rows: frozenset[int] = frozenset()
    load_cols: frozenset[int] = frozenset()
    load_rows: frozenset[int] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "placements", tuple(self.placements))
        for attr in ("executed_gates", "store_cols", "store_rows", "load_cols", "load_rows"):
            object.__setattr__(self, attr, frozenset(getattr(self, attr)))
        if self.kind is StageKind.EXECUTION:
            _require(
                not (self.store_cols or self.store_rows or self.load_cols or self.load_rows),
                "execution stage carries no transfer flags",
            )
        else:
            _require(not self.executed_gates, "transfer stage executes no gates")


@dataclass(frozen=True)
class Schedule:
    """A fixed-length sequence of stages over a fixed qubit register."""

    stages: tuple[Stage, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "stages", tuple(self.stages))
        sizes = {len(st.placements) for st in self.stages}
        _require(len(sizes) <= 1, "all stages must place the same qubit register")

    @property
    def num_stages(self) -> int:
        return len(self.stages)

    @property
    def num_qubits(self) -> int:
        return len(self.stages[0].placements) if self.stages else 0

    @property
    def num_execution_stages(self) -> int:
        return sum(1 for st in self.stages if st.kind is StageKind.EXECUTION)

    @property
    def num_transfer_stages(self) -> int:
        return sum(1 for st in self.stages if st.kind is StageKind.TRANSFER)

    def executed_gate_stages(self) -> dict[int, int]:
        """Map gate index -> stage index, over all execution stages."""
        out: dict[int, int] = {}
        for t, st in enumerate(self.stages):
            for i in st.executed_gates:
                out.setdefault(i, t)
        return out


def position_um(arch: Architecture, p: QubitPlacement) -> tuple[float, float]:
    """Physical trap position in micrometers.

    Vertically, each zone boundary strictly below the row inserts
    :func:`gap_extra_um` of extra spacing, which keeps qubits of different
    zones at least ``zone_gap_um`` apart (exhaustively checked in tests).
    """
    x_um = arch.site_pitch_um * p.x + arch.trap_pitch_um * p.h
    crossings = sum(1 for b in zone_boundaries(arch) if b <= p.y)
    y_um = (
        arch.site_pitch_um * p.y
        + arch.trap_pitch_um * p.v
        + gap_extra_um(arch) * crossings
    )
    return (x_um, y_um)


# --- JSON (de)serialization -------------------------------------------------
#
# Schemas (all floats decimal, field order irrelevant):
#   architecture: {"x_max": int, ..., "fom": {<FigureOfMeritTable fields>}?}
#   circuit:      {"name": str?, "num_qubits": int,
#                  "cz_gates": [[int, int], ...], "hadamard_qubits": [int]?}
#   schedule:     {"stages": [{"kind": "execution"|"transfer",
#                  "placements": [{"x","y"} | {"x","y","h","v","col","row"}],
#                  "executed_gates": [int]?, "store_cols": [int]?, ...}]}
# SLM placements omit h/v/col/row entirely (implied zero / absent).

_FOM_FIELDS = tuple(FigureOfMeritTable.__dataclass_fields__)
_ARCH_FIELDS = tuple(
    f for f in Architecture.__dataclass_fields__ if f != "fom"
)
_ARCH_REQUIRED = (
    "x_max", "y_max", "h_max", "v_max", "c_max", "r_max",
    "e_min", "e_max", "interaction_radius",
)


def _check_keys(obj: Mapping[str, Any], allowed: Iterable[str], what: str) -> None:
    unknown = set(obj) - set(allowed)
    _require(not unknown, f"unknown {what} fields: {sorted(unknown)}")


def load_architecture(text: str) -> Architecture:
    """Parse and validate an architecture JSON document."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from exc
    _require(isinstance(obj, dict), "architecture document must be a JSON object")
    _check_keys(obj, _ARCH_FIELDS + ("fom",), "architecture")
    for name in _ARCH_REQUIRED:
        _require(name in obj, f"missing architecture field {name!r}")
    fom_obj = obj.get("fom", {})
    _require(isinstance(fom_obj, dict), "fom must be a JSON object")
    _check_keys(fom_obj, _FOM_FIELDS, "fom")
    fom = FigureOfMeritTable(**fom_obj)
    kwargs = {k: v for k, v in obj.items() if k != "fom"}
    return Architecture(fom=fom, **kwargs)


def dump_architecture(arch: Architecture) -> str:
    obj: dict[str, Any] = {f: getattr(arch, f) for f in _ARCH_FIELDS}
    obj["fom"] = {f: getattr(arch.fom, f) for f in _FOM_FIELDS}
    return json.dumps(obj, indent=2, sort_keys=True)


def load_circuit(text: str) -> Circuit:
    """Parse and validate a circuit JSON document."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from exc
    _require(isinstance(obj, dict), "circuit document must be a JSON object")
    _check_keys(obj, ("name", "num_qubits", "cz_gates", "hadamard_qubits"), "circuit")
    _require("num_qubits" in obj, "missing circuit field 'num_qubits'")
    _require("cz_gates" in obj, "missing circuit field 'cz_gates'")
    gates = []
    for pair in obj["cz_gates"]:
        _require(
            isinstance(pair, list) and len(pair) == 2,
            f"cz_gates entries must be 2-element lists, got {pair!r}",
        )
        gates.append((int(pair[0]), int(pair[1])))
    return Circuit(
        num_qubits=int(obj["num_qubits"]),
        cz_gates=tuple(gates),
        hadamard_qubits=frozenset(int(q) for q in obj.get("hadamard_qubits", [])),
        name=str(obj.get("name", "")),
    )


def dump_circuit(circuit: Circuit) -> str:
    obj: dict[str, Any] = {
        "name": circuit.name,
        "num_qubits": circuit.num_qubits,
        "cz_gates": [list(p) for p in circuit.cz_gates],
        "hadamard_qubits": sorted(circuit.hadamard_qubits),
    }
    return json.dumps(obj, indent=2, sort_keys=True)


def _placement_to_obj(p: QubitPlacement) -> dict[str, Any]:
    if not p.in_aod:
        return {"x": p.x, "y": p.y}
    return {"x": p.x, "y": p.y, "h": p.h, "v": p.v, "col": p.col, "row": p.row}


def _placement_from_obj(obj: Mapping[str, Any]) -> QubitPlacement:
    _require(isinstance(obj, Mapping), "placement must be a JSON object")
    _check_keys(obj, ("x", "y", "h", "v", "col", "row"), "placement")
    _require("x" in obj and "y" in obj, "placement needs x and y")
    in_aod = any(k in obj for k in ("h", "v", "col", "row"))
    if not in_aod:
        return QubitPlacement(x=int(obj["x"]), y=int(obj["y"]))
    return QubitPlacement(
        x=int(obj["x"]), y=int(obj["y"]),
        h=int(obj.get("h", 0)), v=int(obj.get("v", 0)),
        in_aod=True,
        col=int(obj.get("col", 0)), row=int(obj.get("row", 0)),
    )


def load_schedule(text: str) -> Schedule:
    """Parse and validate a schedule JSON document."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from exc
    _require(isinstance(obj, dict), "schedule document must be a JSON object")
    _check_keys(obj, ("stages",), "schedule")
    _require("stages" in obj, "missing schedule field 'stages'")
    stages = []
    for st in obj["stages"]:
        _require(isinstance(st, dict), "stage must be a JSON object")
        _check_keys(
            st,
            ("kind", "placements", "executed_gates",
             "store_cols", "store_rows", "load_cols", "load_rows"),
            "stage",
        )
        try:
            kind = StageKind(st.get("kind", ""))
        except ValueError:
            raise FormatError(f"unknown stage kind {st.get('kind')!r}") from None
        stages.append(Stage(
            kind=kind,
            placements=tuple(_placement_from_obj(p) for p in st.get("placements", [])),
            executed_gates=frozenset(int(i) for i in st.get("executed_gates", [])),
            store_cols=frozenset(int(k) for k in st.get("store_cols", [])),
            store_rows=frozenset(int(k) for k in st.get("store_rows", [])),
            load_cols=frozenset(int(k) for k in st.get("load_cols", [])),
            load_rows=frozenset(int(k) for k in st.get("load_rows", [])),
        ))
    return Schedule(stages=tuple(stages))


def dump_schedule(schedule: Schedule) -> str:
    stages = []
    for st in schedule.stages:
        obj: dict[str, Any] = {
            "kind": st.kind.value,
            "placements": [_placement_to_obj(p) for p in st.placements],
        }
        if st.kind is StageKind.EXECUTION:
            obj["executed_gates"] = sorted(st.executed_gates)
        else:
            obj["store_cols"] = sorted(st.store_cols)
            obj["store_rows"] = sorted(st.store_rows)
            obj["load_cols"] = sorted(st.load_cols)
            obj["load_rows"] = sorted(st.load_rows)
        stages.append(obj)
    return json.dumps({"stages": stages}, indent=2, sort_keys=True)
