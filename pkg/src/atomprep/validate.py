"""Independent schedule checking.

:func:`check_schedule` re-verifies every architectural rule directly on a
decoded :class:`~atomprep.model.Schedule`, sharing no logic with the
symbolic encoder; it is the trusted oracle in the encoder/validator
cross-check.  Rule identifiers name the constraint families used by the
encoder (``eq9`` .. ``eq21`` plus the row/load mirrors ``eq11r``,
``eq20l``, ``eq21r``, and the bookkeeping rules ``range``, ``flags``,
``cover``).

:func:`extract_schedule` decodes a solver model into a Schedule.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .encode import LayoutMode, SmtInstance
from .model import (
    Architecture,
    Circuit,
    QubitPlacement,
    Schedule,
    Stage,
    StageKind,
)

__all__ = ["Violation", "ValidationReport", "extract_schedule", "check_schedule"]


@dataclass(frozen=True)
class Violation:
    rule: str
    stage: int
    subjects: tuple
    message: str


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    executed_gate_cover: dict[int, int] = field(default_factory=dict)
    cover_total: bool = False

    @property
    def ok(self) -> bool:
        return not self.violations and self.cover_total

    def to_json_obj(self) -> dict:
        return {
            "ok": self.ok,
            "violations": [
                {"rule": v.rule, "stage": v.stage,
                 "subjects": list(v.subjects), "message": v.message}
                for v in self.violations
            ],
            "warnings": list(self.warnings),
            "executed_gate_cover": {str(i): t for i, t in sorted(self.executed_gate_cover.items())},
        }


def extract_schedule(inst: SmtInstance, model: dict[str, int | bool]) -> Schedule:
    """Decode a satisfying assignment into a Schedule.

    AOD line indices of SLM qubits are don't-cares in the formulation and
    are canonicalized to 0; transfer flags are trimmed to the lines through
    which some qubit is actually stored or loaded (solvers may set the rest
    arbitrarily).  Raises ``KeyError`` if the model misses a declared
    variable.
    """

    def val(key: tuple) -> int | bool:
        name = inst.var_map[key]
        if name not in model:
            raise KeyError(f"model assigns no value to {name}")
        return model[name]

    gate_stage = {i: val(("g", i)) for i in range(1, inst.circuit.num_gates + 1)}
    all_placements = []
    for t in range(inst.s):
        placements = []
        for q in range(inst.circuit.num_qubits):
            in_aod = bool(val(("a", q, t)))
            placements.append(QubitPlacement(
                x=int(val(("x", q, t))),
                y=int(val(("y", q, t))),
                h=int(val(("h", q, t))),
                v=int(val(("v", q, t))),
                in_aod=in_aod,
                col=int(val(("c", q, t))) if in_aod else 0,
                row=int(val(("r", q, t))) if in_aod else 0,
            ))
        all_placements.append(tuple(placements))

    stages = []
    for t in range(inst.s):
        placements = all_placements[t]
        if bool(val(("ryd", t))):
            stages.append(Stage(
                kind=StageKind.EXECUTION,
                placements=placements,
                executed_gates=frozenset(i for i, ts in gate_stage.items() if ts == t),
            ))
            continue
        stored: list[tuple[int, int]] = []  # (col, row) of each stored qubit
        loaded: list[tuple[int, int]] = []
        if t + 1 < inst.s:
            nxt = all_placements[t + 1]
            for p, p2 in zip(placements, nxt):
                if p.in_aod and not p2.in_aod:
                    stored.append((p.col, p.row))
                elif not p.in_aod and p2.in_aod:
                    loaded.append((p2.col, p2.row))
        st_c = {k for k in range(inst.arch.c_max + 1)
                if val(("st_c", k, t)) and any(c == k for c, _ in stored)}
        st_r = {k for k in range(inst.arch.r_max + 1)
                if val(("st_r", k, t)) and any(r == k for _, r in stored)}
        sl_c = {k for k in range(inst.arch.c_max + 1)
                if val(("sl_c", k, t)) and any(c == k for c, _ in loaded)}
        sl_r = {k for k in range(inst.arch.r_max + 1)
                if val(("sl_r", k, t)) and any(r == k for _, r in loaded)}
        _drop_redundant_flags(st_c, st_r, stored)
        _drop_redundant_flags(sl_c, sl_r, loaded)
        stages.append(Stage(
            kind=StageKind.TRANSFER,
            placements=placements,
            store_cols=frozenset(st_c),
            store_rows=frozenset(st_r),
            load_cols=frozenset(sl_c),
            load_rows=frozenset(sl_r),
        ))
    return Schedule(stages=tuple(stages))


def _drop_redundant_flags(cols: set[int], rows: set[int],
                          lines: list[tuple[int, int]]) -> None:
    """Greedily shrink a line cover; keeps every (col, row) pair covered."""

    def covered(c_set, r_set) -> bool:
        return all(c in c_set or r in r_set for c, r in lines)

    for k in sorted(cols):
        if covered(cols - {k}, rows):
            cols.discard(k)
    for k in sorted(rows):
        if covered(cols, rows - {k}):
            rows.discard(k)


def _lex_key(x: int, h: int) -> tuple[int, int]:
    return (x, h)


def check_schedule(arch: Architecture, circuit: Circuit, layout: LayoutMode,
                   schedule: Schedule) -> ValidationReport:
    """Check every architectural rule; report all violations found."""
    if schedule.stages and schedule.num_qubits != circuit.num_qubits:
        raise ValueError(
            f"schedule places {schedule.num_qubits} qubits, "
            f"circuit has {circuit.num_qubits}"
        )
    report = ValidationReport()
    bad = report.violations.append

    # Gate cover: each gate in exactly one execution stage.
    seen: dict[int, list[int]] = {i: [] for i in range(1, circuit.num_gates + 1)}
    for t, st in enumerate(schedule.stages):
        for i in st.executed_gates:
            if i not in seen:
                bad(Violation("cover", t, (i,), f"unknown gate index {i}"))
            else:
                seen[i].append(t)
    for i, ts in seen.items():
        if len(ts) == 1:
            report.executed_gate_cover[i] = ts[0]
        elif len(ts) > 1:
            bad(Violation("cover", ts[1], (i,), f"gate {i} executed in stages {ts}"))
    report.cover_total = all(len(ts) == 1 for ts in seen.values())
    for i, ts in seen.items():
        if not ts:
            bad(Violation("cover", -1, (i,), f"gate {i} never executed"))

    for t, st in enumerate(schedule.stages):
        _check_stage(arch, circuit, layout, t, st, report)

    for t in range(len(schedule.stages) - 1):
        cur, nxt = schedule.stages[t], schedule.stages[t + 1]
        if cur.kind is StageKind.EXECUTION:
            _check_execution_transition(t, cur, nxt, report)
        else:
            _check_transfer_transition(arch, t, cur, nxt, report)

    for t, st in enumerate(schedule.stages):
        if st.kind is StageKind.TRANSFER and t < len(schedule.stages) - 1:
            nxt = schedule.stages[t + 1]
            if all(p.in_aod == q.in_aod for p, q in zip(st.placements, nxt.placements)):
                report.warnings.append(
                    f"stage {t}: transfer stage performs no transfer (pure shuttle)"
                )
        if st.kind is StageKind.TRANSFER and t == len(schedule.stages) - 1:
            report.warnings.append(
                f"stage {t}: trailing transfer stage has no successor"
            )
    return report


def _check_stage(arch: Architecture, circuit: Circuit, layout: LayoutMode,
                 t: int, st: Stage, report: ValidationReport) -> None:
    bad = report.violations.append
    n = len(st.placements)

    for q, p in enumerate(st.placements):
        if not (0 <= p.x <= arch.x_max and 0 <= p.y <= arch.y_max):
            bad(Violation("range", t, (q,), f"qubit {q} site ({p.x},{p.y}) out of bounds"))
        if abs(p.h) > arch.h_max or abs(p.v) > arch.v_max:
            bad(Violation("range", t, (q,), f"qubit {q} offsets ({p.h},{p.v}) out of bounds"))
        if not p.in_aod and (p.h != 0 or p.v != 0):
            bad(Violation("eq10", t, (q,), f"SLM qubit {q} has nonzero offsets"))
        if p.in_aod and not (0 <= p.col <= arch.c_max and 0 <= p.row <= arch.r_max):
            bad(Violation("range", t, (q,), f"qubit {q} AOD line ({p.col},{p.row}) out of bounds"))

    for q1 in range(n):
        for q2 in range(q1 + 1, n):
            p1, p2 = st.placements[q1], st.placements[q2]
            if (p1.h, p1.v) == (p2.h, p2.v) and (p1.x, p1.y) == (p2.x, p2.y):
                bad(Violation("eq9", t, (q1, q2),
                              f"qubits {q1},{q2} share trap ({p1.x},{p1.y},{p1.h},{p1.v})"))

    for q1 in range(n):
        for q2 in range(n):
            if q1 == q2:
                continue
            p1, p2 = st.placements[q1], st.placements[q2]
            if not (p1.in_aod and p2.in_aod):
                continue
            if (p1.col < p2.col) != (_lex_key(p1.x, p1.h) < _lex_key(p2.x, p2.h)):
                bad(Violation("eq11", t, (q1, q2),
                              f"column order of {q1},{q2} disagrees with x-order"))
            if (p1.row < p2.row) != (_lex_key(p1.y, p1.v) < _lex_key(p2.y, p2.v)):
                bad(Violation("eq11r", t, (q1, q2),
                              f"row order of {q1},{q2} disagrees with y-order"))

    busy: set[int] = set()
    for i in sorted(st.executed_gates):
        q1, q2 = circuit.cz_gates[i - 1]
        p1, p2 = st.placements[q1], st.placements[q2]
        if (p1.x, p1.y) != (p2.x, p2.y):
            bad(Violation("eq12", t, (i,), f"gate {i} operands at different sites"))
        if abs(p1.h - p2.h) >= arch.interaction_radius or \
           abs(p1.v - p2.v) >= arch.interaction_radius:
            bad(Violation("eq12", t, (i,), f"gate {i} operands beyond interaction radius"))
        for q in (q1, q2):
            if not arch.e_min <= st.placements[q].y <= arch.e_max:
                bad(Violation("eq12", t, (i,), f"gate {i} operand {q} outside entangling rows"))
        if q1 in busy or q2 in busy:
            bad(Violation("eq13", t, (i,), f"gate {i} shares a qubit with another gate"))
        busy.update((q1, q2))

    if st.kind is StageKind.EXECUTION:
        gated = {q for i in st.executed_gates for q in circuit.cz_gates[i - 1]}
        for q, p in enumerate(st.placements):
            if q in gated:
                continue
            if layout is LayoutMode.SHIELDED:
                if arch.e_min <= p.y <= arch.e_max:
                    bad(Violation("eq14", t, (q,),
                                  f"idle qubit {q} inside entangling rows during beam"))
            else:
                for q2, p2 in enumerate(st.placements):
                    if q2 != q and (p.x, p.y) == (p2.x, p2.y):
                        bad(Violation("eq14ns", t, (q, q2),
                                      f"idle qubit {q} shares site with qubit {q2}"))

    for what, flags, cap in (
        ("store_cols", st.store_cols, arch.c_max),
        ("store_rows", st.store_rows, arch.r_max),
        ("load_cols", st.load_cols, arch.c_max),
        ("load_rows", st.load_rows, arch.r_max),
    ):
        for k in flags:
            if not 0 <= k <= cap:
                bad(Violation("flags", t, (k,), f"{what} index {k} out of range"))


def _check_execution_transition(t: int, cur: Stage, nxt: Stage,
                                report: ValidationReport) -> None:
    bad = report.violations.append
    for q, (p, p2) in enumerate(zip(cur.placements, nxt.placements)):
        if p.in_aod != p2.in_aod:
            bad(Violation("eq15", t, (q,),
                          f"qubit {q} changes trap type across a beam stage"))
        elif not p.in_aod:
            if (p.x, p.y) != (p2.x, p2.y):
                bad(Violation("eq16", t, (q,), f"SLM qubit {q} moved"))
        else:
            if (p.col, p.row) != (p2.col, p2.row):
                bad(Violation("eq17", t, (q,), f"AOD qubit {q} changed lines"))


def _check_transfer_transition(arch: Architecture, t: int, cur: Stage, nxt: Stage,
                               report: ValidationReport) -> None:
    bad = report.violations.append
    n = len(cur.placements)
    for q in range(n):
        p, p2 = cur.placements[q], nxt.placements[q]
        if not p2.in_aod and (p.h != 0 or p.v != 0):
            bad(Violation("eq18", t, (q,),
                          f"qubit {q} stored away from the trap center"))
        if not p2.in_aod and (p.x, p.y) != (p2.x, p2.y):
            bad(Violation("eq19", t, (q,), f"qubit {q} moved while not loaded"))
        if p.in_aod:
            hit = p.col in cur.store_cols or p.row in cur.store_rows
            if (not p2.in_aod) != hit:
                bad(Violation("eq20", t, (q,),
                              f"qubit {q} store state disagrees with store flags"))
        else:
            if p2.in_aod:
                hit = p2.col in cur.load_cols or p2.row in cur.load_rows
                if not hit:
                    bad(Violation("eq20l", t, (q,),
                                  f"qubit {q} loaded without a flagged line"))
    # Qubits staying in SLM must be able to dodge every activated load line:
    # the formulation assigns them an inactive column and an inactive row.
    if any(not p.in_aod and not p2.in_aod
           for p, p2 in zip(cur.placements, nxt.placements)):
        if len(cur.load_cols) > arch.c_max or len(cur.load_rows) > arch.r_max:
            bad(Violation("eq20l", t, (),
                          "all load lines active while a qubit stays in SLM"))

    for q1 in range(n):
        for q2 in range(n):
            if q1 == q2:
                continue
            a1, a2 = nxt.placements[q1], nxt.placements[q2]
            if not (a1.in_aod and a2.in_aod):
                continue
            b1, b2 = cur.placements[q1], cur.placements[q2]
            if (_lex_key(b1.x, b1.h) < _lex_key(b2.x, b2.h)) != (a1.col < a2.col):
                bad(Violation("eq21", t, (q1, q2),
                              f"column order of {q1},{q2} not carried over the transfer"))
            if (_lex_key(b1.y, b1.v) < _lex_key(b2.y, b2.v)) != (a1.row < a2.row):
                bad(Violation("eq21r", t, (q1, q2),
                              f"row order of {q1},{q2} not carried over the transfer"))
