"""Timing model and approximated success probability for schedules.

Stage durations: an execution stage costs the CZ pulse plus the shuttle to
the next stage's placements; a transfer stage costs one trap-transfer ramp
per phase actually used (store, load) plus the shuttle.  The shuttle term
is the per-qubit travel summed over qubits at the stage's speed; a one-off
global-rotation prologue (|+> initialization) and a local+global rotation
epilogue (final Hadamards) frame the schedule.

The success estimate multiplies per-operation fidelities (one CZ factor
per gate, one faulty-identity factor per idle qubit left in the entangling
rows during a beam, one transfer factor per qubit stored or loaded, and
the rotation factors) and decays with the accumulated idle time of all
qubits over an effective coherence time.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .model import Architecture, Circuit, Schedule, StageKind, position_um

__all__ = ["StageTiming", "FidelityReport", "stage_timeline", "estimate_asp"]


@dataclass(frozen=True)
class StageTiming:
    kind: str
    shuttle_um: float       # summed over qubits, toward the next stage
    max_shuttle_um: float   # farthest single-qubit travel
    duration_us: float


@dataclass(frozen=True)
class FidelityReport:
    per_stage: tuple[StageTiming, ...]
    prologue_us: float
    epilogue_us: float
    total_time_us: float
    t_idle_us: float
    factors: dict[str, int]
    asp: float

    def to_json_obj(self) -> dict:
        return {
            "per_stage": [
                {"kind": s.kind, "shuttle_um": s.shuttle_um,
                 "max_shuttle_um": s.max_shuttle_um, "duration_us": s.duration_us}
                for s in self.per_stage
            ],
            "prologue_us": self.prologue_us,
            "epilogue_us": self.epilogue_us,
            "total_time_us": self.total_time_us,
            "t_idle_us": self.t_idle_us,
            "factors": dict(sorted(self.factors.items())),
            "asp": self.asp,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), indent=2)


def _displacements_um(arch: Architecture, schedule: Schedule, t: int) -> list[float]:
    """Per-qubit travel from stage t to stage t+1 (empty for the last stage)."""
    if t >= schedule.num_stages - 1:
        return [0.0] * schedule.num_qubits
    out = []
    for p, p2 in zip(schedule.stages[t].placements, schedule.stages[t + 1].placements):
        x1, y1 = position_um(arch, p)
        x2, y2 = position_um(arch, p2)
        out.append(math.hypot(x2 - x1, y2 - y1))
    return out


def _transfer_events(schedule: Schedule, t: int) -> tuple[list[int], list[int]]:
    """(stored, loaded) qubit indices across transfer stage t."""
    if t >= schedule.num_stages - 1:
        return ([], [])
    cur = schedule.stages[t].placements
    nxt = schedule.stages[t + 1].placements
    stored = [q for q, (p, p2) in enumerate(zip(cur, nxt)) if p.in_aod and not p2.in_aod]
    loaded = [q for q, (p, p2) in enumerate(zip(cur, nxt)) if not p.in_aod and p2.in_aod]
    return (stored, loaded)


def stage_timeline(arch: Architecture, schedule: Schedule) -> tuple[StageTiming, ...]:
    """Per-stage durations; the last stage has no shuttle term."""
    fom = arch.fom
    out = []
    for t, st in enumerate(schedule.stages):
        moves = _displacements_um(arch, schedule, t)
        total_um = sum(moves)
        shuttle_us = fom.shuttle_speed * total_um
        if st.kind is StageKind.EXECUTION:
            duration = fom.t_cz + shuttle_us
        else:
            stored, loaded = _transfer_events(schedule, t)
            duration = (
                (fom.t_transfer if stored else 0.0)
                + (fom.t_transfer if loaded else 0.0)
                + shuttle_us
            )
        out.append(StageTiming(
            kind=st.kind.value,
            shuttle_um=total_um,
            max_shuttle_um=max(moves) if moves else 0.0,
            duration_us=duration,
        ))
    return tuple(out)


def estimate_asp(arch: Architecture, circuit: Circuit, schedule: Schedule) -> FidelityReport:
    """Fidelity factors, idle-time decay, and the resulting success estimate."""
    fom = arch.fom
    n = circuit.num_qubits
    m = len(circuit.hadamard_qubits)
    timings = stage_timeline(arch, schedule)
    ran = schedule.num_stages > 0

    prologue = fom.t_global_ry if n > 0 and ran else 0.0
    epilogue = (fom.t_local_rz + fom.t_global_ry) if m > 0 and ran else 0.0
    total = prologue + sum(s.duration_us for s in timings) + epilogue

    # Fidelity factor counts.
    cz_count = sum(len(st.executed_gates) for st in schedule.stages)
    id_ryd = 0
    for st in schedule.stages:
        if st.kind is not StageKind.EXECUTION:
            continue
        gated = {q for i in st.executed_gates for q in circuit.cz_gates[i - 1]}
        for q, p in enumerate(st.placements):
            if q not in gated and arch.e_min <= p.y <= arch.e_max:
                id_ryd += 1
    transfer_ops = 0
    per_qubit_transfer = [0] * max(n, schedule.num_qubits)
    for t, st in enumerate(schedule.stages):
        if st.kind is StageKind.TRANSFER:
            stored, loaded = _transfer_events(schedule, t)
            transfer_ops += len(stored) + len(loaded)
            for q in stored + loaded:
                per_qubit_transfer[q] += 1
    factors = {
        "cz": cz_count,
        "id_ryd": id_ryd,
        "transfer": transfer_ops,
        "global_ry": (n if prologue else 0) + (m if epilogue else 0),
        "local_rz": m if epilogue else 0,
    }

    # Accumulated idle time: total minus each qubit's own busy time.
    gate_time = [0.0] * max(n, 1)
    for q1, q2 in circuit.cz_gates:
        gate_time[q1] += fom.t_cz
        gate_time[q2] += fom.t_cz
    moves = [_displacements_um(arch, schedule, t) for t in range(schedule.num_stages)]
    t_idle = 0.0
    for q in range(schedule.num_qubits):
        busy = prologue
        busy += gate_time[q] if q < len(gate_time) else 0.0
        busy += fom.t_transfer * per_qubit_transfer[q]
        if q in circuit.hadamard_qubits and epilogue:
            busy += epilogue
        busy += sum(fom.shuttle_speed * mv[q] for mv in moves)
        t_idle += max(0.0, total - busy)

    asp = math.exp(-t_idle / fom.t_eff)
    asp *= fom.f_cz ** factors["cz"]
    asp *= fom.f_id_ryd ** factors["id_ryd"]
    asp *= fom.f_transfer ** factors["transfer"]
    asp *= fom.f_global_ry ** factors["global_ry"]
    asp *= fom.f_local_rz ** factors["local_rz"]

    return FidelityReport(
        per_stage=timings,
        prologue_us=prologue,
        epilogue_us=epilogue,
        total_time_us=total,
        t_idle_us=t_idle,
        factors=factors,
        asp=asp,
    )
