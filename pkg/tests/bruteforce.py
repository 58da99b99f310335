"""Exhaustive schedule-existence oracle for tiny instances.

Decides satisfiability by enumerating every abstract configuration (per
qubit and stage: site, offsets, trap type; per stage: beam flag; per gate:
stage) and asking the independent rule checker whether some completion to
a full schedule is violation-free.  AOD line indices are completed
canonically (order ranks), which is exact because every rule reads them
only through order, cross-stage equality, or flag lookups; transfer flags
are completed by search.  Shares the checker with the validator module and
nothing with the encoder, so agreement with the solver cross-checks the
whole encode/solve stack.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from atomprep.encode import LayoutMode
from atomprep.model import (
    Architecture,
    Circuit,
    QubitPlacement,
    Schedule,
    Stage,
    StageKind,
)
from atomprep.validate import check_schedule

Abstract = tuple[int, int, int, int, bool]  # (x, y, h, v, in_aod)


def placement_options(arch: Architecture) -> list[Abstract]:
    out: list[Abstract] = []
    for x in range(arch.x_max + 1):
        for y in range(arch.y_max + 1):
            out.append((x, y, 0, 0, False))
            for h in range(-arch.h_max, arch.h_max + 1):
                for v in range(-arch.v_max, arch.v_max + 1):
                    out.append((x, y, h, v, True))
    return out


def canonical_placements(config: tuple[Abstract, ...]) -> tuple[QubitPlacement, ...] | None:
    """Assign minimal order-consistent AOD line indices; None if impossible
    to tell apart columns/rows later (never happens: ranks always exist)."""
    xs = sorted({(x, h) for x, y, h, v, a in config if a})
    ys = sorted({(y, v) for x, y, h, v, a in config if a})
    col_of = {key: i for i, key in enumerate(xs)}
    row_of = {key: i for i, key in enumerate(ys)}
    out = []
    for x, y, h, v, a in config:
        if a:
            out.append(QubitPlacement(x=x, y=y, h=h, v=v, in_aod=True,
                                      col=col_of[(x, h)], row=row_of[(y, v)]))
        else:
            out.append(QubitPlacement(x=x, y=y))
    return tuple(out)


@dataclass(frozen=True)
class StageSig:
    execute: bool
    gates: frozenset[int]


def _make_stage(placements: tuple[QubitPlacement, ...], sig: StageSig,
                store_cols=frozenset(), store_rows=frozenset(),
                load_cols=frozenset(), load_rows=frozenset()) -> Stage:
    if sig.execute:
        return Stage(kind=StageKind.EXECUTION, placements=placements,
                     executed_gates=sig.gates)
    return Stage(kind=StageKind.TRANSFER, placements=placements,
                 store_cols=store_cols, store_rows=store_rows,
                 load_cols=load_cols, load_rows=load_rows)


def _no_violations(arch, circuit, layout, stages) -> bool:
    report = check_schedule(arch, circuit, layout, Schedule(stages=tuple(stages)))
    # Gate cover is judged on the full schedule, not on stage slices.
    return not [v for v in report.violations if v.rule != "cover"]


class BruteForcer:
    def __init__(self, arch: Architecture, circuit: Circuit, layout: LayoutMode):
        self.arch = arch
        self.circuit = circuit
        self.layout = layout
        self.options = placement_options(arch)
        self._stage_cache: dict[StageSig, list[tuple[QubitPlacement, ...]]] = {}
        self._trans_cache: dict[tuple, bool] = {}

    def stage_configs(self, sig: StageSig) -> list[tuple[QubitPlacement, ...]]:
        if sig in self._stage_cache:
            return self._stage_cache[sig]
        configs = []
        for combo in itertools.product(self.options, repeat=self.circuit.num_qubits):
            placements = canonical_placements(combo)
            if placements is None:
                continue
            if any(p.in_aod and (p.col > self.arch.c_max or p.row > self.arch.r_max)
                   for p in placements):
                continue
            if _no_violations(self.arch, self.circuit, self.layout,
                              [_make_stage(placements, sig)]):
                configs.append(placements)
        self._stage_cache[sig] = configs
        return configs

    def _store_flags(self, cur, nxt):
        """Maximal valid store flags: flag lines whose AOD qubits all leave."""
        stored = [q for q in range(len(cur)) if cur[q].in_aod and not nxt[q].in_aod]
        cols: dict[int, bool] = {}
        rows: dict[int, bool] = {}
        for q, p in enumerate(cur):
            if not p.in_aod:
                continue
            leaves = not nxt[q].in_aod
            cols[p.col] = cols.get(p.col, True) and leaves
            rows[p.row] = rows.get(p.row, True) and leaves
        st_c = frozenset(k for k, all_leave in cols.items() if all_leave)
        st_r = frozenset(k for k, all_leave in rows.items() if all_leave)
        for q in stored:
            if cur[q].col not in st_c and cur[q].row not in st_r:
                return None  # some stored qubit lies on no all-stored line
        return st_c, st_r

    def _load_flag_choices(self, cur, nxt):
        """Candidate (load_cols, load_rows) sets; small exhaustive search."""
        loaded = [q for q in range(len(cur)) if not cur[q].in_aod and nxt[q].in_aod]
        slm_stay = any(not cur[q].in_aod and not nxt[q].in_aod
                       for q in range(len(cur)))
        if not loaded:
            yield frozenset(), frozenset()
            return
        cols_only = frozenset(nxt[q].col for q in loaded)
        if not (slm_stay and len(cols_only) > self.arch.c_max):
            yield cols_only, frozenset()
        # Mixed covers, for the corner where columns alone are too many.
        all_cols = range(self.arch.c_max + 1)
        all_rows = range(self.arch.r_max + 1)
        for nc in range(self.arch.c_max + 2):
            for cset in itertools.combinations(all_cols, nc):
                for nr in range(self.arch.r_max + 2):
                    for rset in itertools.combinations(all_rows, nr):
                        sc, sr = frozenset(cset), frozenset(rset)
                        if slm_stay and (len(sc) > self.arch.c_max or
                                         len(sr) > self.arch.r_max):
                            continue
                        if all(nxt[q].col in sc or nxt[q].row in sr for q in loaded):
                            yield sc, sr

    def transition_ok(self, sig_cur: StageSig, cur, sig_nxt: StageSig, nxt) -> bool:
        key = (sig_cur, cur, sig_nxt, nxt)
        if key in self._trans_cache:
            return self._trans_cache[key]
        ok = False
        if sig_cur.execute:
            stages = [_make_stage(cur, sig_cur), _make_stage(nxt, sig_nxt)]
            ok = _no_violations(self.arch, self.circuit, self.layout, stages)
        else:
            flags = self._store_flags(cur, nxt)
            if flags is not None:
                st_c, st_r = flags
                for sl_c, sl_r in self._load_flag_choices(cur, nxt):
                    stages = [
                        _make_stage(cur, sig_cur, store_cols=st_c, store_rows=st_r,
                                    load_cols=sl_c, load_rows=sl_r),
                        _make_stage(nxt, sig_nxt),
                    ]
                    if _no_violations(self.arch, self.circuit, self.layout, stages):
                        ok = True
                        break
        self._trans_cache[key] = ok
        return ok

    def satisfiable(self, s: int) -> bool:
        gates = range(1, self.circuit.num_gates + 1)
        for ryd in itertools.product((True, False), repeat=s):
            exec_stages = [t for t in range(s) if ryd[t]]
            if self.circuit.num_gates and not exec_stages:
                continue
            for assign in itertools.product(exec_stages or [0],
                                            repeat=self.circuit.num_gates):
                sigs = [StageSig(execute=ryd[t],
                                 gates=frozenset(i for i, ti in zip(gates, assign)
                                                 if ti == t))
                        for t in range(s)]
                reachable = self.stage_configs(sigs[0])
                for t in range(s - 1):
                    nxt_configs = self.stage_configs(sigs[t + 1])
                    reachable = [
                        c2 for c2 in nxt_configs
                        if any(self.transition_ok(sigs[t], c1, sigs[t + 1], c2)
                               for c1 in reachable)
                    ]
                    if not reachable:
                        break
                if reachable:
                    return True
        return False


def brute_force_sat(arch: Architecture, circuit: Circuit, s: int,
                    layout: LayoutMode) -> bool:
    return BruteForcer(arch, circuit, layout).satisfiable(s)
