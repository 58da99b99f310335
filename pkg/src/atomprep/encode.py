"""Symbolic formulation of the stage-scheduling problem.

For a fixed stage count S, :func:`build_instance` declares the per-qubit
placement variables, per-gate stage variables, per-stage beam flags and
per-line transfer flags, and asserts every architectural rule:

* trap occupancy and the SLM center rule,
* AOD line ordering (both axes),
* gate execution prerequisites and per-qubit gate exclusivity,
* shielding of idle qubits (or site separation in no-shielding layouts),
* execution-stage transitions (trap type, SLM pinning, line invariance),
* transfer-stage transitions (store location/pinning, store/load line
  coverage, and order preservation into the new line indices).

Stage semantics: placement variables describe the configuration at the
start of a stage; the transition family of stage t constrains the move to
stage t+1, and the final stage has no transition obligations.

The assertion list is an ordered abstract syntax tree; serialization to
SMT-LIB2 lives in :mod:`atomprep.solve`.  Construction is pure and
deterministic, so identical inputs give identical instances.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Union

from .model import Architecture, Circuit

__all__ = [
    "LayoutMode",
    "SmtInstance",
    "IntVar", "BoolVar", "IntConst", "Sub",
    "Cmp", "And", "Or", "Not", "Implies", "Iff", "BoolConst",
    "emit_variables",
    "assert_placement",
    "assert_aod_order",
    "assert_gates",
    "assert_shielding",
    "assert_execution_transition",
    "assert_transfer_transition",
    "build_instance",
]


class LayoutMode(Enum):
    SHIELDED = "shielded"
    NO_SHIELDING = "no-shielding"


# --- Expression AST -----------------------------------------------------------

@dataclass(frozen=True)
class IntVar:
    name: str


@dataclass(frozen=True)
class IntConst:
    value: int


@dataclass(frozen=True)
class Sub:
    a: "IntExpr"
    b: "IntExpr"


IntExpr = Union[IntVar, IntConst, Sub]


@dataclass(frozen=True)
class BoolVar:
    name: str


@dataclass(frozen=True)
class BoolConst:
    value: bool


@dataclass(frozen=True)
class Cmp:
    """Integer comparison: op in {"<", "<=", "=", "distinct"}."""

    op: str
    a: IntExpr
    b: IntExpr


@dataclass(frozen=True)
class And:
    args: tuple["BoolExpr", ...]

    def __init__(self, *args: "BoolExpr") -> None:
        object.__setattr__(self, "args", tuple(args))


@dataclass(frozen=True)
class Or:
    args: tuple["BoolExpr", ...]

    def __init__(self, *args: "BoolExpr") -> None:
        object.__setattr__(self, "args", tuple(args))


@dataclass(frozen=True)
class Not:
    arg: "BoolExpr"


@dataclass(frozen=True)
class Implies:
    a: "BoolExpr"
    b: "BoolExpr"


@dataclass(frozen=True)
class Iff:
    a: "BoolExpr"
    b: "BoolExpr"


BoolExpr = Union[BoolVar, BoolConst, Cmp, And, Or, Not, Implies, Iff]


# --- Instance -------------------------------------------------------------------

@dataclass
class SmtInstance:
    """Declarations plus the ordered assertion list for one stage count."""

    s: int
    layout: LayoutMode
    arch: Architecture
    circuit: Circuit
    declarations: list[tuple[str, str]] = field(default_factory=list)  # (name, sort)
    assertions: list[tuple[str, BoolExpr]] = field(default_factory=list)  # (family, expr)
    var_map: dict[tuple, str] = field(default_factory=dict)

    # Variable accessors; stages t are 0-based, gates i are 1-based.
    def x(self, q: int, t: int) -> IntVar:
        return IntVar(self.var_map[("x", q, t)])

    def y(self, q: int, t: int) -> IntVar:
        return IntVar(self.var_map[("y", q, t)])

    def h(self, q: int, t: int) -> IntVar:
        return IntVar(self.var_map[("h", q, t)])

    def v(self, q: int, t: int) -> IntVar:
        return IntVar(self.var_map[("v", q, t)])

    def a(self, q: int, t: int) -> BoolVar:
        return BoolVar(self.var_map[("a", q, t)])

    def c(self, q: int, t: int) -> IntVar:
        return IntVar(self.var_map[("c", q, t)])

    def r(self, q: int, t: int) -> IntVar:
        return IntVar(self.var_map[("r", q, t)])

    def g(self, i: int) -> IntVar:
        return IntVar(self.var_map[("g", i)])

    def ryd(self, t: int) -> BoolVar:
        return BoolVar(self.var_map[("ryd", t)])

    def load_col(self, k: int, t: int) -> BoolVar:
        return BoolVar(self.var_map[("sl_c", k, t)])

    def store_col(self, k: int, t: int) -> BoolVar:
        return BoolVar(self.var_map[("st_c", k, t)])

    def load_row(self, k: int, t: int) -> BoolVar:
        return BoolVar(self.var_map[("sl_r", k, t)])

    def store_row(self, k: int, t: int) -> BoolVar:
        return BoolVar(self.var_map[("st_r", k, t)])

    def add(self, family: str, expr: BoolExpr) -> None:
        self.assertions.append((family, expr))

    def families(self) -> set[str]:
        return {fam for fam, _ in self.assertions}


def _idle(inst: SmtInstance, q: int, t: int) -> BoolExpr:
    """Qubit q takes part in no gate scheduled at stage t."""
    terms = [Cmp("distinct", inst.g(i), IntConst(t)) for i in inst.circuit.gates_on(q)]
    return And(*terms)


def _in_zone(inst: SmtInstance, q: int, t: int) -> BoolExpr:
    arch = inst.arch
    return And(
        Cmp("<=", IntConst(arch.e_min), inst.y(q, t)),
        Cmp("<=", inst.y(q, t), IntConst(arch.e_max)),
    )


def _lex_less(x1: IntExpr, h1: IntExpr, x2: IntExpr, h2: IntExpr) -> BoolExpr:
    return Or(
        Cmp("<", x1, x2),
        And(Cmp("=", x1, x2), Cmp("<", h1, h2)),
    )


def emit_variables(arch: Architecture, circuit: Circuit, s: int,
                   layout: LayoutMode = LayoutMode.SHIELDED) -> SmtInstance:
    """Declare all variables with their range assertions."""
    if s < 1:
        raise ValueError(f"stage count must be >= 1, got {s}")
    inst = SmtInstance(s=s, layout=layout, arch=arch, circuit=circuit)

    def declare(key: tuple, name: str, sort: str) -> None:
        inst.var_map[key] = name
        inst.declarations.append((name, sort))

    for t in range(s):
        for q in range(circuit.num_qubits):
            declare(("x", q, t), f"x_q{q}_t{t}", "Int")
            declare(("y", q, t), f"y_q{q}_t{t}", "Int")
            declare(("h", q, t), f"h_q{q}_t{t}", "Int")
            declare(("v", q, t), f"v_q{q}_t{t}", "Int")
            declare(("a", q, t), f"a_q{q}_t{t}", "Bool")
            declare(("c", q, t), f"c_q{q}_t{t}", "Int")
            declare(("r", q, t), f"r_q{q}_t{t}", "Int")
    for i in range(1, circuit.num_gates + 1):
        declare(("g", i), f"g{i}", "Int")
    for t in range(s):
        declare(("ryd", t), f"ryd_t{t}", "Bool")
    for t in range(s):
        for k in range(arch.c_max + 1):
            declare(("sl_c", k, t), f"sl_c{k}_t{t}", "Bool")
            declare(("st_c", k, t), f"st_c{k}_t{t}", "Bool")
        for k in range(arch.r_max + 1):
            declare(("sl_r", k, t), f"sl_r{k}_t{t}", "Bool")
            declare(("st_r", k, t), f"st_r{k}_t{t}", "Bool")

    def between(lo: int, var: IntVar, hi: int) -> BoolExpr:
        return And(Cmp("<=", IntConst(lo), var), Cmp("<=", var, IntConst(hi)))

    for t in range(s):
        for q in range(circuit.num_qubits):
            inst.add("range", between(0, inst.x(q, t), arch.x_max))
            inst.add("range", between(0, inst.y(q, t), arch.y_max))
            inst.add("range", between(-arch.h_max, inst.h(q, t), arch.h_max))
            inst.add("range", between(-arch.v_max, inst.v(q, t), arch.v_max))
            inst.add("range", between(0, inst.c(q, t), arch.c_max))
            inst.add("range", between(0, inst.r(q, t), arch.r_max))
    for i in range(1, circuit.num_gates + 1):
        inst.add("range", And(
            Cmp("<=", IntConst(0), inst.g(i)),
            Cmp("<", inst.g(i), IntConst(s)),
        ))
    return inst


def assert_placement(inst: SmtInstance) -> None:
    """No two qubits in one trap; SLM qubits sit at the site center."""
    n = inst.circuit.num_qubits
    for t in range(inst.s):
        for q1 in range(n):
            for q2 in range(q1 + 1, n):
                inst.add("eq9", Implies(
                    And(
                        Cmp("=", inst.h(q1, t), inst.h(q2, t)),
                        Cmp("=", inst.v(q1, t), inst.v(q2, t)),
                    ),
                    Or(
                        Cmp("distinct", inst.x(q1, t), inst.x(q2, t)),
                        Cmp("distinct", inst.y(q1, t), inst.y(q2, t)),
                    ),
                ))
    for t in range(inst.s):
        for q in range(n):
            inst.add("eq10", Implies(
                Not(inst.a(q, t)),
                And(
                    Cmp("=", inst.h(q, t), IntConst(0)),
                    Cmp("=", inst.v(q, t), IntConst(0)),
                ),
            ))


def assert_aod_order(inst: SmtInstance) -> None:
    """AOD columns increase left to right; rows bottom to top."""
    n = inst.circuit.num_qubits
    for t in range(inst.s):
        for q1 in range(n):
            for q2 in range(n):
                if q1 == q2:
                    continue
                both = And(inst.a(q1, t), inst.a(q2, t))
                inst.add("eq11", Implies(both, Iff(
                    Cmp("<", inst.c(q1, t), inst.c(q2, t)),
                    _lex_less(inst.x(q1, t), inst.h(q1, t),
                              inst.x(q2, t), inst.h(q2, t)),
                )))
                inst.add("eq11r", Implies(both, Iff(
                    Cmp("<", inst.r(q1, t), inst.r(q2, t)),
                    _lex_less(inst.y(q1, t), inst.v(q1, t),
                              inst.y(q2, t), inst.v(q2, t)),
                )))


def assert_gates(inst: SmtInstance) -> None:
    """Gate prerequisites per stage, and exclusivity on shared qubits."""
    arch = inst.arch
    radius = IntConst(arch.interaction_radius)
    for i, (q1, q2) in enumerate(inst.circuit.cz_gates, start=1):
        for t in range(inst.s):
            inst.add("eq12", Implies(
                Cmp("=", inst.g(i), IntConst(t)),
                And(
                    inst.ryd(t),
                    Cmp("=", inst.x(q1, t), inst.x(q2, t)),
                    Cmp("=", inst.y(q1, t), inst.y(q2, t)),
                    Cmp("<", Sub(inst.h(q2, t), inst.h(q1, t)), radius),
                    Cmp("<", Sub(inst.h(q1, t), inst.h(q2, t)), radius),
                    Cmp("<", Sub(inst.v(q2, t), inst.v(q1, t)), radius),
                    Cmp("<", Sub(inst.v(q1, t), inst.v(q2, t)), radius),
                    _in_zone(inst, q1, t),
                    _in_zone(inst, q2, t),
                ),
            ))
    gates = inst.circuit.cz_gates
    for i in range(1, len(gates) + 1):
        for j in range(i + 1, len(gates) + 1):
            if set(gates[i - 1]) & set(gates[j - 1]):
                inst.add("eq13", Cmp("distinct", inst.g(i), inst.g(j)))


def assert_shielding(inst: SmtInstance) -> None:
    """Idle qubits leave the entangling zone, or sit alone per site."""
    n = inst.circuit.num_qubits
    if inst.layout is LayoutMode.SHIELDED:
        for t in range(inst.s):
            for q in range(n):
                inst.add("eq14", Implies(
                    inst.ryd(t),
                    Not(And(_idle(inst, q, t), _in_zone(inst, q, t))),
                ))
    else:
        for t in range(inst.s):
            for q in range(n):
                separated = [
                    Or(
                        Cmp("distinct", inst.x(q, t), inst.x(q2, t)),
                        Cmp("distinct", inst.y(q, t), inst.y(q2, t)),
                    )
                    for q2 in range(n) if q2 != q
                ]
                inst.add("eq14ns", Implies(
                    And(inst.ryd(t), _idle(inst, q, t)),
                    And(*separated),
                ))


def assert_execution_transition(inst: SmtInstance) -> None:
    """Across a Rydberg stage: trap type fixed, SLM pinned, lines kept."""
    n = inst.circuit.num_qubits
    for t in range(inst.s - 1):
        for q in range(n):
            inst.add("eq15", Implies(
                inst.ryd(t),
                Iff(inst.a(q, t), inst.a(q, t + 1)),
            ))
            inst.add("eq16", Implies(
                inst.ryd(t),
                Or(inst.a(q, t), And(
                    Cmp("=", inst.x(q, t), inst.x(q, t + 1)),
                    Cmp("=", inst.y(q, t), inst.y(q, t + 1)),
                )),
            ))
            inst.add("eq17", Implies(
                inst.ryd(t),
                Or(Not(inst.a(q, t)), And(
                    Cmp("=", inst.c(q, t), inst.c(q, t + 1)),
                    Cmp("=", inst.r(q, t), inst.r(q, t + 1)),
                )),
            ))


def assert_transfer_transition(inst: SmtInstance) -> None:
    """Across a transfer stage: store at centers, cover lines, keep order."""
    arch = inst.arch
    n = inst.circuit.num_qubits
    for t in range(inst.s - 1):
        not_ryd = Not(inst.ryd(t))
        for q in range(n):
            inst.add("eq18", Implies(not_ryd, Or(
                inst.a(q, t + 1),
                And(
                    Cmp("=", inst.h(q, t), IntConst(0)),
                    Cmp("=", inst.v(q, t), IntConst(0)),
                ),
            )))
            inst.add("eq19", Implies(not_ryd, Or(
                inst.a(q, t + 1),
                And(
                    Cmp("=", inst.x(q, t), inst.x(q, t + 1)),
                    Cmp("=", inst.y(q, t), inst.y(q, t + 1)),
                ),
            )))
            store_hit = Or(*(
                [And(Cmp("=", inst.c(q, t), IntConst(k)), inst.store_col(k, t))
                 for k in range(arch.c_max + 1)]
                + [And(Cmp("=", inst.r(q, t), IntConst(k)), inst.store_row(k, t))
                   for k in range(arch.r_max + 1)]
            ))
            inst.add("eq20", Implies(not_ryd, Or(
                Not(inst.a(q, t)),
                Iff(Not(inst.a(q, t + 1)), store_hit),
            )))
            load_hit = Or(*(
                [And(Cmp("=", inst.c(q, t + 1), IntConst(k)), inst.load_col(k, t))
                 for k in range(arch.c_max + 1)]
                + [And(Cmp("=", inst.r(q, t + 1), IntConst(k)), inst.load_row(k, t))
                   for k in range(arch.r_max + 1)]
            ))
            inst.add("eq20l", Implies(not_ryd, Or(
                inst.a(q, t),
                Iff(inst.a(q, t + 1), load_hit),
            )))
        for q1 in range(n):
            for q2 in range(n):
                if q1 == q2:
                    continue
                both_next = And(not_ryd, inst.a(q1, t + 1), inst.a(q2, t + 1))
                inst.add("eq21", Implies(both_next, Iff(
                    _lex_less(inst.x(q1, t), inst.h(q1, t),
                              inst.x(q2, t), inst.h(q2, t)),
                    Cmp("<", inst.c(q1, t + 1), inst.c(q2, t + 1)),
                )))
                inst.add("eq21r", Implies(both_next, Iff(
                    _lex_less(inst.y(q1, t), inst.v(q1, t),
                              inst.y(q2, t), inst.v(q2, t)),
                    Cmp("<", inst.r(q1, t + 1), inst.r(q2, t + 1)),
                )))


def build_instance(arch: Architecture, circuit: Circuit, s: int,
                   layout: LayoutMode) -> SmtInstance:
    """Declare variables and assert every constraint family, in fixed order."""
    inst = emit_variables(arch, circuit, s, layout)
    assert_placement(inst)
    assert_aod_order(inst)
    assert_gates(inst)
    assert_shielding(inst)
    assert_execution_transition(inst)
    assert_transfer_transition(inst)
    return inst
