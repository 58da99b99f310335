"""SMT-LIB2 serialization, external solver driver, and the minimal-S loop.

Instances are serialized to SMT-LIB2 (logic QF_LIA) and piped to an
external solver process on stdin; the first ``sat``/``unsat``/``unknown``
token decides the verdict and a ``(get-model)`` answer is parsed into a
name->value map.  The solver command is pluggable: the ``ATOMPREP_SOLVER``
environment variable wins, then a ``z3`` binary on PATH, then the bundled
Node shim running the WebAssembly build of Z3 (see ``_solver/``).

:func:`find_minimal_schedule` increments the stage count S from a sound
lower bound until an instance is satisfiable, decodes the first model, and
returns it with a minimality certificate listing the refuted smaller
counts.  Unknown verdicts (timeouts) do not abort the loop; they downgrade
the certificate to "feasible, minimality unproven".
"""

from __future__ import annotations

import hashlib
import math
import os
import shlex
import shutil
import subprocess
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from . import encode as enc
from .encode import LayoutMode, SmtInstance
from .model import Architecture, Circuit, Schedule
from .validate import check_schedule, extract_schedule

__all__ = [
    "SolverError",
    "ScheduleNotFound",
    "SolverVerdict",
    "SolveConfig",
    "MinimalityCertificate",
    "default_solver_command",
    "to_smtlib",
    "solve_instance",
    "solve_many",
    "find_minimal_schedule",
    "parallelism_lower_bound",
]


class SolverError(RuntimeError):
    """Solver process failed or produced unparseable output."""


class ScheduleNotFound(RuntimeError):
    """No satisfiable instance within the stage-count cap."""


# --- SMT-LIB2 rendering ---------------------------------------------------------


def _render_int(e) -> str:
    if isinstance(e, enc.IntVar):
        return e.name
    if isinstance(e, enc.IntConst):
        return str(e.value) if e.value >= 0 else f"(- {-e.value})"
    if isinstance(e, enc.Sub):
        return f"(- {_render_int(e.a)} {_render_int(e.b)})"
    raise TypeError(f"not an integer expression: {e!r}")


def _render_bool(e) -> str:
    if isinstance(e, enc.BoolVar):
        return e.name
    if isinstance(e, enc.BoolConst):
        return "true" if e.value else "false"
    if isinstance(e, enc.Cmp):
        op = "distinct" if e.op == "distinct" else e.op
        return f"({op} {_render_int(e.a)} {_render_int(e.b)})"
    if isinstance(e, enc.And):
        if not e.args:
            return "true"
        if len(e.args) == 1:
            return _render_bool(e.args[0])
        return "(and " + " ".join(_render_bool(a) for a in e.args) + ")"
    if isinstance(e, enc.Or):
        if not e.args:
            return "false"
        if len(e.args) == 1:
            return _render_bool(e.args[0])
        return "(or " + " ".join(_render_bool(a) for a in e.args) + ")"
    if isinstance(e, enc.Not):
        return f"(not {_render_bool(e.arg)})"
    if isinstance(e, enc.Implies):
        return f"(=> {_render_bool(e.a)} {_render_bool(e.b)})"
    if isinstance(e, enc.Iff):
        return f"(= {_render_bool(e.a)} {_render_bool(e.b)})"
    raise TypeError(f"not a boolean expression: {e!r}")


def to_smtlib(inst: SmtInstance) -> str:
    """Serialize an instance to SMT-LIB2 text; byte-stable for equal inputs."""
    lines = ["(set-logic QF_LIA)"]
    for name, sort in inst.declarations:
        lines.append(f"(declare-const {name} {sort})")
    for _family, expr in inst.assertions:
        lines.append(f"(assert {_render_bool(expr)})")
    lines.append("(check-sat)")
    lines.append("(get-model)")
    return "\n".join(lines) + "\n"


# --- Solver process -------------------------------------------------------------


def default_solver_command() -> list[str] | None:
    """Resolve the solver command: env var, native z3, bundled WASM shim."""
    env = os.environ.get("ATOMPREP_SOLVER")
    if env:
        return shlex.split(env)
    z3 = shutil.which("z3")
    if z3:
        return [z3, "-smt2", "-in"]
    node = shutil.which("node")
    if node:
        shim = resources.files("atomprep").joinpath("_solver/z3smt.mjs")
        try:
            shim_path = Path(str(shim))
        except TypeError:  # pragma: no cover - zip imports
            return None
        if shim_path.exists():
            return [node, str(shim_path)]
    return None


@dataclass
class SolveConfig:
    """How to run the solver and walk the stage counts."""

    solver_command: list[str] | None = None
    per_instance_timeout: float = 600.0
    s_start: int | None = None  # None: use the parallelism lower bound
    s_cap: int | None = None    # None: architecture num_stages_cap
    smt_dir: Path | None = None  # cache serialized instances here

    def resolved_command(self) -> list[str]:
        cmd = self.solver_command or default_solver_command()
        if not cmd:
            raise SolverError(
                "no SMT solver available: set ATOMPREP_SOLVER, install z3, "
                "or `npm install z3-solver` next to the package for the "
                "bundled shim (requires node)"
            )
        return cmd


@dataclass(frozen=True)
class SolverVerdict:
    """sat with a model, unsat, or unknown (timeout / solver trouble)."""

    kind: str  # "sat" | "unsat" | "unknown"
    model: dict[str, int | bool] | None = None
    reason: str = ""

    @property
    def is_sat(self) -> bool:
        return self.kind == "sat"


def _tokenize(text: str) -> list[str]:
    out = []
    token = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == ";":
            while i < len(text) and text[i] != "\n":
                i += 1
            continue
        if ch == "|":  # quoted symbol
            j = text.index("|", i + 1)
            out.append(text[i + 1:j])
            i = j + 1
            continue
        if ch == '"':
            j = i + 1
            while j < len(text) and text[j] != '"':
                j += 1
            out.append(text[i:j + 1])
            i = j + 1
            continue
        if ch in "()":
            if token:
                out.append("".join(token))
                token = []
            out.append(ch)
        elif ch.isspace():
            if token:
                out.append("".join(token))
                token = []
        else:
            token.append(ch)
        i += 1
    if token:
        out.append("".join(token))
    return out


def _parse_sexprs(tokens: list[str]):
    stack: list[list] = [[]]
    for tok in tokens:
        if tok == "(":
            stack.append([])
        elif tok == ")":
            done = stack.pop()
            if not stack:
                raise SolverError("unbalanced model s-expression")
            stack[-1].append(done)
        else:
            stack[-1].append(tok)
    return stack[0]


def _model_from_sexprs(items) -> dict[str, int | bool]:
    model: dict[str, int | bool] = {}

    def value_of(v) -> int | bool | None:
        if isinstance(v, list):
            if len(v) == 2 and v[0] == "-":
                inner = value_of(v[1])
                return -inner if isinstance(inner, int) else None
            return None
        if v == "true":
            return True
        if v == "false":
            return False
        try:
            return int(v)
        except ValueError:
            return None

    def walk(node) -> None:
        if not isinstance(node, list):
            return
        if len(node) >= 5 and node[0] == "define-fun" and node[2] == []:
            val = value_of(node[4])
            if val is not None:
                model[str(node[1])] = val
            return
        for child in node:
            walk(child)

    for item in items:
        walk(item)
    return model


def parse_solver_output(stdout: str) -> SolverVerdict:
    """First sat/unsat/unknown token decides; models come from define-funs."""
    verdict = None
    rest_start = 0
    for line in stdout.splitlines(keepends=True):
        stripped = line.strip()
        rest_start += len(line)
        if stripped in ("sat", "unsat", "unknown"):
            verdict = stripped
            break
        if stripped == "" or stripped.startswith(";"):
            continue
        if stripped.startswith("(error"):
            continue
        raise SolverError(f"unexpected solver output: {stripped[:200]!r}")
    if verdict is None:
        raise SolverError(f"no verdict in solver output: {stdout[:200]!r}")
    if verdict == "unsat":
        return SolverVerdict(kind="unsat")
    remainder = stdout[rest_start:]
    model = _model_from_sexprs(_parse_sexprs(_tokenize(remainder)))
    if verdict == "unknown":
        return SolverVerdict(kind="unknown", reason="solver returned unknown",
                             model=model or None)
    return SolverVerdict(kind="sat", model=model)


def _complete_model(inst: SmtInstance, model: dict[str, int | bool]
                    ) -> dict[str, int | bool]:
    """Default omitted booleans to false (solvers may drop don't-cares)."""
    out = dict(model)
    for name, sort in inst.declarations:
        if name not in out and sort == "Bool":
            out[name] = False
    return out


def solve_instance(inst: SmtInstance, cfg: SolveConfig) -> SolverVerdict:
    """Serialize, run the external solver, and parse its answer."""
    text = to_smtlib(inst)
    if cfg.smt_dir is not None:
        cfg.smt_dir.mkdir(parents=True, exist_ok=True)
        digest = hashlib.sha256(text.encode()).hexdigest()[:16]
        (cfg.smt_dir / f"{digest}.smt2").write_text(text)
    cmd = cfg.resolved_command()
    try:
        proc = subprocess.run(
            cmd,
            input=text.encode(),
            capture_output=True,
            timeout=cfg.per_instance_timeout,
        )
    except subprocess.TimeoutExpired:
        return SolverVerdict(kind="unknown", reason="timeout")
    except OSError as exc:
        raise SolverError(f"cannot run solver {cmd!r}: {exc}") from exc
    stdout = proc.stdout.decode(errors="replace")
    stderr = proc.stderr.decode(errors="replace")
    try:
        verdict = parse_solver_output(stdout)
    except SolverError as exc:
        raise SolverError(f"{exc}\nstderr: {stderr[:500]}") from None
    if verdict.is_sat:
        verdict = SolverVerdict(kind="sat", model=_complete_model(inst, verdict.model))
    return verdict


def solve_many(instances: list[SmtInstance], cfg: SolveConfig) -> list[SolverVerdict]:
    """Solve several instances in one solver process, separated by (reset).

    Semantically equivalent to mapping :func:`solve_instance`, but pays the
    process startup once; intended for large batches of small instances.
    """
    if not instances:
        return []
    text = "(reset)\n".join(to_smtlib(inst) for inst in instances)
    cmd = cfg.resolved_command()
    try:
        proc = subprocess.run(
            cmd,
            input=text.encode(),
            capture_output=True,
            timeout=cfg.per_instance_timeout * len(instances),
        )
    except subprocess.TimeoutExpired:
        return [SolverVerdict(kind="unknown", reason="timeout")] * len(instances)
    except OSError as exc:
        raise SolverError(f"cannot run solver {cmd!r}: {exc}") from exc
    stdout = proc.stdout.decode(errors="replace")

    # Split the answer stream at verdict lines.
    chunks: list[tuple[str, list[str]]] = []
    for line in stdout.splitlines():
        stripped = line.strip()
        if stripped in ("sat", "unsat", "unknown"):
            chunks.append((stripped, []))
        elif chunks:
            chunks[-1][1].append(line)
    if len(chunks) != len(instances):
        raise SolverError(
            f"expected {len(instances)} verdicts, got {len(chunks)}; "
            f"stderr: {proc.stderr.decode(errors='replace')[:500]}"
        )
    out = []
    for inst, (kind, lines) in zip(instances, chunks):
        if kind == "unsat":
            out.append(SolverVerdict(kind="unsat"))
            continue
        body = "\n".join(
            line for line in lines if not line.strip().startswith("(error")
        )
        model = _model_from_sexprs(_parse_sexprs(_tokenize(body)))
        if kind == "unknown":
            out.append(SolverVerdict(kind="unknown", reason="solver returned unknown",
                                     model=model or None))
        else:
            out.append(SolverVerdict(kind="sat", model=_complete_model(inst, model)))
    return out


# --- Minimal stage count --------------------------------------------------------


@dataclass(frozen=True)
class MinimalityCertificate:
    """Evidence for the returned stage count.

    ``attempts`` lists (s, status) for every smaller count, with status
    "skipped" (excluded by the parallelism lower bound), "unsat", or
    "unknown".  Minimality is proved only if nothing below S is unknown.
    """

    s: int
    attempts: tuple[tuple[int, str], ...]
    minimal_proved: bool
    bound_note: str = ""

    def to_json_obj(self) -> dict:
        return {
            "stage_count": self.s,
            "attempts": [{"s": s, "status": st} for s, st in self.attempts],
            "minimal_proved": self.minimal_proved,
            "bound_note": self.bound_note,
        }


def parallelism_lower_bound(circuit: Circuit) -> int:
    """Sound lower bound on S: gate count over max parallel gates, and the
    largest number of gates sharing one qubit (those must serialize)."""
    if circuit.num_gates == 0:
        return 1
    max_parallel = max(1, circuit.num_qubits // 2)
    by_count = math.ceil(circuit.num_gates / max_parallel)
    by_degree = max(len(circuit.gates_on(q)) for q in range(circuit.num_qubits))
    return max(1, by_count, by_degree)


def find_minimal_schedule(
    arch: Architecture,
    circuit: Circuit,
    layout: LayoutMode,
    cfg: SolveConfig,
) -> tuple[Schedule, MinimalityCertificate]:
    """Increase S until satisfiable; decode, cross-check, and certify."""
    if circuit.num_gates == 0:
        return Schedule(stages=()), MinimalityCertificate(
            s=0, attempts=(), minimal_proved=True,
            bound_note="empty circuit needs no stages")

    bound = parallelism_lower_bound(circuit)
    s_start = cfg.s_start if cfg.s_start is not None else bound
    s_cap = cfg.s_cap if cfg.s_cap is not None else arch.num_stages_cap
    attempts: list[tuple[int, str]] = []
    bound_note = ""
    if cfg.s_start is None and bound > 1:
        attempts.extend((s, "skipped") for s in range(1, bound))
        bound_note = (
            f"stage counts below {bound} skipped: {circuit.num_gates} gates, "
            f"at most {max(1, circuit.num_qubits // 2)} in parallel, and up to "
            f"{max(len(circuit.gates_on(q)) for q in range(circuit.num_qubits))} "
            "gates share one qubit"
        )

    for s in range(s_start, s_cap + 1):
        inst = enc.build_instance(arch, circuit, s, layout)
        verdict = solve_instance(inst, cfg)
        if verdict.kind == "unsat":
            attempts.append((s, "unsat"))
            continue
        if verdict.kind == "unknown":
            attempts.append((s, "unknown"))
            continue
        schedule = extract_schedule(inst, verdict.model)
        report = check_schedule(arch, circuit, layout, schedule)
        if not report.ok:
            raise SolverError(
                "solver model fails the independent checker: "
                + "; ".join(v.message for v in report.violations[:5])
            )
        proved = all(status in ("unsat", "skipped") for _, status in attempts)
        return schedule, MinimalityCertificate(
            s=s, attempts=tuple(attempts), minimal_proved=proved,
            bound_note=bound_note,
        )
    raise ScheduleNotFound(
        f"no schedule within stage cap {s_cap} "
        f"(attempts: {', '.join(f'{s}:{st}' for s, st in attempts)})"
    )
