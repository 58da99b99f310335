"""Command-line frontend: compile, validate, and tabulate schedules.

Exit codes: 0 success, 1 validation found violations, 2 no schedule within
the stage cap, 3 solver failure, 4 malformed input files or dimension
mismatches.
"""

from __future__ import annotations

import argparse
import json
import shlex
import sys
import time
from pathlib import Path

from .codes import BUILTIN_CODES, builtin_circuit
from .encode import LayoutMode
from .fidelity import estimate_asp
from .model import (
    Architecture,
    Circuit,
    FormatError,
    default_architecture,
    dump_schedule,
    load_architecture,
    load_circuit,
    load_schedule,
)
from .solve import (
    ScheduleNotFound,
    SolveConfig,
    SolverError,
    find_minimal_schedule,
)
from .validate import check_schedule

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NO_SCHEDULE = 2
EXIT_SOLVER = 3
EXIT_FORMAT = 4

LAYOUT_PRESETS = {
    # name: (e_min, e_max, mode)
    "no-shielding": (0, 6, LayoutMode.NO_SHIELDING),
    "bottom-storage": (2, 6, LayoutMode.SHIELDED),
    "double-sided": (2, 4, LayoutMode.SHIELDED),
}


def resolve_layout(name: str, arch: Architecture | None
                   ) -> tuple[Architecture, LayoutMode]:
    """Map a layout name to (architecture, mode).

    ``shielded``/``no-shielding`` keep the given architecture's zone rows;
    the named presets rewrite the entangling rows of the base architecture.
    """
    base = arch if arch is not None else default_architecture()
    if name == "shielded":
        return base, LayoutMode.SHIELDED
    if name == "no-shielding" and arch is not None:
        return base, LayoutMode.NO_SHIELDING
    if name in LAYOUT_PRESETS:
        e_min, e_max, mode = LAYOUT_PRESETS[name]
        rewritten = Architecture(
            x_max=base.x_max, y_max=base.y_max, h_max=base.h_max,
            v_max=base.v_max, c_max=base.c_max, r_max=base.r_max,
            e_min=e_min, e_max=e_max,
            interaction_radius=base.interaction_radius,
            num_stages_cap=base.num_stages_cap,
            site_pitch_um=base.site_pitch_um,
            trap_pitch_um=base.trap_pitch_um,
            zone_gap_um=base.zone_gap_um,
            fom=base.fom,
        )
        return rewritten, mode
    raise FormatError(
        f"unknown layout {name!r}; choose shielded, no-shielding, "
        "bottom-storage, or double-sided"
    )


def _read_arch(path: str | None) -> Architecture | None:
    if path is None:
        return None
    return load_architecture(Path(path).read_text())


def _read_circuit(args) -> Circuit:
    if args.code:
        return builtin_circuit(args.code)
    return load_circuit(Path(args.circuit).read_text())


def _solve_config(args) -> SolveConfig:
    return SolveConfig(
        solver_command=shlex.split(args.solver) if args.solver else None,
        per_instance_timeout=args.timeout,
        s_start=args.s_start,
        s_cap=args.s_cap,
        smt_dir=Path(args.emit_smt) if args.emit_smt else None,
    )


def cmd_compile(args) -> int:
    try:
        arch, mode = resolve_layout(args.layout, _read_arch(args.arch))
        circuit = _read_circuit(args)
    except (FormatError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    cfg = _solve_config(args)
    started = time.time()
    try:
        schedule, certificate = find_minimal_schedule(arch, circuit, mode, cfg)
    except ScheduleNotFound as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_SCHEDULE
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    elapsed = time.time() - started

    report = estimate_asp(arch, circuit, schedule)
    out = Path(args.out) if args.out else None
    if out is not None:
        out.write_text(dump_schedule(schedule))
        stem = out.with_suffix("")
        Path(f"{stem}.certificate.json").write_text(
            json.dumps(certificate.to_json_obj(), indent=2))
        Path(f"{stem}.fidelity.json").write_text(report.to_json())
    print(
        f"{circuit.name or 'circuit'} [{args.layout}]: "
        f"S={certificate.s} (#R={schedule.num_execution_stages}, "
        f"#T={schedule.num_transfer_stages}), "
        f"time={report.total_time_us:.1f}us, asp={report.asp:.4f}, "
        f"minimal={'proved' if certificate.minimal_proved else 'unproven'}, "
        f"wall={elapsed:.1f}s"
    )
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        arch, mode = resolve_layout(args.layout, _read_arch(args.arch))
        circuit = _read_circuit(args)
        schedule = load_schedule(Path(args.schedule).read_text())
        report = check_schedule(arch, circuit, mode, schedule)
    except (FormatError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    print(json.dumps(report.to_json_obj(), indent=2))
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_table(args) -> int:
    codes = [c for c in args.codes.split(",") if c]
    if not codes:
        print("error: empty code list", file=sys.stderr)
        return EXIT_FORMAT
    for c in codes:
        if c not in BUILTIN_CODES:
            print(f"error: unknown code {c!r}", file=sys.stderr)
            return EXIT_FORMAT
    layouts = (list(LAYOUT_PRESETS) if args.layouts == "all"
               else [l for l in args.layouts.split(",") if l])
    for l in layouts:
        if l not in LAYOUT_PRESETS:
            print(f"error: unknown layout {l!r}", file=sys.stderr)
            return EXIT_FORMAT

    base = _read_arch(args.arch)
    rows = []
    for code_name in codes:
        circuit = builtin_circuit(code_name)
        for layout_name in layouts:
            arch, mode = resolve_layout(layout_name, base)
            cfg = SolveConfig(
                solver_command=shlex.split(args.solver) if args.solver else None,
                per_instance_timeout=args.budget,
                s_cap=args.s_cap,
            )
            try:
                schedule, cert = find_minimal_schedule(arch, circuit, mode, cfg)
                rep = estimate_asp(arch, circuit, schedule)
                rows.append({
                    "code": code_name, "layout": layout_name,
                    "cz": circuit.num_gates,
                    "rydberg_stages": schedule.num_execution_stages,
                    "transfer_stages": schedule.num_transfer_stages,
                    "time_us": round(rep.total_time_us, 1),
                    "asp": round(rep.asp, 4),
                    "minimal": cert.minimal_proved,
                })
            except (ScheduleNotFound, SolverError) as exc:
                rows.append({
                    "code": code_name, "layout": layout_name,
                    "cz": circuit.num_gates,
                    "rydberg_stages": "", "transfer_stages": "",
                    "time_us": "", "asp": "",
                    "minimal": False, "error": str(exc)[:120],
                })

    header = ["code", "cz", "layout", "rydberg_stages", "transfer_stages",
              "time_us", "asp", "minimal"]
    print(",".join(header))
    for row in rows:
        print(",".join(str(row.get(k, "")) for k in header))
    print()
    widths = {k: max(len(k), *(len(str(r.get(k, ""))) for r in rows)) for k in header}
    print("  ".join(k.ljust(widths[k]) for k in header))
    for row in rows:
        marker = "" if row.get("minimal") else "*"
        cells = [str(row.get(k, "")) for k in header]
        print("  ".join(c.ljust(widths[k]) for c, k in zip(cells, header)) + marker)
    if args.csv_out:
        Path(args.csv_out).write_text(
            "\n".join([",".join(header)]
                      + [",".join(str(r.get(k, "")) for k in header) for r in rows])
            + "\n")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 4, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_FORMAT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="atomprep",
        description="Minimal-schedule compiler for QEC state preparation "
                    "on zoned neutral-atom hardware",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_solver=True):
        p.add_argument("--arch", help="architecture JSON file (default: 8x7 grid)")
        group = p.add_mutually_exclusive_group(required=True)
        group.add_argument("--code", choices=BUILTIN_CODES,
                           help="builtin code whose preparation circuit to use")
        group.add_argument("--circuit", help="circuit JSON file")
        p.add_argument("--layout", default="no-shielding",
                       help="shielded | no-shielding | bottom-storage | double-sided")
        if with_solver:
            p.add_argument("--solver", help="solver command (SMT-LIB2 on stdin)")
            p.add_argument("--timeout", type=float, default=600.0,
                           help="per-instance solver timeout in seconds")

    p_compile = sub.add_parser("compile", help="find a minimal schedule")
    add_common(p_compile)
    p_compile.add_argument("--out", help="write schedule JSON here (plus "
                           ".certificate.json and .fidelity.json siblings)")
    p_compile.add_argument("--s-start", type=int, default=None)
    p_compile.add_argument("--s-cap", type=int, default=None)
    p_compile.add_argument("--emit-smt", help="cache SMT-LIB2 instances in this directory")
    p_compile.set_defaults(func=cmd_compile)

    p_val = sub.add_parser("validate", help="check a schedule against the rules")
    add_common(p_val, with_solver=False)
    p_val.add_argument("--schedule", required=True, help="schedule JSON file")
    p_val.set_defaults(func=cmd_validate)

    p_table = sub.add_parser("table", help="layout comparison table")
    p_table.add_argument("--codes", required=True,
                         help="comma-separated builtin code names")
    p_table.add_argument("--layouts", default="all",
                         help="'all' or comma-separated preset names")
    p_table.add_argument("--arch", help="base architecture JSON file")
    p_table.add_argument("--solver", help="solver command")
    p_table.add_argument("--budget", type=float, default=600.0,
                         help="per-instance solver timeout in seconds")
    p_table.add_argument("--s-cap", type=int, default=None)
    p_table.add_argument("--csv-out", help="also write the CSV here")
    p_table.set_defaults(func=cmd_table)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
