"""Compiler for QEC state-preparation schedules on zoned neutral-atom hardware.

Pipeline: derive an entangling layer for a stabilizer code
(:mod:`atomprep.codes`), encode all fixed-stage-count schedules
symbolically (:mod:`atomprep.encode`), find the minimal stage count with
an external SMT solver (:mod:`atomprep.solve`), re-check the schedule
independently (:mod:`atomprep.validate`), and price it
(:mod:`atomprep.fidelity`).
"""

from .codes import (
    BUILTIN_CODES,
    StabilizerCode,
    builtin_circuit,
    builtin_code,
    graph_state_circuit,
    verify_preparation,
)
from .encode import LayoutMode, SmtInstance, build_instance
from .fidelity import FidelityReport, estimate_asp, stage_timeline
from .model import (
    Architecture,
    Circuit,
    FigureOfMeritTable,
    QubitPlacement,
    Schedule,
    Stage,
    StageKind,
    ZoneKind,
    default_architecture,
    load_architecture,
    load_circuit,
    load_schedule,
    position_um,
    zone_of,
)
from .solve import (
    MinimalityCertificate,
    SolveConfig,
    SolverVerdict,
    find_minimal_schedule,
    solve_instance,
    to_smtlib,
)
from .validate import ValidationReport, check_schedule, extract_schedule

__version__ = "0.1.0"

__all__ = [
    "Architecture", "Circuit", "FigureOfMeritTable", "QubitPlacement",
    "Schedule", "Stage", "StageKind", "ZoneKind",
    "default_architecture", "load_architecture", "load_circuit",
    "load_schedule", "position_um", "zone_of",
    "BUILTIN_CODES", "StabilizerCode", "builtin_code", "builtin_circuit",
    "graph_state_circuit", "verify_preparation",
    "LayoutMode", "SmtInstance", "build_instance",
    "SolveConfig", "SolverVerdict", "MinimalityCertificate",
    "find_minimal_schedule", "solve_instance", "to_smtlib",
    "ValidationReport", "check_schedule", "extract_schedule",
    "FidelityReport", "estimate_asp", "stage_timeline",
]
