import pytest

from atomprep.codes import builtin_circuit
from atomprep.encode import LayoutMode
from atomprep.model import default_architecture
from atomprep.solve import SolveConfig, default_solver_command, find_minimal_schedule


def pytest_collection_modifyitems(config, items):
    if default_solver_command() is not None:
        return
    skip = pytest.mark.skip(reason="no SMT solver available (see README)")
    for item in items:
        if "solver" in item.keywords and "acceptance" not in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope="session")
def solver_cfg():
    if default_solver_command() is None:
        pytest.fail("acceptance and solver tests need an SMT solver; "
                    "set ATOMPREP_SOLVER or `npm install z3-solver` (see README)")
    return SolveConfig(per_instance_timeout=600.0)


@pytest.fixture(scope="session")
def steane_ns_solution(solver_cfg):
    """(arch, circuit, layout, schedule, certificate) for the 3-stage cell."""
    arch = default_architecture(0, 6)
    circuit = builtin_circuit("steane")
    schedule, cert = find_minimal_schedule(
        arch, circuit, LayoutMode.NO_SHIELDING, solver_cfg)
    return arch, circuit, LayoutMode.NO_SHIELDING, schedule, cert


@pytest.fixture(scope="session")
def steane_ds_solution(solver_cfg):
    """Double-sided storage cell; exercises transfer stages."""
    arch = default_architecture(2, 4)
    circuit = builtin_circuit("steane")
    schedule, cert = find_minimal_schedule(
        arch, circuit, LayoutMode.SHIELDED, solver_cfg)
    return arch, circuit, LayoutMode.SHIELDED, schedule, cert
