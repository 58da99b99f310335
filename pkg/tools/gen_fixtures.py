#!/usr/bin/env python3
"""Regenerate the builtin code and circuit fixtures under src/atomprep/_data/.

Codes are standard constructions; every fixture is verified here (commutation,
rank, distance) and the circuit fixtures are checked against the state-vector
oracle before being written.
"""

from __future__ import annotations

import itertools
import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from atomprep.codes import (  # noqa: E402
    StabilizerCode,
    css_distance,
    css_graph_circuit,
    verify_preparation,
)

DATA = ROOT / "src" / "atomprep" / "_data"

# Preferred CZ counts for the shipped circuit fixtures (reference figures for
# these codes).  If a count is unreachable the minimum found is used instead.
TARGET_CZ = {
    "steane": 9,
    "surface9": 8,
    "shor9": 10,
    "hamming15": 28,
    "tetrahedral15": 28,
    "honeycomb17": 32,
}


def pauli_string(n: int, support: set[int], kind: str) -> str:
    return "".join(kind if q in support else "I" for q in range(n))


def css_code(name: str, n: int, k: int, d: int,
             z_supports: list[set[int]], x_supports: list[set[int]]) -> StabilizerCode:
    stabs = [pauli_string(n, s, "Z") for s in z_supports]
    stabs += [pauli_string(n, s, "X") for s in x_supports]
    return StabilizerCode(n=n, k=k, d=d, stabilizers=tuple(stabs), name=name)


def steane() -> StabilizerCode:
    # Triangle of three weight-4 facets; each defines a Z and an X stabilizer.
    facets = [{1, 2, 3, 4}, {0, 1, 2, 6}, {2, 3, 5, 6}]
    stabs = []
    for f in facets:
        stabs.append(pauli_string(7, f, "Z"))
        stabs.append(pauli_string(7, f, "X"))
    return StabilizerCode(n=7, k=1, d=3, stabilizers=tuple(stabs), name="steane")


def surface9() -> StabilizerCode:
    z = [{0, 1, 3, 4}, {4, 5, 7, 8}, {2, 5}, {3, 6}]
    x = [{1, 2, 4, 5}, {3, 4, 6, 7}, {0, 1}, {7, 8}]
    return css_code("surface9", 9, 1, 3, z, x)


def shor9() -> StabilizerCode:
    z = [{0, 1}, {1, 2}, {3, 4}, {4, 5}, {6, 7}, {7, 8}]
    x = [{0, 1, 2, 3, 4, 5}, {3, 4, 5, 6, 7, 8}]
    return css_code("shor9", 9, 1, 3, z, x)


def hamming_rows() -> list[set[int]]:
    # Columns of the [15,11] Hamming parity check: binary 1..15 at position v-1.
    return [
        {v - 1 for v in range(1, 16) if (v >> bit) & 1}
        for bit in range(4)
    ]


def hamming15() -> StabilizerCode:
    rows = hamming_rows()
    return css_code("hamming15", 15, 7, 3, rows, rows)


def tetrahedral15() -> StabilizerCode:
    # Punctured quantum Reed-Muller code: X checks from degree-1 monomials,
    # Z checks from degree-1 and degree-2 monomials.
    rows = hamming_rows()
    z = list(rows)
    for i, j in itertools.combinations(range(4), 2):
        z.append({v - 1 for v in range(1, 16) if ((v >> i) & 1) and ((v >> j) & 1)})
    return css_code("tetrahedral15", 15, 1, 3, z, rows)


# --- 17-qubit distance-5 CSS code ----------------------------------------------


def honeycomb17() -> StabilizerCode:
    """A [[17,1,5]] self-dual CSS code with eight face-like checks.

    Built from a triangular square-octagon patch (central square, two bulk
    octagons, three truncated boundary faces) completed by two extra weight-4
    checks found by exhaustive search.  All invariants are verified below.
    """
    faces = [
        {8, 9, 10, 11},               # central square
        {0, 1, 2, 3, 4, 7, 10, 11},   # bulk octagon, left cell
        {4, 5, 9, 10, 13, 14, 15, 16},  # bulk octagon, right cell
        {4, 5, 6, 7},                 # bottom square
        {2, 8, 11, 12},               # truncated octagon, upper left
        {8, 9, 12, 16},               # truncated octagon, upper right
        {0, 1, 13, 14},               # boundary completion
        {0, 3, 13, 15},               # boundary completion
    ]
    assert set().union(*faces) == set(range(17)), "qubit not covered by any face"
    code = css_code("honeycomb17", 17, 1, 5, faces, faces)
    assert css_distance(code) == 5
    return code


def main() -> None:
    codes = [steane(), surface9(), shor9(), hamming15(), tetrahedral15(), honeycomb17()]
    (DATA / "codes").mkdir(parents=True, exist_ok=True)
    (DATA / "circuits").mkdir(parents=True, exist_ok=True)
    for code in codes:
        path = DATA / "codes" / f"{code.name}.json"
        path.write_text(json.dumps({
            "name": code.name, "n": code.n, "k": code.k, "d": code.d,
            "stabilizers": list(code.stabilizers),
        }, indent=2) + "\n")
        print(f"wrote {path.name}: [[{code.n},{code.k},{code.d}]]")

        target = TARGET_CZ[code.name]
        circuit = css_graph_circuit(code, target_edges=target)
        got = circuit.num_gates
        note = "" if got == target else f"  (target {target} unreachable)"
        assert verify_preparation(code, circuit), f"oracle rejects {code.name} circuit"
        cpath = DATA / "circuits" / f"{code.name}.json"
        cpath.write_text(json.dumps({
            "name": circuit.name,
            "num_qubits": circuit.num_qubits,
            "cz_gates": [list(e) for e in circuit.cz_gates],
            "hadamard_qubits": sorted(circuit.hadamard_qubits),
        }, indent=2) + "\n")
        print(f"wrote {cpath.name}: {got} CZ, {len(circuit.hadamard_qubits)} H{note}")


if __name__ == "__main__":
    main()
