"""Stabilizer codes and graph-state preparation circuits.

A :class:`StabilizerCode` is ``n-k`` commuting, independent Pauli strings.
:func:`graph_state_circuit` reduces the (completed) stabilizer tableau over
GF(2) to graph form, yielding a circuit of the fixed shape

    ``|+>^n  ->  CZ layer (graph edges)  ->  H on selected qubits``

that prepares a codespace state.  Only Hadamard local corrections are
allowed; codes whose reduction would need other local Cliffords are
rejected.  :func:`verify_preparation` is the independent oracle: it builds
the dense state vector and checks every stabilizer fixes it.  The oracle
shares no linear algebra with the reduction.

Builtin codes ship with reviewed circuit fixtures (see ``_data/``); the
fixtures are regenerated by :func:`css_graph_circuit` and oracle-checked in
the test suite.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Sequence

import numpy as np

from .model import Circuit, FormatError

__all__ = [
    "StabilizerCode",
    "CodeReductionError",
    "BUILTIN_CODES",
    "builtin_code",
    "builtin_circuit",
    "graph_state_circuit",
    "css_graph_circuit",
    "verify_preparation",
    "css_distance",
    "min_logical_weight",
]

BUILTIN_CODES = (
    "steane",
    "surface9",
    "shor9",
    "hamming15",
    "tetrahedral15",
    "honeycomb17",
)


class CodeReductionError(ValueError):
    """The tableau cannot be brought to graph form with H-only corrections."""


# --- Pauli strings as (x, z) bit masks ---------------------------------------

_PAULI_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}


def _pauli_to_bits(s: str) -> tuple[int, int, int]:
    """String -> (x_mask, z_mask, phase) with qubit i at bit i; phase in i^p."""
    x = z = 0
    phase = 0
    for i, ch in enumerate(s):
        try:
            xb, zb = _PAULI_BITS[ch]
        except KeyError:
            raise FormatError(f"invalid Pauli character {ch!r} in {s!r}") from None
        x |= xb << i
        z |= zb << i
        phase += xb & zb  # Y = i * X * Z
    return x, z, phase % 4


def _commutes(a: tuple[int, int], b: tuple[int, int]) -> bool:
    ax, az = a
    bx, bz = b
    return (_parity(ax & bz) ^ _parity(az & bx)) == 0


def _parity(v: int) -> int:
    return bin(v).count("1") & 1


def _gf2_rank(rows: Iterable[int]) -> int:
    basis: list[int] = []
    for r in rows:
        for b in basis:
            r = min(r, r ^ b)
        if r:
            basis.append(r)
            basis.sort(reverse=True)
    return len(basis)


def _gf2_reduce(v: int, basis: Sequence[int]) -> int:
    for b in basis:
        v = min(v, v ^ b)
    return v


@dataclass(frozen=True)
class StabilizerCode:
    """An [[n, k, d]] stabilizer code given by n-k generator strings."""

    n: int
    k: int
    d: int
    stabilizers: tuple[str, ...]
    name: str = ""

    def __post_init__(self) -> None:
        if self.n <= 0 or self.k < 0 or self.d < 1:
            raise FormatError(f"bad code parameters ({self.n}, {self.k}, {self.d})")
        if len(self.stabilizers) != self.n - self.k:
            raise FormatError(
                f"expected {self.n - self.k} stabilizers, got {len(self.stabilizers)}"
            )
        masks = []
        for s in self.stabilizers:
            if len(s) != self.n:
                raise FormatError(f"stabilizer {s!r} is not length {self.n}")
            x, z, _ = _pauli_to_bits(s)
            masks.append((x, z))
        for i in range(len(masks)):
            for j in range(i + 1, len(masks)):
                if not _commutes(masks[i], masks[j]):
                    raise FormatError(
                        f"stabilizers {i} and {j} anticommute: "
                        f"{self.stabilizers[i]} vs {self.stabilizers[j]}"
                    )
        rank = _gf2_rank(x | (z << self.n) for x, z in masks)
        if rank != self.n - self.k:
            raise FormatError(
                f"stabilizers are dependent: rank {rank} != {self.n - self.k}"
            )

    @property
    def generator_masks(self) -> tuple[tuple[int, int], ...]:
        return tuple((x, z) for x, z, _ in map(_pauli_to_bits, self.stabilizers))

    def is_css(self) -> bool:
        return all(x == 0 or z == 0 for x, z in self.generator_masks)

    def x_supports(self) -> tuple[int, ...]:
        """Bit masks of the pure-X generators (CSS codes)."""
        return tuple(x for x, z in self.generator_masks if z == 0 and x != 0)


def builtin_code(name: str) -> StabilizerCode:
    """Load one of the shipped code fixtures by name."""
    if name not in BUILTIN_CODES:
        raise ValueError(f"unknown code {name!r}; available: {', '.join(BUILTIN_CODES)}")
    text = resources.files("atomprep").joinpath(f"_data/codes/{name}.json").read_text()
    obj = json.loads(text)
    return StabilizerCode(
        n=obj["n"], k=obj["k"], d=obj["d"],
        stabilizers=tuple(obj["stabilizers"]), name=obj["name"],
    )


def builtin_circuit(name: str) -> Circuit:
    """The reviewed preparation-circuit fixture for a builtin code."""
    if name not in BUILTIN_CODES:
        raise ValueError(f"unknown code {name!r}; available: {', '.join(BUILTIN_CODES)}")
    text = resources.files("atomprep").joinpath(f"_data/circuits/{name}.json").read_text()
    from .model import load_circuit

    return load_circuit(text)


# --- Tableau completion and graph-form reduction ------------------------------


def _complete_stabilizers(code: StabilizerCode) -> list[tuple[int, int, int, int]]:
    """Extend the generators to a full rank-n commuting set.

    Returns rows ``(x, z, phase, uses)`` where ``uses`` marks which completion
    rows (free sign choices) a row involves.  Completion follows symplectic
    Gram-Schmidt over the centralizer; ordering is deterministic.
    """
    n = code.n
    rows = []
    for s in code.stabilizers:
        x, z, p = _pauli_to_bits(s)
        rows.append((x, z, p, 0))

    # Centralizer basis: null space of the symplectic-bracket map v -> S.omega.v
    # with v packed as x | z << n.  Bracket row for generator (gx, gz) is
    # (gz, gx): <g, v> = parity(gz & vx) + parity(gx & vz).
    bracket = [gz | (gx << n) for gx, gz in code.generator_masks]
    null_basis = _gf2_null_space(bracket, 2 * n)

    span = [(x | (z << n)) for x, z, _, _ in rows]
    echelon: list[int] = []
    for v in span:
        r = _gf2_reduce(v, echelon)
        if r:
            echelon.append(r)
            echelon.sort(reverse=True)

    pairs: list[tuple[int, int]] = []  # hyperbolic pairs in packed form
    iso: list[int] = []

    def sym(a: int, b: int) -> int:
        ax, az = a & ((1 << n) - 1), a >> n
        bx, bz = b & ((1 << n) - 1), b >> n
        return _parity(ax & bz) ^ _parity(az & bx)

    for cand in null_basis:
        c = cand
        for a, b in pairs:
            if sym(c, b):
                c ^= a
            if sym(c, a):
                c ^= b
        red = _gf2_reduce(c, echelon)
        if red == 0:
            continue
        partner = next((j for j, w in enumerate(iso) if sym(c, w)), None)
        if partner is None:
            iso.append(c)
        else:
            w = iso.pop(partner)
            # Re-isolate remaining iso members against the new pair.
            iso = [m ^ w if sym(c, m) else m for m in iso]
            pairs.append((w, c))
        echelon.append(red)
        echelon.sort(reverse=True)

    logicals = [b for _, b in pairs] + iso
    if len(logicals) != code.k:
        raise CodeReductionError(
            f"completion found {len(logicals)} logical rows, expected {code.k}"
        )
    mask = (1 << n) - 1
    for j, v in enumerate(logicals):
        x, z = v & mask, v >> n
        # Hermitian phase convention: i^(number of Y positions).
        rows.append((x, z, _parity(x & z), 1 << j))
    return rows


def _gf2_null_space(rows: Sequence[int], width: int) -> list[int]:
    """Basis of {v : parity(row & v) = 0 for all rows}, deterministic order."""
    pivots: dict[int, int] = {}  # column -> reduced row
    for r in rows:
        for col, pr in pivots.items():
            if (r >> col) & 1:
                r ^= pr
        if r:
            col = r.bit_length() - 1
            for c2, pr2 in list(pivots.items()):
                if (pr2 >> col) & 1:
                    pivots[c2] = pr2 ^ r
            pivots[col] = r
    basis = []
    for free in range(width):
        if free in pivots:
            continue
        v = 1 << free
        for col, pr in pivots.items():
            if (pr >> free) & 1:
                v |= 1 << col
        basis.append(v)
    return basis


def _row_mul(a: tuple[int, int, int, int], b: tuple[int, int, int, int]
             ) -> tuple[int, int, int, int]:
    """Product of i^p X^x Z^z rows: Z^za X^xb reorder adds (-1)^(za & xb)."""
    ax, az, ap, au = a
    bx, bz, bp, bu = b
    phase = (ap + bp + 2 * _parity(az & bx)) % 4
    return (ax ^ bx, az ^ bz, phase, au ^ bu)


def graph_state_circuit(code: StabilizerCode) -> Circuit:
    """Derive a CZ-plus-final-Hadamard preparation circuit for the code.

    Deterministic: lowest-index pivot first; a qubit gets a Hadamard only
    when its column has no X pivot.  Raises :class:`CodeReductionError` when
    non-Hadamard local corrections would be required (reporting the qubit).
    """
    n = code.n
    rows = _complete_stabilizers(code)
    hset = 0  # qubits whose X/Z halves are currently swapped

    def apply_h(q: int) -> None:
        nonlocal hset, rows
        hset ^= 1 << q
        bit = 1 << q
        out = []
        for x, z, p, u in rows:
            xb, zb = (x >> q) & 1, (z >> q) & 1
            if xb & zb:
                p = (p + 2) % 4  # H Y H = -Y
            x = (x & ~bit) | (zb << q)
            z = (z & ~bit) | (xb << q)
            out.append((x, z, p, u))
        rows = out

    # Forward pass: unit lower-triangular X block.
    for v in range(n):
        bit = 1 << v
        pivot = next((r for r in range(v, n) if rows[r][0] & bit), None)
        if pivot is None:
            apply_h(v)
            pivot = next((r for r in range(v, n) if rows[r][0] & bit), None)
            if pivot is None:
                raise CodeReductionError(
                    f"tableau has no X or Z support on qubit {v} below the pivot row"
                )
        rows[v], rows[pivot] = rows[pivot], rows[v]
        for r in range(v + 1, n):
            if rows[r][0] & bit:
                rows[r] = _row_mul(rows[r], rows[v])
    # Back substitution: clear X entries above the diagonal.
    for v in range(n - 1, -1, -1):
        bit = 1 << v
        for r in range(v):
            if rows[r][0] & bit:
                rows[r] = _row_mul(rows[r], rows[v])

    for v in range(n):
        if rows[v][0] != 1 << v:
            raise CodeReductionError(f"X block not reducible to identity at qubit {v}")

    # Adjacency must be symmetric (guaranteed by commutation) and hollow.
    adj = [rows[v][1] for v in range(n)]
    for u in range(n):
        for v in range(u + 1, n):
            assert ((adj[u] >> v) & 1) == ((adj[v] >> u) & 1), "asymmetric adjacency"
    bad = [v for v in range(n) if (adj[v] >> v) & 1]
    if bad:
        raise CodeReductionError(
            f"qubits {bad} would need a non-Hadamard local Clifford (phase gate)"
        )

    # Residual -1 signs can be absorbed by flipping completion-row signs
    # (those signs are free choices); code-generator signs are not.
    eqs = []  # (uses_mask, rhs)
    for x, z, p, u in rows:
        assert p % 2 == 0, "non-Hermitian row after reduction"
        eqs.append((u, (p // 2) & 1))
    if not _sign_system_solvable(eqs):
        raise CodeReductionError(
            "some stabilizer acquires a -1 sign; the code needs Pauli "
            "corrections beyond the H epilogue"
        )

    edges = tuple(
        (u, v)
        for u in range(n)
        for v in range(u + 1, n)
        if (adj[u] >> v) & 1
    )
    hadamards = frozenset(q for q in range(n) if (hset >> q) & 1)
    return Circuit(
        num_qubits=n,
        cz_gates=edges,
        hadamard_qubits=hadamards,
        name=f"{code.name or 'code'}-prep",
    )


def _sign_system_solvable(eqs: list[tuple[int, int]]) -> bool:
    """GF(2) solvability of `sum of flips over uses-mask == rhs` per row."""
    pivots: dict[int, tuple[int, int]] = {}  # leading bit -> (mask, rhs)
    for u, rhs in eqs:
        while u:
            lead = u.bit_length() - 1
            if lead not in pivots:
                pivots[lead] = (u, rhs)
                break
            pu, prhs = pivots[lead]
            u ^= pu
            rhs ^= prhs
        if u == 0 and rhs:
            return False
    return True


# --- CSS standard-form construction -------------------------------------------


def css_graph_circuit(code: StabilizerCode, target_edges: int | None = None) -> Circuit:
    """Graph-state circuit for a CSS code via row reduction of its X group.

    The prepared state is the uniform superposition over the span of the
    X-type generator supports.  Different pivot-column subsets give different
    (equivalent) graphs; the search deterministically picks the first subset
    matching ``target_edges``, else the first achieving the minimum count.
    """
    if not code.is_css():
        raise CodeReductionError(f"{code.name or 'code'} is not CSS")
    n = code.n
    xsup = list(code.x_supports())
    r = _gf2_rank(xsup)
    if r != len(xsup):
        raise FormatError("dependent X-type generators")

    best: tuple[int, tuple[int, ...], list[int]] | None = None
    for pivots in itertools.combinations(range(n), r):
        reduced = _rref_for_pivots(xsup, pivots)
        if reduced is None:
            continue
        nonpivot_mask = ((1 << n) - 1) ^ sum(1 << p for p in pivots)
        weight = sum(bin(row & nonpivot_mask).count("1") for row in reduced)
        if target_edges is not None and weight == target_edges:
            best = (weight, pivots, reduced)
            break
        if best is None or weight < best[0]:
            best = (weight, pivots, reduced)
    if best is None:
        raise CodeReductionError("X group has no invertible pivot set")

    weight, pivots, reduced = best
    pivot_of_row = {p: row for p, row in zip(pivots, reduced)}
    edges = []
    for p in pivots:
        row = pivot_of_row[p]
        for q in range(n):
            if q not in pivots and (row >> q) & 1:
                edges.append((min(p, q), max(p, q)))
    hadamards = frozenset(q for q in range(n) if q not in pivots)
    return Circuit(
        num_qubits=n,
        cz_gates=tuple(sorted(edges)),
        hadamard_qubits=hadamards,
        name=f"{code.name or 'code'}-prep",
    )


def _rref_for_pivots(rows: Sequence[int], pivots: Sequence[int]) -> list[int] | None:
    """Reduce rows to identity on the pivot columns; None if singular there."""
    work = list(rows)
    done: list[int] = []
    for p in pivots:
        idx = next((i for i, row in enumerate(work) if (row >> p) & 1), None)
        if idx is None:
            return None
        piv = work.pop(idx)
        done = [row ^ piv if (row >> p) & 1 else row for row in done]
        work = [row ^ piv if (row >> p) & 1 else row for row in work]
        done.append(piv)
    if any(work):
        return None
    return done


# --- Dense state-vector oracle -------------------------------------------------


def _apply_hadamard(psi: np.ndarray, q: int) -> np.ndarray:
    bit = 1 << q
    idx = np.arange(psi.size)
    low = (idx & bit) == 0
    out = np.empty_like(psi)
    a = psi[idx[low]]
    b = psi[idx[low] | bit]
    inv = 1.0 / np.sqrt(2.0)
    out[idx[low]] = (a + b) * inv
    out[idx[low] | bit] = (a - b) * inv
    return out


def _apply_pauli(psi: np.ndarray, pauli: str) -> np.ndarray:
    """P |psi> for a Pauli string (qubit i = bit i of the amplitude index).

    With P = i^p X^x Z^z:  (P psi)[j] = i^p (-1)^parity((j^x) & z) psi[j^x].
    """
    x, z, phase = _pauli_to_bits(pauli)
    src = np.arange(psi.size) ^ x
    out = psi[src].astype(complex, copy=True)
    if z:
        par = np.zeros(psi.size, dtype=np.int64)
        while z:
            bit = z & (-z)
            par ^= (src & bit) != 0
            z &= z - 1
        out[par == 1] *= -1.0
    return out * (1j ** phase)


def prepare_state(circuit: Circuit) -> np.ndarray:
    """State vector of (H epilogue) o (CZ layer) applied to |+>^n."""
    n = circuit.num_qubits
    if n > 20:
        raise ValueError(f"state-vector oracle limited to 20 qubits, got {n}")
    size = 1 << n
    psi = np.full(size, 1.0 / np.sqrt(size), dtype=complex)
    idx = np.arange(size)
    for a, b in circuit.cz_gates:
        mask = ((idx >> a) & 1) & ((idx >> b) & 1)
        psi = np.where(mask == 1, -psi, psi)
    for q in sorted(circuit.hadamard_qubits):
        psi = _apply_hadamard(psi, q)
    return psi


def verify_preparation(code: StabilizerCode, circuit: Circuit, atol: float = 1e-9) -> bool:
    """True iff every code stabilizer fixes the circuit's output state."""
    if code.n != circuit.num_qubits:
        raise ValueError(
            f"code has {code.n} qubits but circuit has {circuit.num_qubits}"
        )
    psi = prepare_state(circuit)
    for s in code.stabilizers:
        if np.max(np.abs(_apply_pauli(psi, s) - psi)) > atol:
            return False
    return True


# --- Distance oracles ------------------------------------------------------------


def css_distance(code: StabilizerCode) -> int:
    """Distance of a CSS code by coset enumeration (needs small n - rank)."""
    if not code.is_css():
        raise ValueError("css_distance requires a CSS code")
    n = code.n
    x_rows = [x for x, z in code.generator_masks if z == 0 and x]
    z_rows = [z for x, z in code.generator_masks if x == 0 and z]

    def side(checks: list[int], group: list[int]) -> int:
        kernel = _gf2_null_space(checks, n)
        if len(kernel) > 14:
            raise ValueError(f"coset enumeration too large (2^{len(kernel)})")
        basis = []
        for g in group:
            g = _gf2_reduce(g, basis)
            if g:
                basis.append(g)
                basis.sort(reverse=True)
        best = n + 1
        for mask in range(1, 1 << len(kernel)):
            v = 0
            m, i = mask, 0
            while m:
                if m & 1:
                    v ^= kernel[i]
                i += 1
                m >>= 1
            if _gf2_reduce(v, basis) != 0:
                best = min(best, bin(v).count("1"))
        return best

    return min(side(x_rows, z_rows), side(z_rows, x_rows))


def min_logical_weight(code: StabilizerCode, max_weight: int | None = None) -> int | None:
    """Smallest weight of a Pauli that commutes with all generators but is
    not in the stabilizer group; None if no such operator up to max_weight.

    Brute force; intended for fixture validation of small codes.
    """
    n = code.n
    cap = max_weight if max_weight is not None else code.d
    gens = code.generator_masks
    group_basis: list[int] = []
    for x, z in gens:
        v = _gf2_reduce(x | (z << n), group_basis)
        if v:
            group_basis.append(v)
            group_basis.sort(reverse=True)
    singles = {"X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
    for w in range(1, cap + 1):
        for positions in itertools.combinations(range(n), w):
            for kinds in itertools.product("XYZ", repeat=w):
                x = z = 0
                for q, kind in zip(positions, kinds):
                    xb, zb = singles[kind]
                    x |= xb << q
                    z |= zb << q
                if all(_commutes((x, z), g) for g in gens):
                    if _gf2_reduce(x | (z << n), group_basis) != 0:
                        return w
    return None
