"""Compilation of e^{iHb}: exact diagonalization oracle and first-order
Trotter product circuits.

Each Pauli term e^{i c P b/n} compiles to single-qubit basis changes
(H for X; S-dagger then H for Y), a CNOT parity ladder into the pivot
qubit (the highest-index non-identity qubit), Rz(-2 c b / n) on the
pivot, and the mirrored uncompute. Rz(t) = diag(e^{-it/2}, e^{+it/2}).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .pauli import DEFAULT_ORACLE_CAP, OracleCapError, PauliString, PauliSum
from .statevector import Circuit, Gate, Statevector, apply


def exact_unitary(h: PauliSum, b: float, oracle_cap: int = DEFAULT_ORACLE_CAP) -> np.ndarray:
    """e^{iHb} via eigendecomposition (identity offset excluded)."""
    if h.n_qubits > oracle_cap:
        raise OracleCapError(f"{h.n_qubits} qubits exceeds oracle cap {oracle_cap}")
    if not h.is_hermitian():
        raise ValueError("exact_unitary requires a Hermitian sum")
    mat = h.to_dense_matrix(oracle_cap)
    evals, evecs = np.linalg.eigh(mat)
    return (evecs * np.exp(1j * evals * b)) @ evecs.conj().T


@dataclass
class TrotterPlan:
    """First-order product-formula plan for e^{iHb} with n_steps slices."""

    hamiltonian: PauliSum
    b: float
    n_steps: int
    term_order: list[tuple[PauliString, complex]] = field(default_factory=list)

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if not self.term_order:
            # Deterministic default: descending |coeff|, axes tie-break.
            self.term_order = self.hamiltonian.sorted_terms()
        else:
            have = {s for s, _ in self.term_order}
            want = set(self.hamiltonian.terms)
            if have != want:
                raise ValueError("term_order is not a permutation of the Hamiltonian terms")


def _append_pauli_rotation(
    circuit: Circuit,
    string: PauliString,
    angle: float,
    tag: str,
    rz_control: int | None = None,
) -> None:
    """Append gates for e^{i * angle * P}, optionally controlled.

    Controlling only the pivot Rz controls the whole factor exactly: with
    the control off, the basis changes and ladder cancel against their
    mirrors.
    """
    support = string.support_qubits()
    if not support:
        raise ValueError("identity term in Trotter compilation; subtract it first")
    pivot = support[-1]
    for q in support:
        ax = string.axis(q)
        if ax == "X":
            circuit.h(q, tag=tag + "/basis")
        elif ax == "Y":
            circuit.phase(q, -math.pi / 2.0, tag=tag + "/basis")
            circuit.h(q, tag=tag + "/basis")
    for a, b_ in zip(support[:-1], support[1:]):
        circuit.cnot(a, b_, tag=tag + "/ladder")
    rz = Gate("rz", (pivot,), -2.0 * angle, tag=tag + "/rz")
    if rz_control is not None:
        rz = rz.with_extra_control(rz_control)
    circuit.add(rz)
    for a, b_ in zip(reversed(support[1:]), reversed(support[:-1])):
        circuit.cnot(b_, a, tag=tag + "/ladder")
    for q in reversed(support):
        ax = string.axis(q)
        if ax == "X":
            circuit.h(q, tag=tag + "/basis")
        elif ax == "Y":
            circuit.h(q, tag=tag + "/basis")
            circuit.phase(q, math.pi / 2.0, tag=tag + "/basis")


def compile_trotter(plan: TrotterPlan) -> Circuit:
    """Circuit for prod_steps prod_terms e^{i c_j P_j b / n}."""
    h = plan.hamiltonian
    if not h.is_hermitian():
        raise ValueError("Trotter compilation requires a Hermitian sum")
    circuit = Circuit(h.n_qubits)
    for step in range(plan.n_steps):
        for string, coeff in plan.term_order:
            if string.is_identity():
                raise ValueError("identity term present; subtract it before compiling")
            angle = coeff.real * plan.b / plan.n_steps
            _append_pauli_rotation(circuit, string, angle, tag=f"trotter:step{step}")
    return circuit


def compile_controlled_trotter(plan: TrotterPlan, control: int, n_qubits: int) -> Circuit:
    """One controlled copy of the Trotter circuit via controlled pivot Rz.

    Equal to controlled(compile_trotter(plan), control) as a unitary, but
    the parity ladders stay plain CNOTs, so the 'cx' census of one slice
    is the per-unitary CNOT cost that resource reports repeat.
    """
    h = plan.hamiltonian
    if control < h.n_qubits:
        raise ValueError("control qubit lies inside the system register")
    if n_qubits <= max(control, h.n_qubits - 1):
        raise ValueError("register too small for control qubit")
    if not h.is_hermitian():
        raise ValueError("Trotter compilation requires a Hermitian sum")
    circuit = Circuit(n_qubits)
    for step in range(plan.n_steps):
        for string, coeff in plan.term_order:
            if string.is_identity():
                raise ValueError("identity term present; subtract it before compiling")
            angle = coeff.real * plan.b / plan.n_steps
            _append_pauli_rotation(
                circuit, string, angle, tag=f"ctrotter:step{step}", rz_control=control
            )
    return circuit


def controlled(circuit: Circuit, control: int) -> Circuit:
    """Promote every gate to its controlled version on ``control``.

    The result acts as ``circuit`` when the control is |1> and as the
    identity when it is |0>; collisions with the control qubit raise.
    """
    n = max(circuit.n_qubits, control + 1)
    out = Circuit(n)
    for gate in circuit.gates:
        out.add(gate.with_extra_control(control))
    return out


def count_gates(circuit: Circuit) -> Counter:
    """Exact census keyed by census kind ('cx' is a CNOT, 'ccx' a promoted one)."""
    return Counter(g.census_kind for g in circuit.gates)


def circuit_unitary(circuit: Circuit, oracle_cap: int = DEFAULT_ORACLE_CAP) -> np.ndarray:
    """Dense matrix of a circuit, column by column (test oracle)."""
    if circuit.n_qubits > oracle_cap:
        raise OracleCapError(f"{circuit.n_qubits} qubits exceeds oracle cap {oracle_cap}")
    dim = 1 << circuit.n_qubits
    mat = np.empty((dim, dim), dtype=complex)
    for j in range(dim):
        mat[:, j] = apply(Statevector.basis_state(circuit.n_qubits, j), circuit).amplitudes
    return mat


def trotter_error_bound(h: PauliSum, b: float, n_steps: int) -> float:
    """First-order commutator bound (b^2 / 2n) * sum_{j<k} ||[c_j P_j, c_k P_k]||.

    Uses the exact spectral norm of each commutator; intended for small
    test Hamiltonians.
    """
    terms = h.sorted_terms()
    total = 0.0
    for j in range(len(terms)):
        sj, cj = terms[j]
        for k in range(j + 1, len(terms)):
            sk, ck = terms[k]
            phase, _ = sj.multiply(sk)
            phase_rev, _ = sk.multiply(sj)
            # Pauli strings either commute or anticommute.
            if phase != -phase_rev:
                continue
            total += 2.0 * abs(cj * ck)
    return (b * b / (2.0 * n_steps)) * total
