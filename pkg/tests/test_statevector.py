"""Statevector engine versus dense-matrix oracles and Born-rule statistics."""

import math

import numpy as np
import pytest
from scipy.stats import chisquare

from fragprep.pauli import PauliSum
from fragprep.statevector import (
    Circuit,
    Gate,
    Statevector,
    apply,
    apply_pauli_string,
    dump_statevector,
    expectation,
    gate_matrix,
    load_statevector,
    marginal_distribution,
    measure,
    overlap,
    random_statevector,
)

RNG = np.random.default_rng(7)


def dense_gate_on_register(gate, n):
    """Expand a gate (with controls) to the full 2^n matrix, qubit 0 = LSB."""
    dim = 1 << n
    mat = np.eye(dim, dtype=complex)
    body = gate_matrix(gate)
    cmask = 0
    for c in gate.controls:
        cmask |= 1 << c
    for col in range(dim):
        if (col & cmask) != cmask:
            continue
        local = 0
        for bit, q in enumerate(gate.qubits):
            local |= ((col >> q) & 1) << bit
        column = np.zeros(dim, dtype=complex)
        base = col
        for bit, q in enumerate(gate.qubits):
            if (local >> bit) & 1:
                base &= ~(1 << q)
        for row_local in range(body.shape[0]):
            row = base
            for bit, q in enumerate(gate.qubits):
                if (row_local >> bit) & 1:
                    row |= 1 << q
            column[row] = body[row_local, local]
        mat[:, col] = column
    return mat


def circuit_matrix(circuit):
    dim = 1 << circuit.n_qubits
    mat = np.eye(dim, dtype=complex)
    for g in circuit.gates:
        mat = dense_gate_on_register(g, circuit.n_qubits) @ mat
    return mat


def random_circuit(n, n_gates, rng):
    circ = Circuit(n)
    kinds = ["h", "x", "y", "z", "rz", "ry", "phase", "cnot", "swap"]
    for _ in range(n_gates):
        kind = rng.choice(kinds)
        if kind in ("cnot", "swap"):
            if n < 2:
                circ.x(int(rng.integers(n)))
                continue
            a, b = rng.choice(n, size=2, replace=False)
            getattr(circ, kind)(int(a), int(b))
        elif kind in ("rz", "ry", "phase"):
            getattr(circ, kind)(int(rng.integers(n)), float(rng.uniform(-np.pi, np.pi)))
        else:
            getattr(circ, kind)(int(rng.integers(n)))
    return circ


def test_hadamard_on_zero():
    circ = Circuit(1)
    circ.h(0)
    out = apply(Statevector.zero_state(1), circ)
    np.testing.assert_allclose(out.amplitudes, [1 / math.sqrt(2)] * 2, atol=1e-12)


def test_cnot_makes_bell_state():
    circ = Circuit(2)
    circ.h(0)
    circ.cnot(0, 1)
    out = apply(Statevector.zero_state(2), circ)
    expected = np.zeros(4, dtype=complex)
    expected[0] = expected[3] = 1 / math.sqrt(2)
    np.testing.assert_allclose(out.amplitudes, expected, atol=1e-12)


def test_random_circuits_match_matrix_oracle():
    for _ in range(20):
        circ = random_circuit(3, 5, RNG)
        psi = random_statevector(3, RNG)
        expected = circuit_matrix(circ) @ psi.amplitudes
        np.testing.assert_allclose(apply(psi, circ).amplitudes, expected, atol=1e-10)


def test_norm_preserved_on_random_circuits():
    for _ in range(500):
        n = int(RNG.integers(1, 4))
        circ = random_circuit(n, 6, RNG)
        out = apply(random_statevector(n, RNG), circ)
        assert abs(out.norm() - 1.0) < 1e-10


def test_size_mismatch_rejected():
    circ = Circuit(2)
    circ.h(0)
    with pytest.raises(ValueError):
        apply(Statevector.zero_state(3), circ)


def test_measure_deterministic_state():
    bits, collapsed = measure(Statevector.from_bitstring("1"), [0], rng_seed=0)
    assert bits == "1"
    np.testing.assert_allclose(collapsed.amplitudes, [0, 1])


def test_measure_statistics_plus_state():
    circ = Circuit(1)
    circ.h(0)
    plus = apply(Statevector.zero_state(1), circ)
    ones = 0
    trials = 100_000
    for i in range(trials):
        bits, _ = measure(plus, [0], rng_seed=(123, i))
        ones += bits == "1"
    assert abs(ones / trials - 0.5) < 0.01


def test_measure_marginals_chi_square():
    psi = random_statevector(3, np.random.default_rng(11))
    probs = marginal_distribution(psi, [0, 1, 2])
    counts = np.zeros(8)
    trials = 100_000
    rng = np.random.default_rng(99)
    keys = rng.choice(8, size=trials, p=probs)  # same sampler the engine uses
    for i in range(trials):
        counts[keys[i]] += 1
    _, p_value = chisquare(counts, probs * trials)
    assert p_value > 0.001


def test_measure_collapse_projects_and_renormalizes():
    circ = Circuit(2)
    circ.h(0)
    circ.cnot(0, 1)
    bell = apply(Statevector.zero_state(2), circ)
    bits, collapsed = measure(bell, [0], rng_seed=3)
    idx = int(bits, 2)
    expected = np.zeros(4, dtype=complex)
    expected[0 if idx == 0 else 3] = 1.0
    np.testing.assert_allclose(collapsed.amplitudes, expected, atol=1e-12)


def test_measure_empty_list_rejected():
    with pytest.raises(ValueError):
        measure(Statevector.zero_state(1), [], rng_seed=0)


def test_measure_seeded_reproducibility():
    psi = random_statevector(4, np.random.default_rng(5))
    a = measure(psi, [0, 2], rng_seed=42)
    b = measure(psi, [0, 2], rng_seed=42)
    assert a[0] == b[0]
    np.testing.assert_array_equal(a[1].amplitudes, b[1].amplitudes)


def test_overlap_values():
    psi = random_statevector(3, RNG)
    assert abs(overlap(psi, psi) - 1.0) < 1e-12
    zero = Statevector.from_bitstring("0")
    one = Statevector.from_bitstring("1")
    assert overlap(zero, one) == 0.0


def test_expectation_trivial_and_bell():
    z = PauliSum.from_term_list([(1.0, "Z")])
    assert abs(expectation(Statevector.zero_state(1), z) - 1.0) < 1e-12
    circ = Circuit(2)
    circ.h(0)
    circ.cnot(0, 1)
    bell = apply(Statevector.zero_state(2), circ)
    for axes in ("ZZ", "XX"):
        h = PauliSum.from_term_list([(1.0, axes)])
        assert abs(expectation(bell, h) - 1.0) < 1e-10


def test_expectation_matches_quadratic_form():
    for _ in range(25):
        psi = random_statevector(3, RNG)
        pairs = [
            (float(RNG.normal()), "".join(RNG.choice(list("IXYZ"), size=3)))
            for _ in range(5)
        ]
        h = PauliSum.from_term_list(pairs).subtract_identity()
        direct = np.vdot(psi.amplitudes, h.to_dense_matrix() @ psi.amplitudes).real
        assert abs(expectation(psi, h) - (direct + h.identity_offset)) < 1e-10


def test_expectation_within_spectral_range():
    for _ in range(30):
        n = int(RNG.integers(1, 5))
        psi = random_statevector(n, RNG)
        pairs = [
            (float(RNG.normal()), "".join(RNG.choice(list("IXYZ"), size=n)))
            for _ in range(4)
        ]
        h = PauliSum.from_term_list(pairs).subtract_identity()
        evals = np.linalg.eigvalsh(h.to_dense_matrix())
        val = expectation(psi, h) - h.identity_offset
        assert evals[0] - 1e-10 <= val <= evals[-1] + 1e-10


def test_expectation_rejects_non_hermitian():
    h = PauliSum.from_term_list([(1j, "Z")])
    with pytest.raises(ValueError):
        expectation(Statevector.zero_state(1), h)


def test_apply_pauli_string_matches_matrix():
    for _ in range(30):
        n = int(RNG.integers(1, 4))
        psi = random_statevector(n, RNG)
        axes = "".join(RNG.choice(list("IXYZ"), size=n))
        h = PauliSum.from_term_list([(1.0, axes)])
        string = next(iter(h.terms))
        expected = h.to_dense_matrix() @ psi.amplitudes
        np.testing.assert_allclose(
            apply_pauli_string(psi, string).amplitudes, expected, atol=1e-12
        )


def test_statevector_file_round_trip():
    psi = random_statevector(3, RNG)
    again = load_statevector(dump_statevector(psi))
    np.testing.assert_allclose(again.amplitudes, psi.amplitudes, atol=1e-15)
    with pytest.raises(ValueError):
        load_statevector("no header\n1 0\n")


def test_gate_qubit_validation():
    circ = Circuit(2)
    with pytest.raises(ValueError):
        circ.h(2)
    with pytest.raises(ValueError):
        circ.cnot(1, 1)
    with pytest.raises(ValueError):
        circ.add(Gate("x", (0,), controls=(0,)))
