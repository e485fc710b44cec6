"""Ansatz construction, circuit/fast-path equivalence, and the VQE driver."""

import json
import math

import numpy as np
import pytest
from scipy.linalg import expm

from fragprep.evolution import circuit_unitary
from fragprep.fermion import FragmentSpec, build_effective_hamiltonian, build_fragment_hamiltonian
from fragprep.pauli import PauliSum
from fragprep.qpe import QpeConfig
from fragprep.statevector import Statevector, apply, expectation, random_statevector
from fragprep.toys import (
    DIMER_OCCUPATION,
    dimer_fragment_spec,
    dimer_integrals,
    fragment_integrals,
)
from fragprep.vqe import (
    OptimizerConfig,
    apply_ansatz,
    ansatz_circuit,
    build_ucc_ansatz,
    make_di_prep,
    make_hf_prep,
    make_qpe_prep,
    product_state,
    run_vqe,
    summary_to_json,
    trace_to_csv,
    zeroth_iteration_error,
)

RNG = np.random.default_rng(271828)


def _sz(p):
    return 1 if p % 2 == 0 else -1


def test_two_orbital_reference_has_one_single():
    spec = build_ucc_ansatz(2, "01")
    assert len(spec) == 1
    assert spec.labels == ["s:0->1"]


def test_four_orbital_counts_match_enumeration():
    spec = build_ucc_ansatz(4, "0011")
    singles = [l for l in spec.labels if l.startswith("s:")]
    doubles = [l for l in spec.labels if l.startswith("d:")]
    assert len(singles) == 4  # every occupied -> virtual pair
    assert doubles == ["d:0,1->2,3"]  # the only Sz-conserving quadruple
    # Brute-force enumeration of the declared rule.
    occ, virt = [0, 1], [2, 3]
    expected_singles = [(i, a) for i in occ for a in virt]
    expected_doubles = [
        (i, j, a, b)
        for i in occ for j in occ if i < j
        for a in virt for b in virt if a < b
        if _sz(i) + _sz(j) == _sz(a) + _sz(b)
    ]
    assert len(expected_singles) == len(singles)
    assert len(expected_doubles) == len(doubles)


def test_generalized_mode_counts():
    spec = build_ucc_ansatz(4, "0011", generalized=True)
    singles = [l for l in spec.labels if l.startswith("s:")]
    doubles = [l for l in spec.labels if l.startswith("d:")]
    assert len(singles) == 6  # all p < q pairs
    pairs = [(p, q) for p in range(4) for q in range(4) if p < q]
    expected = [
        (i, j, a, b)
        for (i, j) in pairs for (a, b) in pairs
        if (i, j) < (a, b) and _sz(i) + _sz(j) == _sz(a) + _sz(b)
    ]
    # Some quadruples JW-map to an empty generator (pure number operators
    # cancel against their conjugates); those are dropped.
    assert len(doubles) <= len(expected)
    assert len(doubles) >= 1


def test_full_occupation_warns_and_gives_identity_ansatz():
    with pytest.warns(UserWarning, match="identity ansatz"):
        spec = build_ucc_ansatz(2, "11")
    assert len(spec) == 0


def test_generators_are_anti_hermitian():
    spec = build_ucc_ansatz(4, "0011")
    for g in spec.generators:
        for _, coeff in g.items():
            assert abs(coeff.real) < 1e-12
        mat = g.to_dense_matrix()
        np.testing.assert_allclose(mat, -mat.conj().T, atol=1e-12)


def test_zero_theta_is_identity():
    spec = build_ucc_ansatz(4, "0011")
    circ = ansatz_circuit(spec, theta=np.zeros(len(spec)))
    psi = random_statevector(4, RNG)
    np.testing.assert_allclose(apply(psi, circ).amplitudes, psi.amplitudes, atol=1e-12)


def test_small_theta_matches_matrix_exponential():
    spec = build_ucc_ansatz(4, "0011")
    theta = np.zeros(len(spec))
    theta[0] = 1e-3
    circ = ansatz_circuit(spec, theta=theta)
    g_mat = spec.generators[0].to_dense_matrix()
    expected = expm(theta[0] * g_mat)
    np.testing.assert_allclose(circuit_unitary(circ), expected, atol=1e-5)


def test_single_generator_circuit_is_exact_exponential():
    # One Trotter slice of one generator equals expm when its Pauli terms
    # commute; the 2-orbital single does.
    spec = build_ucc_ansatz(2, "01")
    theta = np.array([0.37])
    circ = ansatz_circuit(spec, theta=theta)
    expected = expm(0.37 * spec.generators[0].to_dense_matrix())
    np.testing.assert_allclose(circuit_unitary(circ), expected, atol=1e-10)


def test_unitarity_for_random_theta():
    spec = build_ucc_ansatz(4, "0011")
    for _ in range(5):
        theta = RNG.normal(scale=0.3, size=len(spec))
        psi = random_statevector(4, RNG)
        out = apply(psi, ansatz_circuit(spec, theta=theta))
        assert abs(out.norm() - 1.0) < 1e-10


def test_fast_path_equals_circuit_path():
    spec = build_ucc_ansatz(4, "0011")
    for _ in range(5):
        theta = RNG.normal(scale=0.4, size=len(spec))
        psi = random_statevector(4, RNG)
        via_circuit = apply(psi, ansatz_circuit(spec, theta=theta, n_trotter=2))
        via_fast = apply_ansatz(psi, spec, theta, n_trotter=2)
        np.testing.assert_allclose(
            via_fast.amplitudes, via_circuit.amplitudes, atol=1e-12
        )


def test_product_state_qubit_order():
    low = Statevector.from_bitstring("01")   # fragment 0 -> qubits 0,1
    high = Statevector.from_bitstring("10")  # fragment 1 -> qubits 2,3
    full = product_state([low, high])
    assert full.n_qubits == 4
    assert abs(full.amplitudes[0b1001] - 1.0) < 1e-12


def single_fragment_heff():
    ints = fragment_integrals()
    spec = FragmentSpec([[0, 1, 2, 3]])
    return build_effective_hamiltonian(ints, spec)


def test_run_vqe_di_prep_converges_to_exact():
    h_eff = single_fragment_heff()
    evals, evecs = np.linalg.eigh(h_eff.to_dense_matrix())
    ground = Statevector(evecs[:, 0])
    ansatz = build_ucc_ansatz(4, "0011")
    run = run_vqe(
        h_eff, make_di_prep([ground]), ansatz,
        OptimizerConfig(budget=2000), scheme="di",
    )
    exact = evals[0] + h_eff.identity_offset
    assert run.final_energy - exact <= 1e-8
    assert run.converged
    assert run.n_function_evals <= 2000
    assert run.final_energy == min(e for _, e in run.energy_trace)
    assert run.n_function_evals == len(run.energy_trace)


def test_run_vqe_bitwise_determinism():
    h_eff = single_fragment_heff()
    ansatz = build_ucc_ansatz(4, "0011")
    cfg = OptimizerConfig(budget=300)
    a = run_vqe(h_eff, make_hf_prep("0011"), ansatz, cfg, scheme="hf")
    b = run_vqe(h_eff, make_hf_prep("0011"), ansatz, cfg, scheme="hf")
    assert a.energy_trace == b.energy_trace
    np.testing.assert_array_equal(a.theta_final, b.theta_final)


def test_variational_bound_random_theta():
    h_eff = single_fragment_heff()
    ground = np.linalg.eigvalsh(h_eff.to_dense_matrix())[0] + h_eff.identity_offset
    ansatz = build_ucc_ansatz(4, "0011")
    prep = make_hf_prep("0011")
    for _ in range(20):
        theta = RNG.normal(scale=0.5, size=len(ansatz))
        energy = expectation(apply_ansatz(prep(0), ansatz, theta), h_eff)
        assert energy >= ground - 1e-9


def test_appending_zero_generator_keeps_energy():
    # A trailing zero-angle generator must not change the energy of the
    # shared parameter prefix.
    h_eff = single_fragment_heff()
    ansatz = build_ucc_ansatz(4, "0011")
    prep = make_hf_prep("0011")
    theta_prefix = RNG.normal(scale=0.2, size=len(ansatz) - 1)
    short = build_ucc_ansatz(4, "0011")
    short.generators.pop()
    short.labels.pop()
    short.theta = short.theta[:-1]
    e_short = expectation(apply_ansatz(prep(0), short, theta_prefix), h_eff)
    e_padded = expectation(
        apply_ansatz(prep(0), ansatz, np.append(theta_prefix, 0.0)), h_eff
    )
    assert e_padded == pytest.approx(e_short, abs=1e-12)


def test_uncoupled_dimer_zeroth_energy_is_sum_of_fragments():
    ints = dimer_integrals(coupling=0.0)
    spec = dimer_fragment_spec("none")
    h_eff = build_effective_hamiltonian(ints, spec)
    frag_states, frag_energies = [], []
    for k in range(2):
        h_k = build_fragment_hamiltonian(ints, spec, k)
        evals, evecs = np.linalg.eigh(h_k.to_dense_matrix())
        frag_states.append(Statevector(evecs[:, 0]))
        frag_energies.append(evals[0] + h_k.identity_offset)
    prep = make_di_prep(frag_states)
    reference = sum(frag_energies)
    assert abs(zeroth_iteration_error(h_eff, prep, reference)) < 1e-9


def test_qpe_prep_failure_carries_context():
    ints = fragment_integrals()
    h_k = build_fragment_hamiltonian(ints, FragmentSpec([[0, 1, 2, 3]]), 0)
    cfg = QpeConfig(n_ancilla=3, unitary_mode="exact", initial_state="basis:0011", shots=1)
    prep = make_qpe_prep([h_k], [cfg], ["000"], base_seed=1, max_attempts=5)
    with pytest.raises(RuntimeError, match="fragment 0 at evaluation 0"):
        prep(0)


def test_trace_and_summary_serialization():
    h_eff = single_fragment_heff()
    ansatz = build_ucc_ansatz(4, "0011")
    run = run_vqe(
        h_eff, make_hf_prep("0011"), ansatz,
        OptimizerConfig(budget=50, restart_on_stall=False), scheme="hf",
    )
    csv_text = trace_to_csv(run)
    lines = csv_text.splitlines()
    assert lines[1] == "eval,energy"
    assert len(lines) == 2 + run.n_function_evals
    payload = json.loads(summary_to_json(run))
    assert payload["scheme"] == "hf"
    assert payload["n_function_evals"] == run.n_function_evals
