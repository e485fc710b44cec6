"""Coupled-fragment VQE: UCC-style ansatz over the whole active space,
pluggable state preparation (QPE collapse, direct initialization, or a
Hartree-Fock determinant), and a derivative-free simplex optimizer.

Generator set: singles over every occupied->virtual pair and doubles
restricted to Sz-conserving index quadruples, singles first, both in
lexicographic index order. ``generalized=True`` widens both classes to
all index pairs/quadruples regardless of reference occupation (still
Sz-conserving for doubles); amplitudes start at zero since the prepared
state already encodes the fragment physics.

State preparation is a closure ``prep(eval_index) -> Statevector``; the
QPE scheme re-runs the ground-state collapse on every evaluation with
seeds derived from (base_seed, eval_index, fragment), so full runs are
reproducible bit for bit.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from .evolution import TrotterPlan, compile_trotter
from .fermion import jordan_wigner
from .initialize import compile_initializer
from .pauli import PauliSum
from .qpe import QpeConfig, QpePreparer
from .statevector import (
    Circuit,
    Statevector,
    apply,
    apply_pauli_exponential,
    expectation,
)

PrepFn = Callable[[int], Statevector]


@dataclass
class AnsatzSpec:
    """Ordered anti-Hermitian excitation generators with their angles."""

    n_qubits: int
    generators: list[PauliSum]
    labels: list[str]
    reference_occupation: str
    theta: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.theta is None:
            self.theta = np.zeros(len(self.generators))
        self.theta = np.asarray(self.theta, dtype=float)
        if self.theta.shape != (len(self.generators),):
            raise ValueError("theta length must match the generator count")
        for g in self.generators:
            for _, coeff in g.items():
                if abs(coeff.real) > 1e-12:
                    raise ValueError("generator is not anti-Hermitian in Pauli form")
        # Hermitian partners H = -iG, so e^{theta G} = e^{i theta H}.
        self.hermitian_parts = [g.scaled(-1j).subtract_identity() for g in self.generators]

    def __len__(self) -> int:
        return len(self.generators)


def _occupied_virtual(occupation: str) -> tuple[list[int], list[int]]:
    if any(ch not in "01" for ch in occupation):
        raise ValueError("occupation must be a 0/1 bitstring")
    occupied = [p for p in range(len(occupation)) if occupation[-1 - p] == "1"]
    virtual = [p for p in range(len(occupation)) if occupation[-1 - p] == "0"]
    return occupied, virtual


def _sz(p: int) -> int:
    # Interleaved convention: even spin orbitals are alpha.
    return 1 if p % 2 == 0 else -1


def build_ucc_ansatz(
    n_spin_orbitals: int, reference_occupation: str, generalized: bool = False
) -> AnsatzSpec:
    """Singles-and-doubles excitation generators for a reference determinant.

    Every occupied->virtual single is included; doubles keep total Sz.
    With ``generalized`` the index ranges ignore the occupation entirely.
    """
    if len(reference_occupation) != n_spin_orbitals:
        raise ValueError("occupation length does not match the register")
    occupied, virtual = _occupied_virtual(reference_occupation)
    generators: list[PauliSum] = []
    labels: list[str] = []

    if generalized:
        single_pairs = [
            (p, q) for p in range(n_spin_orbitals) for q in range(n_spin_orbitals) if p < q
        ]
        pair_pool = single_pairs
        double_quads = [
            (i, j, a, b)
            for (i, j) in pair_pool
            for (a, b) in pair_pool
            if (i, j) < (a, b)
        ]
    else:
        single_pairs = [(i, a) for i in occupied for a in virtual]
        occ_pairs = [(i, j) for i in occupied for j in occupied if i < j]
        virt_pairs = [(a, b) for a in virtual for b in virtual if a < b]
        double_quads = [(i, j, a, b) for (i, j) in occ_pairs for (a, b) in virt_pairs]

    for i, a in sorted(single_pairs):
        g = jordan_wigner(
            [(1.0, ((a, True), (i, False))), (-1.0, ((i, True), (a, False)))],
            n_spin_orbitals,
        )
        if len(g) == 0:
            continue
        generators.append(g)
        labels.append(f"s:{i}->{a}")

    for i, j, a, b in sorted(double_quads):
        if _sz(i) + _sz(j) != _sz(a) + _sz(b):
            continue
        g = jordan_wigner(
            [
                (1.0, ((a, True), (b, True), (j, False), (i, False))),
                (-1.0, ((i, True), (j, True), (b, False), (a, False))),
            ],
            n_spin_orbitals,
        )
        if len(g) == 0:
            continue
        generators.append(g)
        labels.append(f"d:{i},{j}->{a},{b}")

    if not generators:
        warnings.warn("empty excitation set: identity ansatz", stacklevel=2)
    return AnsatzSpec(
        n_qubits=n_spin_orbitals,
        generators=generators,
        labels=labels,
        reference_occupation=reference_occupation,
    )


def ansatz_circuit(
    spec: AnsatzSpec, n_trotter: int = 1, theta: Sequence[float] | None = None
) -> Circuit:
    """Circuit for prod_k e^{theta_k G_k}, one Trotter slice per generator
    by default."""
    theta = spec.theta if theta is None else np.asarray(theta, dtype=float)
    if theta.shape != (len(spec.generators),):
        raise ValueError("theta length must match the generator count")
    circuit = Circuit(spec.n_qubits)
    for h_k, angle in zip(spec.hermitian_parts, theta):
        if angle == 0.0 or len(h_k) == 0:
            continue
        circuit.extend(compile_trotter(TrotterPlan(h_k, b=float(angle), n_steps=n_trotter)))
    return circuit


def apply_ansatz(
    state: Statevector,
    spec: AnsatzSpec,
    theta: Sequence[float],
    n_trotter: int = 1,
) -> Statevector:
    """Fast path equal to apply(state, ansatz_circuit(...)) term by term."""
    theta = np.asarray(theta, dtype=float)
    for h_k, angle in zip(spec.hermitian_parts, theta):
        if angle == 0.0 or len(h_k) == 0:
            continue
        for _ in range(n_trotter):
            for string, coeff in h_k.sorted_terms():
                state = apply_pauli_exponential(state, string, coeff.real * angle / n_trotter)
    return state


# ---------------------------------------------------------------------------
# State-preparation schemes
# ---------------------------------------------------------------------------


def product_state(fragment_states: Sequence[Statevector]) -> Statevector:
    """Tensor fragment registers together; fragment 0 gets the low qubits."""
    amps = np.ones(1, dtype=complex)
    total = 0
    for state in fragment_states:
        amps = np.kron(state.amplitudes, amps)
        total += state.n_qubits
    return Statevector(amps, total)


def make_hf_prep(occupation: str) -> PrepFn:
    """Constant computational-basis determinant."""
    state = Statevector.from_bitstring(occupation)
    return lambda eval_index: state


def make_di_prep(fragment_states: Sequence[Statevector]) -> PrepFn:
    """Scheme 2: run each fragment's initializer circuit once, reuse the
    prepared product state (the circuit is deterministic)."""
    prepared = [
        apply(Statevector.zero_state(s.n_qubits), compile_initializer(s))
        for s in fragment_states
    ]
    state = product_state(prepared)
    return lambda eval_index: state


def make_qpe_prep(
    fragment_hamiltonians: Sequence[PauliSum],
    configs: Sequence[QpeConfig],
    target_phases: Sequence[str],
    base_seed: int = 0,
    max_attempts: int = 200,
    cache_collapsed_state: bool = False,
) -> PrepFn:
    """Scheme 1: collapse each fragment to its target phase by repeated
    seeded QPE measurement, fresh on every evaluation with seeds derived
    from (base_seed, eval_index, fragment). The deterministic QPE unitary
    is applied once per fragment up front; set cache_collapsed_state to
    also reuse the first collapse (cost studies only)."""
    if not len(fragment_hamiltonians) == len(configs) == len(target_phases):
        raise ValueError("need one config and target phase per fragment")
    preparers = [
        QpePreparer(h, cfg) for h, cfg in zip(fragment_hamiltonians, configs)
    ]
    cache: dict[int, Statevector] = {}

    def prep(eval_index: int) -> Statevector:
        if cache_collapsed_state and 0 in cache:
            return cache[0]
        states = []
        for frag_idx, (preparer, target) in enumerate(zip(preparers, target_phases)):
            try:
                state, _ = preparer.collapse(
                    target,
                    rng_seed=(base_seed, eval_index, frag_idx),
                    max_attempts=max_attempts,
                )
            except Exception as exc:
                raise RuntimeError(
                    f"QPE preparation failed for fragment {frag_idx} "
                    f"at evaluation {eval_index}"
                ) from exc
            states.append(state)
        full = product_state(states)
        if cache_collapsed_state:
            cache[0] = full
        return full

    return prep


# ---------------------------------------------------------------------------
# Optimization driver
# ---------------------------------------------------------------------------


@dataclass
class OptimizerConfig:
    """Derivative-free simplex settings.

    The run stops when the simplex energy spread falls below energy_tol
    (and coordinates below xatol) or the evaluation budget is exhausted;
    one restart from the best point re-inflates a collapsed simplex.
    """

    budget: int = 5000
    energy_tol: float = 1e-8
    xatol: float = 1e-6
    simplex_step: float = 0.05
    restart_on_stall: bool = True
    n_trotter: int = 1


@dataclass
class VqeRun:
    scheme: str
    energy_trace: list[tuple[int, float]]
    final_energy: float
    n_function_evals: int
    theta_final: np.ndarray
    converged: bool
    restarts: int


def run_vqe(
    h_eff: PauliSum,
    prep: PrepFn,
    spec: AnsatzSpec,
    optimizer_cfg: OptimizerConfig | None = None,
    scheme: str = "custom",
) -> VqeRun:
    """Minimize E(theta) = <prep | ansatz(theta)^dag H ansatz(theta) | prep>.

    Every evaluation is recorded; the returned final energy is the trace
    minimum and theta_final the matching parameters.
    """
    cfg = optimizer_cfg or OptimizerConfig()
    if spec.n_qubits != h_eff.n_qubits:
        raise ValueError("ansatz and Hamiltonian registers differ")
    trace: list[tuple[int, float]] = []
    best: dict = {"energy": math.inf, "theta": spec.theta.copy()}

    def objective(theta: np.ndarray) -> float:
        eval_index = len(trace)
        state = prep(eval_index)
        state = apply_ansatz(state, spec, theta, n_trotter=cfg.n_trotter)
        energy = expectation(state, h_eff)
        trace.append((eval_index, energy))
        if energy < best["energy"]:
            best["energy"] = energy
            best["theta"] = np.array(theta, dtype=float)
        return energy

    n_params = len(spec.generators)
    theta0 = spec.theta.copy()
    converged = False
    restarts = 0
    if n_params == 0:
        objective(theta0)
    else:
        remaining = cfg.budget
        start = theta0
        for round_idx in range(2 if cfg.restart_on_stall else 1):
            if remaining <= n_params + 1:
                break
            simplex = np.vstack([start] + [
                start + cfg.simplex_step * np.eye(n_params)[i] for i in range(n_params)
            ])
            result = minimize(
                objective,
                start,
                method="Nelder-Mead",
                options={
                    "maxfev": remaining,
                    "fatol": cfg.energy_tol,
                    "xatol": cfg.xatol,
                    "initial_simplex": simplex,
                    "disp": False,
                },
            )
            remaining = cfg.budget - len(trace)
            converged = bool(result.success)
            start = best["theta"]
            if not converged or restarts >= 1 or not cfg.restart_on_stall:
                break
            restarts += 1

    final_energy = min(e for _, e in trace)
    return VqeRun(
        scheme=scheme,
        energy_trace=trace,
        final_energy=final_energy,
        n_function_evals=len(trace),
        theta_final=best["theta"],
        converged=converged,
        restarts=restarts,
    )


def zeroth_iteration_error(h_eff: PauliSum, prep: PrepFn, reference_energy: float) -> float:
    """E(theta = 0) minus the reference (state-preparation error only)."""
    return expectation(prep(0), h_eff) - reference_energy


def trace_to_csv(run: VqeRun) -> str:
    lines = [f"# fragprep-vqe-trace v1 scheme={run.scheme}", "eval,energy"]
    lines += [f"{idx},{energy:.12g}" for idx, energy in run.energy_trace]
    return "\n".join(lines) + "\n"


def summary_to_json(run: VqeRun) -> str:
    payload = {
        "schema": "fragprep-vqe-summary/1",
        "scheme": run.scheme,
        "final_energy": run.final_energy,
        "n_function_evals": run.n_function_evals,
        "converged": run.converged,
        "restarts": run.restarts,
        "theta_final": [float(t) for t in run.theta_final],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"
