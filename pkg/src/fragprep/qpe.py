"""Quantum phase estimation on a fragment Hamiltonian.

Register layout: the system occupies qubits 0..n_sys-1 and the ancillas
sit on top, ancilla k = qubit n_sys + k, holding the k-th (least to most
significant) bit of the phase. Measured bitstrings render ancilla 0 as
the rightmost character. Phases decode by two's complement into the
window (-1/2, 1/2], and energies invert as E = 2*pi*phi / b plus the
Hamiltonian's identity offset.

The conservative default scale factor b = pi / (2 * one_norm) maps every
eigenvalue strictly inside the phase window, leaving headroom that the
aliasing scan exploits: rerunning at inflated b moves only wrapped
(aliased) energies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .evolution import TrotterPlan, compile_controlled_trotter, exact_unitary
from .pauli import PauliString, PauliSum
from .statevector import (
    Circuit,
    Gate,
    Statevector,
    apply,
    extract_register,
    marginal_distribution,
    measure,
)

DEFAULT_SHOTS = 1024
DEFAULT_MAX_ATTEMPTS = 100


def seed_tuple(seed) -> tuple[int, ...]:
    """Flatten int/tuple seed material into a numpy-acceptable entropy tuple."""
    if isinstance(seed, (int, np.integer)):
        return (int(seed),)
    if isinstance(seed, (tuple, list)):
        out: tuple[int, ...] = ()
        for part in seed:
            out += seed_tuple(part)
        return out
    raise TypeError(f"seed must be an int or nested ints, got {type(seed)!r}")


class QpePreparationError(RuntimeError):
    """Repeat-until-success ran out of attempts.

    Carries the empirical hit rate so callers can size max_attempts.
    """

    def __init__(self, target: str, attempts: int, hits: int):
        self.target = target
        self.attempts = attempts
        self.hits = hits
        self.hit_rate = hits / attempts if attempts else 0.0
        super().__init__(
            f"target phase {target!r} not reproduced in {attempts} attempts "
            f"(empirical hit rate {self.hit_rate:.3g})"
        )


@dataclass
class QpeConfig:
    """Settings for one QPE run.

    ``b`` overrides the conservative default scale factor when set;
    ``b_multiplier`` scales whichever base is in effect. ``unitary_mode``
    is 'trotter' or 'exact' (dense oracle). ``power_mode`` 'repeat'
    applies the controlled Trotter circuit 2^k times, matching the
    2^{n_an}-1 unitary-application count model; 'rescale' compiles
    U^{2^k} at scaled angles (oracle testing only).
    """

    n_ancilla: int
    n_trotter: int = 1
    b: float | None = None
    b_multiplier: float = 1.0
    initial_state: Statevector | str | None = None
    shots: int = DEFAULT_SHOTS
    rng_seed: int | tuple = 0
    unitary_mode: str = "trotter"
    power_mode: str = "repeat"

    def __post_init__(self):
        if self.n_ancilla < 1:
            raise ValueError("need at least one ancilla")
        if self.n_trotter < 1:
            raise ValueError("need at least one Trotter step")
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        if self.b is not None and self.b <= 0:
            raise ValueError("scale factor b must be positive")
        if self.b_multiplier < 1.0:
            raise ValueError("b_multiplier is relative to the conservative default; >= 1")
        if self.unitary_mode not in ("trotter", "exact"):
            raise ValueError("unitary_mode must be 'trotter' or 'exact'")
        if self.power_mode not in ("repeat", "rescale"):
            raise ValueError("power_mode must be 'repeat' or 'rescale'")


@dataclass(frozen=True)
class PhaseEstimate:
    """One ancilla readout with its decoded phase and inverted energy."""

    bitstring: str
    phi: float
    probability: float
    energy: float


def default_scale_factor(h: PauliSum) -> float:
    """Conservative b = pi / (2 * one_norm): all eigenphases in (-1/4, 1/4]."""
    norm = h.one_norm()
    if norm == 0.0:
        raise ValueError("Hamiltonian has no terms; no scale factor exists")
    ident = PauliString.identity(h.n_qubits)
    if ident in h.terms:
        raise ValueError("subtract the identity term before choosing b")
    return math.pi / (2.0 * norm)


def resolve_scale_factor(h: PauliSum, cfg: QpeConfig) -> float:
    base = cfg.b if cfg.b is not None else default_scale_factor(h)
    return base * cfg.b_multiplier


def decode_phase(bitstring: str) -> float:
    """Two's-complement decode of the ancilla integer into (-1/2, 1/2]."""
    n = len(bitstring)
    v = int(bitstring, 2)
    half = 1 << (n - 1)
    return v / (1 << n) if v <= half else v / (1 << n) - 1.0


def phase_to_energy(phi: float, b: float, identity_offset: float = 0.0) -> float:
    return 2.0 * math.pi * phi / b + identity_offset


def iqft_circuit(n_qubits: int, qubits: Sequence[int]) -> Circuit:
    """Inverse QFT on ``qubits`` (bit j of the transformed integer = qubits[j])."""
    circ = Circuit(n_qubits)
    order = list(qubits)
    n = len(order)
    for i in range(n // 2):
        circ.swap(order[i], order[n - 1 - i], tag="iqft/reverse")
    for j in range(n):
        for m in range(j):
            circ.add(
                Gate(
                    "phase",
                    (order[j],),
                    -math.pi / (1 << (j - m)),
                    controls=(order[m],),
                    tag="iqft/cphase",
                )
            )
        circ.h(order[j], tag="iqft/h")
    return circ


def _resolve_initial_state(ref, n_sys: int) -> Statevector:
    if ref is None:
        return Statevector.zero_state(n_sys)
    if isinstance(ref, Statevector):
        if ref.n_qubits != n_sys:
            raise ValueError("initial state size does not match Hamiltonian")
        return ref
    if isinstance(ref, str):
        if ref == "zero":
            return Statevector.zero_state(n_sys)
        if ref.startswith("basis:"):
            bits = ref.split(":", 1)[1]
            if len(bits) != n_sys:
                raise ValueError("basis reference length does not match register")
            return Statevector.from_bitstring(bits)
        raise ValueError(f"unknown initial-state reference {ref!r}")
    raise TypeError("initial_state must be a Statevector or named reference")


def build_qpe_circuit(h: PauliSum, cfg: QpeConfig) -> Circuit:
    """Hadamards, the controlled-U^{2^k} ladder, and the inverse QFT."""
    if PauliString.identity(h.n_qubits) in h.terms:
        raise ValueError("subtract the identity term before building QPE")
    if len(h) == 0:
        raise ValueError("Hamiltonian has no terms")
    b = resolve_scale_factor(h, cfg)
    n_sys = h.n_qubits
    n_total = n_sys + cfg.n_ancilla
    ancillas = list(range(n_sys, n_total))
    circ = Circuit(n_total)
    for a in ancillas:
        circ.h(a, tag="qpe/superpose")
    system = list(range(n_sys))
    for k, anc in enumerate(ancillas):
        reps = 1 << k
        if cfg.unitary_mode == "exact":
            u_pow = exact_unitary(h, b * reps)
            circ.add(Gate("unitary", tuple(system), controls=(anc,), matrix=u_pow, tag="qpe/controlled-u"))
        elif cfg.power_mode == "rescale":
            plan = TrotterPlan(h, b=b * reps, n_steps=cfg.n_trotter)
            circ.extend(compile_controlled_trotter(plan, anc, n_total))
        else:
            plan = TrotterPlan(h, b=b, n_steps=cfg.n_trotter)
            body = compile_controlled_trotter(plan, anc, n_total)
            for _ in range(reps):
                circ.extend(body)
    circ.extend(iqft_circuit(n_total, ancillas))
    return circ


def _prepared_state(h: PauliSum, cfg: QpeConfig) -> tuple[Statevector, Circuit, float]:
    b = resolve_scale_factor(h, cfg)
    n_sys = h.n_qubits
    system_state = _resolve_initial_state(cfg.initial_state, n_sys)
    full = np.zeros(1 << (n_sys + cfg.n_ancilla), dtype=complex)
    full[: 1 << n_sys] = system_state.amplitudes  # ancillas start in |0...0>
    circ = build_qpe_circuit(h, cfg)
    pre_measure = apply(Statevector(full, n_sys + cfg.n_ancilla), circ)
    return pre_measure, circ, b


def run_qpe(
    h: PauliSum, cfg: QpeConfig
) -> tuple[list[PhaseEstimate], list[tuple[str, Statevector]]]:
    """Shot-sampled QPE.

    Returns the histogram (descending frequency) and the per-shot
    (bitstring, collapsed system register) list. Shot i measures with a
    seed derived from (rng_seed, i), so runs are reproducible and shots
    are independent.
    """
    pre_measure, _, b = _prepared_state(h, cfg)
    n_sys = h.n_qubits
    ancillas = list(range(n_sys, n_sys + cfg.n_ancilla))
    counts: dict[str, int] = {}
    collapsed_states: list[tuple[str, Statevector]] = []
    base_seed = seed_tuple(cfg.rng_seed)
    for shot in range(cfg.shots):
        bits, collapsed = measure(pre_measure, ancillas, rng_seed=base_seed + (shot,))
        counts[bits] = counts.get(bits, 0) + 1
        fixed = {anc: int(bits[-1 - j]) for j, anc in enumerate(ancillas)}
        system = extract_register(collapsed, keep=list(range(n_sys)), fixed=fixed)
        collapsed_states.append((bits, system))
    histogram = [
        PhaseEstimate(
            bitstring=bits,
            phi=decode_phase(bits),
            probability=count / cfg.shots,
            energy=phase_to_energy(decode_phase(bits), b, h.identity_offset),
        )
        for bits, count in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    ]
    return histogram, collapsed_states


def ancilla_distribution(h: PauliSum, cfg: QpeConfig) -> tuple[np.ndarray, float]:
    """Exact readout distribution over ancilla integers (no sampling)."""
    pre_measure, _, b = _prepared_state(h, cfg)
    n_sys = h.n_qubits
    ancillas = list(range(n_sys, n_sys + cfg.n_ancilla))
    return marginal_distribution(pre_measure, ancillas), b


@dataclass(frozen=True)
class AliasingReport:
    """Energies per scale-factor multiplier, with instability flags.

    ``flags`` lists energies that fail to match the baseline (smallest
    multiplier) within the base phase-grid resolution; ``trusted`` are
    baseline energies stable across every multiplier.
    """

    b_base: float
    n_ancilla: int
    tolerance: float
    multipliers: list[float]
    tables: dict[float, list[PhaseEstimate]]
    flags: list[dict] = field(default_factory=list)
    trusted: list[float] = field(default_factory=list)


def _distribution_peaks(
    probs: np.ndarray, b: float, identity_offset: float, n_ancilla: int, min_probability: float
) -> list[PhaseEstimate]:
    """Circular local maxima of the readout distribution above threshold."""
    size = probs.size
    peaks = []
    for v in range(size):
        p = probs[v]
        if p < min_probability:
            continue
        if p < probs[(v - 1) % size] or p < probs[(v + 1) % size]:
            continue
        bits = format(v, f"0{n_ancilla}b")
        phi = decode_phase(bits)
        peaks.append(
            PhaseEstimate(bits, phi, float(p), phase_to_energy(phi, b, identity_offset))
        )
    return sorted(peaks, key=lambda pe: -pe.probability)


def aliasing_scan(
    h: PauliSum,
    cfg: QpeConfig,
    multipliers: Sequence[float],
    min_probability: float = 0.02,
) -> AliasingReport:
    """Rerun QPE at b * m for each multiplier and flag unstable energies.

    Works on the exact readout distribution, so flags carry no shot
    noise. An energy is stable when a baseline peak lies within the base
    grid resolution 2*pi/(b * 2^n_ancilla); only aliased energies move
    with b.
    """
    if any(m < 1 for m in multipliers):
        raise ValueError("multipliers must be >= 1")
    multipliers = sorted(set(float(m) for m in multipliers))
    b_base = resolve_scale_factor(h, cfg)
    tolerance = 2.0 * math.pi / (b_base * (1 << cfg.n_ancilla)) * (1.0 + 1e-9)
    tables: dict[float, list[PhaseEstimate]] = {}
    for m in multipliers:
        scaled = QpeConfig(
            n_ancilla=cfg.n_ancilla,
            n_trotter=cfg.n_trotter,
            b=b_base * m,
            b_multiplier=1.0,
            initial_state=cfg.initial_state,
            shots=cfg.shots,
            rng_seed=cfg.rng_seed,
            unitary_mode=cfg.unitary_mode,
            power_mode=cfg.power_mode,
        )
        probs, b_m = ancilla_distribution(h, scaled)
        tables[m] = _distribution_peaks(
            probs, b_m, h.identity_offset, cfg.n_ancilla, min_probability
        )
    base = multipliers[0]
    base_energies = [pe.energy for pe in tables[base]]
    flags: list[dict] = []
    trusted_mask = [True] * len(base_energies)
    for m in multipliers[1:]:
        energies_m = [pe.energy for pe in tables[m]]
        for pe in tables[m]:
            if not base_energies or min(abs(pe.energy - e) for e in base_energies) > tolerance:
                flags.append(
                    {"multiplier": m, "energy": pe.energy, "bitstring": pe.bitstring,
                     "reason": "no matching baseline energy"}
                )
        for i, e in enumerate(base_energies):
            if not energies_m or min(abs(e - em) for em in energies_m) > tolerance:
                trusted_mask[i] = False
                flags.append(
                    {"multiplier": m, "energy": e, "bitstring": tables[base][i].bitstring,
                     "reason": "baseline energy absent at this multiplier"}
                )
    trusted = [e for e, ok in zip(base_energies, trusted_mask) if ok]
    return AliasingReport(
        b_base=b_base,
        n_ancilla=cfg.n_ancilla,
        tolerance=tolerance,
        multipliers=list(multipliers),
        tables=tables,
        flags=flags,
        trusted=trusted,
    )


class QpePreparer:
    """Reusable repeat-until-success collapser for one Hamiltonian/config.

    The QPE unitary is deterministic, so its pre-measurement state is
    computed once; each collapse() call re-runs only the stochastic
    measure-and-project part with its own seed.
    """

    def __init__(self, h: PauliSum, cfg: QpeConfig):
        self.h = h
        self.cfg = cfg
        self.pre_measure, _, self.b = _prepared_state(h, cfg)
        self._ancillas = list(range(h.n_qubits, h.n_qubits + cfg.n_ancilla))

    def collapse(
        self, target_phase: str, rng_seed, max_attempts: int = DEFAULT_MAX_ATTEMPTS
    ) -> tuple[Statevector, int]:
        if len(target_phase) != self.cfg.n_ancilla:
            raise ValueError("target phase length does not match ancilla count")
        n_sys = self.h.n_qubits
        base = seed_tuple(rng_seed)
        for attempt in range(1, max_attempts + 1):
            bits, collapsed = measure(
                self.pre_measure, self._ancillas, rng_seed=base + (attempt,)
            )
            if bits == target_phase:
                fixed = {anc: int(bits[-1 - j]) for j, anc in enumerate(self._ancillas)}
                system = extract_register(collapsed, keep=list(range(n_sys)), fixed=fixed)
                return system, attempt
        raise QpePreparationError(target_phase, max_attempts, hits=0)


def prepare_ground_state(
    h: PauliSum,
    cfg: QpeConfig,
    target_phase: str,
    max_attempts: int | None = None,
    target_probability: float | None = None,
) -> tuple[Statevector, int]:
    """Repeat seeded QPE shots until the ancillas read ``target_phase``.

    Returns the collapsed, renormalized system register and the number of
    attempts used. When max_attempts is not given it is sized from the
    empirical target probability (ceil(20/p), floor 100).
    """
    if max_attempts is None:
        if target_probability and target_probability > 0:
            max_attempts = max(DEFAULT_MAX_ATTEMPTS, math.ceil(20.0 / target_probability))
        else:
            max_attempts = DEFAULT_MAX_ATTEMPTS
    preparer = QpePreparer(h, cfg)
    return preparer.collapse(target_phase, rng_seed=cfg.rng_seed, max_attempts=max_attempts)


def eigenspace_weight(
    h: PauliSum, state: Statevector, energy: float, degeneracy_tol: float = 1e-8
) -> float:
    """Projector weight of ``state`` on the eigenspace nearest ``energy``.

    For (near-)degenerate targets this is the honest fidelity figure: a
    collapsed register lands somewhere inside the subspace, so a single
    eigenvector overlap is not well defined.
    """
    mat = h.to_dense_matrix()
    evals, evecs = np.linalg.eigh(mat)
    target = energy - h.identity_offset
    nearest = evals[np.argmin(np.abs(evals - target))]
    mask = np.abs(evals - nearest) <= degeneracy_tol
    overlaps = evecs[:, mask].conj().T @ state.amplitudes
    return float(np.sum(np.abs(overlaps) ** 2))
