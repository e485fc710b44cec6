"""Parameter sweeps over QPE settings: energy error versus ancilla count
and state fidelity versus Trotter steps.

Sweep rows are plain dicts so the CLI can serialize them to CSV and feed
the plotting helpers; points are independent and may run in parallel
(per-point seeds derive from the base seed and the point's value, so the
jobs flag never changes results).
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Sequence

import numpy as np

from .pauli import PauliSum, load_pauli_text
from .qpe import (
    QpeConfig,
    QpePreparer,
    ancilla_distribution,
    decode_phase,
    phase_to_energy,
)
from .statevector import Statevector, expectation, overlap


def exact_ground(h: PauliSum) -> tuple[float, Statevector]:
    evals, evecs = np.linalg.eigh(h.to_dense_matrix())
    return float(evals[0] + h.identity_offset), Statevector(evecs[:, 0])


def ground_target_phase(h: PauliSum, cfg: QpeConfig, min_probability: float = 0.02) -> str:
    """The readout bitstring whose inverted energy sits nearest the exact
    ground energy among non-negligible peaks (the stored phase of the
    repeat-until-success workflow)."""
    probs, b = ancilla_distribution(h, cfg)
    ground_energy, _ = exact_ground(h)
    best = None
    for v in range(probs.size):
        if probs[v] < min_probability:
            continue
        bits = format(v, f"0{cfg.n_ancilla}b")
        energy = phase_to_energy(decode_phase(bits), b, h.identity_offset)
        distance = abs(energy - ground_energy)
        if best is None or distance < best[0]:
            best = (distance, bits)
    if best is None:
        raise ValueError("no readout peak above the probability threshold")
    return best[1]


def ancilla_sweep_point(
    h: PauliSum, n_ancilla: int, n_trotter: int, initial_state, b_multiplier: float = 1.0
) -> dict:
    """QPE energy error at one ancilla count (exact readout distribution)."""
    cfg = QpeConfig(
        n_ancilla=n_ancilla,
        n_trotter=n_trotter,
        b_multiplier=b_multiplier,
        initial_state=initial_state,
        shots=1,
    )
    probs, b = ancilla_distribution(h, cfg)
    peak = int(np.argmax(probs))
    bits = format(peak, f"0{n_ancilla}b")
    energy = phase_to_energy(decode_phase(bits), b, h.identity_offset)
    ground_energy, _ = exact_ground(h)
    return {
        "n_ancilla": n_ancilla,
        "n_trotter": n_trotter,
        "b": b,
        "bitstring": bits,
        "energy": energy,
        "abs_error": abs(energy - ground_energy),
        "grid_resolution": 2.0 * np.pi / (b * (1 << n_ancilla)),
    }


def ancilla_sweep(
    h: PauliSum,
    ancilla_values: Sequence[int],
    n_trotter: int,
    initial_state,
    b_multiplier: float = 1.0,
    jobs: int = 1,
) -> list[dict]:
    values = list(ancilla_values)
    if jobs > 1:
        args = [(h, v, n_trotter, initial_state, b_multiplier) for v in values]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_ancilla_point_star, args))
    return [
        ancilla_sweep_point(h, v, n_trotter, initial_state, b_multiplier) for v in values
    ]


def _ancilla_point_star(args):
    return ancilla_sweep_point(*args)


def trotter_sweep_point(
    h: PauliSum,
    n_trotter: int,
    n_ancilla: int,
    initial_state,
    seed: int = 0,
    max_attempts: int = 200,
) -> dict:
    """Fidelity of the QPE-collapsed state against the exact ground state."""
    cfg = QpeConfig(
        n_ancilla=n_ancilla,
        n_trotter=n_trotter,
        initial_state=initial_state,
        shots=1,
        rng_seed=seed,
    )
    target = ground_target_phase(h, cfg)
    preparer = QpePreparer(h, cfg)
    prepared, attempts = preparer.collapse(target, rng_seed=(seed, n_trotter),
                                           max_attempts=max_attempts)
    ground_energy, ground_state = exact_ground(h)
    fidelity = abs(overlap(ground_state, prepared))
    zeroth = expectation(prepared, h) - ground_energy
    return {
        "n_trotter": n_trotter,
        "n_ancilla": n_ancilla,
        "target": target,
        "attempts": attempts,
        "fidelity": fidelity,
        "zeroth_error": zeroth,
    }


def trotter_sweep(
    h: PauliSum,
    trotter_values: Sequence[int],
    n_ancilla: int,
    initial_state,
    seed: int = 0,
    jobs: int = 1,
) -> list[dict]:
    values = list(trotter_values)
    if jobs > 1:
        args = [(h, v, n_ancilla, initial_state, seed) for v in values]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_trotter_point_star, args))
    return [trotter_sweep_point(h, v, n_ancilla, initial_state, seed) for v in values]


def _trotter_point_star(args):
    return trotter_sweep_point(*args)


def rows_to_csv(rows: list[dict], header_note: str) -> str:
    """Serialize sweep rows: versioned header, then column row, 12 digits."""
    if not rows:
        raise ValueError("no sweep rows")
    columns = list(rows[0].keys())
    lines = [f"# fragprep-sweep v1 {header_note}", ",".join(columns)]
    for row in rows:
        cells = []
        for col in columns:
            val = row[col]
            cells.append(f"{val:.12g}" if isinstance(val, float) else str(val))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def load_hamiltonian_file(path) -> PauliSum:
    """Read a Pauli text file and subtract any identity term on load."""
    with open(path, "r", encoding="utf-8") as fh:
        return load_pauli_text(fh.read()).subtract_identity()
