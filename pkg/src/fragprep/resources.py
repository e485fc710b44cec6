"""Closed-form resource accounting for the two preparation schemes.

QPE CNOTs follow N = n_U * n_Tr * (2^n_an - 1): one controlled unitary
costs n_U CNOTs, the Trotter approximation repeats it n_Tr times, and a
standard QPE ladder applies it 2^n_an - 1 times in total. DI costs come
from the 4^N - (3/2) 2^N multiplexor closed form, never from a compiled
census, so reports follow the same methodology as published tables.

The ancilla estimate is t = ceil(n + log(1 / (dE^2 r^{2p} eps))), floored
at n. The log base defaults to 2 (phase bits are qubits); the source
formula leaves the base unstated, so it is exposed for sensitivity
studies.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .evolution import TrotterPlan, compile_controlled_trotter, count_gates
from .initialize import di_cnot_count
from .pauli import PauliSum


@dataclass
class AncillaEstimateInput:
    """Inputs to the ancilla-count estimate.

    ``n`` is the requested phase precision in bits (resolution 1/2^n),
    ``delta_e`` the gap separating the ground state, ``r`` the Trotter
    step count, ``p`` the unitary-fidelity exponent, and ``epsilon`` the
    allowed failure probability.
    """

    n: int
    delta_e: float
    r: int
    p: float = 1.0
    epsilon: float = 0.33

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("precision bits n must be >= 1")
        if self.delta_e <= 0:
            raise ValueError("delta_e must be positive")
        if self.r < 1:
            raise ValueError("Trotter steps r must be >= 1")
        # epsilon = 1 is the degenerate zero-budget boundary (correction 0).
        if not 0.0 < self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in (0, 1]")


def estimate_ancilla(inp: AncillaEstimateInput, log_base: float = 2.0) -> int:
    """ceil(n + log(1/(dE^2 r^{2p} eps))), never below n."""
    if log_base <= 1.0:
        raise ValueError("log base must exceed 1")
    correction = math.log(
        1.0 / (inp.delta_e**2 * inp.r ** (2.0 * inp.p) * inp.epsilon), log_base
    )
    return max(inp.n, math.ceil(inp.n + correction))


def qpe_cnots(n_u: int, n_trotter: int, n_ancilla: int) -> int:
    """n_U * n_Tr * (2^n_an - 1)."""
    if n_u < 1 or n_trotter < 1 or n_ancilla < 1:
        raise ValueError("all arguments must be >= 1")
    return n_u * n_trotter * ((1 << n_ancilla) - 1)


def measure_unitary_cnots(h: PauliSum, b: float = 1.0) -> int:
    """CNOT census of one controlled Trotter slice of ``h``.

    This is the in-repo n_U: the parity-ladder CNOTs of a single pass
    over the terms, with the pivot rotations controlled (and counted
    separately as crz).
    """
    plan = TrotterPlan(h, b=b, n_steps=1)
    circuit = compile_controlled_trotter(plan, control=h.n_qubits, n_qubits=h.n_qubits + 1)
    return count_gates(circuit)["cx"]


@dataclass
class ResourceRow:
    label: str
    n_u: int
    n_trotter: int
    n_ancilla: int
    cnot_qpe: int
    n_qubits_fragment: int
    cnot_di: int


@dataclass
class ResourceReport:
    """Per-row QPE/DI CNOT totals plus the crossover fragment size.

    ``crossover_qubits`` is the smallest fragment size where QPE costs
    fewer CNOTs than DI (for the smallest ancilla count listed when
    several were swept); ``crossover_by_ancilla`` has one entry per
    ancilla count.
    """

    rows: list[ResourceRow]
    crossover_qubits: int | None = None
    crossover_by_ancilla: dict[int, int | None] = field(default_factory=dict)


def _resolve_n_u_model(model) -> Callable[[int], int]:
    if callable(model):
        return model
    if isinstance(model, Mapping):
        return lambda size: model[size]
    raise TypeError("n_U model must be callable or a size->count mapping")


def crossover_report(
    fragment_sizes: Sequence[int],
    n_u_model,
    n_trotter: int,
    n_ancilla_values: Sequence[int],
) -> ResourceReport:
    """QPE versus DI CNOT totals over fragment sizes and ancilla counts."""
    sizes = sorted(set(int(s) for s in fragment_sizes))
    ancillas = sorted(set(int(a) for a in n_ancilla_values))
    if not sizes or not ancillas:
        raise ValueError("need at least one fragment size and one ancilla count")
    model = _resolve_n_u_model(n_u_model)
    rows: list[ResourceRow] = []
    crossover_by_ancilla: dict[int, int | None] = {}
    for n_anc in ancillas:
        crossover = None
        for size in sizes:
            n_u = int(model(size))
            row = ResourceRow(
                label=f"N={size},anc={n_anc}",
                n_u=n_u,
                n_trotter=n_trotter,
                n_ancilla=n_anc,
                cnot_qpe=qpe_cnots(n_u, n_trotter, n_anc),
                n_qubits_fragment=size,
                cnot_di=di_cnot_count(size),
            )
            rows.append(row)
            # <=: the crossover is where QPE needs no more CNOTs than DI.
            if crossover is None and row.cnot_qpe <= row.cnot_di:
                crossover = size
        crossover_by_ancilla[n_anc] = crossover
    return ResourceReport(
        rows=rows,
        crossover_qubits=crossover_by_ancilla[ancillas[0]],
        crossover_by_ancilla=crossover_by_ancilla,
    )


REPORT_COLUMNS = (
    "label", "n_U", "n_trotter", "n_ancilla", "cnot_qpe", "n_qubits_fragment", "cnot_di"
)


def report_to_csv(report: ResourceReport) -> str:
    lines = ["# fragprep-resources v1", ",".join(REPORT_COLUMNS)]
    for r in report.rows:
        lines.append(
            f"{r.label},{r.n_u},{r.n_trotter},{r.n_ancilla},"
            f"{r.cnot_qpe},{r.n_qubits_fragment},{r.cnot_di}"
        )
    return "\n".join(lines) + "\n"


def report_to_json(report: ResourceReport) -> str:
    payload = {
        "schema": "fragprep-resources/1",
        "rows": [
            {
                "label": r.label,
                "n_U": r.n_u,
                "n_trotter": r.n_trotter,
                "n_ancilla": r.n_ancilla,
                "cnot_qpe": r.cnot_qpe,
                "n_qubits_fragment": r.n_qubits_fragment,
                "cnot_di": r.cnot_di,
            }
            for r in report.rows
        ],
        "crossover_qubits": report.crossover_qubits,
        "crossover_by_ancilla": {
            str(k): v for k, v in report.crossover_by_ancilla.items()
        },
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def report_to_text(report: ResourceReport) -> str:
    """Aligned table for terminal display."""
    headers = REPORT_COLUMNS
    table = [
        (
            r.label, str(r.n_u), str(r.n_trotter), str(r.n_ancilla),
            f"{r.cnot_qpe:,}", str(r.n_qubits_fragment), f"{r.cnot_di:,}",
        )
        for r in report.rows
    ]
    widths = [
        max(len(h), *(len(row[i]) for row in table)) if table else len(h)
        for i, h in enumerate(headers)
    ]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
    lines.append("  ".join("-" * w for w in widths))
    for row in table:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)))
    if report.crossover_qubits is not None:
        lines.append(f"crossover at {report.crossover_qubits} fragment qubits")
    else:
        lines.append("no crossover within the swept sizes")
    return "\n".join(lines) + "\n"
