"""Figure rendering for the CLI report paths.

Every helper returns a matplotlib Figure; the CLI saves them as PNG next
to the CSV/JSON they visualize. The Agg backend is forced so rendering
works headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .qpe import PhaseEstimate  # noqa: E402
from .resources import ResourceReport  # noqa: E402


def save_figure(fig, path) -> None:
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def plot_qpe_histogram(estimates: list[PhaseEstimate], title: str = "") -> plt.Figure:
    fig, ax = plt.subplots(figsize=(6, 4))
    energies = [pe.energy for pe in estimates]
    probs = [pe.probability for pe in estimates]
    width = 0.8 * (min(abs(e2 - e1) for e1, e2 in zip(sorted(energies), sorted(energies)[1:]))
                   if len(energies) > 1 else 0.1)
    ax.bar(energies, probs, width=width, color="#2b6f8c")
    ax.set_xlabel("energy (Hartree)")
    ax.set_ylabel("frequency")
    if title:
        ax.set_title(title)
    return fig


def plot_ancilla_sweep(rows: list[dict], title: str = "") -> plt.Figure:
    fig, ax = plt.subplots(figsize=(6, 4))
    ns = [row["n_ancilla"] for row in rows]
    ax.semilogy(ns, [max(row["abs_error"], 1e-16) for row in rows],
                "o-", color="#2b6f8c", label="peak energy error")
    ax.semilogy(ns, [row["grid_resolution"] for row in rows],
                "--", color="#888888", label="phase-grid resolution")
    ax.set_xlabel("ancilla qubits")
    ax.set_ylabel("|energy error| (Hartree)")
    ax.legend()
    if title:
        ax.set_title(title)
    return fig


def plot_trotter_sweep(rows: list[dict], title: str = "") -> plt.Figure:
    fig, ax = plt.subplots(figsize=(6, 4))
    ns = [row["n_trotter"] for row in rows]
    ax.plot(ns, [row["fidelity"] for row in rows], "o-", color="#a03030",
            label="|overlap| with exact ground state")
    ax.set_xlabel("Trotter steps")
    ax.set_ylabel("fidelity")
    ax.set_ylim(min(row["fidelity"] for row in rows) - 0.01, 1.001)
    twin = ax.twinx()
    twin.semilogy(ns, [max(abs(row["zeroth_error"]), 1e-16) for row in rows],
                  "s--", color="#2b6f8c", label="zeroth-iteration error")
    twin.set_ylabel("|energy error| (Hartree)")
    lines, labels = ax.get_legend_handles_labels()
    lines2, labels2 = twin.get_legend_handles_labels()
    ax.legend(lines + lines2, labels + labels2, loc="center right")
    if title:
        ax.set_title(title)
    return fig


def plot_vqe_trace(trace: list[tuple[int, float]], title: str = "") -> plt.Figure:
    fig, ax = plt.subplots(figsize=(6, 4))
    evals = [idx for idx, _ in trace]
    best = []
    current = float("inf")
    for _, e in trace:
        current = min(current, e)
        best.append(current)
    ax.plot(evals, [e for _, e in trace], ".", markersize=2, color="#bbbbbb",
            label="evaluations")
    ax.plot(evals, best, "-", color="#a03030", label="best so far")
    ax.set_xlabel("function evaluation")
    ax.set_ylabel("energy (Hartree)")
    ax.legend()
    if title:
        ax.set_title(title)
    return fig


def plot_crossover(report: ResourceReport, title: str = "") -> plt.Figure:
    fig, ax = plt.subplots(figsize=(6, 4))
    by_ancilla: dict[int, list] = {}
    for row in report.rows:
        by_ancilla.setdefault(row.n_ancilla, []).append(row)
    di_drawn = False
    for n_anc, rows in sorted(by_ancilla.items()):
        rows = sorted(rows, key=lambda r: r.n_qubits_fragment)
        sizes = [r.n_qubits_fragment for r in rows]
        if not di_drawn:
            ax.semilogy(sizes, [r.cnot_di for r in rows], "k--", label="DI")
            di_drawn = True
        ax.semilogy(sizes, [r.cnot_qpe for r in rows], "o-",
                    label=f"QPE, {n_anc} ancillas")
    ax.set_xlabel("fragment spin orbitals (qubits)")
    ax.set_ylabel("CNOT gates")
    ax.legend()
    if title:
        ax.set_title(title)
    return fig
