"""Autocorrelation series under e^{iHb*tau} and Prony harmonic retrieval.

The series C_k = <psi0| e^{i H b tau k} |psi0> is fit to
C_k = sum_s h_s e^{i theta_s k}; phases invert to energies via
E_s = theta_s / (b tau). For noiseless unitary dynamics the h_s are the
eigenstate populations of the initial state, so they are real,
non-negative, and sum to C_0 = 1.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .pauli import DEFAULT_ORACLE_CAP, PauliSum
from .statevector import Statevector

DEFAULT_PRUNE_RATIO = 1e-3


@dataclass
class AutocorrelationSeries:
    """Sampled overlaps C_k, k = 0..n_samples, with their time grid."""

    tau: float
    b: float
    samples: np.ndarray
    source: str = ""

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=complex)
        if self.samples.ndim != 1 or self.samples.size < 1:
            raise ValueError("samples must be a non-empty 1-d sequence")
        if abs(self.samples[0] - 1.0) > 1e-8:
            raise ValueError("C_0 must be 1 for a normalized initial state")
        if np.any(np.abs(self.samples) > 1.0 + 1e-8):
            raise ValueError("|C_k| cannot exceed 1 for unitary dynamics")

    @property
    def n_samples(self) -> int:
        return self.samples.size - 1


@dataclass
class PronyComponent:
    weight: complex
    theta: float
    energy: float


@dataclass
class PronyResult:
    """Recovered components, sorted by descending |weight|."""

    components: list[PronyComponent]
    order: int
    effective_order: int
    pruned: int = 0

    @property
    def weights(self) -> np.ndarray:
        return np.array([c.weight for c in self.components])

    @property
    def energies(self) -> np.ndarray:
        return np.array([c.energy for c in self.components])


def generate_series(
    h: PauliSum,
    psi0: Statevector,
    tau: float,
    b: float,
    n_samples: int,
    oracle_cap: int = DEFAULT_ORACLE_CAP,
    source: str = "",
) -> AutocorrelationSeries:
    """Exact autocorrelation series via the eigenbasis of H.

    Emits an aliasing warning when b * tau * one_norm(H) >= pi, since
    phases theta = E b tau would wrap exactly as in QPE.
    """
    if h.n_qubits != psi0.n_qubits:
        raise ValueError("state and Hamiltonian sizes differ")
    if n_samples < 1:
        raise ValueError("need at least one propagation step")
    if b * tau * h.one_norm() >= np.pi:
        warnings.warn(
            "b*tau*one_norm(H) >= pi: eigenphases can wrap and alias energies",
            stacklevel=2,
        )
    evals, evecs = np.linalg.eigh(h.to_dense_matrix(oracle_cap))
    populations = np.abs(evecs.conj().T @ psi0.amplitudes) ** 2
    ks = np.arange(n_samples + 1)
    phases = np.exp(1j * np.outer(ks, evals * b * tau))
    samples = phases @ populations
    return AutocorrelationSeries(tau=tau, b=b, samples=samples, source=source)


def _companion_roots(coeffs: np.ndarray) -> np.ndarray:
    """Roots of z^p - coeffs[0] z^{p-1} - ... - coeffs[p-1]."""
    p = coeffs.size
    if p == 1:
        return coeffs.copy()
    companion = np.zeros((p, p), dtype=complex)
    companion[0, :] = coeffs
    companion[1:, :-1] = np.eye(p - 1)
    return np.linalg.eigvals(companion)


def prony_fit(
    series: AutocorrelationSeries,
    p: int,
    prune_ratio: float | None = DEFAULT_PRUNE_RATIO,
) -> PronyResult:
    """Hankel least-squares linear prediction, companion-matrix roots
    projected to the unit circle, then Vandermonde least squares for the
    weights.

    A rank-deficient prediction system reduces the effective order and
    refits. Components below prune_ratio * max|weight| are dropped
    (pass None to keep every root).
    """
    samples = series.samples
    n = series.n_samples
    if p < 1:
        raise ValueError("model order must be >= 1")
    if n < 2 * p:
        raise ValueError(f"need n_samples >= 2p (= {2 * p}), have {n}")
    if series.b * series.tau == 0.0:
        raise ValueError("b * tau must be nonzero to invert phases to energies")

    rows = n - p + 1
    hankel = np.empty((rows, p), dtype=complex)
    for k in range(rows):
        hankel[k] = samples[k : k + p][::-1]
    rhs = samples[p : n + 1]
    coeffs, _, rank, _ = np.linalg.lstsq(hankel, rhs, rcond=None)
    effective = p
    if rank < p:
        effective = max(int(rank), 1)
        reduced = prony_fit(series, effective, prune_ratio)
        return PronyResult(reduced.components, order=p, effective_order=effective,
                           pruned=reduced.pruned)

    roots = _companion_roots(coeffs)
    moduli = np.abs(roots)
    roots = roots[moduli > 1e-8]
    roots = roots / np.abs(roots)  # unimodular by unitarity; projection steadies noise

    ks = np.arange(n + 1)
    vandermonde = roots[np.newaxis, :] ** ks[:, np.newaxis]
    weights, _, _, _ = np.linalg.lstsq(vandermonde, samples, rcond=None)

    order_idx = np.argsort(-np.abs(weights))
    weights = weights[order_idx]
    roots = roots[order_idx]
    pruned = 0
    if prune_ratio is not None and weights.size:
        keep = np.abs(weights) >= prune_ratio * np.abs(weights[0])
        pruned = int(np.sum(~keep))
        weights, roots = weights[keep], roots[keep]

    components = [
        PronyComponent(
            weight=complex(w),
            theta=float(np.angle(z)),
            energy=float(np.angle(z) / (series.b * series.tau)),
        )
        for w, z in zip(weights, roots)
    ]
    return PronyResult(components, order=p, effective_order=effective, pruned=pruned)


# ---------------------------------------------------------------------------
# CSV forms
# ---------------------------------------------------------------------------

SERIES_HEADER = "# fragprep-autocorrelation v1"


def dump_series_csv(series: AutocorrelationSeries) -> str:
    lines = [f"{SERIES_HEADER} tau={series.tau:.12g} b={series.b:.12g} source={series.source}"]
    lines.append("k,re,im")
    for k, c in enumerate(series.samples):
        lines.append(f"{k},{c.real:.12g},{c.imag:.12g}")
    return "\n".join(lines) + "\n"


def load_series_csv(text: str) -> AutocorrelationSeries:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith(SERIES_HEADER):
        raise ValueError("missing autocorrelation header")
    fields = dict(
        part.split("=", 1) for part in lines[0][len(SERIES_HEADER):].split() if "=" in part
    )
    try:
        tau, b = float(fields["tau"]), float(fields["b"])
    except (KeyError, ValueError) as exc:
        raise ValueError("malformed autocorrelation header") from exc
    samples = []
    for ln in lines[2:]:
        _, re_part, im_part = ln.split(",")
        samples.append(complex(float(re_part), float(im_part)))
    return AutocorrelationSeries(tau=tau, b=b, samples=np.array(samples),
                                 source=fields.get("source", ""))


def dump_components_csv(result: PronyResult) -> str:
    """Two-column weight/energy table (weights reported by real part)."""
    lines = [f"# fragprep-prony-components v1 order={result.order} "
             f"effective_order={result.effective_order} pruned={result.pruned}"]
    lines.append("h_s,E_s")
    for comp in result.components:
        lines.append(f"{comp.weight.real:.12g},{comp.energy:.12g}")
    return "\n".join(lines) + "\n"
