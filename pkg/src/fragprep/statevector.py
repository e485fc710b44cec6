"""Dense statevector simulation: registers, gates, measurement, expectations.

Basis-state labels are integers with qubit 0 as the least-significant bit.
Practical cap is around 26 qubits (a 2^26 complex vector); nothing here
needs more. Gates carry an optional list of control qubits, so a promoted
circuit is simulated exactly without decomposition.

Every stochastic operation takes an explicit seed or numpy Generator;
there is no hidden global RNG state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .pauli import PauliSum, PauliString

NORM_TOL = 1e-10

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2.0)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)


def as_rng(seed_or_rng) -> np.random.Generator:
    """Accept an int seed, a seed sequence, or a ready Generator."""
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


@dataclass(frozen=True)
class Gate:
    """One circuit element.

    ``kind`` is the base gate name; ``controls`` lists control qubits added
    by promotion (so kind 'x' with one control is a CNOT). ``tag`` records
    which compilation pass emitted the gate. ``matrix`` is only set for
    kind 'unitary' (a dense payload used by oracle-mode circuits).
    """

    kind: str
    qubits: tuple[int, ...]
    param: float | None = None
    controls: tuple[int, ...] = ()
    tag: str = ""
    matrix: np.ndarray | None = field(default=None, compare=False)

    @property
    def census_kind(self) -> str:
        return "c" * len(self.controls) + self.kind

    def with_extra_control(self, control: int) -> "Gate":
        if control in self.qubits or control in self.controls:
            raise ValueError(f"control qubit {control} collides with gate")
        return replace(self, controls=self.controls + (control,))


class Circuit:
    """An ordered gate list on a fixed register."""

    def __init__(self, n_qubits: int):
        if n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        self.n_qubits = n_qubits
        self.gates: list[Gate] = []

    def _check(self, *qubits: int) -> None:
        for q in qubits:
            if not 0 <= q < self.n_qubits:
                raise ValueError(f"qubit {q} out of range for {self.n_qubits} qubits")
        if len(set(qubits)) != len(qubits):
            raise ValueError("repeated qubit in one gate")

    def add(self, gate: Gate) -> None:
        self._check(*gate.qubits, *gate.controls)
        self.gates.append(gate)

    def h(self, q: int, tag: str = "") -> None:
        self.add(Gate("h", (q,), tag=tag))

    def x(self, q: int, tag: str = "") -> None:
        self.add(Gate("x", (q,), tag=tag))

    def y(self, q: int, tag: str = "") -> None:
        self.add(Gate("y", (q,), tag=tag))

    def z(self, q: int, tag: str = "") -> None:
        self.add(Gate("z", (q,), tag=tag))

    def rz(self, q: int, theta: float, tag: str = "") -> None:
        self.add(Gate("rz", (q,), float(theta), tag=tag))

    def ry(self, q: int, theta: float, tag: str = "") -> None:
        self.add(Gate("ry", (q,), float(theta), tag=tag))

    def phase(self, q: int, theta: float, tag: str = "") -> None:
        self.add(Gate("phase", (q,), float(theta), tag=tag))

    def cnot(self, control: int, target: int, tag: str = "") -> None:
        self.add(Gate("x", (target,), controls=(control,), tag=tag))

    def swap(self, a: int, b: int, tag: str = "") -> None:
        self.add(Gate("swap", (a, b), tag=tag))

    def unitary(self, qubits: Sequence[int], matrix: np.ndarray, tag: str = "") -> None:
        k = len(qubits)
        if matrix.shape != (1 << k, 1 << k):
            raise ValueError("matrix shape does not match qubit count")
        self.add(Gate("unitary", tuple(qubits), matrix=np.asarray(matrix, complex), tag=tag))

    def extend(self, other: "Circuit") -> None:
        if other.n_qubits > self.n_qubits:
            raise ValueError("cannot extend with a larger circuit")
        for g in other.gates:
            self.add(g)

    def __len__(self) -> int:
        return len(self.gates)

    def dump(self) -> str:
        """Line-oriented text form: ``kind qubits [param] // tag``.

        Control qubits precede targets in the qubit list, matching the
        census kind (so a promoted X dumps as ``cx 0,3``). Circuits with
        dense 'unitary' payloads are for in-memory oracle use only and
        cannot be dumped.
        """
        lines = []
        for g in self.gates:
            if g.kind == "unitary":
                raise ValueError("circuits with dense unitary payloads are not dumpable")
            qubits = ",".join(str(q) for q in g.controls + g.qubits)
            param = "" if g.param is None else f" {g.param:.12g}"
            lines.append(f"{g.census_kind} {qubits}{param} // {g.tag}")
        return "\n".join(lines) + ("\n" if lines else "")


def inverse_circuit(circuit: Circuit) -> Circuit:
    """Reverse the gate list, inverting each gate."""
    out = Circuit(circuit.n_qubits)
    for gate in reversed(circuit.gates):
        if gate.kind in ("h", "x", "y", "z", "swap"):
            out.add(gate)
        elif gate.kind in ("rz", "ry", "phase"):
            out.add(replace(gate, param=-gate.param))
        elif gate.kind == "unitary":
            out.add(replace(gate, matrix=gate.matrix.conj().T))
        else:
            raise ValueError(f"cannot invert gate kind {gate.kind!r}")
    return out


def gate_matrix(gate: Gate) -> np.ndarray:
    """Dense matrix of the uncontrolled gate body (local qubit order)."""
    if gate.kind == "h":
        return _H
    if gate.kind == "x":
        return _X
    if gate.kind == "y":
        return _Y
    if gate.kind == "z":
        return _Z
    if gate.kind == "rz":
        t = gate.param
        return np.array([[np.exp(-0.5j * t), 0], [0, np.exp(0.5j * t)]], dtype=complex)
    if gate.kind == "ry":
        c, s = math.cos(gate.param / 2.0), math.sin(gate.param / 2.0)
        return np.array([[c, -s], [s, c]], dtype=complex)
    if gate.kind == "phase":
        return np.array([[1, 0], [0, np.exp(1j * gate.param)]], dtype=complex)
    if gate.kind == "swap":
        return _SWAP
    if gate.kind == "unitary":
        return gate.matrix
    raise ValueError(f"unknown gate kind {gate.kind!r}")


class Statevector:
    """Normalized complex amplitudes over 2^n computational basis states."""

    __slots__ = ("n_qubits", "amplitudes")

    def __init__(self, amplitudes: np.ndarray, n_qubits: int | None = None):
        amps = np.asarray(amplitudes, dtype=complex)
        n = int(round(math.log2(amps.size))) if n_qubits is None else n_qubits
        if amps.size != 1 << n:
            raise ValueError("amplitude vector length is not a power of two")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-8:
            raise ValueError(f"state not normalized (norm {norm})")
        self.amplitudes = amps
        self.n_qubits = n

    @classmethod
    def zero_state(cls, n_qubits: int) -> "Statevector":
        amps = np.zeros(1 << n_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(amps, n_qubits)

    @classmethod
    def basis_state(cls, n_qubits: int, index: int) -> "Statevector":
        amps = np.zeros(1 << n_qubits, dtype=complex)
        amps[index] = 1.0
        return cls(amps, n_qubits)

    @classmethod
    def from_bitstring(cls, bits: str) -> "Statevector":
        """Computational basis state; rightmost character is qubit 0."""
        n = len(bits)
        return cls.basis_state(n, int(bits, 2))

    def copy(self) -> "Statevector":
        return Statevector(self.amplitudes.copy(), self.n_qubits)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def random_statevector(n_qubits: int, rng) -> Statevector:
    """Haar-ish random state: complex-normal amplitudes, normalized."""
    rng = as_rng(rng)
    amps = rng.normal(size=1 << n_qubits) + 1j * rng.normal(size=1 << n_qubits)
    return Statevector(amps / np.linalg.norm(amps), n_qubits)


def _controls_mask(controls: Iterable[int]) -> int:
    mask = 0
    for c in controls:
        mask |= 1 << c
    return mask


def _apply_gate_inplace(amps: np.ndarray, gate: Gate, n_qubits: int) -> None:
    mat = gate_matrix(gate)
    qubits = gate.qubits
    cmask = _controls_mask(gate.controls)
    tmask = _controls_mask(qubits)
    dim = amps.size
    idx = np.arange(dim, dtype=np.intp)
    if cmask:
        idx = idx[(idx & cmask) == cmask]
    base = idx[(idx & tmask) == 0]
    k = len(qubits)
    gather = np.empty((1 << k, base.size), dtype=np.intp)
    for j in range(1 << k):
        offset = 0
        for bit, q in enumerate(qubits):
            if (j >> bit) & 1:
                offset |= 1 << q
        gather[j] = base + offset
    amps[gather] = mat @ amps[gather]


def apply(state: Statevector, circuit: Circuit) -> Statevector:
    """Apply the gate list in order; returns a new state, input untouched."""
    if circuit.n_qubits != state.n_qubits:
        raise ValueError("circuit and state sizes differ")
    amps = state.amplitudes.copy()
    for gate in circuit.gates:
        _apply_gate_inplace(amps, gate, state.n_qubits)
    out = Statevector(amps, state.n_qubits)
    if abs(out.norm() - 1.0) > NORM_TOL:
        raise AssertionError("gate application broke normalization")
    return out


@lru_cache(maxsize=4096)
def _pauli_action(x_mask: int, z_mask: int, n_qubits: int) -> tuple[np.ndarray, np.ndarray]:
    """(source index permutation, per-amplitude phase) for one string."""
    idx = np.arange(1 << n_qubits, dtype=np.intp)
    signs = 1 - 2 * _parity(idx & z_mask)
    n_y = bin(x_mask & z_mask).count("1")
    phases = (1j**n_y) * signs.astype(complex)
    # out[i] = phases[i ^ x_mask] * in[i ^ x_mask]
    src = idx ^ x_mask
    return src, phases[src]


def apply_pauli_string(state: Statevector, string: PauliString) -> Statevector:
    """P|psi> computed by bit arithmetic (no matrix build)."""
    if string.n_qubits != state.n_qubits:
        raise ValueError("size mismatch")
    src, phase = _pauli_action(string.x_mask, string.z_mask, string.n_qubits)
    return Statevector(phase * state.amplitudes[src], state.n_qubits)


def apply_pauli_exponential(state: Statevector, string: PauliString, angle: float) -> Statevector:
    """e^{i angle P} |psi> using P^2 = I: cos(a) psi + i sin(a) P psi."""
    rotated = apply_pauli_string(state, string)
    amps = math.cos(angle) * state.amplitudes + 1j * math.sin(angle) * rotated.amplitudes
    return Statevector(amps, state.n_qubits)


def _parity(values: np.ndarray) -> np.ndarray:
    v = values.copy()
    result = np.zeros_like(v)
    while v.any():
        result ^= v & 1
        v >>= 1
    return result


def overlap(a: Statevector, b: Statevector) -> complex:
    """<a|b>."""
    if a.n_qubits != b.n_qubits:
        raise ValueError("size mismatch")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def expectation(state: Statevector, h: PauliSum) -> float:
    """<psi|H|psi> + identity_offset, for Hermitian H."""
    if h.n_qubits != state.n_qubits:
        raise ValueError("size mismatch")
    if not h.is_hermitian():
        raise ValueError("expectation requires a Hermitian Pauli sum")
    acc = 0.0 + 0.0j
    for string, coeff in h.items():
        acc += coeff * np.vdot(state.amplitudes, apply_pauli_string(state, string).amplitudes)
    if abs(acc.imag) > 1e-10:
        raise AssertionError(f"expectation of Hermitian sum came out complex: {acc}")
    return float(acc.real) + h.identity_offset


def measure(
    state: Statevector, qubits: Sequence[int], rng_seed
) -> tuple[str, Statevector]:
    """Measure the listed qubits in the computational basis.

    Returns (bitstring, collapsed state). The bitstring is rendered with
    qubits[0] as its rightmost character. Deterministic for a given seed.
    """
    if not qubits:
        raise ValueError("empty qubit list")
    qubits = list(qubits)
    for q in qubits:
        if not 0 <= q < state.n_qubits:
            raise ValueError(f"qubit {q} out of range")
    rng = as_rng(rng_seed)
    k = len(qubits)
    idx = np.arange(state.amplitudes.size, dtype=np.intp)
    keys = np.zeros_like(idx)
    for j, q in enumerate(qubits):
        keys |= ((idx >> q) & 1) << j
    probs = np.bincount(keys, weights=np.abs(state.amplitudes) ** 2, minlength=1 << k)
    probs = probs / probs.sum()
    outcome = int(rng.choice(1 << k, p=probs))
    collapsed = np.where(keys == outcome, state.amplitudes, 0.0)
    collapsed = collapsed / np.linalg.norm(collapsed)
    return format(outcome, f"0{k}b"), Statevector(collapsed, state.n_qubits)


def marginal_distribution(state: Statevector, qubits: Sequence[int]) -> np.ndarray:
    """Exact outcome probabilities for measuring ``qubits``; index bit j = qubits[j]."""
    qubits = list(qubits)
    k = len(qubits)
    idx = np.arange(state.amplitudes.size, dtype=np.intp)
    keys = np.zeros_like(idx)
    for j, q in enumerate(qubits):
        keys |= ((idx >> q) & 1) << j
    return np.bincount(keys, weights=np.abs(state.amplitudes) ** 2, minlength=1 << k)


def extract_register(
    state: Statevector, keep: Sequence[int], fixed: dict[int, int]
) -> Statevector:
    """Pull out the sub-register ``keep`` when all other qubits are fixed.

    Valid only when the discarded qubits are in the given computational
    basis state (as after measuring them), so the state factorizes.
    """
    keep = list(keep)
    n = state.n_qubits
    if sorted(keep + list(fixed)) != list(range(n)):
        raise ValueError("keep and fixed must partition the register")
    sub = np.zeros(1 << len(keep), dtype=complex)
    fixed_bits = sum(bit << q for q, bit in fixed.items())
    fixed_mask = _controls_mask(fixed.keys())
    idx = np.arange(state.amplitudes.size, dtype=np.intp)
    sel = idx[(idx & fixed_mask) == fixed_bits]
    keys = np.zeros_like(sel)
    for j, q in enumerate(keep):
        keys |= ((sel >> q) & 1) << j
    sub[keys] = state.amplitudes[sel]
    norm = np.linalg.norm(sub)
    if norm < 1e-12:
        raise ValueError("fixed assignment has zero amplitude")
    return Statevector(sub / norm, len(keep))


STATEVEC_HEADER = "# fragprep-statevector v1"


def dump_statevector(state: Statevector) -> str:
    """Versioned text form: header, then one ``<re> <im>`` line per amplitude."""
    lines = [f"{STATEVEC_HEADER} n_qubits={state.n_qubits}"]
    lines += [f"{a.real:.17g} {a.imag:.17g}" for a in state.amplitudes]
    return "\n".join(lines) + "\n"


def load_statevector(text: str) -> Statevector:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith(STATEVEC_HEADER):
        raise ValueError("missing statevector header")
    try:
        n = int(lines[0].split("n_qubits=")[1])
    except (IndexError, ValueError) as exc:
        raise ValueError("malformed statevector header") from exc
    if len(lines) - 1 != 1 << n:
        raise ValueError("amplitude count does not match header")
    amps = np.empty(1 << n, dtype=complex)
    for i, ln in enumerate(lines[1:]):
        re_part, im_part = ln.split()
        amps[i] = complex(float(re_part), float(im_part))
    return Statevector(amps, n)
