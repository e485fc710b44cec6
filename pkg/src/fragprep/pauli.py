"""Pauli-string algebra and weighted Pauli-sum Hamiltonians.

Strings are stored symplectically as a pair of bitmasks (x_mask, z_mask):
I=(0,0), X=(1,0), Y=(1,1), Z=(0,1), with qubit 0 the least-significant bit
of the basis-state integer label. In text form qubit 0 is the rightmost
character of the axes string.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Mapping

import numpy as np

# Coefficients below this are treated as accumulation noise and dropped.
COEFF_DROP_THRESHOLD = 1e-14

# Dense-matrix oracles refuse above this register size (4096 x 4096).
DEFAULT_ORACLE_CAP = 12

HERMITIAN_TOL = 1e-12

_SINGLE_QUBIT = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class OracleCapError(ValueError):
    """Raised when a dense-matrix oracle is asked for too many qubits."""


class PauliString:
    """A tensor product of single-qubit Paulis with no stored coefficient."""

    __slots__ = ("x_mask", "z_mask", "n_qubits")

    def __init__(self, x_mask: int, z_mask: int, n_qubits: int):
        if n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        top = 1 << n_qubits
        if x_mask >= top or z_mask >= top or x_mask < 0 or z_mask < 0:
            raise ValueError("mask exceeds register size")
        self.x_mask = x_mask
        self.z_mask = z_mask
        self.n_qubits = n_qubits

    @classmethod
    def from_axes(cls, axes: str) -> "PauliString":
        """Build from an axes string, e.g. 'ZZIX'; qubit 0 is the rightmost char."""
        n = len(axes)
        x = z = 0
        for q, ch in enumerate(reversed(axes)):
            if ch == "X":
                x |= 1 << q
            elif ch == "Y":
                x |= 1 << q
                z |= 1 << q
            elif ch == "Z":
                z |= 1 << q
            elif ch != "I":
                raise ValueError(f"invalid Pauli axis {ch!r}")
        return cls(x, z, n)

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        return cls(0, 0, n_qubits)

    def axes(self) -> str:
        """Axes string with qubit 0 rightmost."""
        chars = []
        for q in range(self.n_qubits - 1, -1, -1):
            x = (self.x_mask >> q) & 1
            z = (self.z_mask >> q) & 1
            chars.append("IXZY"[x + 2 * z])
        return "".join(chars)

    def axis(self, qubit: int) -> str:
        x = (self.x_mask >> qubit) & 1
        z = (self.z_mask >> qubit) & 1
        return ("I", "X", "Z", "Y")[x + 2 * z]

    @property
    def support(self) -> int:
        """Bitmask of qubits carrying a non-identity factor."""
        return self.x_mask | self.z_mask

    def support_qubits(self) -> list[int]:
        s = self.support
        return [q for q in range(self.n_qubits) if (s >> q) & 1]

    def weight(self) -> int:
        return bin(self.support).count("1")

    def is_identity(self) -> bool:
        return self.support == 0

    def multiply(self, other: "PauliString") -> tuple[complex, "PauliString"]:
        """Return (phase, product) with product = phase^-1 * self @ other.

        Phase convention: self @ other == phase * product, phase in {1, i, -1, -i}.
        """
        if self.n_qubits != other.n_qubits:
            raise ValueError("size mismatch")
        x = self.x_mask ^ other.x_mask
        z = self.z_mask ^ other.z_mask
        # i^k bookkeeping: write each factor as i^{x.z} X^x Z^z, commute the
        # middle Z^z1 X^x2 = (-1)^{z1.x2} X^x2 Z^z1, then re-extract Y factors.
        k = _popcount(self.x_mask & self.z_mask) + _popcount(other.x_mask & other.z_mask)
        k += 2 * _popcount(self.z_mask & other.x_mask)
        k -= _popcount(x & z)
        phase = (1j) ** (k % 4)
        return phase, PauliString(x, z, self.n_qubits)

    def to_matrix(self) -> np.ndarray:
        mat = np.ones((1, 1), dtype=complex)
        for q in range(self.n_qubits - 1, -1, -1):
            mat = np.kron(mat, _SINGLE_QUBIT[self.axis(q)])
        return mat

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, PauliString)
            and self.x_mask == other.x_mask
            and self.z_mask == other.z_mask
            and self.n_qubits == other.n_qubits
        )

    def __hash__(self) -> int:
        return hash((self.x_mask, self.z_mask, self.n_qubits))

    def __repr__(self) -> str:
        return f"PauliString({self.axes()!r})"


def _popcount(v: int) -> int:
    return bin(v).count("1")


class PauliSum:
    """Weighted sum of Pauli strings on a fixed register.

    ``identity_offset`` holds the coefficient of the all-I string after
    identity subtraction; energy reports add it back. Instances are
    immutable: every operation returns a new sum.
    """

    __slots__ = ("_terms", "n_qubits", "identity_offset")

    def __init__(
        self,
        terms: Mapping[PauliString, complex] | Iterable[tuple[PauliString, complex]],
        n_qubits: int,
        identity_offset: float = 0.0,
    ):
        if n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        items = terms.items() if isinstance(terms, Mapping) else terms
        d: dict[PauliString, complex] = {}
        for string, coeff in items:
            if string.n_qubits != n_qubits:
                raise ValueError("term size does not match register")
            if string in d:
                raise ValueError(f"duplicate string {string.axes()}; combine first")
            d[string] = complex(coeff)
        self._terms = d
        self.n_qubits = n_qubits
        self.identity_offset = float(identity_offset)

    @classmethod
    def from_term_list(
        cls, pairs: Iterable[tuple[complex, str]], identity_offset: float = 0.0
    ) -> "PauliSum":
        """Build and combine from (coefficient, axes-string) pairs."""
        pairs = list(pairs)
        if not pairs:
            raise ValueError("empty term list; register size unknown")
        n = len(pairs[0][1])
        acc: dict[PauliString, complex] = {}
        for coeff, axes in pairs:
            s = PauliString.from_axes(axes)
            if s.n_qubits != n:
                raise ValueError("inconsistent axes lengths")
            acc[s] = acc.get(s, 0.0) + complex(coeff)
        return cls(acc, n, identity_offset).combine()

    @property
    def terms(self) -> dict[PauliString, complex]:
        return dict(self._terms)

    def items(self) -> Iterator[tuple[PauliString, complex]]:
        return iter(self._terms.items())

    def __len__(self) -> int:
        return len(self._terms)

    def coefficient(self, string: PauliString) -> complex:
        return self._terms.get(string, 0.0)

    def combine(self) -> "PauliSum":
        """Merge duplicates and drop coefficients below the noise threshold."""
        kept = {
            s: c for s, c in self._terms.items() if abs(c) >= COEFF_DROP_THRESHOLD
        }
        return PauliSum(kept, self.n_qubits, self.identity_offset)

    def subtract_identity(self) -> "PauliSum":
        """Move the all-I coefficient into identity_offset.

        The coefficient must be real (it shifts a Hermitian spectrum).
        """
        ident = PauliString.identity(self.n_qubits)
        if ident not in self._terms:
            return self
        coeff = self._terms[ident]
        if abs(coeff.imag) > HERMITIAN_TOL:
            raise ValueError("identity coefficient must be real")
        rest = {s: c for s, c in self._terms.items() if s != ident}
        return PauliSum(rest, self.n_qubits, self.identity_offset + coeff.real)

    def one_norm(self) -> float:
        """Sum of |coefficients|; upper-bounds the spectral radius."""
        return float(sum(abs(c) for c in self._terms.values()))

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return all(abs(c.imag) <= tol for c in self._terms.values())

    def to_dense_matrix(self, oracle_cap: int = DEFAULT_ORACLE_CAP) -> np.ndarray:
        """Dense matrix of the sum, excluding identity_offset."""
        if self.n_qubits > oracle_cap:
            raise OracleCapError(
                f"{self.n_qubits} qubits exceeds dense-matrix cap of {oracle_cap}"
            )
        dim = 1 << self.n_qubits
        mat = np.zeros((dim, dim), dtype=complex)
        for string, coeff in self._terms.items():
            mat += coeff * string.to_matrix()
        return mat

    def scaled(self, factor: complex) -> "PauliSum":
        """Multiply all term coefficients by ``factor``; offset is untouched."""
        return PauliSum(
            {s: c * factor for s, c in self._terms.items()},
            self.n_qubits,
            self.identity_offset,
        ).combine()

    def added(self, other: "PauliSum") -> "PauliSum":
        if other.n_qubits != self.n_qubits:
            raise ValueError("size mismatch")
        acc = dict(self._terms)
        for s, c in other.items():
            acc[s] = acc.get(s, 0.0) + c
        return PauliSum(
            acc, self.n_qubits, self.identity_offset + other.identity_offset
        ).combine()

    def sorted_terms(self) -> list[tuple[PauliString, complex]]:
        """Deterministic ordering: descending |coeff|, then axes string."""
        return sorted(
            self._terms.items(), key=lambda item: (-abs(item[1]), item[0].axes())
        )

    def __repr__(self) -> str:
        return (
            f"PauliSum(n_qubits={self.n_qubits}, terms={len(self._terms)}, "
            f"identity_offset={self.identity_offset!r})"
        )


def load_pauli_text(text: str) -> PauliSum:
    """Parse the one-term-per-line text format: ``<real> <imag> <axes>``.

    ``#`` opens a comment; blank lines are ignored. Qubit 0 is the
    rightmost axes character. Raises ValueError with the offending line
    number on malformed input.
    """
    pairs: list[tuple[complex, str]] = []
    n = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 3:
            raise ValueError(f"line {lineno}: expected '<real> <imag> <axes>'")
        try:
            re_part, im_part = float(fields[0]), float(fields[1])
        except ValueError as exc:
            raise ValueError(f"line {lineno}: non-numeric coefficient") from exc
        axes = fields[2].upper()
        if any(ch not in "IXYZ" for ch in axes):
            raise ValueError(f"line {lineno}: invalid axes string {fields[2]!r}")
        if n is None:
            n = len(axes)
        elif len(axes) != n:
            raise ValueError(f"line {lineno}: axes length differs from earlier terms")
        pairs.append((complex(re_part, im_part), axes))
    if not pairs:
        raise ValueError("no Pauli terms found")
    return PauliSum.from_term_list(pairs)


def dump_pauli_text(sum_: PauliSum) -> str:
    """Inverse of load_pauli_text; terms in the deterministic sort order."""
    lines = [
        f"{c.real:.17g} {c.imag:.17g} {s.axes()}" for s, c in sum_.sorted_terms()
    ]
    return "\n".join(lines) + "\n"
