"""Electronic-structure integrals, fragment Hamiltonians, and the
Jordan-Wigner transform.

Storage conventions
-------------------
Spin orbitals interleave spin: even index = alpha, odd = beta, so spin
orbital 2p+s derives from spatial orbital p. The two-electron tensor is
stored antisymmetrized, g[i,j,k,l] = <kl|ij> - <kl|ji> in physicist
notation, which is the coefficient of a+_k a+_l a_j a_i under the global
1/4 weight. The FCIDUMP reader performs the chemist -> physicist
reordering and antisymmetrization on load.

Qubit mapping: a Hamiltonian restricted to an orbital subset acts on a
register of len(subset) qubits, qubit q holding the q-th orbital of the
subset in its given order (so each fragment occupies contiguous qubits).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .pauli import COEFF_DROP_THRESHOLD, PauliString, PauliSum

SYMMETRY_TOL = 1e-10
GAMMA_TOL = 1e-8


class FcidumpError(ValueError):
    """Parse failure; message carries the 1-based line number."""


@dataclass
class FermionIntegrals:
    """One-/two-electron integrals over spin orbitals, plus core energy."""

    n_spin_orbitals: int
    h: np.ndarray
    g: np.ndarray
    e_core: float = 0.0
    n_electrons: int | None = None

    def __post_init__(self):
        n = self.n_spin_orbitals
        self.h = np.asarray(self.h, dtype=float)
        self.g = np.asarray(self.g, dtype=float)
        if self.h.shape != (n, n):
            raise ValueError("h has wrong shape")
        if self.g.shape != (n, n, n, n):
            raise ValueError("g has wrong shape")
        if not np.allclose(self.h, self.h.T, atol=SYMMETRY_TOL):
            raise ValueError("one-electron integrals are not symmetric")

    @classmethod
    def from_spatial(
        cls,
        h_spatial: np.ndarray,
        g_chemist: np.ndarray,
        e_core: float = 0.0,
        n_electrons: int | None = None,
    ) -> "FermionIntegrals":
        """Expand spatial chemist integrals (pq|rs) to spin orbitals.

        Returns the antisymmetrized spin tensor used by the Hamiltonian
        builders.
        """
        h_spatial = np.asarray(h_spatial, dtype=float)
        g_chemist = np.asarray(g_chemist, dtype=float)
        norb = h_spatial.shape[0]
        n = 2 * norb
        h = np.zeros((n, n))
        for s in (0, 1):
            h[s::2, s::2] = h_spatial
        # Physicist <pq|rs> over spin orbitals: (PR|QS) with matching spins.
        phys = np.zeros((n, n, n, n))
        spin = np.arange(n) % 2
        spat = np.arange(n) // 2
        same = (spin[:, None] == spin[None, :]).astype(float)
        chem_ps = g_chemist[spat[:, None], spat[None, :]]  # (p, r, spatial q, spatial s)
        for q in range(n):
            for s_ in range(n):
                phys[:, q, :, s_] = (
                    chem_ps[:, :, spat[q], spat[s_]] * same * same[q, s_]
                )
        g = phys.transpose(2, 3, 0, 1) - phys.transpose(3, 2, 0, 1)
        return cls(n, h, g, e_core, n_electrons)


def _validate_eightfold(g_chem: np.ndarray) -> None:
    perms = [
        (1, 0, 2, 3),
        (0, 1, 3, 2),
        (1, 0, 3, 2),
        (2, 3, 0, 1),
        (3, 2, 0, 1),
        (2, 3, 1, 0),
        (3, 2, 1, 0),
    ]
    for perm in perms:
        if not np.allclose(g_chem, g_chem.transpose(perm), atol=SYMMETRY_TOL):
            raise ValueError("two-electron integrals violate 8-fold symmetry")


_HEADER_KV = re.compile(r"([A-Za-z0-9_]+)\s*=\s*([^,\s]+)")


def parse_fcidump(text: str) -> FermionIntegrals:
    """Read an FCIDUMP-style file into spin-orbital integrals.

    Grammar: a ``&FCI`` header with NORB/NELEC key-value pairs, closed by
    ``&END`` (or ``/``), then one record per line, ``value i j k l`` with
    1-based spatial indices. ``i j k l`` all positive is the chemist
    integral (ij|kl) (8-fold symmetry expanded), ``k = l = 0`` is h_ij,
    and the all-zero row is the core energy. Fortran D exponents are
    accepted.
    """
    lines = text.splitlines()
    header_parts: list[str] = []
    body_start = None
    in_header = False
    for lineno, raw in enumerate(lines, start=1):
        stripped = raw.strip()
        if not in_header:
            if not stripped:
                continue
            if not stripped.upper().startswith("&FCI"):
                raise FcidumpError(f"line {lineno}: expected &FCI header")
            in_header = True
            header_parts.append(stripped[4:])
            if "&END" in stripped.upper() or stripped.endswith("/"):
                body_start = lineno + 1
                break
            continue
        upper = stripped.upper()
        if "&END" in upper or stripped == "/" or stripped.endswith("/"):
            header_parts.append(stripped.replace("/", " ").replace("&END", " "))
            body_start = lineno + 1
            break
        header_parts.append(stripped)
    else:
        raise FcidumpError("header never terminated with &END or /")

    header = " ".join(header_parts)
    header = re.sub(r"&END", " ", header, flags=re.IGNORECASE)
    keys = {k.upper(): v for k, v in _HEADER_KV.findall(header)}
    if "NORB" not in keys:
        raise FcidumpError("header is missing NORB")
    try:
        norb = int(keys["NORB"])
    except ValueError as exc:
        raise FcidumpError(f"malformed NORB value {keys['NORB']!r}") from exc
    if norb < 1:
        raise FcidumpError("NORB must be positive")
    n_electrons = None
    if "NELEC" in keys:
        try:
            n_electrons = int(keys["NELEC"])
        except ValueError as exc:
            raise FcidumpError(f"malformed NELEC value {keys['NELEC']!r}") from exc

    h_spatial = np.zeros((norb, norb))
    g_chem = np.zeros((norb, norb, norb, norb))
    e_core = 0.0
    for lineno in range(body_start, len(lines) + 1):
        raw = lines[lineno - 1]
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = stripped.split()
        if len(fields) != 5:
            raise FcidumpError(f"line {lineno}: expected 'value i j k l'")
        try:
            value = float(fields[0].replace("D", "E").replace("d", "e"))
            i, j, k, l = (int(f) for f in fields[1:])
        except ValueError as exc:
            raise FcidumpError(f"line {lineno}: non-numeric record") from exc
        if min(i, j, k, l) < 0 or max(i, j, k, l) > norb:
            raise FcidumpError(f"line {lineno}: orbital index out of range")
        if i == j == k == l == 0:
            e_core = value
        elif k == 0 and l == 0 and i > 0 and j > 0:
            h_spatial[i - 1, j - 1] = value
            h_spatial[j - 1, i - 1] = value
        elif min(i, j, k, l) > 0:
            for a, b, c, d in _eightfold((i - 1, j - 1, k - 1, l - 1)):
                g_chem[a, b, c, d] = value
        else:
            raise FcidumpError(f"line {lineno}: unsupported record shape")
    _validate_eightfold(g_chem)
    return FermionIntegrals.from_spatial(h_spatial, g_chem, e_core, n_electrons)


def _eightfold(idx: tuple[int, int, int, int]) -> list[tuple[int, int, int, int]]:
    i, j, k, l = idx
    return [
        (i, j, k, l), (j, i, k, l), (i, j, l, k), (j, i, l, k),
        (k, l, i, j), (l, k, i, j), (k, l, j, i), (l, k, j, i),
    ]


def dump_fcidump(
    h_spatial: np.ndarray,
    g_chemist: np.ndarray,
    e_core: float = 0.0,
    n_electrons: int = 0,
    ms2: int = 0,
    tol: float = 1e-12,
) -> str:
    """Write spatial chemist integrals in the FCIDUMP grammar parse_fcidump
    reads: one canonical record per 8-fold symmetry class."""
    h_spatial = np.asarray(h_spatial, dtype=float)
    g_chemist = np.asarray(g_chemist, dtype=float)
    _validate_eightfold(g_chemist)
    norb = h_spatial.shape[0]
    lines = [
        f"&FCI NORB={norb},NELEC={n_electrons},MS2={ms2},",
        " ORBSYM=" + "1," * norb,
        " ISYM=1,",
        "&END",
    ]
    written: set[tuple[int, int, int, int]] = set()
    for i in range(norb):
        for j in range(norb):
            for k in range(norb):
                for l in range(norb):
                    if (i, j, k, l) in written or abs(g_chemist[i, j, k, l]) < tol:
                        continue
                    written.update(_eightfold((i, j, k, l)))
                    lines.append(f"{g_chemist[i, j, k, l]:.16g} {i + 1} {j + 1} {k + 1} {l + 1}")
    for i in range(norb):
        for j in range(i + 1):
            if abs(h_spatial[i, j]) >= tol:
                lines.append(f"{h_spatial[i, j]:.16g} {i + 1} {j + 1} 0 0")
    lines.append(f"{e_core:.16g} 0 0 0 0")
    return "\n".join(lines) + "\n"


@dataclass
class FragmentSpec:
    """Active-space partition: per-fragment orbital lists, inactive set,
    and per-fragment 1-RDM blocks used for mean-field embedding."""

    fragment_orbitals: list[list[int]]
    inactive_orbitals: list[int] = field(default_factory=list)
    gamma: list[np.ndarray] | None = None

    def __post_init__(self):
        seen: set[int] = set()
        for frag in self.fragment_orbitals:
            overlap = seen.intersection(frag)
            if overlap:
                raise ValueError(f"orbital(s) {sorted(overlap)} appear in two sets")
            if len(set(frag)) != len(frag):
                raise ValueError("repeated orbital within a fragment")
            seen.update(frag)
        overlap = seen.intersection(self.inactive_orbitals)
        if overlap:
            raise ValueError(f"orbital(s) {sorted(overlap)} are both active and inactive")
        if self.gamma is None:
            self.gamma = [np.zeros((len(f), len(f))) for f in self.fragment_orbitals]
        self.gamma = [np.asarray(g, dtype=float) for g in self.gamma]
        if len(self.gamma) != len(self.fragment_orbitals):
            raise ValueError("need one gamma block per fragment")
        for frag, g in zip(self.fragment_orbitals, self.gamma):
            if g.shape != (len(frag), len(frag)):
                raise ValueError("gamma block shape does not match fragment size")
            if not np.allclose(g, g.T, atol=GAMMA_TOL):
                raise ValueError("gamma block is not symmetric")
            evals = np.linalg.eigvalsh(g)
            if evals.min() < -GAMMA_TOL or evals.max() > 1.0 + GAMMA_TOL:
                raise ValueError("gamma eigenvalues must lie in [0, 1]")

    @property
    def active_order(self) -> list[int]:
        """Concatenated fragment orbitals; position = qubit index in H_eff."""
        return [orb for frag in self.fragment_orbitals for orb in frag]


def load_fragment_spec(text: str, base_dir: str | Path | None = None) -> FragmentSpec:
    """FragmentSpec from its JSON config form.

    Keys: "fragments" (list of orbital-index lists), optional "inactive",
    optional "gamma" (one entry per fragment: an inline matrix or a path
    to a whitespace-delimited text matrix, resolved against base_dir).
    """
    data = json.loads(text)
    gamma = None
    if "gamma" in data and data["gamma"] is not None:
        gamma = []
        for entry in data["gamma"]:
            if isinstance(entry, str):
                path = Path(entry)
                if base_dir is not None and not path.is_absolute():
                    path = Path(base_dir) / path
                gamma.append(np.atleast_2d(np.loadtxt(path)))
            else:
                gamma.append(np.asarray(entry, dtype=float))
    return FragmentSpec(
        fragment_orbitals=[list(map(int, f)) for f in data["fragments"]],
        inactive_orbitals=list(map(int, data.get("inactive", []))),
        gamma=gamma,
    )


# ---------------------------------------------------------------------------
# Jordan-Wigner transform
# ---------------------------------------------------------------------------

LadderProduct = Sequence[tuple[int, bool]]


def _ladder_pauli_sum(orbital: int, creation: bool, n: int) -> PauliSum:
    """a+_p or a_p as a two-term Pauli sum with the Z parity tail."""
    z_tail = (1 << orbital) - 1
    x_string = PauliString((1 << orbital), z_tail, n)
    y_string = PauliString((1 << orbital), z_tail | (1 << orbital), n)
    sign = -1.0 if creation else 1.0
    return PauliSum({x_string: 0.5, y_string: sign * 0.5j}, n)


def _sum_product(a: PauliSum, b: PauliSum) -> PauliSum:
    acc: dict[PauliString, complex] = {}
    for sa, ca in a.items():
        for sb, cb in b.items():
            phase, prod = sa.multiply(sb)
            acc[prod] = acc.get(prod, 0.0) + ca * cb * phase
    return PauliSum(acc, a.n_qubits).combine()


def jordan_wigner(
    terms: Iterable[tuple[complex, LadderProduct]], n_spin_orbitals: int
) -> PauliSum:
    """Map a sum of ladder-operator products to a combined Pauli sum.

    Each term is (coefficient, product), the product a sequence of
    (orbital, is_creation) applied right to left like the written
    operator string. A real all-identity component is moved into
    identity_offset.
    """
    n = n_spin_orbitals
    acc: dict[PauliString, complex] = {}
    for coeff, product in terms:
        if abs(coeff) < COEFF_DROP_THRESHOLD:
            continue
        current = PauliSum({PauliString.identity(n): complex(coeff)}, n)
        for orbital, creation in product:
            if not 0 <= orbital < n:
                raise ValueError(f"orbital index {orbital} out of range")
            current = _sum_product(current, _ladder_pauli_sum(orbital, creation, n))
        for s, c in current.items():
            acc[s] = acc.get(s, 0.0) + c
    result = PauliSum(acc, n).combine()
    ident = PauliString.identity(n)
    if ident in result.terms and abs(result.coefficient(ident).imag) < 1e-12:
        result = result.subtract_identity()
    return result


# ---------------------------------------------------------------------------
# Hamiltonian assembly
# ---------------------------------------------------------------------------


def _embedded_one_body(
    ints: FermionIntegrals, spec: FragmentSpec, frag_index: int
) -> np.ndarray:
    """h_ij + sum_u g_iu^ju + sum_mn g_im^jn gamma_m^n over fragment orbitals."""
    frag = spec.fragment_orbitals[frag_index]
    coeff = ints.h[np.ix_(frag, frag)].copy()
    for u in spec.inactive_orbitals:
        coeff += ints.g[np.ix_(frag, [u], frag, [u])][:, 0, :, 0]
    for other, (orbs, gamma) in enumerate(zip(spec.fragment_orbitals, spec.gamma)):
        if other == frag_index:
            continue
        block = ints.g[np.ix_(frag, orbs, frag, orbs)]  # (i, m, j, n)
        coeff += np.einsum("imjn,mn->ij", block, gamma)
    return coeff


def _quartic_terms(
    ints: FermionIntegrals, orbitals: Sequence[int]
) -> list[tuple[complex, LadderProduct]]:
    terms = []
    nloc = len(orbitals)
    g = ints.g[np.ix_(orbitals, orbitals, orbitals, orbitals)]
    for i in range(nloc):
        for j in range(nloc):
            for k in range(nloc):
                for l in range(nloc):
                    val = g[i, j, k, l]
                    if abs(val) < COEFF_DROP_THRESHOLD:
                        continue
                    terms.append(
                        (0.25 * val, ((k, True), (l, True), (j, False), (i, False)))
                    )
    return terms


def _one_body_terms(coeff: np.ndarray) -> list[tuple[complex, LadderProduct]]:
    terms = []
    nloc = coeff.shape[0]
    for i in range(nloc):
        for j in range(nloc):
            if abs(coeff[i, j]) < COEFF_DROP_THRESHOLD:
                continue
            terms.append((coeff[i, j], ((j, True), (i, False))))
    return terms


def build_fragment_hamiltonian(
    ints: FermionIntegrals, spec: FragmentSpec, k: int
) -> PauliSum:
    """Qubit image of one fragment's embedded Hamiltonian.

    One-body coefficients carry the inactive-orbital mean field and the
    other fragments' density blocks; the quartic part is restricted to
    the fragment's own orbitals. The register has one qubit per fragment
    orbital, in the order the fragment lists them. The file's core energy
    is not included (it belongs to the whole system, not one fragment).
    """
    if not 0 <= k < len(spec.fragment_orbitals):
        raise ValueError(f"no fragment {k}")
    frag = spec.fragment_orbitals[k]
    _check_orbitals(ints, spec)
    # Both helpers emit subset-local indices (position within `frag`).
    terms = _one_body_terms(_embedded_one_body(ints, spec, k)) + _quartic_terms(ints, frag)
    return jordan_wigner(terms, len(frag)).subtract_identity()


def build_effective_hamiltonian(ints: FermionIntegrals, spec: FragmentSpec) -> PauliSum:
    """Qubit image of the whole-active-space Hamiltonian for the VQE.

    One-body coefficients carry the inactive mean field only; both the
    one- and two-body sums run over the union of fragment active spaces.
    The core energy is folded into identity_offset so reported
    expectations are total energies.
    """
    _check_orbitals(ints, spec)
    active = spec.active_order
    if not active:
        raise ValueError("no active orbitals")
    coeff = ints.h[np.ix_(active, active)].copy()
    for u in spec.inactive_orbitals:
        coeff += ints.g[np.ix_(active, [u], active, [u])][:, 0, :, 0]
    terms = _one_body_terms(coeff) + _quartic_terms(ints, active)
    result = jordan_wigner(terms, len(active)).subtract_identity()
    return PauliSum(result.terms, result.n_qubits, result.identity_offset + ints.e_core)


def _check_orbitals(ints: FermionIntegrals, spec: FragmentSpec) -> None:
    all_orbitals = spec.active_order + list(spec.inactive_orbitals)
    if any(not 0 <= p < ints.n_spin_orbitals for p in all_orbitals):
        raise ValueError("fragment spec references an orbital outside the integrals")


def number_operator(n_qubits: int) -> PauliSum:
    """Total-occupation operator sum_p a+_p a_p in qubit form."""
    terms = [(1.0, ((p, True), (p, False))) for p in range(n_qubits)]
    return jordan_wigner(terms, n_qubits)
