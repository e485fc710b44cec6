"""Bundled toy systems used by the test suite, the acceptance checks, and
the packaged example data files.

Each fragment is a two-spatial-orbital, two-electron model with a
bonding/antibonding splitting and a double-excitation coupling K that
sets the correlation strength (configuration mixing of the doubly
occupied bonding and antibonding determinants). The dimer couples two
such fragments through weak density-density two-electron integrals, so
fragment particle numbers stay good while the exact ground state is
mildly entangled across fragments.
"""

from __future__ import annotations

import numpy as np

from .fermion import FermionIntegrals, FragmentSpec, build_fragment_hamiltonian
from .pauli import PauliSum

FRAGMENT_OCCUPATION = "0011"  # two electrons in the bonding spatial orbital


def fragment_chemist_integrals(
    variant: str = "standard",
) -> tuple[np.ndarray, np.ndarray]:
    """Spatial (h, chemist g) for one fragment.

    Variants: 'standard' (moderate correlation, gap ~0.19),
    'strong' (HF weight ~0.90, gap ~0.08), and 'tilted' (adds a
    bonding-antibonding one-electron coupling so the Hartree-Fock
    determinant is not even variationally stationary).
    """
    if variant == "standard":
        h = np.diag([-1.0, -0.45])
        diag, coulomb, k = (0.62, 0.65), 0.48, 0.30
    elif variant == "strong":
        h = np.diag([-1.0, -0.55])
        diag, coulomb, k = (0.62, 0.65), 0.48, 0.35
    elif variant == "tilted":
        h = np.array([[-1.0, 0.08], [0.08, -0.45]])
        diag, coulomb, k = (0.62, 0.65), 0.48, 0.30
    else:
        raise ValueError(f"unknown fragment variant {variant!r}")
    g = np.zeros((2, 2, 2, 2))
    g[0, 0, 0, 0] = diag[0]
    g[1, 1, 1, 1] = diag[1]
    for a, b in ((0, 1), (1, 0)):
        g[a, a, b, b] = coulomb
    for idx in ((0, 1, 0, 1), (1, 0, 0, 1), (0, 1, 1, 0), (1, 0, 1, 0)):
        g[idx] = k
    return h, g


def fragment_integrals(variant: str = "standard") -> FermionIntegrals:
    h, g = fragment_chemist_integrals(variant)
    return FermionIntegrals.from_spatial(h, g)


def fragment_hamiltonian(variant: str = "standard") -> PauliSum:
    """The 4-qubit fragment Hamiltonian (also shipped as a .pauli file)."""
    ints = fragment_integrals(variant)
    return build_fragment_hamiltonian(ints, FragmentSpec([[0, 1, 2, 3]]), 0)


def fragment_ground_state() -> tuple[float, np.ndarray]:
    """Exact ground energy and (diagonal) spin-orbital occupations."""
    h_k = fragment_hamiltonian()
    mat = h_k.to_dense_matrix() + h_k.identity_offset * np.eye(16)
    evals, evecs = np.linalg.eigh(mat)
    ground = evecs[:, 0]
    occupations = np.array(
        [
            sum(abs(ground[i]) ** 2 for i in range(16) if (i >> p) & 1)
            for p in range(4)
        ]
    )
    return float(evals[0]), occupations


def dimer_chemist_integrals(coupling: float = 0.05) -> tuple[np.ndarray, np.ndarray]:
    """Two 'standard' fragments with density-density inter-fragment terms."""
    h_frag, g_frag = fragment_chemist_integrals("standard")
    norb = 4
    h = np.zeros((norb, norb))
    g = np.zeros((norb,) * 4)
    for base in (0, 2):
        h[base : base + 2, base : base + 2] = h_frag
        g[base : base + 2, base : base + 2, base : base + 2, base : base + 2] = g_frag
    if coupling:
        # (pp|rr) Coulomb between fragment charge densities. The table is
        # deliberately non-separable in (p, r): a separable one reduces to
        # single-fragment mean fields and leaves no inter-fragment
        # correlation for the VQE to recover.
        weights = {(0, 2): 1.0, (0, 3): 0.7, (1, 2): 1.4, (1, 3): 1.6}
        for (p, r), w in weights.items():
            g[p, p, r, r] = coupling * w
            g[r, r, p, p] = coupling * w
    return h, g


def dimer_integrals(coupling: float = 0.05) -> FermionIntegrals:
    h, g = dimer_chemist_integrals(coupling)
    return FermionIntegrals.from_spatial(h, g)


def dimer_fragment_spec(gamma_mode: str = "mean-field") -> FragmentSpec:
    """Fragment partition for the dimer: spin orbitals [0..3] and [4..7].

    gamma 'mean-field' embeds each fragment in the other's determinant
    density diag(1,1,0,0); 'correlated' uses the isolated fragment's
    exact natural occupations; 'none' disables embedding.
    """
    fragments = [[0, 1, 2, 3], [4, 5, 6, 7]]
    if gamma_mode == "none":
        gamma = None
    elif gamma_mode == "mean-field":
        gamma = [np.diag([1.0, 1.0, 0.0, 0.0])] * 2
    elif gamma_mode == "correlated":
        _, occupations = fragment_ground_state()
        gamma = [np.diag(occupations)] * 2
    else:
        raise ValueError(f"unknown gamma mode {gamma_mode!r}")
    return FragmentSpec(fragments, gamma=gamma)


DIMER_OCCUPATION = "00110011"  # HF reference for the coupled register


def trotter_benchmark_hamiltonians() -> dict[str, PauliSum]:
    """The three bundled fragment Hamiltonians for fidelity sweeps."""
    return {
        variant: fragment_hamiltonian_variant(variant)
        for variant in ("standard", "strong", "tilted")
    }


def fragment_hamiltonian_variant(variant: str) -> PauliSum:
    ints = fragment_integrals(variant)
    return build_fragment_hamiltonian(ints, FragmentSpec([[0, 1, 2, 3]]), 0)
