"""Prony retrieval: synthetic signals with known parameters, eigenbasis
series, and round trips against the exact-diagonalization oracle."""

import math

import numpy as np
import pytest

from fragprep.evolution import exact_unitary
from fragprep.pauli import PauliSum
from fragprep.prony import (
    AutocorrelationSeries,
    dump_components_csv,
    dump_series_csv,
    generate_series,
    load_series_csv,
    prony_fit,
)
from fragprep.statevector import Statevector

RNG = np.random.default_rng(1618)

Z = PauliSum.from_term_list([(1.0, "Z")])


def synthetic_series(weights, thetas, n_samples, tau=1.0, b=1.0):
    ks = np.arange(n_samples + 1)
    samples = sum(
        w * np.exp(1j * th * ks) for w, th in zip(weights, thetas)
    )
    return AutocorrelationSeries(tau=tau, b=b, samples=samples)


def test_eigenvector_series_is_pure_phase():
    series = generate_series(Z, Statevector.from_bitstring("0"), tau=0.75, b=0.5, n_samples=10)
    ks = np.arange(11)
    np.testing.assert_allclose(series.samples, np.exp(1j * 0.375 * ks), atol=1e-12)
    assert np.all(np.abs(np.abs(series.samples) - 1.0) < 1e-10)


def test_tau_zero_gives_constant_series():
    series = generate_series(Z, Statevector.from_bitstring("1"), tau=0.0, b=1.0, n_samples=5)
    np.testing.assert_allclose(series.samples, np.ones(6), atol=1e-12)


def test_superposition_series_is_cosine():
    plus = Statevector(np.array([1.0, 1.0]) / math.sqrt(2))
    tau, b = 0.75, 0.9
    series = generate_series(Z, plus, tau=tau, b=b, n_samples=12)
    ks = np.arange(13)
    np.testing.assert_allclose(series.samples, np.cos(b * tau * ks), atol=1e-12)


def test_series_matches_repeated_unitary_application():
    pairs = [(0.4, "XZ"), (0.3, "ZY"), (0.2, "IX")]
    h = PauliSum.from_term_list(pairs)
    psi = Statevector(np.array([0.5, 0.5, 0.5, 0.5]))
    tau, b = 0.6, 0.8
    series = generate_series(h, psi, tau=tau, b=b, n_samples=6)
    u = exact_unitary(h, b * tau)
    current = psi.amplitudes.copy()
    for k in range(7):
        c_k = np.vdot(psi.amplitudes, current)
        assert abs(series.samples[k] - c_k) < 1e-10
        current = u @ current


def test_synthetic_two_component_recovery():
    series = synthetic_series([0.7, 0.3], [0.3, -1.1], n_samples=20)
    result = prony_fit(series, p=2)
    np.testing.assert_allclose(
        sorted(np.abs(result.weights)), [0.3, 0.7], atol=1e-8
    )
    np.testing.assert_allclose(
        sorted(c.theta for c in result.components), [-1.1, 0.3], atol=1e-8
    )


def test_single_component_order_one():
    series = generate_series(Z, Statevector.from_bitstring("1"), tau=0.75, b=0.5, n_samples=4)
    result = prony_fit(series, p=1)
    assert len(result.components) == 1
    assert result.components[0].weight.real == pytest.approx(1.0, abs=1e-9)
    assert result.components[0].energy == pytest.approx(-1.0, abs=1e-9)


def test_weights_sum_to_one_and_are_real_nonnegative():
    h = PauliSum.from_term_list([(0.5, "XZ"), (0.3, "ZY"), (0.2, "ZI"), (0.1, "IX")])
    psi = Statevector(np.array([0.5, -0.5, 0.5j, 0.5]))
    series = generate_series(h, psi, tau=0.75, b=0.8, n_samples=20)
    result = prony_fit(series, p=8, prune_ratio=None)
    assert abs(np.sum(result.weights) - 1.0) < 1e-6
    for w in result.weights:
        assert abs(w.imag) < 1e-6
        assert w.real >= -1e-6


def test_round_trip_recovers_spectrum_oracle():
    # 3-qubit Hamiltonian, initial state mixing four eigenvectors with
    # known populations; p = 8 with pruning keeps the genuine components.
    h = PauliSum.from_term_list(
        [(0.45, "XZI"), (0.35, "ZYZ"), (0.25, "IXX"), (0.15, "ZZI"), (0.1, "YIY")]
    )
    b = 0.7
    evals, evecs = np.linalg.eigh(h.to_dense_matrix())
    picks = [0, 2, 4, 7]
    weights = np.array([0.4, 0.3, 0.2, 0.1])
    thetas = evals[picks] * b * 0.75
    assert np.min(np.abs(np.subtract.outer(thetas, thetas)[~np.eye(4, dtype=bool)])) > 0.05
    amps = (evecs[:, picks] * np.sqrt(weights)).sum(axis=1)
    psi = Statevector(amps / np.linalg.norm(amps))
    series = generate_series(h, psi, tau=0.75, b=b, n_samples=20)
    result = prony_fit(series, p=8)
    got = sorted(zip(result.energies, result.weights.real))
    expected = sorted(zip(evals[picks], weights))
    for (e_got, w_got), (e_ref, w_ref) in zip(got, expected):
        assert abs(e_got - e_ref) < 1e-4
        assert abs(w_got - w_ref) < 1e-4


def test_non_eigenstate_reference_dominant_excited_component():
    # Reference built mostly from an excited state: the heaviest Prony
    # weight must sit away from the ground energy.
    h = PauliSum.from_term_list([(0.6, "XZ"), (0.4, "ZY"), (0.3, "ZI")])
    evals, evecs = np.linalg.eigh(h.to_dense_matrix())
    amps = math.sqrt(0.6) * evecs[:, 2] + math.sqrt(0.4) * evecs[:, 0]
    psi = Statevector(amps / np.linalg.norm(amps))
    series = generate_series(h, psi, tau=0.75, b=0.6, n_samples=20)
    result = prony_fit(series, p=8)
    dominant = result.components[0]  # sorted by descending |weight|
    assert dominant.energy == pytest.approx(evals[2], abs=1e-5)
    assert abs(dominant.weight) == pytest.approx(0.6, abs=1e-6)
    assert dominant.energy > evals[0] + 0.1  # not the ground state


def test_half_tau_double_n_invariance():
    h = PauliSum.from_term_list([(0.5, "XZ"), (0.3, "ZY"), (0.2, "ZI")])
    psi = Statevector(np.array([0.5, 0.5, 0.5, -0.5]))
    kwargs = dict(prune_ratio=1e-6)
    coarse = prony_fit(generate_series(h, psi, tau=0.8, b=0.9, n_samples=20), p=8, **kwargs)
    fine = prony_fit(generate_series(h, psi, tau=0.4, b=0.9, n_samples=40), p=8, **kwargs)
    coarse_set = sorted(coarse.energies)
    fine_set = sorted(fine.energies)
    matched = 0
    for e in coarse_set:
        if np.min(np.abs(np.array(fine_set) - e)) < 1e-6:
            matched += 1
    assert matched == len(coarse_set)


def test_rank_deficient_system_reduces_order():
    series = generate_series(Z, Statevector.from_bitstring("0"), tau=0.75, b=0.5, n_samples=12)
    result = prony_fit(series, p=3)
    assert result.order == 3
    assert result.effective_order == 1
    assert len(result.components) == 1
    assert result.components[0].energy == pytest.approx(1.0, abs=1e-9)


def test_model_order_preconditions():
    series = synthetic_series([1.0], [0.4], n_samples=6)
    with pytest.raises(ValueError):
        prony_fit(series, p=4)  # needs n >= 8
    with pytest.raises(ValueError):
        prony_fit(series, p=0)
    flat = AutocorrelationSeries(tau=0.0, b=1.0, samples=np.ones(9))
    with pytest.raises(ValueError):
        prony_fit(flat, p=2)


def test_aliasing_guard_warning():
    with pytest.warns(UserWarning, match="wrap"):
        generate_series(Z, Statevector.from_bitstring("0"), tau=4.0, b=1.0, n_samples=4)


def test_series_invariant_validation():
    with pytest.raises(ValueError):
        AutocorrelationSeries(tau=1.0, b=1.0, samples=np.array([0.5, 0.5]))
    with pytest.raises(ValueError):
        AutocorrelationSeries(tau=1.0, b=1.0, samples=np.array([1.0, 1.7]))


def test_series_csv_round_trip():
    series = generate_series(Z, Statevector.from_bitstring("0"), tau=0.75, b=0.5,
                             n_samples=5, source="unit-test")
    again = load_series_csv(dump_series_csv(series))
    assert again.tau == series.tau
    assert again.b == series.b
    assert again.source == "unit-test"
    np.testing.assert_allclose(again.samples, series.samples, atol=1e-11)
    result = prony_fit(series, p=1)
    text = dump_components_csv(result)
    assert text.splitlines()[1] == "h_s,E_s"
