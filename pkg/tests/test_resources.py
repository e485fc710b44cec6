"""Closed-form resource formulas and crossover reports."""

import math

import numpy as np
import pytest

from fragprep.pauli import PauliSum
from fragprep.resources import (
    AncillaEstimateInput,
    crossover_report,
    estimate_ancilla,
    measure_unitary_cnots,
    qpe_cnots,
    report_to_csv,
    report_to_json,
    report_to_text,
)

RNG = np.random.default_rng(33)


def test_qpe_cnots_reference_values():
    assert qpe_cnots(84, 7, 4) == 8820
    assert qpe_cnots(84, 9, 4) == 11340
    assert qpe_cnots(1, 1, 3) == 7
    with pytest.raises(ValueError):
        qpe_cnots(0, 1, 1)


def test_qpe_cnots_strictly_increasing():
    base = qpe_cnots(5, 3, 4)
    assert qpe_cnots(6, 3, 4) > base
    assert qpe_cnots(5, 4, 4) > base
    assert qpe_cnots(5, 3, 5) > base


def test_estimate_ancilla_degenerate_budget():
    # delta_e = 1, r = 1, epsilon = 1: the log term vanishes and t = n.
    inp = AncillaEstimateInput(n=6, delta_e=1.0, r=1, p=1.0, epsilon=1.0)
    assert estimate_ancilla(inp) == 6


def test_estimate_ancilla_hand_arithmetic():
    inp = AncillaEstimateInput(n=10, delta_e=0.5, r=6, p=1.0, epsilon=0.33)
    # Independent arithmetic: 10 + log2(1/(0.25 * 36 * 0.33)) = 10 - 1.5705...
    correction = -math.log2(0.25 * 36 * 0.33)
    assert correction == pytest.approx(-1.5705, abs=1e-3)
    assert math.ceil(10 + correction) == 9
    assert estimate_ancilla(inp) == 10  # floor keeps t >= n


def test_estimate_ancilla_binding_correction():
    inp = AncillaEstimateInput(n=10, delta_e=0.01, r=1, p=1.0, epsilon=0.33)
    expected = math.ceil(10 + math.log2(1.0 / (1e-4 * 0.33)))
    assert estimate_ancilla(inp) == expected
    assert expected > 10


def test_estimate_ancilla_monotonicity():
    base = AncillaEstimateInput(n=8, delta_e=0.05, r=2, p=1.0, epsilon=0.2)
    t0 = estimate_ancilla(base)
    assert estimate_ancilla(AncillaEstimateInput(8, 0.1, 2, 1.0, 0.2)) <= t0
    assert estimate_ancilla(AncillaEstimateInput(8, 0.05, 4, 1.0, 0.2)) <= t0
    assert estimate_ancilla(AncillaEstimateInput(8, 0.05, 2, 1.0, 0.4)) <= t0
    assert estimate_ancilla(AncillaEstimateInput(9, 0.05, 2, 1.0, 0.2)) == t0 + 1


def test_estimate_ancilla_log_base_flag():
    inp = AncillaEstimateInput(n=4, delta_e=0.1, r=1, p=1.0, epsilon=0.5)
    t2 = estimate_ancilla(inp, log_base=2.0)
    te = estimate_ancilla(inp, log_base=math.e)
    t10 = estimate_ancilla(inp, log_base=10.0)
    assert t2 >= te >= t10
    with pytest.raises(ValueError):
        estimate_ancilla(inp, log_base=1.0)


def test_estimate_ancilla_validation():
    with pytest.raises(ValueError):
        AncillaEstimateInput(n=0, delta_e=1.0, r=1)
    with pytest.raises(ValueError):
        AncillaEstimateInput(n=4, delta_e=-1.0, r=1)
    with pytest.raises(ValueError):
        AncillaEstimateInput(n=4, delta_e=1.0, r=1, epsilon=1.5)


def test_measure_unitary_cnots_matches_ladder_cost():
    h = PauliSum.from_term_list([(0.5, "ZZI"), (0.3, "XYZ"), (0.2, "IXX")])
    expected = sum(2 * (s.weight() - 1) for s, _ in h.items())
    assert measure_unitary_cnots(h) == expected


def test_crossover_tiny_qpe_always_wins():
    report = crossover_report([1, 2, 3], lambda size: 1, n_trotter=1, n_ancilla_values=[1])
    assert report.crossover_qubits == 1
    for row in report.rows:
        assert row.cnot_qpe == 1


def test_crossover_large_ancilla_prefactor():
    # Constant small n_U with 20 ancillas: DI wins early, QPE wins once
    # 4^N outgrows the 2^20 prefactor; the crossing is monotone.
    report = crossover_report(
        list(range(1, 16)), lambda size: 2, n_trotter=1, n_ancilla_values=[20]
    )
    di_wins = [row.n_qubits_fragment for row in report.rows if row.cnot_di < row.cnot_qpe]
    qpe_wins = [row.n_qubits_fragment for row in report.rows if row.cnot_qpe < row.cnot_di]
    assert di_wins and qpe_wins
    assert max(di_wins) < min(qpe_wins)
    assert report.crossover_qubits == min(qpe_wins)
    expected = next(
        n for n in range(1, 16)
        if 2 * ((1 << 20) - 1) < (1 << (2 * n)) - 3 * (1 << (n - 1))
    )
    assert report.crossover_qubits == expected


def test_crossover_shifts_with_more_ancillas():
    report = crossover_report(
        list(range(1, 22)), lambda size: 10 * size, n_trotter=10,
        n_ancilla_values=[10, 20],
    )
    c10 = report.crossover_by_ancilla[10]
    c20 = report.crossover_by_ancilla[20]
    assert c10 is not None and c20 is not None
    assert c10 < c20  # more ancillas push the crossover to larger fragments
    assert report.crossover_qubits == c10


def test_di_column_matches_closed_form():
    from fragprep.initialize import di_cnot_count

    report = crossover_report([2, 4, 6], lambda size: 3, n_trotter=2, n_ancilla_values=[4])
    for row in report.rows:
        assert row.cnot_di == di_cnot_count(row.n_qubits_fragment)


def test_report_renderings():
    report = crossover_report([2, 4], {2: 5, 4: 9}, n_trotter=3, n_ancilla_values=[4])
    csv_text = report_to_csv(report)
    assert csv_text.splitlines()[1].startswith("label,n_U,n_trotter")
    json_text = report_to_json(report)
    assert '"cnot_di": 232' in json_text
    table = report_to_text(report)
    assert "cnot_qpe" in table and "crossover" in table
