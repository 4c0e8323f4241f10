import numpy as np
import pytest

import css_receiver as cr


def test_gold_values_three_valued():
    d = cr.gold_dictionary(5)
    assert d["psi"].shape == (31, 31)
    assert d["correlation_values"] == [-9, -1, 7]
    assert set(np.unique(d["psi"])) == {-1.0, 1.0}


def test_invalid_polynomial_raises():
    with pytest.raises(cr.DomainError):
        cr.gold_dictionary(4, [4, 2], [4, 1])


def test_operator_shapes_and_transpose():
    op = cr.MeasurementOperator.build("css", 63, 2)
    assert (op.rows, op.cols) == (32, 63)
    theta = op.dense()
    v = np.random.default_rng(0).standard_normal((32, 2))
    np.testing.assert_allclose(op.apply_transpose(v), theta.T @ v, atol=1e-12)


def test_pursuit_recovers_noiseless():
    d = cr.gold_dictionary(7)
    op = cr.MeasurementOperator.build("css", 127, 2)
    a = op.apply_matrix(d["psi"])
    alpha = np.zeros(127, dtype=complex)
    alpha[[3, 40, 90]] = [1 + 1j, -1 + 1j, 1 - 1j]
    y = a @ alpha
    r = cr.subspace_pursuit(a, y, 3)
    assert r["support"] == [3, 40, 90]
    np.testing.assert_allclose(r["alpha_hat"], alpha, atol=1e-9)


def test_mfsk_binary_closed_form():
    # M = 2: Pb = exp(-g/2)/2 on the per-symbol SNR axis with N = 2.
    g = 10 ** (3 / 10)
    assert cr.mfsk_ber(2, 3.0) == pytest.approx(0.5 * np.exp(-g), rel=1e-9)


def test_cost_identity():
    c = cr.predicted_cost(7, 12, 300, 1023)
    assert c["line_item_sum"] == c["closed_form_total"]


def test_run_small_config():
    text = """
kind: ber_discrete
name: smoke
m: 5
sparsity: 1
seed: 7
axis: snr_db
grid: [-6, 0]
stop: {target_errors: 20, max_slots: 2000}
curves:
  - operator: identity
"""
    t = cr.run_config(text)
    assert t["columns"]
    labels = [row[t["columns"].index("curve")] for row in t["rows"]]
    assert labels.count("identity") == 2

    def untimed(table):
        keep = [i for i, c in enumerate(table["columns"]) if not c.endswith("_s")]
        return [[row[i] for i in keep] for row in table["rows"]]

    assert untimed(t) == untimed(cr.run_config(text, threads=2))
