import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mimpac.wavelet import (
    CoefficientVector,
    WaveletDictionary,
    WaveletIndex,
    WaveletSpec,
    besov_norm,
    daubechies_filter,
    dictionary_size,
    enumerate_indices,
    eval_basis,
    eval_link,
    eval_scaling,
    eval_wavelet,
    link_design,
    project_to_level,
    wavelet_coefficients,
)

SPEC = WaveletSpec()


def test_filter_is_orthonormal_and_sums_to_sqrt2():
    for order in (2, 3, 4, 6):
        h = daubechies_filter(order)
        assert len(h) == 2 * order
        assert h.sum() == pytest.approx(math.sqrt(2), abs=1e-12)
        for shift in range(0, 2 * order, 2):
            expected = 1.0 if shift == 0 else 0.0
            assert np.dot(h[: len(h) - shift], h[shift:]) == pytest.approx(expected, abs=1e-10)


def test_db2_matches_closed_form():
    s3 = math.sqrt(3)
    expected = np.array([1 + s3, 3 + s3, 3 - s3, 1 - s3]) / (4 * math.sqrt(2))
    assert np.allclose(daubechies_filter(2), expected, atol=1e-12)


def test_order_below_three_rejected():
    with pytest.raises(ValueError):
        WaveletSpec(order=2)


@pytest.mark.parametrize(
    "d,M,N,count",
    [(1, 0, 1, 6), (1, 1, 1, 11), (2, 0, 2, 100)],
)
def test_enumeration_counts(d, M, N, count):
    idx = enumerate_indices(d, M, N)
    assert len(idx) == count == dictionary_size(d, M, N)
    assert len(set(idx)) == count


def test_enumeration_is_stable_and_truncation_is_prefix():
    a = enumerate_indices(2, 2, 1)
    assert a == enumerate_indices(2, 2, 1)
    for M in range(2):
        assert enumerate_indices(2, M, 1) == a[: dictionary_size(2, M, 1)]


def test_hand_example_cardinality_bound():
    assert dictionary_size(2, 0, 2) <= 4**2 * 2**2 * 2


def test_position_matches_enumeration():
    dic = WaveletDictionary(2, 1, 1, SPEC)
    for pos, index in enumerate(dic.indices):
        assert dic.position(index) == pos
    with pytest.raises(KeyError):
        dic.position(WaveletIndex(5, (0, 0), (1, 0)))


def test_outside_support_is_zero():
    x = np.array([-0.5, -1e-9, SPEC.support + 1e-9, 100.0])
    assert np.all(eval_scaling(SPEC, x) == 0)
    assert np.all(eval_wavelet(SPEC, x) == 0)


def test_scaling_integrates_to_one():
    step = 2.0**-SPEC.table_resolution
    assert np.trapezoid(SPEC.phi_table, dx=step) == pytest.approx(1.0, abs=1e-4)


def test_partition_of_unity():
    rng = np.random.default_rng(0)
    x = rng.uniform(-3, 3, size=100)
    total = sum(eval_scaling(SPEC, x - k) for k in range(-20, 21))
    assert np.abs(total - 1).max() < 1e-3


def test_basis_formula_examples():
    dic = WaveletDictionary(1, 1, 1, SPEC)
    for x in (0.3, 1.7, 2.2):
        assert eval_basis(dic, WaveletIndex(0, (0,), (0,)), [x]) == pytest.approx(float(SPEC.phi(x)))
        assert eval_basis(dic, WaveletIndex(1, (0,), (1,)), [x]) == pytest.approx(math.sqrt(2) * float(SPEC.psi(2 * x)))


def test_basis_outside_dictionary_raises():
    dic = WaveletDictionary(1, 0, 1, SPEC)
    with pytest.raises(ValueError):
        eval_basis(dic, WaveletIndex(1, (0,), (1,)), [0.0])


def test_gram_matrix_is_identity():
    dic = WaveletDictionary(1, 1, 1, SPEC)
    step = 2.0**-10
    grid = np.arange(-1.0, 1.0 + SPEC.support, step)
    design = link_design(dic, grid[:, None])
    values = np.zeros((grid.size, dic.size))
    rows = np.repeat(np.arange(grid.size), design[0].shape[1])
    np.add.at(values, (rows, design[0].ravel()), design[1].ravel())
    gram = values.T @ values * step
    assert np.abs(gram - np.eye(dic.size)).max() < 1e-2


def test_sparse_design_matches_basis_evaluation():
    rng = np.random.default_rng(1)
    dic = WaveletDictionary(2, 1, 1, SPEC)
    U = rng.uniform(-2, 8, size=(15, 2))
    beta = rng.standard_normal(dic.size)
    fast = eval_link(CoefficientVector(beta, dic), U)
    slow = [sum(b * eval_basis(dic, l, u) for b, l in zip(beta, dic.indices)) for u in U]
    assert np.allclose(fast, slow, atol=1e-12)


def test_eval_link_zero_and_linearity():
    dic = WaveletDictionary(1, 1, 2, SPEC)
    assert eval_link(CoefficientVector.zeros(dic), [1.3]) == 0.0
    beta = np.zeros(dic.size)
    j = 7
    beta[j] = 2.5
    x = [0.8]
    assert eval_link(CoefficientVector(beta, dic), x) == pytest.approx(2.5 * eval_basis(dic, dic.indices[j], x))


def test_eval_link_sup_bound_on_grid():
    rng = np.random.default_rng(2)
    dic = WaveletDictionary(1, 1, 1, SPEC)
    from mimpac.prior import sample_coeff_ball

    coeffs = sample_coeff_ball(dic, 2.0, rng)
    grid = np.linspace(-1, 1 + SPEC.support, 1000)[:, None]
    assert np.abs(eval_link(coeffs, grid)).max() <= besov_norm(coeffs)


def test_besov_norm_examples():
    dic = WaveletDictionary(1, 2, 1, SPEC)
    assert besov_norm(CoefficientVector.zeros(dic)) == 0.0
    beta = np.zeros(dic.size)
    beta[dic.position(WaveletIndex(0, (1,), (0,)))] = -0.3
    assert besov_norm(CoefficientVector(beta, dic)) == pytest.approx(0.3 * SPEC.L)
    beta = np.zeros(dic.size)
    beta[dic.position(WaveletIndex(2, (0,), (1,)))] = 1.0
    assert besov_norm(CoefficientVector(beta, dic)) == pytest.approx(8 * SPEC.L)


def test_coefficients_of_basis_function_are_unit_vector():
    dic = WaveletDictionary(1, 1, 1, SPEC)
    j = dic.position(WaveletIndex(1, (-1,), (1,)))
    target = dic.indices[j]
    coeffs = wavelet_coefficients(lambda X: np.array([eval_basis(dic, target, x) for x in X]), dic)
    expected = np.zeros(dic.size)
    expected[j] = 1.0
    assert np.abs(coeffs.beta - expected).max() < 1e-2


def test_coefficients_of_zero():
    dic = WaveletDictionary(2, 0, 1, SPEC)
    assert np.all(wavelet_coefficients(lambda X: np.zeros(len(X)), dic).beta == 0)


def test_reconstruction_error_decreases_with_level():
    def bump(X):
        return np.exp(-4 * (X[:, 0] - 3.0) ** 2)

    grid = np.linspace(1.0, 5.0, 400)[:, None]
    errors = []
    for M in range(4):
        dic = WaveletDictionary(1, M, 6, SPEC)
        coeffs = wavelet_coefficients(bump, dic)
        errors.append(np.sqrt(np.mean((eval_link(coeffs, grid) - bump(grid)) ** 2)))
    assert all(a > b for a, b in zip(errors, errors[1:]))


def test_project_to_level():
    rng = np.random.default_rng(3)
    dic = WaveletDictionary(1, 4, 1, SPEC)
    coeffs = CoefficientVector(rng.standard_normal(dic.size), dic)
    assert project_to_level(coeffs, 4) is coeffs
    assert np.all(project_to_level(CoefficientVector.zeros(dic), 2).beta == 0)
    # ellipsoid member with smoothness 3 sized so that Cauchy-Schwarz caps the norm at C
    alpha, C = 3.0, 1.0
    levels = dic.levels
    counts = np.bincount(levels)
    cs = math.sqrt(np.sum(counts * 2.0 ** ((3 - 2 * alpha) * np.arange(len(counts)))))
    xi = C / (SPEC.L * cs)
    raw = rng.standard_normal(dic.size)
    raw *= xi / math.sqrt(np.sum(2.0 ** (2 * alpha * levels) * raw**2))
    member = CoefficientVector(raw, dic)
    for M in range(5):
        assert besov_norm(project_to_level(member, M)) <= C


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 2), st.integers(0, 2), st.integers(1, 3))
def test_weights_follow_level_formula(d, M, N):
    if dictionary_size(d, M, N) > 5000:
        return
    dic = WaveletDictionary(d, M, N, SPEC)
    expected = [SPEC.L**d * 2.0 ** (l.l1 * (d / 2 + 1)) for l in dic.indices]
    assert np.allclose(dic.weights, expected)
