import numpy as np
import pytest

from QLame.difference_operator import CoefficientFn, DifferenceOperator, SampleSet
from QLame.elliptic import ell_fact, ell_num
from QLame.errors import DegenerateParameterError, DomainError
from QLame import family
from QLame.family import (
    coeff_A,
    expected_degree_length,
    generic_labels,
    leading_constant,
    make_L,
    make_M,
    make_N,
)


def _labels(md, m, count, seed=11):
    return generic_labels(md, m, count, np.random.default_rng(seed))


def test_L_coefficients(modular_data):
    L = make_L(2, modular_data)
    x = 0.7 + 0.4j
    assert L.coefficient(1)(x) == pytest.approx(ell_num(x - 2, modular_data) / ell_num(x, modular_data))
    assert L.coefficient(-1)(x) == pytest.approx(ell_num(x + 2, modular_data) / ell_num(x, modular_data))
    with pytest.raises(DomainError):
        make_L(-1, modular_data)


def test_m_zero_is_free_case(modular_data, samples_for):
    L = make_L(0, modular_data)
    assert sorted(s.real for s in L.shifts) == [-1.0, 1.0]
    assert L.coefficient(1)(0.3) == 1
    M = make_M(0.4 + 0.2j, 0, modular_data)
    assert M.shifts == (0.4 + 0.2j,)
    assert M.coefficient(0.4 + 0.2j)(1.7) == pytest.approx(1.0)
    samples = samples_for(L)
    assert make_N(0, modular_data).equal_on(
        DifferenceOperator.shift(1) - DifferenceOperator.shift(-1), samples, 1e-12
    )


def test_scalar_and_lame_members(modular_data, m):
    assert family.verify_scalar_identity(m, modular_data, tol=1e-10)
    assert family.verify_lame_identity(m, modular_data, tol=1e-10)


def test_lame_member_needs_positive_m(modular_data):
    with pytest.raises(DomainError):
        family.verify_lame_identity(0, modular_data)


def test_scalar_member_constant(modular_data):
    M = make_M(2, 2, modular_data)
    assert len(M) == 1
    expected = ell_fact(4, modular_data) / ell_fact(2, modular_data)
    assert M.coefficient(0)(0.37 + 0.1j) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("l", [-3, -2, -1, 0, 1, 2, 3, 4])
def test_degree_length_of_integer_labels(modular_data, l):
    m = 2
    M = make_M(l, m, modular_data)
    assert (round(M.degree, 9), round(M.length, 9)) == expected_degree_length(l, m)


def test_N_structure(modular_data, lame_samples, m):
    N = make_N(m, modular_data)
    assert N.degree == pytest.approx(2 * m + 1)
    assert N.length == pytest.approx(4 * m + 2)
    assert N.conj_S().equal_on(-N, lame_samples, 1e-10)


def test_L_involutions(modular_data, lame_samples, m):
    L = make_L(m, modular_data)
    assert L.conj_S().equal_on(L, lame_samples, 1e-10)
    assert L.conj_U().equal_on(-L, lame_samples, 1e-12)


def test_commutation_integer_labels(modular_data, m):
    for l in range(-m - 1, m + 2):
        assert family.verify_commutation(l, m, modular_data, tol=1e-8), l


def test_commutation_complex_labels(modular_data, m):
    for l in _labels(modular_data, m, 3):
        report = family.verify_commutation(l, m, modular_data, tol=1e-8)
        assert report, (l, report.residual)


def test_commutation_coefficient_form(modular_data, m):
    for l in _labels(modular_data, m, 2, seed=5):
        assert family.commutation_coefficient_residual(l, m, modular_data) < 1e-8


def test_pair_commutation(modular_data):
    m = 2
    l, k, j, i = _labels(modular_data, m, 4, seed=3)
    assert family.verify_pair_commutation(l, k, m, modular_data, tol=1e-8)
    assert family.verify_pair_commutation(j, i, m, modular_data, tol=1e-8)


def test_perturbed_operator_fails_commutation(modular_data):
    m = 2
    l = _labels(modular_data, m, 1, seed=9)[0]
    M = make_M(l, m, modular_data)
    terms = M.terms
    shift, coeff = terms[0]
    perturbed = DifferenceOperator(
        [(shift, CoefficientFn(fn=lambda x: (1 + 1e-3) * coeff(x), expr="perturbed", poles=coeff.poles))]
        + terms[1:]
    )
    L = make_L(m, modular_data)
    samples = SampleSet.generate(modular_data, 50, 0, operators=[L @ perturbed, perturbed @ L])
    report = (L @ perturbed).equal_on(perturbed @ L, samples, 1e-8)
    assert not report
    assert report.residual > 1e-6


def test_recurrence_and_omega_shift(modular_data, m):
    for l in _labels(modular_data, m, 3, seed=21):
        assert family.verify_recurrence(l, m, modular_data, tol=1e-8)
        assert family.verify_omega_shift(l, m, modular_data, tol=1e-8)


def test_recurrence_rejects_degenerate_label(modular_data):
    with pytest.raises(DegenerateParameterError):
        family.verify_recurrence(modular_data.omega, 1, modular_data)


def test_product_rule(modular_data, m):
    labels = _labels(modular_data, m, 4, seed=17)
    for l, k in zip(labels[0::2], labels[1::2]):
        assert family.verify_product_rule(l, k, m, modular_data, tol=1e-8)


def test_phi_factorization(modular_data, m):
    assert family.verify_phi_factorization(m, modular_data, tol=1e-10)


def test_leading_coefficient_and_symmetry(modular_data, m):
    for l in _labels(modular_data, m, 2, seed=29):
        assert family.verify_leading_coefficient(l, m, modular_data, tol=1e-10)
        assert family.coefficient_symmetry_residual(l, m, modular_data) < 1e-10


def test_leading_constant_ratio(modular_data):
    m, l = 2, 0.61 + 0.27j
    ratio = leading_constant(l, m, modular_data) / leading_constant(l + 1, m, modular_data)
    expected = ell_num(l - m, modular_data) / ell_num(l, modular_data)
    assert ratio == pytest.approx(expected, rel=1e-12)


def test_coeff_A_index_range(modular_data):
    with pytest.raises(DomainError):
        coeff_A(0.5, 3, 2, modular_data)


def test_generic_labels_are_deterministic(modular_data):
    a = _labels(modular_data, 2, 5, seed=1)
    b = _labels(modular_data, 2, 5, seed=1)
    assert a == b
    for l in a:
        assert min(abs(ell_num(v, modular_data)) for v in (l, l - 2, l + 2)) >= 0.05


def test_S_conjugation_negates_the_label(modular_data, samples_for):
    M = make_M(2.3, 1, modular_data)
    expected = make_M(-2.3, 1, modular_data)
    conjugated = M.conj_S()
    assert conjugated.equal_on(expected, samples_for(conjugated, expected), 1e-10)


def test_U_conjugation_multiplies_by_a_phase(modular_data, samples_for):
    l, m = 2.3, 1
    M = make_M(l, m, modular_data)
    expected = M * np.exp(-1j * np.pi * (l - m))
    conjugated = M.conj_U()
    assert conjugated.equal_on(expected, samples_for(conjugated, expected), 1e-10)
    assert not conjugated.equal_on(M, samples_for(conjugated, M), 1e-10)


@pytest.mark.parametrize("m", [1, 2])
def test_N_is_difference_of_extreme_members(modular_data, samples_for, m):
    N = make_N(m, modular_data)
    difference = make_M(m + 1, m, modular_data) - make_M(-m - 1, m, modular_data)
    assert N.equal_on(difference, samples_for(N, difference), 1e-10)


def test_coefficients_of_scalar_member(modular_data):
    x = np.array([0.37 + 0.1j, 1.2 - 0.3j, -0.8 + 0.45j])
    np.testing.assert_array_equal(coeff_A(2, 1, 2, modular_data)(x), 0.0)
    np.testing.assert_array_equal(coeff_A(2, 2, 2, modular_data)(x), 0.0)
    expected = ell_fact(4, modular_data) / ell_fact(2, modular_data)
    np.testing.assert_allclose(coeff_A(2, 0, 2, modular_data)(x), expected, rtol=1e-12)


def test_perturbed_commutation_residual(modular_data):
    l = _labels(modular_data, 1, 1, seed=9)[0]
    assert family.perturbed_commutation_residual(l, 1, modular_data) > 1e-6
    assert family.perturbed_commutation_residual(0.4 + 0.2j, 0, modular_data) < 1e-12
