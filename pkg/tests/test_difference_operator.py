import numpy as np
import pytest

from QLame.difference_operator import CoefficientFn, DifferenceOperator, SampleSet
from QLame.elliptic import ell_num, lattice_distance
from QLame.errors import ComplexShiftError, PoleProximityError
from QLame.family import make_L, make_M


def _poly(coeffs):
    return CoefficientFn(fn=lambda x: np.polyval(coeffs, x), expr=f"poly{coeffs}")


def test_shift_and_identity_act_on_functions():
    assert DifferenceOperator.shift(1).apply(lambda x: x**2, 2.0) == pytest.approx(9.0)
    assert DifferenceOperator.identity().apply(np.exp, 0.5) == pytest.approx(np.exp(0.5))
    x = np.array([0.1, 0.2 + 1j])
    np.testing.assert_allclose(DifferenceOperator.zero().apply(np.sin, x), 0.0)


def test_shifts_are_merged_and_cancelled_terms_pruned():
    op = DifferenceOperator([(1, _poly([1.0, 0.0])), (1 + 1e-12, _poly([2.0]))])
    assert len(op) == 1
    assert op.coefficient(1)(3.0) == pytest.approx(5.0)

    cancelled = DifferenceOperator.shift(2) - DifferenceOperator.shift(2)
    assert cancelled.is_zero()


def test_compose_matches_sequential_application():
    A = DifferenceOperator([(1, _poly([1.0, 1.0])), (-1, _poly([2.0]))])
    B = DifferenceOperator([(0, _poly([1.0, 0.0, 0.0])), (2, _poly([3.0]))])
    AB = A @ B
    f = lambda x: np.exp(0.3 * x) + x**3  # noqa: E731
    x = np.array([0.2, 1.1 - 0.4j, -0.7 + 0.2j])
    expected = A.apply(lambda y: B.apply(f, y), x)
    np.testing.assert_allclose(AB.apply(f, x), expected, rtol=1e-12)
    assert sorted(s.real for s in AB.shifts) == [-1.0, 1.0, 3.0]


def test_compose_is_associative(modular_data):
    rng = np.random.default_rng(4)

    def random_operator():
        shifts = rng.choice([-2, -1, 0, 1, 2], 2, replace=False)
        return DifferenceOperator(
            [(float(s), _poly(list(rng.normal(size=2) + 1j * rng.normal(size=2)))) for s in shifts]
        )

    for _ in range(3):
        A, B, C = random_operator(), random_operator(), random_operator()
        left, right = (A @ B) @ C, A @ (B @ C)
        samples = SampleSet.generate(modular_data, 20, seed=1, operators=[left, right])
        assert left.equal_on(right, samples, 1e-10)


def test_composition_with_family_members(modular_data):
    L, M = make_L(1, modular_data), make_M(0.6 + 0.1j, 1, modular_data)
    left, right = (L @ M) @ L, L @ (M @ L)
    samples = SampleSet.generate(modular_data, 20, seed=2, operators=[left, right])
    assert left.equal_on(right, samples, 1e-10)


def test_commutator_of_constant_coefficient_operators_vanishes():
    A = DifferenceOperator.shift(1) + DifferenceOperator.shift(-1) * 2.0
    B = DifferenceOperator.shift(0.5j) * 3.0
    assert A.commutator(B).is_zero()


def test_power_and_operator_arithmetic():
    T = DifferenceOperator.shift(1)
    cube = T.power(3)
    assert cube.shifts == (3 + 0j,)
    assert T.power(0).shifts == (0j,)
    with pytest.raises(ValueError):
        T.power(-1)
    combo = 2 * T - (-T)
    assert combo.apply(lambda x: x, 1.0) == pytest.approx(6.0)


def test_degree_and_length():
    op = DifferenceOperator.shift(-2) + DifferenceOperator.shift(3)
    assert op.degree == 3
    assert op.length == 5
    with pytest.raises(ComplexShiftError):
        DifferenceOperator.shift(1 + 1j).degree
    with pytest.raises(ValueError):
        DifferenceOperator.zero().length


def test_conjugations():
    op = DifferenceOperator([(1, _poly([1.0, 2.0])), (-2, _poly([5.0]))])
    S = op.conj_S()
    assert set(S.shifts) == {-1 + 0j, 2 + 0j}
    assert S.coefficient(-1)(0.5) == pytest.approx(op.coefficient(1)(-0.5))
    U = DifferenceOperator.shift(1).conj_U()
    assert U.coefficient(1)(0.0) == pytest.approx(-1.0)
    assert U.conj_U(inverse=True).coefficient(1)(0.0) == pytest.approx(1.0)


def test_equal_on_reports_mismatch(modular_data):
    samples = SampleSet.generate(modular_data, 20, seed=3)
    a = DifferenceOperator.shift(1) + DifferenceOperator.shift(-1)
    b = DifferenceOperator.shift(1)
    report = a.equal_on(b, samples, 1e-10)
    assert not report
    assert report.mismatched_shift == -1
    assert a.equal_on(a * (1 + 1e-14), samples, 1e-10)


def test_apply_raises_near_a_pole(modular_data):
    L = make_L(1, modular_data)
    with pytest.raises(PoleProximityError):
        L.apply(lambda x: np.ones_like(x), 0j)


def test_overflow_guard_fires_for_two_term_operator(modular_data):
    L = make_L(1, modular_data)
    one = lambda x: np.ones_like(x)  # noqa: E731
    with pytest.raises(PoleProximityError):
        L.apply(one, 1e-14 + 0j)
    with pytest.raises(PoleProximityError):
        L.apply(one, np.array([0.7 + 0.2j, modular_data.omega + 1e-14]))
    assert np.isfinite(L.apply(one, 1e-4 + 0j))


def test_poles_propagate_through_composition(modular_data):
    L = make_L(1, modular_data)
    LL = L @ L
    assert any(abs(p) < 1e-12 for p in LL.poles)
    assert any(abs(p + 1) < 1e-12 for p in LL.poles)
    assert any(abs(p - 1) < 1e-12 for p in LL.poles)


def test_sample_set_avoids_poles(modular_data):
    M = make_M(0.3 + 0.1j, 2, modular_data)
    samples = SampleSet.generate(modular_data, 40, seed=7, operators=[M], avoid=[2.5])
    assert len(samples) == 40
    for pole in list(M.poles) + [2.5]:
        assert np.min(lattice_distance(samples.points - pole, modular_data)) > samples.guard
    again = SampleSet.generate(modular_data, 40, seed=7, operators=[M], avoid=[2.5])
    np.testing.assert_array_equal(samples.points, again.points)


def test_coefficients_are_evaluated_together(modular_data):
    L = make_L(2, modular_data)
    x = np.array([0.37 + 0.2j, 1.3 - 0.5j])
    values = L.coefficients(x)
    assert values.shape == (2, 2)
    forward = ell_num(x - 2, modular_data) / ell_num(x, modular_data)
    np.testing.assert_allclose(values[list(L.shifts).index(1)], forward, rtol=1e-13)
