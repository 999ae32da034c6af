import numpy as np
import pytest

from QLame.backend import CvxpyBackend, NumpyBackend, make_backend
from QLame.elliptic import ModularData
from QLame.errors import InsufficientSamplesError, RankDeficiencyError
from QLame.family import make_L
from QLame.spectral_curve import (
    ALTERNATE_C_WINDOW,
    SpectralFit,
    SpectralSample,
    _split,
    collect_samples,
    compare_fits,
    discriminant_abs,
    fit_P,
    fit_Q,
    polynomial_in,
    relative_residuals,
    verify_involutions,
    verify_operator_relation,
)

CUBIC = np.array([0.7 - 0.2j, -1.3 + 0.4j, 0.25 + 0.1j, 1.0 + 0.0j])


def _synthetic_samples(coeffs, count=40, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.uniform(0.5, 2.0, count) * np.exp(1j * rng.uniform(-0.6, 0.6, count))
    Y = np.sqrt(np.polyval(coeffs[::-1], X**2))
    return [SpectralSample(x, y) for x, y in zip(X, Y)] + [SpectralSample(x, -y, partner=True) for x, y in zip(X, Y)]


def _fit(coeffs, m, md):
    return SpectralFit(m, np.asarray(coeffs, dtype=complex), 0.0, 0.0, 1.0, md)


def test_fit_recovers_known_polynomial(modular_data):
    fit = fit_P(_synthetic_samples(CUBIC), 1, modular_data)
    np.testing.assert_allclose(fit.coeffs, CUBIC, atol=1e-8)
    assert fit.degree_ok
    assert fit.validation_residual < 1e-10
    assert fit.n_validation > 0
    assert fit.backend == "numpy"


def test_fit_with_cvxpy_backend(modular_data):
    fit = fit_P(_synthetic_samples(CUBIC), 1, modular_data, backend=make_backend("cvxpy"))
    assert fit.backend == "cvxpy"
    np.testing.assert_allclose(fit.coeffs, CUBIC, atol=1e-4)


def test_backends_agree_on_small_problem():
    A = np.array([[1.0, 0.0], [1.0, 1.0], [1.0, 2.0 + 1j]])
    b = np.array([1.0, 2.0, 3.5 + 0.5j])
    a = NumpyBackend().lstsq(A, b)
    c = CvxpyBackend().lstsq(A, b)
    np.testing.assert_allclose(a.coeffs, c.coeffs, atol=1e-5)
    with pytest.raises(ValueError):
        make_backend("highs")


def test_fit_requires_enough_samples(modular_data):
    with pytest.raises(InsufficientSamplesError):
        fit_P(_synthetic_samples(CUBIC)[:5], 1, modular_data)


def test_fit_rejects_repeated_abscissae(modular_data):
    samples = [SpectralSample(x, 1.0) for x in (1.0, 2.0, -1.0, -2.0) * 10]
    with pytest.raises(RankDeficiencyError):
        fit_P(samples, 1, modular_data)


def test_relative_residuals_and_discriminant():
    X = np.array([1.0, 2.0 + 0.5j])
    Y = np.sqrt(np.polyval(CUBIC[::-1], X**2))
    assert np.max(relative_residuals(CUBIC, X, Y)) < 1e-14
    assert np.max(relative_residuals(CUBIC, X, 1.1 * Y)) > 0.03
    assert discriminant_abs(np.array([2.0, -3.0, 1.0])) == pytest.approx(1.0)
    assert discriminant_abs(np.array([1.0, -2.0, 1.0])) < 1e-12


def _path_samples(y2, count=20, seed=1):
    """Samples laid out as collect_samples does: point, partner, shifted image."""
    rng = np.random.default_rng(seed)
    X = rng.uniform(0.5, 2.0, count) * np.exp(1j * rng.uniform(-0.6, 0.6, count))
    samples = []
    for x in X:
        y = np.sqrt(y2(x))
        samples += [
            SpectralSample(x, y),
            SpectralSample(x, -y, partner=True),
            SpectralSample(-x, -y, shifted=True),
        ]
    return samples


def _even_curve(x):
    return np.polyval(CUBIC[::-1], x**2)


def test_parity_of_even_curve():
    parity = fit_Q(_path_samples(_even_curve), 1)
    assert parity.odd_ratio < 1e-8


def test_parity_detects_odd_terms_despite_mirrored_samples():
    parity = fit_Q(_path_samples(lambda x: 1 + x + x**2 + x**3), 1)
    assert parity.odd_ratio > 0.1


def test_validation_split_keeps_equal_abscissae_together():
    samples = _path_samples(_even_curve, count=30)
    s = np.array([sample.X**2 for sample in samples])
    train, validation = _split(s)
    assert validation.size > 0
    assert validation.size % 3 == 0
    gap = np.min(np.abs(s[validation][:, None] - s[train][None, :]))
    assert gap > 1e-6


def test_fit_on_path_samples_holds_out_whole_groups(modular_data):
    fit = fit_P(_path_samples(_even_curve, count=30), 1, modular_data)
    np.testing.assert_allclose(fit.coeffs, CUBIC, atol=1e-8)
    assert fit.n_validation > 0
    assert fit.n_validation % 3 == 0
    assert fit.validation_residual < 1e-10


def test_compare_fits(modular_data):
    a = _fit(CUBIC, 1, modular_data)
    assert compare_fits(a, a.with_coeffs(2 * CUBIC)) < 1e-15
    assert compare_fits(a, a.with_coeffs(CUBIC + np.array([0.1, 0, 0, 0]))) > 1e-2


def test_polynomial_in_operator(modular_data):
    L = make_L(1, modular_data)
    op = polynomial_in(L, [2.0, 0.0, 1.0])
    x = np.array([0.37 + 0.21j, 1.9 - 0.4j])
    f = lambda y: np.exp(0.2 * y)  # noqa: E731
    expected = 2.0 * f(x) + L.apply(lambda y: L.apply(f, y), x)
    np.testing.assert_allclose(op.apply(f, x), expected, rtol=1e-12)


def test_free_case_relation(modular_data):
    fit = _fit([-4.0, 1.0], 0, modular_data)
    assert verify_operator_relation(fit, 0, modular_data, tol=1e-12)
    assert not verify_operator_relation(fit.with_coeffs([-3.9, 1.0]), 0, modular_data, tol=1e-6)


@pytest.mark.parametrize("m", [1, 2])
def test_operator_involutions(modular_data, m):
    report = verify_involutions(m, modular_data, tol=1e-8)
    assert report, report.components
    assert set(report.components) == {"S(L)=L", "S(N)=-N", "U(L)=-L", "U(N^2)=N^2"}


def test_free_case_curve(modular_data):
    samples = collect_samples(0, modular_data, count=20)
    assert len(samples) == 20
    assert sum(s.partner for s in samples) == 10
    fit = fit_P(samples, 0, modular_data)
    np.testing.assert_allclose(fit.coeffs, [-4.0, 1.0], atol=1e-8)
    assert verify_operator_relation(fit, 0, modular_data, tol=1e-8)


def test_collect_samples_reports_too_few(modular_data):
    with pytest.raises(InsufficientSamplesError):
        collect_samples(0, modular_data, count=2)


@pytest.mark.slow
def test_curve_for_one_root(modular_data):
    md = modular_data
    samples = collect_samples(1, md, count=40, include_shifted=True)
    fit = fit_P([s for s in samples if not s.shifted], 1, md)
    assert len(fit.coeffs) == 4
    assert fit.degree_ok
    assert fit.validation_residual < 1e-6
    assert verify_operator_relation(fit, 1, md, tol=1e-6)
    assert fit_Q(samples, 1).odd_ratio < 1e-8
    assert verify_involutions(1, md, fit=fit, curve_samples=samples)

    other = fit_P(collect_samples(1, md, count=40, c_window=ALTERNATE_C_WINDOW), 1, md)
    assert compare_fits(fit, other) < 1e-5


@pytest.mark.slow
def test_curve_for_two_roots(modular_data):
    md = modular_data
    fit = fit_P(collect_samples(2, md, count=40), 2, md)
    assert len(fit.coeffs) == 6
    assert fit.degree_ok
    assert fit.validation_residual < 1e-6
    assert verify_operator_relation(fit, 2, md, tol=1e-5)


@pytest.mark.slow
def test_curve_samples_are_deterministic():
    md = ModularData()
    a = collect_samples(1, md, count=12, seed=3)
    b = collect_samples(1, md, count=12, seed=3)
    assert [(s.X, s.Y) for s in a] == [(s.X, s.Y) for s in b]
