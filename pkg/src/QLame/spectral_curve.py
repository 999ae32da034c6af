"""
The spectral curve Y^2 = P(X^2) of the commuting pair (L, N).

Curve points come from Bethe solutions: X = eps_L and Y = eps_N. P has
degree 2m+1 and is fitted by least squares; the operator identity
N o N = P(L o L) is then checked coefficient-wise.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from QLame.backend import AbstractBackend, NumpyBackend
from QLame.bethe import BethePoint, BetheSolver, eps_L, eps_N
from QLame.difference_operator import DifferenceOperator, EqualityReport, SampleSet
from QLame.elliptic import ModularData
from QLame.errors import (
    InsufficientSamplesError,
    PoleProximityError,
    RankDeficiencyError,
)
from QLame.family import make_L, make_N

logger = logging.getLogger(__name__)

DEFAULT_C_WINDOW = (0.3 + 0.0j, 0.8 + 2.0j)
ALTERNATE_C_WINDOW = (1.0 + 0.5j, 1.5 + 2.5j)
MAX_CONDITION = 1e10
DUPLICATE_FRACTION = 1e-6
LEVERAGE_PERCENTILE = 95
VALIDATION_EVERY = 5
VALIDATION_OFFSET = 2
NORMALIZATION = "N = M_{m+1} - M_{-m-1}, no extra constant"


@dataclass(frozen=True)
class SpectralSample:
    X: complex
    Y: complex
    source: Optional[BethePoint] = field(default=None, repr=False, compare=False)
    partner: bool = False
    shifted: bool = False


@dataclass(frozen=True)
class SpectralFit:
    """
    Coefficients of P (constant term first) and the fit diagnostics.
    """

    m: int
    coeffs: np.ndarray
    fit_residual: float
    validation_residual: float
    cond_estimate: float
    md: ModularData = field(repr=False)
    discriminant_abs: float = float("nan")
    backend: str = "numpy"
    n_train: int = 0
    n_validation: int = 0
    normalization: str = NORMALIZATION

    def __call__(self, s):
        """P(s), by Horner."""
        return np.polyval(self.coeffs[::-1], np.asarray(s, dtype=complex))

    @property
    def degree_ok(self) -> bool:
        moduli = np.abs(self.coeffs)
        return bool(moduli[-1] > 1e-8 * moduli.max())

    @property
    def normalized_coeffs(self) -> np.ndarray:
        return self.coeffs / self.coeffs[-1]

    def residuals(self, samples: Sequence[SpectralSample]) -> np.ndarray:
        X = np.array([s.X for s in samples], dtype=complex)
        Y = np.array([s.Y for s in samples], dtype=complex)
        return relative_residuals(self.coeffs, X, Y)

    def with_coeffs(self, coeffs: Sequence[complex]) -> SpectralFit:
        """A copy carrying other coefficients; diagnostics are kept as they were."""
        return SpectralFit(
            self.m,
            np.asarray(coeffs, dtype=complex),
            self.fit_residual,
            self.validation_residual,
            self.cond_estimate,
            self.md,
            self.discriminant_abs,
            self.backend,
            self.n_train,
            self.n_validation,
        )


def relative_residuals(coeffs: np.ndarray, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """|Y^2 - P(X^2)| / max(|Y^2|, sum_k |p_k| |X^2|^k)."""
    s = X**2
    P = np.polyval(coeffs[::-1], s)
    scale = np.polyval(np.abs(coeffs[::-1]), np.abs(s))
    scale = np.maximum(scale, np.abs(Y**2))
    return np.abs(Y**2 - P) / scale


def discriminant_abs(coeffs: np.ndarray) -> float:
    """|disc(P)| = |p_n|^{2n-2} prod_{i<j} |r_i - r_j|^2."""
    coeffs = np.trim_zeros(np.asarray(coeffs, dtype=complex), "b")
    n = len(coeffs) - 1
    if n < 1:
        return float("nan")
    if n == 1:
        return 1.0
    roots = np.roots(coeffs[::-1])
    product = 1.0
    for i in range(n):
        for j in range(i + 1, n):
            product *= abs(roots[i] - roots[j]) ** 2
    return float(abs(coeffs[-1]) ** (2 * n - 2) * product)


def _group_labels(values: np.ndarray) -> np.ndarray:
    """Group ids of equal values (to DUPLICATE_FRACTION of the spread), in order of appearance."""
    labels = np.zeros(values.size, dtype=int)
    if values.size == 0:
        return labels
    spread = float(np.max(np.abs(values - values[0]))) or 1.0
    kept: list[complex] = []
    for i, v in enumerate(values):
        for group, k in enumerate(kept):
            if abs(v - k) <= DUPLICATE_FRACTION * spread:
                labels[i] = group
                break
        else:
            labels[i] = len(kept)
            kept.append(v)
    return labels


def _count_distinct(values: np.ndarray) -> int:
    return int(_group_labels(values).max()) + 1 if values.size else 0


def collect_samples(
    m: int,
    md: ModularData,
    count: int = 40,
    c_window: tuple[complex, complex] = DEFAULT_C_WINDOW,
    seed: int = 0,
    include_shifted: bool = False,
    start: Optional[BethePoint] = None,
) -> list[SpectralSample]:
    """
    Curve samples along a straight c-path through ``c_window``.

    ceil(count/2) path points are traced; every point contributes (X, Y)
    and its partner (-t, -c) contributes (X, -Y). With ``include_shifted``
    the points (t, c + pi i / gamma), giving (-X, -Y), are added as well.

    Raises
    ------
    InsufficientSamplesError
        If fewer than 2m+4 distinct values of X^2 were found.
    """
    n_path = max(1, math.ceil(count / 2))
    c_path = np.linspace(complex(c_window[0]), complex(c_window[1]), n_path)
    points = BetheSolver(m, md, seed=seed).trace_curve(c_path, start=start)

    samples: list[SpectralSample] = []
    for point in points:
        sources = [(point, False, False), (point.partner(), True, False)]
        if include_shifted:
            sources.append((point.shift_c(), False, True))
        for source, is_partner, is_shifted in sources:
            try:
                X = eps_L(source.t, source.c, m, md)
                Y = eps_N(source.t, source.c, m, md)
            except PoleProximityError:
                logger.warning("skipped curve point near a pole of eps: c=%s", source.c)
                continue
            samples.append(SpectralSample(X, Y, source, is_partner, is_shifted))

    needed = 2 * m + 4
    distinct = _count_distinct(np.array([s.X**2 for s in samples], dtype=complex))
    if distinct < needed:
        raise InsufficientSamplesError(
            f"found {distinct} distinct X^2 values, need at least {needed}"
        )
    logger.info("collected %d curve samples (%d distinct X^2)", len(samples), distinct)
    return samples


def _scaled_vandermonde(s: np.ndarray, degree: int) -> tuple[np.ndarray, np.ndarray]:
    V = np.vander(s, degree + 1, increasing=True)
    norms = np.linalg.norm(V, axis=0)
    norms[norms == 0] = 1.0
    return V / norms, norms


def _split(s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Hold out every fifth group of equal X^2. A point, its partner and its
    shifted image share X^2 and so always land on the same side.
    """
    index = np.arange(s.size)
    validation = _group_labels(s) % VALIDATION_EVERY == VALIDATION_OFFSET
    return index[~validation], index[validation]


def fit_P(
    samples: Sequence[SpectralSample],
    m: int,
    md: Optional[ModularData] = None,
    backend: Optional[AbstractBackend] = None,
) -> SpectralFit:
    """
    Least-squares fit of Y^2 = sum_{k=0}^{2m+1} p_k (X^2)^k.

    Samples with |X| above the 95th percentile are dropped. Of the rest, every
    fifth group of samples sharing X^2 is held out for validation.

    Raises
    ------
    InsufficientSamplesError
        Fewer than 2m+4 samples.
    RankDeficiencyError
        Fewer than 2m+4 distinct X^2 values, or a column-scaled Vandermonde
        condition number above 1e10.
    """
    backend = backend or NumpyBackend()
    degree = 2 * m + 1
    needed = 2 * m + 4
    if len(samples) < needed:
        raise InsufficientSamplesError(f"got {len(samples)} samples, need {needed}")

    X = np.array([s.X for s in samples], dtype=complex)
    Y = np.array([s.Y for s in samples], dtype=complex)
    keep = np.abs(X) <= np.percentile(np.abs(X), LEVERAGE_PERCENTILE)
    X, Y = X[keep], Y[keep]
    s = X**2

    if _count_distinct(s) < needed:
        raise RankDeficiencyError("duplicate X^2 values leave too few distinct samples")

    train, validation = _split(s)
    A, norms = _scaled_vandermonde(s[train], degree)
    cond = float(np.linalg.cond(A))
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise RankDeficiencyError(f"Vandermonde condition estimate {cond:.2e} exceeds 1e10")

    result = backend.lstsq(A, Y[train] ** 2)
    coeffs = np.asarray(result.coeffs, dtype=complex) / norms

    fit_residual = float(np.max(relative_residuals(coeffs, X[train], Y[train])))
    validation_residual = (
        float(np.max(relative_residuals(coeffs, X[validation], Y[validation])))
        if validation.size
        else float("nan")
    )
    fit = SpectralFit(
        m=m,
        coeffs=coeffs,
        fit_residual=fit_residual,
        validation_residual=validation_residual,
        cond_estimate=cond,
        md=md if md is not None else _md_of(samples),
        discriminant_abs=discriminant_abs(coeffs),
        backend=backend.name,
        n_train=int(train.size),
        n_validation=int(validation.size),
    )
    logger.info(
        "fitted P of degree %d: fit %.2e, validation %.2e, cond %.2e",
        degree,
        fit_residual,
        validation_residual,
        cond,
    )
    return fit


def _md_of(samples: Sequence[SpectralSample]) -> ModularData:
    for sample in samples:
        if sample.source is not None:
            return sample.source.md
    return ModularData()


@dataclass(frozen=True)
class ParityFit:
    coeffs: np.ndarray
    odd_ratio: float
    cond_estimate: float


def fit_Q(
    samples: Sequence[SpectralSample],
    m: int,
    backend: Optional[AbstractBackend] = None,
) -> ParityFit:
    """
    Fit Y^2 = Q(X) with Q of degree 4m+2 in X and report the size of the odd
    coefficients relative to the even ones (both weighted by max|X|^k).

    Only path samples enter the fit: shifted samples mirror X to -X with the
    same Y^2, partners repeat X.
    """
    backend = backend or NumpyBackend()
    degree = 4 * m + 2
    path = [s for s in samples if not s.shifted and not s.partner]
    X = np.array([s.X for s in path], dtype=complex)
    Y = np.array([s.Y for s in path], dtype=complex)
    if _count_distinct(X) < degree + 1:
        raise RankDeficiencyError("too few distinct X values for the parity fit")
    A, norms = _scaled_vandermonde(X, degree)
    cond = float(np.linalg.cond(A))
    coeffs = np.asarray(backend.lstsq(A, Y**2).coeffs, dtype=complex) / norms
    weights = np.abs(coeffs) * np.max(np.abs(X)) ** np.arange(degree + 1)
    odd, even = weights[1::2], weights[0::2]
    return ParityFit(coeffs, float(odd.max() / even.max()), cond)


def compare_fits(a: SpectralFit, b: SpectralFit) -> float:
    """Largest difference of leading-normalized coefficients, relative to their size."""
    na, nb = a.normalized_coeffs, b.normalized_coeffs
    return float(np.max(np.abs(na - nb)) / max(1.0, float(np.max(np.abs(na)))))


def polynomial_in(op: DifferenceOperator, coeffs: Sequence[complex]) -> DifferenceOperator:
    """sum_k coeffs[k] op^k, powers built incrementally."""
    result = DifferenceOperator.zero()
    power = DifferenceOperator.identity()
    for k, p in enumerate(coeffs):
        if k:
            power = op @ power
        if p != 0:
            result = result + power * p
    return result


def verify_operator_relation(
    fit: SpectralFit,
    m: int,
    md: ModularData,
    samples: Optional[SampleSet] = None,
    tol: float = 1e-6,
    seed: int = 0,
) -> EqualityReport:
    """N o N and P(L o L) agree coefficient-wise."""
    L = make_L(m, md)
    N = make_N(m, md)
    lhs = N @ N
    rhs = polynomial_in(L @ L, fit.coeffs)
    if samples is None:
        samples = SampleSet.generate(md, 50, seed, operators=[lhs, rhs])
    return lhs.equal_on(rhs, samples, tol)


@dataclass(frozen=True)
class InvolutionReport:
    passed: bool
    residual: float
    tolerance: float
    components: dict[str, float]

    def __bool__(self) -> bool:
        return self.passed


def verify_involutions(
    m: int,
    md: ModularData,
    samples: Optional[SampleSet] = None,
    tol: float = 1e-8,
    seed: int = 0,
    fit: Optional[SpectralFit] = None,
    curve_samples: Sequence[SpectralSample] = (),
    curve_tol: float = 1e-6,
) -> InvolutionReport:
    """
    S and U act on (L, N) as (X, Y) -> (X, -Y) and (X, Y) -> (-X, -Y):
    S L S = L, S N S = -N, U L U^-1 = -L and U N^2 U^-1 = N^2. Given a fit
    and curve samples, each sample and its mirror (X, -Y) must lie on the
    fitted curve.
    """
    L = make_L(m, md)
    N = make_N(m, md)
    NN = N @ N
    if samples is None:
        samples = SampleSet.generate(md, 50, seed, operators=[L, N, NN])
    checks = {
        "S(L)=L": L.conj_S().equal_on(L, samples, tol),
        "S(N)=-N": N.conj_S().equal_on(-N, samples, tol),
        "U(L)=-L": L.conj_U().equal_on(-L, samples, tol),
        "U(N^2)=N^2": NN.conj_U().equal_on(NN, samples, tol),
    }
    components = {name: report.residual for name, report in checks.items()}
    passed = all(report.passed for report in checks.values())

    if fit is not None and curve_samples:
        mirrored = [SpectralSample(s.X, -s.Y) for s in curve_samples]
        curve_residual = float(
            max(np.max(fit.residuals(curve_samples)), np.max(fit.residuals(mirrored)))
        )
        components["(X,-Y) on curve"] = curve_residual
        passed = passed and curve_residual < curve_tol

    residual = max(components.values())
    return InvolutionReport(passed, residual, tol, components)
