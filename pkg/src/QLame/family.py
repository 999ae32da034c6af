"""
The q-Lame operator L, the commuting family M_l and the antisymmetric
generator N, together with numerical certificates of their identities.

All operators act on functions of x, where the lattice of [x] is spanned by
omega = 1/gamma and omega' = tau/gamma and T_j f(x) = f(x + j).
"""

from __future__ import annotations

import logging
from typing import Iterable, Optional, Sequence

import numpy as np

from QLame.difference_operator import (
    CoefficientFn,
    DifferenceOperator,
    EqualityReport,
    SampleSet,
)
from QLame.elliptic import (
    GUARD,
    ModularData,
    ell_binom,
    ell_fact,
    ell_num,
    ell_product,
    phi,
)
from QLame.errors import DegenerateParameterError, DomainError

logger = logging.getLogger(__name__)

OFFSET_TOL = 1e-12
LABEL_GUARD = 0.05
DEFAULT_SAMPLE_COUNT = 50


def _fmt_offset(a: complex) -> str:
    a = complex(a)
    if abs(a.imag) < OFFSET_TOL:
        return f"{a.real:+.6g}" if a.real != 0 else ""
    return f"+({a.real:.6g}{a.imag:+.6g}j)"


def _brackets(offsets: Sequence[complex]) -> str:
    return "*".join(f"[x{_fmt_offset(a)}]" for a in offsets) or "1"


def _cancel(
    numerator: list[complex], denominator: list[complex]
) -> tuple[list[complex], list[complex]]:
    """Remove offsets common to numerator and denominator (as multisets)."""
    denominator = list(denominator)
    kept = []
    for a in numerator:
        for i, b in enumerate(denominator):
            if abs(a - b) < OFFSET_TOL:
                del denominator[i]
                break
        else:
            kept.append(a)
    return kept, denominator


def make_L(m: int, md: ModularData) -> DifferenceOperator:
    """L = ([x-m]/[x]) T_1 + ([x+m]/[x]) T_-1."""
    if m < 0:
        raise DomainError(f"m must be nonnegative, got {m}")
    if m == 0:
        return DifferenceOperator.shift(1) + DifferenceOperator.shift(-1)
    forward = CoefficientFn(
        fn=lambda x: ell_num(x - m, md) / ell_num(x, md),
        expr=f"[x-{m}]/[x]",
        poles=(0j,),
    )
    backward = CoefficientFn(
        fn=lambda x: ell_num(x + m, md) / ell_num(x, md),
        expr=f"[x+{m}]/[x]",
        poles=(0j,),
    )
    return DifferenceOperator([(1, forward), (-1, backward)])


def coeff_A(l: complex, k: int, m: int, md: ModularData) -> CoefficientFn:
    """
    The coefficient A^l_{l-m+2k}(x) of M_l:

        (-1)^k [m atop k] prod_{j=0}^{m-k-1} [l+m-j][x+m-j] / [x+l+k-j]
                          prod_{j=0}^{k-1}   [l-m+j][x-m+j] / [x+l-m+k+j].

    Factors [x+a] common to numerator and denominator are cancelled before
    evaluation, so for l = m the k = 0 coefficient is an exact constant.
    """
    if not 0 <= k <= m:
        raise DomainError(f"coefficient index k must lie in 0..{m}, got {k}")
    l = complex(l)
    numerator = [complex(m - j) for j in range(m - k)] + [
        complex(-m + j) for j in range(k)
    ]
    denominator = [l + k - j for j in range(m - k)] + [
        l - m + k + j for j in range(k)
    ]
    numerator, denominator = _cancel(numerator, denominator)

    constant = (
        (-1) ** k
        * ell_binom(m, k, md)
        * ell_product(l, [m - j for j in range(m - k)], md)
        * ell_product(l, [-m + j for j in range(k)], md)
    )
    constant = complex(constant)

    def fn(x: np.ndarray) -> np.ndarray:
        return constant * ell_product(x, numerator, md) / ell_product(x, denominator, md)

    if denominator:
        expr = f"{constant:.6g}*{_brackets(numerator)}/({_brackets(denominator)})"
    else:
        expr = f"{constant:.6g}*{_brackets(numerator)}"
    return CoefficientFn(fn=fn, expr=expr, poles=tuple(-d for d in denominator))


def make_M(l: complex, m: int, md: ModularData) -> DifferenceOperator:
    """M_l = sum_{k=0}^{m} A^l_{l-m+2k}(x) T_{l-m+2k}, identically zero terms pruned."""
    if m < 0:
        raise DomainError(f"m must be nonnegative, got {m}")
    l = complex(l)
    return DifferenceOperator(
        [(l - m + 2 * k, coeff_A(l, k, m, md)) for k in range(m + 1)]
    )


def make_N(m: int, md: ModularData) -> DifferenceOperator:
    """N = M_{m+1} - S M_{m+1} S."""
    top = make_M(m + 1, m, md)
    return top - top.conj_S()


def leading_constant(l: complex, m: int, md: ModularData) -> complex:
    """
    The constant C_l with A^l_{l+m}(x) = C_l phi(x) / phi(x+l+m), namely
    (-1)^m prod_{j=0}^{m-1} [l-m+j].
    """
    return complex((-1) ** m * ell_product(complex(l), [-m + j for j in range(m)], md))


def expected_degree_length(l: int, m: int) -> tuple[int, int]:
    """
    Degree and length of M_l for an integer label.

    Labels in -m..m lose the coefficients killed by a vanishing factor
    [l-m+j] or [l+m-j]; the survivors span degree m-|l| and length 2(m-|l|).
    Outside that range all m+1 terms survive.
    """
    if -m <= l <= m:
        return m - abs(l), 2 * (m - abs(l))
    return l + m, 2 * m


def generic_labels(
    md: ModularData,
    m: int,
    count: int,
    rng: np.random.Generator,
    guard: float = LABEL_GUARD,
    complex_labels: bool = True,
) -> list[complex]:
    """
    Draw labels l away from the zeros of [l], [l-m] and [l+m].
    """
    labels: list[complex] = []
    while len(labels) < count:
        re = rng.uniform(-2.5, 2.5)
        im = rng.uniform(-0.6, 0.6) if complex_labels else 0.0
        l = complex(re, im)
        values = ell_num(np.array([l, l - m, l + m]), md)
        if np.min(np.abs(values)) < guard:
            logger.debug("rejected degenerate label %s", l)
            continue
        labels.append(l)
    return labels


def _samples(
    md: ModularData,
    operators: Iterable[DifferenceOperator],
    samples: Optional[SampleSet],
    seed: int,
    avoid: Iterable[complex] = (),
) -> SampleSet:
    if samples is not None:
        return samples
    return SampleSet.generate(
        md, DEFAULT_SAMPLE_COUNT, seed, operators=operators, avoid=avoid
    )


# ----------------------------------------------------------------------
# Verification of the family identities
# ----------------------------------------------------------------------
def verify_scalar_identity(
    m: int,
    md: ModularData,
    samples: Optional[SampleSet] = None,
    tol: float = 1e-10,
    seed: int = 0,
) -> EqualityReport:
    """M_m = ([2m]!/[m]!) Id."""
    lhs = make_M(m, m, md)
    rhs = DifferenceOperator.identity() * (ell_fact(2 * m, md) / ell_fact(m, md))
    return lhs.equal_on(rhs, _samples(md, [lhs], samples, seed), tol)


def verify_lame_identity(
    m: int,
    md: ModularData,
    samples: Optional[SampleSet] = None,
    tol: float = 1e-10,
    seed: int = 0,
) -> EqualityReport:
    """M_{m-1} = ([2m-1]!/[m-1]!) L, for m >= 1."""
    if m < 1:
        raise DomainError("M_{m-1} is proportional to L only for m >= 1")
    lhs = make_M(m - 1, m, md)
    L = make_L(m, md)
    rhs = L * (ell_fact(2 * m - 1, md) / ell_fact(m - 1, md))
    return lhs.equal_on(rhs, _samples(md, [lhs, L], samples, seed), tol)


def verify_commutation(
    l: complex,
    m: int,
    md: ModularData,
    samples: Optional[SampleSet] = None,
    tol: float = 1e-8,
    seed: int = 0,
) -> EqualityReport:
    """L M_l and M_l L agree coefficient-wise."""
    L = make_L(m, md)
    M = make_M(l, m, md)
    left, right = L @ M, M @ L
    return left.equal_on(right, _samples(md, [left, right], samples, seed), tol)


def verify_pair_commutation(
    l: complex,
    k: complex,
    m: int,
    md: ModularData,
    samples: Optional[SampleSet] = None,
    tol: float = 1e-8,
    seed: int = 0,
) -> EqualityReport:
    """M_l M_k and M_k M_l agree coefficient-wise."""
    Ml, Mk = make_M(l, m, md), make_M(k, m, md)
    left, right = Ml @ Mk, Mk @ Ml
    return left.equal_on(right, _samples(md, [left, right], samples, seed), tol)


def perturbed_commutation_residual(
    l: complex,
    m: int,
    md: ModularData,
    samples: Optional[SampleSet] = None,
    factor: complex = 1 + 1e-3,
    seed: int = 0,
) -> float:
    """
    Commutation residual of L with M_l after its first coefficient is scaled
    by ``factor``. For m >= 1 this must stay far above the commutation
    tolerance; for m = 0 every coefficient is constant and it vanishes.
    """
    (shift, coeff), *rest = make_M(l, m, md).terms
    scaled = CoefficientFn(fn=lambda x: factor * coeff(x), expr=f"perturbed {coeff.expr}", poles=coeff.poles)
    perturbed = DifferenceOperator([(shift, scaled), *rest])
    L = make_L(m, md)
    left, right = L @ perturbed, perturbed @ L
    return left.equal_on(right, _samples(md, [left, right], samples, seed), 1.0).residual


def verify_recurrence(
    l: complex,
    m: int,
    md: ModularData,
    samples: Optional[SampleSet] = None,
    tol: float = 1e-8,
    seed: int = 0,
) -> EqualityReport:
    """
    L M_l = ([l+m]/[l]) M_{l-1} + ([l-m]/[l]) M_{l+1}.

    Raises
    ------
    DegenerateParameterError
        If |[l]| falls below the guard radius.
    """
    l = complex(l)
    bracket_l = ell_num(l, md)
    if abs(bracket_l) < GUARD:
        raise DegenerateParameterError(f"[l] vanishes at l={l}")
    L = make_L(m, md)
    left = L @ make_M(l, m, md)
    right = make_M(l - 1, m, md) * (ell_num(l + m, md) / bracket_l) + make_M(
        l + 1, m, md
    ) * (ell_num(l - m, md) / bracket_l)
    return left.equal_on(right, _samples(md, [left, right], samples, seed), tol)


def verify_product_rule(
    l: complex,
    k: complex,
    m: int,
    md: ModularData,
    samples: Optional[SampleSet] = None,
    tol: float = 1e-8,
    seed: int = 0,
) -> EqualityReport:
    """M_l M_k = sum_j A^l_j(k) M_{k+j}, j running over l-m+2r."""
    l, k = complex(l), complex(k)
    left = make_M(l, m, md) @ make_M(k, m, md)
    right = DifferenceOperator.zero()
    for r in range(m + 1):
        weight = coeff_A(l, r, m, md)(k)
        right = right + make_M(k + l - m + 2 * r, m, md) * weight
    return left.equal_on(right, _samples(md, [left, right], samples, seed), tol)


def verify_omega_shift(
    l: complex,
    m: int,
    md: ModularData,
    samples: Optional[SampleSet] = None,
    tol: float = 1e-8,
    seed: int = 0,
) -> EqualityReport:
    """M_{l+omega} = M_l T_omega."""
    l = complex(l)
    left = make_M(l + md.omega, m, md)
    right = make_M(l, m, md) @ DifferenceOperator.shift(md.omega)
    return left.equal_on(right, _samples(md, [left, right], samples, seed), tol)


def verify_phi_factorization(
    m: int,
    md: ModularData,
    samples: Optional[SampleSet] = None,
    tol: float = 1e-10,
    seed: int = 0,
) -> EqualityReport:
    """L = phi(x) T_1 phi(x)^-1 + phi(-x) T_-1 phi(-x)^-1."""
    zeros_of_phi = tuple(complex(k - 1) for k in range(1, m + 1)) + tuple(
        complex(1 - k) for k in range(1, m + 1)
    )
    forward = CoefficientFn(
        fn=lambda x: phi(x, m, md) / phi(x + 1, m, md),
        expr="phi(x)/phi(x+1)",
        poles=zeros_of_phi,
    )
    backward = CoefficientFn(
        fn=lambda x: phi(-x, m, md) / phi(1 - x, m, md),
        expr="phi(-x)/phi(1-x)",
        poles=zeros_of_phi,
    )
    factorized = DifferenceOperator([(1, forward), (-1, backward)])
    L = make_L(m, md)
    return factorized.equal_on(
        L, _samples(md, [factorized, L], samples, seed), tol
    )


def verify_leading_coefficient(
    l: complex,
    m: int,
    md: ModularData,
    samples: Optional[SampleSet] = None,
    tol: float = 1e-10,
    seed: int = 0,
) -> EqualityReport:
    """The top coefficient of M_l equals C_l phi(x)/phi(x+l+m)."""
    l = complex(l)
    M = make_M(l, m, md)
    C = leading_constant(l, m, md)
    expected = CoefficientFn(
        fn=lambda x: C * phi(x, m, md) / phi(x + l + m, m, md),
        expr=f"C_l*phi(x)/phi(x+{l + m:.6g})",
        poles=tuple(-(l + m - k) for k in range(1, m + 1)),
    )
    top = DifferenceOperator([(l + m, M.coefficient(l + m))])
    guess = DifferenceOperator([(l + m, expected)])
    return top.equal_on(guess, _samples(md, [M, guess], samples, seed), tol)


def commutation_coefficient_residual(
    l: complex,
    m: int,
    md: ModularData,
    samples: Optional[SampleSet] = None,
    seed: int = 0,
) -> float:
    """
    Largest relative residual of the coefficient form of [L, M_l] = 0,

        A_j(x)[x+j+m]/[x+j] + A_{j-2}(x)[x+j-2-m]/[x+j-2]
            = A_j(x-1)[x+m]/[x] + A_{j-2}(x+1)[x-m]/[x],

    evaluated directly on the coefficients A^l_j for j in l-m+2r, r = 0..m+1.
    """
    l = complex(l)
    M = make_M(l, m, md)
    pts = _samples(
        md,
        [M, DifferenceOperator.shift(1) @ M, DifferenceOperator.shift(-1) @ M],
        samples,
        seed,
        avoid=[0j] + [-(l - m + 2 * r) for r in range(-1, m + 2)],
    ).points

    def A(r: int, x: np.ndarray) -> np.ndarray:
        if 0 <= r <= m:
            return coeff_A(l, r, m, md)(x)
        return np.zeros(x.shape, dtype=complex)

    worst = 0.0
    for r in range(m + 2):
        j = l - m + 2 * r
        terms = [
            A(r, pts) * ell_num(pts + j + m, md) / ell_num(pts + j, md),
            A(r - 1, pts) * ell_num(pts + j - 2 - m, md) / ell_num(pts + j - 2, md),
            -A(r, pts - 1) * ell_num(pts + m, md) / ell_num(pts, md),
            -A(r - 1, pts + 1) * ell_num(pts - m, md) / ell_num(pts, md),
        ]
        scale = np.maximum(1.0, np.max(np.abs(terms), axis=0))
        worst = max(worst, float(np.max(np.abs(sum(terms)) / scale)))
    return worst


def coefficient_symmetry_residual(
    l: complex,
    m: int,
    md: ModularData,
    samples: Optional[SampleSet] = None,
    seed: int = 0,
) -> float:
    """Largest relative residual of A^l_j(x) = A^{-l}_{-j}(-x) over all j."""
    l = complex(l)
    ops = [make_M(l, m, md), make_M(-l, m, md).conj_S()]
    pts = _samples(md, ops, samples, seed).points
    worst = 0.0
    for k in range(m + 1):
        a = coeff_A(l, k, m, md)(pts)
        b = coeff_A(-l, m - k, m, md)(-pts)
        scale = np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))
        worst = max(worst, float(np.max(np.abs(a - b) / scale)))
    return worst
