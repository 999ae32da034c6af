"""
Bethe equations b_i(t) = exp(2 gamma c), the Baker-Akhiezer function and the
eigenvalue maps of L, M_l and N on it.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np
from numpy.typing import ArrayLike

from QLame.difference_operator import DifferenceOperator
from QLame.elliptic import GUARD, ModularData, ell_fact, ell_num, ell_product
from QLame.errors import PoleProximityError
from QLame.family import coeff_A

TVector = Sequence[complex]


def _check_away_from_zero(values: ArrayLike, what: str, guard: float = GUARD):
    moduli = np.abs(np.asarray(values))
    if not np.all(np.isfinite(moduli)) or np.any(moduli < guard):
        raise PoleProximityError(f"{what} is too close to a zero of [x]")


def bethe_vector(t: TVector, m: int, md: ModularData) -> np.ndarray:
    """
    All b_i(t) = ([t_i-m]/[t_i+m]) prod_{j != i} [t_j-t_i-1]/[t_j-t_i+1].

    Raises
    ------
    PoleProximityError
        If a denominator [t_i+m] or [t_j-t_i+1] is within the guard of zero.
    """
    t_arr = np.asarray(t, dtype=complex)
    if t_arr.shape != (m,):
        raise ValueError(f"expected {m} Bethe roots, got {t_arr.shape}")
    if m == 0:
        return np.zeros(0, dtype=complex)
    head_den = ell_num(t_arr + m, md)
    _check_away_from_zero(head_den, "[t_i+m]")
    values = ell_num(t_arr - m, md) / head_den

    diff = t_arr[None, :] - t_arr[:, None]  # diff[i, j] = t_j - t_i
    off_diag = ~np.eye(m, dtype=bool)
    if m > 1:
        num = ell_num(diff[off_diag] - 1, md)
        den = ell_num(diff[off_diag] + 1, md)
        _check_away_from_zero(den, "[t_j-t_i+1]")
        ratios = np.ones((m, m), dtype=complex)
        ratios[off_diag] = num / den
        values = values * np.prod(ratios, axis=1)
    return values


def bethe_b(i: int, t: TVector, m: int, md: ModularData) -> complex:
    """The i-th Bethe function b_i(t) (0-based index)."""
    if not 0 <= i < m:
        raise IndexError(f"Bethe index {i} out of range for m={m}")
    return complex(bethe_vector(t, m, md)[i])


def bethe_residual(t: TVector, c: complex, m: int, md: ModularData) -> float:
    """max_i |b_i(t) - exp(2 gamma c)| / |exp(2 gamma c)|; 0 for m = 0."""
    if m == 0:
        return 0.0
    target = np.exp(2 * md.gamma * complex(c))
    return float(np.max(np.abs(bethe_vector(t, m, md) - target)) / abs(target))


def baker_akhiezer(t: TVector, c: complex, x: ArrayLike, m: int, md: ModularData):
    """
    psi(t, x) = exp(c gamma x) prod_j [x+t_j]/[t_j], normalized to psi(t, 0) = 1.

    Raises
    ------
    PoleProximityError
        If some |[t_j]| is within the guard of zero.
    """
    t_arr = np.asarray(t, dtype=complex)
    norm = ell_product(0.0, t_arr, md)
    if m:
        _check_away_from_zero(ell_num(t_arr, md), "[t_j]")
    x_arr = np.asarray(x, dtype=complex)
    values = np.exp(complex(c) * md.gamma * x_arr) * ell_product(x_arr, t_arr, md) / norm
    return complex(values) if x_arr.ndim == 0 else values


def psi_function(
    t: TVector, c: complex, m: int, md: ModularData
) -> Callable[[np.ndarray], np.ndarray]:
    """psi(t, .) as a vectorized callable for DifferenceOperator.apply."""
    return lambda x: baker_akhiezer(t, c, x, m, md)


def eps_L(t: TVector, c: complex, m: int, md: ModularData) -> complex:
    """
    Eigenvalue of L on psi(t, .):

        exp(-gamma c) ([2m]/[m]) prod_j [t_j+m-1]/[t_j+m],

    and exp(gamma c) + exp(-gamma c) for m = 0.
    """
    c = complex(c)
    if m == 0:
        return complex(np.exp(md.gamma * c) + np.exp(-md.gamma * c))
    t_arr = np.asarray(t, dtype=complex)
    den = ell_num(t_arr + m, md)
    _check_away_from_zero(den, "[t_j+m]")
    ratio = ell_num(2 * m, md) / ell_num(m, md)
    return complex(
        np.exp(-md.gamma * c) * ratio * np.prod(ell_num(t_arr + m - 1, md) / den)
    )


def eps_l(l: complex, t: TVector, c: complex, m: int, md: ModularData) -> complex:
    """Eigenvalue of M_l on psi(t, .): [2m]! psi(t, l) / ([m]! psi(t, m))."""
    at_m = baker_akhiezer(t, c, complex(m), m, md)
    if at_m == 0 or not np.isfinite(at_m):
        raise PoleProximityError("psi(t, m) vanishes; eps_l is undefined")
    at_l = baker_akhiezer(t, c, complex(l), m, md)
    return complex(ell_fact(2 * m, md) / ell_fact(m, md) * at_l / at_m)


def eps_N(t: TVector, c: complex, m: int, md: ModularData) -> complex:
    """
    Eigenvalue of N = M_{m+1} - M_{-m-1} on psi(t, .):

        ([2m]!/[m]!) (exp(gamma c) prod_j [m+t_j+1]/[m+t_j]
                      - exp(-gamma c) prod_j [m-t_j+1]/[m-t_j]).
    """
    c = complex(c)
    t_arr = np.asarray(t, dtype=complex)
    plus_den = ell_num(m + t_arr, md)
    minus_den = ell_num(m - t_arr, md)
    _check_away_from_zero(plus_den, "[m+t_j]")
    _check_away_from_zero(minus_den, "[m-t_j]")
    plus = np.exp(md.gamma * c) * np.prod(ell_num(m + t_arr + 1, md) / plus_den)
    minus = np.exp(-md.gamma * c) * np.prod(ell_num(m - t_arr + 1, md) / minus_den)
    return complex(ell_fact(2 * m, md) / ell_fact(m, md) * (plus - minus))


def eigen_residual(
    op: DifferenceOperator,
    t: TVector,
    c: complex,
    eps: complex,
    x: ArrayLike,
    m: int,
    md: ModularData,
) -> float:
    """max over x of |(op psi)(x) - eps psi(x)| / (|psi(x)| max(1, |eps|))."""
    x_arr = np.atleast_1d(np.asarray(x, dtype=complex))
    psi = psi_function(t, c, m, md)
    values = psi(x_arr)
    action = op.apply(psi, x_arr)
    scale = np.abs(values) * max(1.0, abs(eps))
    return float(np.max(np.abs(action - eps * values) / scale))


def psi_zeros(t: TVector) -> list[complex]:
    """Points x (mod lattice) where psi(t, x) vanishes."""
    return [-complex(tj) for tj in t]


def product_rule_residual(
    l: complex,
    k: complex,
    t: TVector,
    c: complex,
    m: int,
    md: ModularData,
) -> float:
    """Relative residual of eps_l eps_k = sum_r A^l_{l-m+2r}(k) eps_{k+l-m+2r}."""
    l, k = complex(l), complex(k)
    left = eps_l(l, t, c, m, md) * eps_l(k, t, c, m, md)
    terms = [
        coeff_A(l, r, m, md)(k) * eps_l(k + l - m + 2 * r, t, c, m, md)
        for r in range(m + 1)
    ]
    right = sum(terms)
    scale = max(1.0, abs(left), *(abs(term) for term in terms))
    return float(abs(left - right) / scale)
