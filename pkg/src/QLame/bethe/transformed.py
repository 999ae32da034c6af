"""
The eigenvalue equation of L rewritten for u = psi / phi,

    u(x+1) + ([x+m][x-m-1] / ([x][x-1])) u(x-1) = eps u(x),

whose coefficients are elliptic, and the ellipticity of the multipliers of
u_+(x) = exp(c gamma x) prod_j [x+t_j]/[x-j].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike

from QLame.bethe.equations import TVector, baker_akhiezer
from QLame.difference_operator import SampleSet
from QLame.elliptic import GUARD, ModularData, ell_num, ell_product, phi
from QLame.errors import PoleProximityError


def transformed_u(t: TVector, c: complex, x: ArrayLike, m: int, md: ModularData):
    """u(x) = psi(t, x) / prod_{j=1}^m [x-j]."""
    x_arr = np.asarray(x, dtype=complex)
    denominator = phi(x_arr, m, md)
    if np.any(np.abs(denominator) < GUARD**m):
        raise PoleProximityError("x is too close to a zero of phi")
    return baker_akhiezer(t, c, x_arr, m, md) / denominator


def transformed_coefficient(x: ArrayLike, m: int, md: ModularData):
    """[x+m][x-m-1] / ([x][x-1]), identically 1 for m = 0."""
    x_arr = np.asarray(x, dtype=complex)
    if m == 0:
        return np.ones(x_arr.shape, dtype=complex)
    denominator = ell_num(x_arr, md) * ell_num(x_arr - 1, md)
    if np.any(np.abs(denominator) < GUARD**2):
        raise PoleProximityError("x is too close to a zero of [x][x-1]")
    return ell_num(x_arr + m, md) * ell_num(x_arr - m - 1, md) / denominator


def residual_transformed_eq(
    t: TVector, c: complex, eps: complex, x: ArrayLike, m: int, md: ModularData
) -> float:
    """
    Relative residual of the transformed equation, maximized over ``x``.

    Each point is scaled by the largest modulus among the three terms.
    """
    x_arr = np.atleast_1d(np.asarray(x, dtype=complex))
    up = transformed_u(t, c, x_arr + 1, m, md)
    mid = eps * transformed_u(t, c, x_arr, m, md)
    down = transformed_coefficient(x_arr, m, md) * transformed_u(t, c, x_arr - 1, m, md)
    scale = np.maximum.reduce([np.abs(up), np.abs(mid), np.abs(down)])
    return float(np.max(np.abs(up + down - mid) / scale))


def u_plus(t: TVector, c: complex, x: ArrayLike, m: int, md: ModularData):
    """u_+(x) = exp(c gamma x) prod_j [x+t_j] / prod_{j=1}^m [x-j]."""
    x_arr = np.asarray(x, dtype=complex)
    t_arr = np.asarray(t, dtype=complex)
    return (
        np.exp(complex(c) * md.gamma * x_arr)
        * ell_product(x_arr, t_arr, md)
        / phi(x_arr, m, md)
    )


def ellipticity_avoid_points(t: TVector, m: int) -> list[complex]:
    """Points (mod lattice) where r(x) or u_+(x) u_+(-x) is singular or zero."""
    points: list[complex] = []
    for tj in t:
        tj = complex(tj)
        points += [-tj, -tj - 1, tj]
    for j in range(1, m + 1):
        points += [complex(j), complex(j - 1), complex(-j)]
    return points


@dataclass(frozen=True)
class EllipticityReport:
    passed: bool
    residual: float
    tolerance: float
    ratio_residual: float
    product_residual: float

    def __bool__(self) -> bool:
        return self.passed


def _periodicity_residual(f, x: np.ndarray, md: ModularData) -> float:
    base = f(x)
    worst = 0.0
    for period in (md.omega, md.omega_prime):
        shifted = f(x + period)
        scale = np.maximum(np.abs(base), np.abs(shifted))
        worst = max(worst, float(np.max(np.abs(shifted - base) / scale)))
    return worst


def multiplier_ellipticity_check(
    t: TVector,
    c: complex,
    m: int,
    md: ModularData,
    samples: Optional[SampleSet] = None,
    tol: float = 1e-8,
    seed: int = 0,
    count: int = 20,
) -> EllipticityReport:
    """
    Double periodicity of r(x) = u_+(x+1)/u_+(x) and of u_+(x) u_+(-x).

    Neither property uses the Bethe equations; any (t, c) passes.
    """
    if samples is None:
        samples = SampleSet.generate(
            md, count, seed, avoid=ellipticity_avoid_points(t, m)
        )
    x = np.asarray(samples.points, dtype=complex)

    def ratio(y: np.ndarray) -> np.ndarray:
        return u_plus(t, c, y + 1, m, md) / u_plus(t, c, y, m, md)

    def product(y: np.ndarray) -> np.ndarray:
        return u_plus(t, c, y, m, md) * u_plus(t, c, -y, m, md)

    ratio_residual = _periodicity_residual(ratio, x, md)
    product_residual = _periodicity_residual(product, x, md)
    residual = max(ratio_residual, product_residual)
    return EllipticityReport(
        passed=bool(np.isfinite(residual) and residual < tol),
        residual=residual,
        tolerance=tol,
        ratio_residual=ratio_residual,
        product_residual=product_residual,
    )
