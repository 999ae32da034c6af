"""Jacobi theta function and elliptic numbers.

All functions accept scalars or numpy arrays of complex points and return a
Python ``complex`` for scalar input and an array otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike

from QLame.errors import DomainError, SeriesNonConvergenceError

DEFAULT_GAMMA = math.sqrt(2) / 10
DEFAULT_TAU = 1j

# Radius (in x-units) kept between sample points and the zero lattice of [x].
GUARD = 1e-3


@dataclass(frozen=True)
class SeriesConfig:
    """
    Truncation settings of the theta series.

    Parameters
    ----------
    rel_tol : float
        A term is negligible once its modulus drops below ``rel_tol`` times
        the largest term modulus seen so far.
    max_terms : int
        Number of half-integer pairs after which the series is declared
        non-convergent.
    """

    rel_tol: float = 1e-16
    max_terms: int = 64

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise DomainError(f"rel_tol must be positive, got {self.rel_tol}")
        if self.max_terms < 4:
            raise DomainError(f"max_terms must be >= 4, got {self.max_terms}")


def _as_output(values: np.ndarray, scalar: bool):
    return complex(values) if scalar else values


def theta1(z: ArrayLike, tau: complex, cfg: Optional[SeriesConfig] = None):
    """
    Jacobi's theta_1 in the convention

        theta(z, tau) = - sum_{j in Z + 1/2} exp(pi i j^2 tau + 2 pi i j (z + 1/2)).

    The terms j and -j are summed together, which turns each pair into
    ``2 (-1)^n q^{(n+1/2)^2} sin((2n+1) pi z)``. Summation runs outward from
    j = +-1/2 and stops once the modulus bound of the last pair falls below
    ``cfg.rel_tol`` times the largest bound seen.

    Raises
    ------
    DomainError
        If Im(tau) <= 0.
    SeriesNonConvergenceError
        If ``cfg.max_terms`` pairs were not enough.
    """
    cfg = cfg or SeriesConfig()
    tau = complex(tau)
    if tau.imag <= 0:
        raise DomainError(f"theta1 needs Im(tau) > 0, got tau={tau}")

    z_arr = np.asarray(z, dtype=complex)
    scalar = z_arr.ndim == 0
    z_arr = np.atleast_1d(z_arr)

    total = np.zeros(z_arr.shape, dtype=complex)
    abs_im = np.abs(z_arr.imag)
    log_tol = math.log(cfg.rel_tol)
    log_max = np.full(z_arr.shape, -np.inf)

    for n in range(cfg.max_terms):
        j = n + 0.5
        weight = np.exp(1j * np.pi * tau * j * j)
        total += (-1) ** n * weight * np.sin((2 * n + 1) * np.pi * z_arr)

        # log of the modulus bound of the pair
        log_term = -np.pi * tau.imag * j * j + 2 * np.pi * j * abs_im
        log_max = np.maximum(log_max, log_term)
        if n >= 1 and np.all(log_term < log_tol + log_max):
            break
    else:
        raise SeriesNonConvergenceError(
            f"theta1 did not converge within {cfg.max_terms} terms (tau={tau})"
        )

    result = 2.0 * total
    return _as_output(result[0] if scalar else result, scalar)


@dataclass(frozen=True)
class ModularData:
    """
    The parameters (gamma, tau) and the derived periods of the x-variable.

    In the variable x = lambda / gamma the shift of the q-Lame operator is 1
    and the periods are ``omega = 1/gamma`` and ``omega_prime = tau/gamma``.
    """

    gamma: complex = DEFAULT_GAMMA
    tau: complex = DEFAULT_TAU
    series: SeriesConfig = field(default_factory=SeriesConfig)

    def __post_init__(self):
        object.__setattr__(self, "gamma", complex(self.gamma))
        object.__setattr__(self, "tau", complex(self.tau))
        if self.tau.imag <= 0:
            raise DomainError(f"Im(tau) must be positive, got tau={self.tau}")
        if self.gamma == 0 or abs(self.theta_gamma) < 1e-12:
            raise DomainError(
                f"gamma={self.gamma} lies on the lattice Z + tau Z, [x] is undefined"
            )

    @property
    def omega(self) -> complex:
        return 1 / self.gamma

    @property
    def omega_prime(self) -> complex:
        return self.tau / self.gamma

    @property
    def nome_q(self) -> complex:
        return complex(np.exp(1j * np.pi * self.tau))

    @cached_property
    def theta_gamma(self) -> complex:
        # Idempotent, so a concurrent first access only computes it twice.
        return theta1(self.gamma, self.tau, self.series)

    def as_dict(self) -> dict:
        return {
            "gamma": [self.gamma.real, self.gamma.imag],
            "tau": [self.tau.real, self.tau.imag],
        }


def ell_num(x: ArrayLike, md: ModularData):
    """The elliptic number [x] = theta(gamma x, tau) / theta(gamma, tau)."""
    x_arr = np.asarray(x, dtype=complex)
    values = theta1(md.gamma * x_arr, md.tau, md.series)
    return values / md.theta_gamma


def ell_product(x: ArrayLike, offsets: Sequence[complex], md: ModularData):
    """Product of [x + a] over ``offsets`` (1 for an empty sequence)."""
    x_arr = np.asarray(x, dtype=complex)
    result = np.ones(x_arr.shape, dtype=complex)
    for a in offsets:
        result = result * ell_num(x_arr + a, md)
    return complex(result) if x_arr.ndim == 0 else result


def lattice_coordinates(x: ArrayLike, md: ModularData) -> tuple[np.ndarray, np.ndarray]:
    """Real coordinates (a, b) with x = a * omega + b * omega_prime."""
    x_arr = np.asarray(x, dtype=complex)
    w, wp = md.omega, md.omega_prime
    det = w.real * wp.imag - wp.real * w.imag
    a = (x_arr.real * wp.imag - wp.real * x_arr.imag) / det
    b = (w.real * x_arr.imag - x_arr.real * w.imag) / det
    return a, b


def lattice_distance(x: ArrayLike, md: ModularData):
    """Distance from x to the nearest point of Z omega + Z omega_prime."""
    x_arr = np.asarray(x, dtype=complex)
    a, b = lattice_coordinates(x_arr, md)
    fa, fb = np.floor(a), np.floor(b)
    best = np.full(x_arr.shape, np.inf)
    for da in (0.0, 1.0):
        for db in (0.0, 1.0):
            node = (fa + da) * md.omega + (fb + db) * md.omega_prime
            best = np.minimum(best, np.abs(x_arr - node))
    return float(best) if x_arr.ndim == 0 else best


class ShiftResiduals(NamedTuple):
    omega: float
    omega_prime: float


def ell_num_shift_check(
    x: complex, md: ModularData, guard: float = GUARD
) -> Optional[ShiftResiduals]:
    """
    Residuals of the transformation laws

        [x + omega] = -[x],
        [x + omega'] = -exp(-(pi i / omega)(omega' + 2x)) [x].

    Returns ``None`` when x lies within ``guard`` of the zero lattice, where
    the relative residuals are meaningless.
    """
    x = complex(x)
    if lattice_distance(x, md) <= guard:
        return None
    w, wp = md.omega, md.omega_prime
    base = ell_num(x, md)
    shifted = ell_num(x + w, md)
    shifted_prime = ell_num(x + wp, md)
    factor = np.exp(-(np.pi * 1j / w) * (wp + 2 * x))

    r_omega = abs(shifted + base) / max(abs(base), abs(shifted))
    r_omega_prime = abs(shifted_prime + factor * base) / max(
        abs(shifted_prime), abs(factor * base)
    )
    return ShiftResiduals(float(r_omega), float(r_omega_prime))


def ell_fact(n: int, md: ModularData) -> complex:
    """[n]! = [1][2]...[n], with [0]! = 1."""
    if n < 0:
        raise DomainError(f"elliptic factorial needs n >= 0, got {n}")
    return complex(ell_product(0.0, range(1, n + 1), md))


def ell_binom(x: ArrayLike, n: int, md: ModularData):
    """Elliptic binomial [x][x-1]...[x-n+1] / [n]!, equal to 1 for n = 0."""
    if n < 0:
        raise DomainError(f"elliptic binomial needs n >= 0, got {n}")
    numerator = ell_product(x, [-k for k in range(n)], md)
    return numerator / ell_fact(n, md)


def phi(x: ArrayLike, m: int, md: ModularData):
    """phi(x) = [x-1][x-2]...[x-m], identically 1 for m = 0."""
    if m < 0:
        raise DomainError(f"phi needs m >= 0, got {m}")
    return ell_product(x, [-k for k in range(1, m + 1)], md)
