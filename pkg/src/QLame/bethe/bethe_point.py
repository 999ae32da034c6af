from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from QLame.bethe.equations import bethe_residual, eps_L, eps_N, eps_l
from QLame.elliptic import GUARD, ModularData, ell_num, lattice_distance


@dataclass(frozen=True)
class BethePoint:
    """
    A solution (t_1, ..., t_m, c) of b_i(t) = exp(2 gamma c).

    ``residual`` is the certificate max_i |b_i(t) - exp(2 gamma c)| / |exp(2 gamma c)|.
    """

    t: tuple[complex, ...]
    c: complex
    residual: float
    md: ModularData = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "t", tuple(complex(tj) for tj in self.t))
        object.__setattr__(self, "c", complex(self.c))

    @property
    def m(self) -> int:
        return len(self.t)

    @classmethod
    def from_roots(cls, t, c: complex, md: ModularData) -> BethePoint:
        t = tuple(complex(tj) for tj in t)
        return cls(t, c, bethe_residual(t, c, len(t), md), md)

    def is_separated(self, guard: float = GUARD) -> bool:
        """No two roots coincide modulo the period lattice."""
        return all(
            lattice_distance(self.t[i] - self.t[j], self.md) > guard
            for i in range(self.m)
            for j in range(i + 1, self.m)
        )

    def is_normalizable(self, guard: float = GUARD) -> bool:
        """psi(t, .) can be normalized, i.e. no [t_j] vanishes."""
        return self.m == 0 or bool(
            np.all(np.abs(ell_num(np.array(self.t), self.md)) > guard)
        )

    def partner(self) -> BethePoint:
        """The symmetric solution (-t, -c): same eps_L, opposite eps_N."""
        return BethePoint.from_roots([-tj for tj in self.t], -self.c, self.md)

    def shift_c(self) -> BethePoint:
        """The solution (t, c + pi i / gamma): eps_L and eps_N change sign."""
        return BethePoint(self.t, self.c + np.pi * 1j / self.md.gamma, self.residual, self.md)

    def translate(self, i: int, period: Literal["omega", "omega_prime"]) -> BethePoint:
        """
        Move t_i by a period. An omega' translation multiplies every b_j by
        exp(4 pi i gamma), which is absorbed by c -> c + 2 pi i.
        """
        t = list(self.t)
        if period == "omega":
            t[i] += self.md.omega
            c = self.c
        elif period == "omega_prime":
            t[i] += self.md.omega_prime
            c = self.c + 2j * np.pi
        else:
            raise ValueError(f"unknown period {period!r}")
        return BethePoint.from_roots(t, c, self.md)

    def eigen_data(self, labels=()) -> EigenData:
        return EigenData(
            eps_L=eps_L(self.t, self.c, self.m, self.md),
            eps_N=eps_N(self.t, self.c, self.m, self.md),
            eps_l={
                complex(l): eps_l(l, self.t, self.c, self.m, self.md) for l in labels
            },
        )


@dataclass(frozen=True)
class EigenData:
    eps_L: complex
    eps_N: complex
    eps_l: dict[complex, complex] = field(default_factory=dict)
