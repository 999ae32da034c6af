from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional

import numpy as np

if TYPE_CHECKING:
    from QLame.verifier import Verifier


def _params_key(params: dict) -> str:
    return ",".join(f"{k}={params[k]}" for k in sorted(params))


@dataclass(frozen=True)
class CheckResult:
    name: str
    params: dict = field(default_factory=dict)
    residual: float = 0.0
    threshold: float = 0.0
    passed: Optional[bool] = None
    # a negative control passes when the residual reaches the threshold
    negative: bool = False

    def __post_init__(self):
        residual = float(self.residual)
        object.__setattr__(self, "residual", residual)
        if self.passed is None:
            exceeded = residual >= self.threshold
            object.__setattr__(
                self, "passed", bool(math.isfinite(residual) and exceeded == self.negative)
            )

    @property
    def residual_display(self) -> str:
        return f"{self.residual:.2e}"

    @property
    def sort_key(self) -> tuple[str, str]:
        return self.name, _params_key(self.params)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "params": {k: _plain(v) for k, v in sorted(self.params.items())},
            "residual": self.residual if math.isfinite(self.residual) else str(self.residual),
            "residual_display": self.residual_display,
            "threshold": self.threshold,
            "passed": bool(self.passed),
            "negative": self.negative,
        }


def _plain(value):
    if isinstance(value, (complex, np.complexfloating)):
        value = complex(value)
        return f"{value.real:.6g}{value.imag:+.6g}j"
    if isinstance(value, np.generic):
        return value.item()
    return value


class Check:
    """
    A group of verification checks for one coupling index m.

    Subclasses implement ``apply``, which reads the run settings from the
    verifier and returns one ``CheckResult`` per certified identity.
    """

    name = "check"

    def __init__(self, m: Optional[int] = None) -> None:
        self.m = m

    def apply(self, verifier: Verifier) -> list[CheckResult]:
        raise NotImplementedError

    def rng(self, verifier: Verifier) -> np.random.Generator:
        """Generator seeded by the run seed, m and the check name."""
        salt = sum(ord(ch) for ch in self.name)
        return np.random.default_rng([verifier.config.seed, self.m or 0, salt])

    def result(self, name: str, residual: float, tol_name: str, verifier: Verifier, **params) -> CheckResult:
        return CheckResult(
            name=name,
            params={**({"m": self.m} if self.m is not None else {}), **params},
            residual=residual,
            threshold=verifier.tol(tol_name),
        )

    def control(self, name: str, residual: float, tol_name: str, verifier: Verifier, **params) -> CheckResult:
        """A negative control: passes only if ``residual`` is at least the tolerance."""
        return CheckResult(
            name=name,
            params={**({"m": self.m} if self.m is not None else {}), **params},
            residual=residual,
            threshold=verifier.tol(tol_name),
            negative=True,
        )

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(m={self.m})"
