import numpy as np

from QLame.checks.check import Check, CheckResult
from QLame.elliptic import (
    ell_num,
    ell_num_shift_check,
    lattice_distance,
    theta1,
)


def _relative(a: np.ndarray, b: np.ndarray) -> float:
    scale = np.maximum(1e-300, np.maximum(np.abs(a), np.abs(b)))
    return float(np.max(np.abs(a - b) / scale))


class EllipticCheck(Check):
    """Oddness, quasi-periodicity and zero set of theta and [x]."""

    name = "elliptic"

    def __init__(self, count: int = 100) -> None:
        super().__init__(None)
        self.count = count

    def apply(self, verifier) -> list[CheckResult]:
        md = verifier.md
        tau = md.tau
        rng = self.rng(verifier)
        u, v = rng.uniform(0, 1, self.count), rng.uniform(0, 1, self.count)
        z = u + v * tau

        theta_z = theta1(z, tau, md.series)
        odd = float(
            np.max(np.abs(theta1(-z, tau, md.series) + theta_z) / np.maximum(1.0, np.abs(theta_z)))
        )
        shift_one = _relative(theta1(z + 1, tau, md.series), -theta_z)
        shift_tau = _relative(
            theta1(z + tau, tau, md.series),
            -np.exp(-np.pi * 1j * tau - 2 * np.pi * 1j * z) * theta_z,
        )

        x = u * md.omega + v * md.omega_prime
        x = x[lattice_distance(x, md) > verifier.guard]
        ell_odd = _relative(ell_num(-x, md), -ell_num(x, md))
        shifts = [ell_num_shift_check(xi, md) for xi in x]
        shift_residual = max(max(r) for r in shifts if r is not None)

        nodes = np.array(
            [n * md.omega + k * md.omega_prime for n in range(-1, 2) for k in range(-1, 2)]
        )
        zero_set = float(np.max(np.abs(ell_num(nodes, md))))

        return [
            self.result("theta.oddness", odd, "theta", verifier),
            self.result("theta.quasi_periodicity", max(shift_one, shift_tau), "theta", verifier),
            self.result("ell_num.oddness", ell_odd, "theta", verifier),
            self.result("ell_num.shift", shift_residual, "theta", verifier),
            CheckResult("ell_num.zero_set", {}, zero_set, 1e-9),
        ]
