from __future__ import annotations

import numpy as np

from .abstract_backend import AbstractBackend, LeastSquaresResult


class NumpyBackend(AbstractBackend):
    """Orthogonal-factorization least squares through ``numpy.linalg.lstsq``."""

    name = "numpy"

    def __init__(self, rcond: float | None = None):
        self.rcond = rcond

    def lstsq(self, A: np.ndarray, b: np.ndarray) -> LeastSquaresResult:
        A = np.asarray(A, dtype=complex)
        b = np.asarray(b, dtype=complex)
        coeffs, _, _, _ = np.linalg.lstsq(A, b, rcond=self.rcond)
        return LeastSquaresResult(
            coeffs=coeffs, residual_norm=float(np.linalg.norm(A @ coeffs - b))
        )
