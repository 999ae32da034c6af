from __future__ import annotations
from typing import Optional

import cvxpy as cp  # type: ignore
import numpy as np

from QLame.errors import NumericalError

from .abstract_backend import AbstractBackend, LeastSquaresResult


class CvxpyBackend(AbstractBackend):
    """CVXPY implementation of the least-squares backend."""

    name = "cvxpy"

    def __init__(
        self,
        solver: Optional[str] = None,
        suppress_output: bool = True,
        solver_params: Optional[dict] = None,
    ):
        self.problem: Optional[cp.Problem] = None
        self.solver = solver
        self.suppress_output = suppress_output
        self.solver_params = solver_params or {}

    def lstsq(self, A: np.ndarray, b: np.ndarray) -> LeastSquaresResult:
        A = np.asarray(A, dtype=complex)
        b = np.asarray(b, dtype=complex)
        x = cp.Variable(A.shape[1], complex=True)
        objective = cp.Minimize(cp.sum_squares(A @ x - b))
        self.problem = cp.Problem(objective)
        self.problem.solve(
            solver=self.solver, verbose=not self.suppress_output, **self.solver_params
        )
        if self.problem.status not in [cp.OPTIMAL, cp.OPTIMAL_INACCURATE]:
            raise NumericalError(f"least-squares solve ended with {self.problem.status}")

        coeffs = np.asarray(x.value, dtype=complex)
        return LeastSquaresResult(
            coeffs=coeffs,
            residual_norm=float(np.linalg.norm(A @ coeffs - b)),
            status=str(self.problem.status),
        )

    def close(self):
        # CVXPY does not require explicit resource disposal
        self.problem = None
