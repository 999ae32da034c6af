from __future__ import annotations
import abc
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LeastSquaresResult:
    coeffs: np.ndarray
    residual_norm: float
    status: str = "optimal"


class AbstractBackend(abc.ABC):
    """
    Defines the abstract interface for a least-squares backend.

    A backend minimizes ||A x - b||_2 over complex x for a dense complex
    matrix A. Column scaling and conditioning checks are done by the caller.
    """

    name: str = "abstract"

    @abc.abstractmethod
    def lstsq(self, A: np.ndarray, b: np.ndarray) -> LeastSquaresResult:
        """Solves the linear least-squares problem min ||A x - b||."""
        pass

    def close(self):
        """Releases resources held by the backend, if any."""
        pass

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}()"
