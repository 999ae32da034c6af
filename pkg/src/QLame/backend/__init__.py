from .abstract_backend import AbstractBackend, LeastSquaresResult
from .numpy_backend import NumpyBackend
from .cvxpy_backend import CvxpyBackend

BACKENDS = {"numpy": NumpyBackend, "cvxpy": CvxpyBackend}


def make_backend(name: str) -> AbstractBackend:
    try:
        return BACKENDS[name.lower()]()
    except KeyError:
        raise ValueError(
            f"Unknown backend {name!r}, choose from {sorted(BACKENDS)}"
        ) from None


__all__ = [
    "AbstractBackend",
    "LeastSquaresResult",
    "NumpyBackend",
    "CvxpyBackend",
    "BACKENDS",
    "make_backend",
]
