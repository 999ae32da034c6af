__version__ = "0.1.0"

from QLame.elliptic import ModularData, SeriesConfig, ell_num, theta1
from QLame.difference_operator import DifferenceOperator, SampleSet
from QLame.family import make_L, make_M, make_N
from QLame.bethe import BethePoint, BetheSolver, solve_given_c, trace_curve
from QLame.spectral_curve import SpectralFit, collect_samples, fit_P
from QLame.data_wrangling.config_loader import RunConfig
from QLame.verifier import Report, Verifier

from QLame import checks, errors

__all__ = [
    "__version__",
    "ModularData",
    "SeriesConfig",
    "ell_num",
    "theta1",
    "DifferenceOperator",
    "SampleSet",
    "make_L",
    "make_M",
    "make_N",
    "BethePoint",
    "BetheSolver",
    "solve_given_c",
    "trace_curve",
    "SpectralFit",
    "collect_samples",
    "fit_P",
    "RunConfig",
    "Report",
    "Verifier",
    "checks",
    "errors",
]
