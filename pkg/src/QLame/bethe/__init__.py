from QLame.bethe.bethe_point import BethePoint, EigenData
from QLame.bethe.equations import (
    baker_akhiezer,
    bethe_b,
    bethe_residual,
    bethe_vector,
    eigen_residual,
    eps_L,
    eps_N,
    eps_l,
    product_rule_residual,
    psi_function,
    psi_zeros,
)
from QLame.bethe.solver import BetheSolver, NewtonSettings, solve_given_c, trace_curve
from QLame.bethe.transformed import (
    EllipticityReport,
    multiplier_ellipticity_check,
    residual_transformed_eq,
    transformed_u,
    u_plus,
)

__all__ = [
    "BethePoint",
    "EigenData",
    "BetheSolver",
    "NewtonSettings",
    "EllipticityReport",
    "baker_akhiezer",
    "bethe_b",
    "bethe_residual",
    "bethe_vector",
    "eigen_residual",
    "eps_L",
    "eps_N",
    "eps_l",
    "multiplier_ellipticity_check",
    "product_rule_residual",
    "psi_function",
    "psi_zeros",
    "residual_transformed_eq",
    "solve_given_c",
    "trace_curve",
    "transformed_u",
    "u_plus",
]
