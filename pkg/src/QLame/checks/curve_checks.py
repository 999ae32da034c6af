from __future__ import annotations

import logging

import numpy as np

from QLame.backend import make_backend
from QLame.checks.check import Check, CheckResult
from QLame.errors import NumericalError
from QLame.family import make_L, make_N
from QLame.spectral_curve import (
    ALTERNATE_C_WINDOW,
    DEFAULT_C_WINDOW,
    collect_samples,
    compare_fits,
    fit_P,
    fit_Q,
    polynomial_in,
    verify_involutions,
    verify_operator_relation,
)

logger = logging.getLogger(__name__)

# Deeper compositions lose accuracy; m >= 2 is held to this looser bound.
DEEP_RELATION_TOL = 1e-5


class CurveCheck(Check):
    """
    Fits Y^2 = P(X^2) on Bethe curve samples and certifies the degree, the
    held-out residual, the X^2 parity, the operator identity N^2 = P(L^2),
    the involutions and the stability of P across two c-windows.
    """

    name = "curve"

    def __init__(
        self,
        m: int,
        count: int = 40,
        c_window=DEFAULT_C_WINDOW,
        alternate_window=ALTERNATE_C_WINDOW,
    ) -> None:
        super().__init__(m)
        self.count = count
        self.c_window = c_window
        self.alternate_window = alternate_window

    def apply(self, verifier) -> list[CheckResult]:
        md, m = verifier.md, self.m
        seed = verifier.config.seed
        backend = make_backend(verifier.config.fit_backend)
        results: list[CheckResult] = []

        try:
            samples = collect_samples(m, md, self.count, self.c_window, seed, include_shifted=True)
            fit = fit_P([s for s in samples if not s.shifted], m, md, backend)
        except NumericalError as exc:
            logger.warning("curve fit failed for m=%d: %s", m, exc)
            return [CheckResult("curve.fit", {"m": m}, float("inf"), 1.0)]
        verifier.fits[m] = fit

        moduli = np.abs(fit.coeffs)
        results.append(CheckResult("curve.degree", {"m": m}, float(moduli.max() / moduli[-1]), 1e8))
        results.append(self.result("curve.validation", fit.validation_residual, "validation", verifier))

        try:
            odd_ratio = fit_Q(samples, m, backend).odd_ratio
        except NumericalError as exc:
            logger.warning("parity fit failed for m=%d: %s", m, exc)
            odd_ratio = float("inf")
        results.append(self.result("curve.parity", odd_ratio, "parity", verifier))

        L, N = make_L(m, md), make_N(m, md)
        NN = N @ N
        rhs = polynomial_in(L @ L, fit.coeffs)
        relation_tol = verifier.tol("relation") if m < 2 else max(verifier.tol("relation"), DEEP_RELATION_TOL)
        report = verify_operator_relation(fit, m, md, verifier.samples_for([NN, rhs]), relation_tol)
        results.append(CheckResult("curve.operator_relation", {"m": m}, report.residual, relation_tol))

        involutions = verify_involutions(
            m,
            md,
            verifier.samples_for([L, N, NN]),
            verifier.tol("involution"),
            fit=fit,
            curve_samples=samples,
            curve_tol=verifier.tol("validation"),
        )
        for name, residual in involutions.components.items():
            threshold = verifier.tol("validation") if "curve" in name else verifier.tol("involution")
            results.append(CheckResult("curve.involution", {"m": m, "identity": name}, residual, threshold))

        try:
            other = fit_P(
                collect_samples(m, md, self.count, self.alternate_window, seed), m, md, backend
            )
            stability = compare_fits(fit, other)
        except NumericalError as exc:
            logger.warning("alternate window fit failed for m=%d: %s", m, exc)
            stability = float("inf")
        results.append(self.result("curve.window_stability", stability, "window_stability", verifier))
        return results

