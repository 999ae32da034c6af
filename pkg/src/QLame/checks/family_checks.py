from __future__ import annotations

import numpy as np

from QLame.checks.check import Check, CheckResult
from QLame.errors import ComplexShiftError
from QLame import family
from QLame.family import expected_degree_length, generic_labels, make_L, make_M, make_N


class FamilyIdentityCheck(Check):
    """M_m is a scalar, M_{m-1} is a multiple of L, and L factorizes through phi."""

    name = "family.identity"

    def apply(self, verifier) -> list[CheckResult]:
        md, m = verifier.md, self.m
        results = [
            self.result(
                "family.scalar_member",
                family.verify_scalar_identity(m, md, verifier.samples_for([make_M(m, m, md)]), verifier.tol("identity")).residual,
                "identity",
                verifier,
            ),
            self.result(
                "family.phi_factorization",
                family.verify_phi_factorization(m, md, seed=verifier.config.seed, tol=verifier.tol("phi")).residual,
                "phi",
                verifier,
            ),
        ]
        if m >= 1:
            report = family.verify_lame_identity(
                m, md, verifier.samples_for([make_M(m - 1, m, md), make_L(m, md)]), verifier.tol("identity")
            )
            results.append(self.result("family.lame_member", report.residual, "identity", verifier))
        return results


class StructureCheck(Check):
    """Degree/length table, S and U symmetries, first coefficients."""

    name = "family.structure"

    def __init__(self, m: int, random_labels: int = 3) -> None:
        super().__init__(m)
        self.random_labels = random_labels

    def apply(self, verifier) -> list[CheckResult]:
        md, m = verifier.md, self.m
        results: list[CheckResult] = []

        mismatches = 0
        for l in list(range(-m, m + 3)) + [-m - 1]:
            op = make_M(l, m, md)
            try:
                found = (round(op.degree, 9), round(op.length, 9))
            except (ComplexShiftError, ValueError):
                found = None
            if found != expected_degree_length(l, m):
                mismatches += 1
        results.append(CheckResult("family.degree_length", {"m": m}, float(mismatches), 0.5))

        L, N = make_L(m, md), make_N(m, md)
        samples = verifier.samples_for([L, N])
        tol = verifier.tol("involution")
        results.append(self.result("family.S_symmetric_L", L.conj_S().equal_on(L, samples, tol).residual, "involution", verifier))
        results.append(self.result("family.S_antisymmetric_N", N.conj_S().equal_on(-N, samples, tol).residual, "involution", verifier))
        results.append(self.result("family.U_flips_L", L.conj_U().equal_on(-L, samples, tol).residual, "involution", verifier))
        try:
            N_ok = (round(N.degree, 9), round(N.length, 9)) == (2 * m + 1, 4 * m + 2)
        except (ComplexShiftError, ValueError):
            N_ok = False
        results.append(CheckResult("family.N_degree_length", {"m": m}, 0.0 if N_ok else 1.0, 0.5))

        for l in generic_labels(md, m, self.random_labels, self.rng(verifier)):
            M = make_M(l, m, md)
            M_minus = make_M(-l, m, md)
            pts = verifier.samples_for([M, M_minus.conj_S()])
            phase = np.exp(-np.pi * 1j * (l - m))
            results.append(
                self.result("family.S_conjugation", M.conj_S().equal_on(M_minus, pts, tol).residual, "involution", verifier, l=l)
            )
            results.append(
                self.result("family.U_conjugation", M.conj_U().equal_on(M * phase, pts, tol).residual, "involution", verifier, l=l)
            )
            results.append(
                self.result(
                    "family.coefficient_symmetry",
                    family.coefficient_symmetry_residual(l, m, md, pts),
                    "identity",
                    verifier,
                    l=l,
                )
            )
            lead_pts = verifier.samples_for([M], avoid=[-(l + m - k) for k in range(1, m + 1)])
            results.append(
                self.result(
                    "family.leading_coefficient",
                    family.verify_leading_coefficient(l, m, md, lead_pts, verifier.tol("identity")).residual,
                    "identity",
                    verifier,
                    l=l,
                )
            )
        return results


class CommutationCheck(Check):
    """
    [L, M_l] = 0 for integer and random complex labels, [M_l, M_k] = 0 for
    random complex pairs, and a perturbed M_l that must fail to commute.
    """

    name = "family.commutation"

    def __init__(self, m: int, random_labels: int = 3, pairs: int = 10) -> None:
        super().__init__(m)
        self.random_labels = random_labels
        self.pairs = pairs

    def apply(self, verifier) -> list[CheckResult]:
        md, m = verifier.md, self.m
        tol = verifier.tol("commutation")
        rng = self.rng(verifier)
        L = make_L(m, md)
        results: list[CheckResult] = []

        labels = [complex(l) for l in range(-m - 1, m + 2)]
        labels += generic_labels(md, m, self.random_labels, rng)
        for l in labels:
            M = make_M(l, m, md)
            samples = verifier.samples_for([L @ M, M @ L])
            report = family.verify_commutation(l, m, md, samples, tol)
            results.append(self.result("family.commutation", report.residual, "commutation", verifier, l=l))

        for l in labels[-self.random_labels:] if self.random_labels else []:
            results.append(
                self.result(
                    "family.commutation_coefficients",
                    family.commutation_coefficient_residual(l, m, md, seed=verifier.config.seed),
                    "commutation",
                    verifier,
                    l=l,
                )
            )

        pair_labels = generic_labels(md, m, 2 * self.pairs, rng)
        for l, k in zip(pair_labels[0::2], pair_labels[1::2]):
            Ml, Mk = make_M(l, m, md), make_M(k, m, md)
            samples = verifier.samples_for([Ml @ Mk, Mk @ Ml])
            report = family.verify_pair_commutation(l, k, m, md, samples, tol)
            results.append(self.result("family.pair_commutation", report.residual, "commutation", verifier, l=l, k=k))

        if m >= 1 and self.random_labels:
            l = labels[-1]
            M = make_M(l, m, md)
            residual = family.perturbed_commutation_residual(l, m, md, verifier.samples_for([L @ M, M @ L]))
            results.append(self.control("family.commutation_control", residual, "commutation", verifier, l=l))
        return results


class RecurrenceCheck(Check):
    """L M_l = ([l+m]/[l]) M_{l-1} + ([l-m]/[l]) M_{l+1} and M_{l+omega} = M_l T_omega."""

    name = "family.recurrence"

    def __init__(self, m: int, count: int = 5) -> None:
        super().__init__(m)
        self.count = count

    def apply(self, verifier) -> list[CheckResult]:
        md, m = verifier.md, self.m
        results: list[CheckResult] = []
        for l in generic_labels(md, m, self.count, self.rng(verifier)):
            ops = [make_L(m, md) @ make_M(l, m, md), make_M(l - 1, m, md), make_M(l + 1, m, md)]
            report = family.verify_recurrence(l, m, md, verifier.samples_for(ops), verifier.tol("recurrence"))
            results.append(self.result("family.recurrence", report.residual, "recurrence", verifier, l=l))

            ops = [make_M(l + md.omega, m, md), make_M(l, m, md)]
            report = family.verify_omega_shift(l, m, md, verifier.samples_for(ops), verifier.tol("omega_shift"))
            results.append(self.result("family.omega_shift", report.residual, "omega_shift", verifier, l=l))
        return results


class ProductRuleCheck(Check):
    """M_l M_k = sum_j A^l_j(k) M_{k+j} for random pairs."""

    name = "family.product_rule"

    def __init__(self, m: int, pairs: int = 3) -> None:
        super().__init__(m)
        self.pairs = pairs

    def apply(self, verifier) -> list[CheckResult]:
        md, m = verifier.md, self.m
        labels = generic_labels(md, m, 2 * self.pairs, self.rng(verifier))
        results: list[CheckResult] = []
        for l, k in zip(labels[0::2], labels[1::2]):
            ops = [make_M(l, m, md) @ make_M(k, m, md)] + [
                make_M(k + l - m + 2 * r, m, md) for r in range(m + 1)
            ]
            report = family.verify_product_rule(l, k, m, md, verifier.samples_for(ops), verifier.tol("product_rule"))
            results.append(self.result("family.product_rule", report.residual, "product_rule", verifier, l=l, k=k))
        return results
