from __future__ import annotations

import logging

import numpy as np

from QLame.bethe import (
    BetheSolver,
    eigen_residual,
    eps_L,
    eps_N,
    eps_l,
    multiplier_ellipticity_check,
    product_rule_residual,
    psi_zeros,
    residual_transformed_eq,
)
from QLame.bethe.transformed import ellipticity_avoid_points
from QLame.checks.check import Check, CheckResult
from QLame.difference_operator import SampleSet
from QLame.elliptic import ell_fact
from QLame.family import generic_labels, make_L, make_M, make_N

logger = logging.getLogger(__name__)

DEFAULT_C_VALUES = (0.25, 0.3, 0.45 + 0.2j, 0.6 - 0.1j, 0.8 + 0.4j)


class BetheCheck(Check):
    """
    Solves the Bethe system at a few values of c and certifies every
    accepted point: Bethe residual, eigenvalue equations of L, M_l and N,
    the transformed equation and the ellipticity of the multipliers. A
    random (t, c) that solves nothing must fail the eigenvalue equation of L.
    """

    name = "bethe"

    def __init__(self, m: int, c_values=DEFAULT_C_VALUES, labels: int = 5, points_per_c: int = 2) -> None:
        super().__init__(m)
        self.c_values = tuple(complex(c) for c in c_values)
        self.labels = labels
        self.points_per_c = points_per_c

    def apply(self, verifier) -> list[CheckResult]:
        md, m = verifier.md, self.m
        rng = self.rng(verifier)
        solver = BetheSolver(m, md, seed=verifier.config.seed)
        L, N = make_L(m, md), make_N(m, md)
        results: list[CheckResult] = []

        for c in self.c_values:
            points = solver.solve_given_c(c)
            results.append(CheckResult("bethe.solve", {"m": m, "c": c}, 0.0 if points else 1.0, 0.5))
            verifier.bethe_points.setdefault(m, []).extend(points)
            if not points:
                logger.warning("no Bethe solution found for m=%d at c=%s", m, c)

            for index, point in enumerate(points[: self.points_per_c]):
                params = {"c": c, "point": index}
                t = point.t
                results.append(self.result("bethe.residual", point.residual, "bethe", verifier, **params))

                labels = generic_labels(md, m, self.labels, rng, complex_labels=False)
                Ms = [make_M(l, m, md) for l in labels]
                pts = verifier.samples_for([L, N, *Ms], avoid=psi_zeros(t), count=20)

                X = eps_L(t, point.c, m, md)
                Y = eps_N(t, point.c, m, md)
                results.append(
                    self.result("bethe.eigen_L", eigen_residual(L, t, point.c, X, pts.points, m, md), "eigen", verifier, **params)
                )
                results.append(
                    self.result("bethe.eigen_N", eigen_residual(N, t, point.c, Y, pts.points, m, md), "eigen", verifier, **params)
                )
                for l, M in zip(labels, Ms):
                    eps = eps_l(l, t, point.c, m, md)
                    results.append(
                        self.result(
                            "bethe.eigen_M",
                            eigen_residual(M, t, point.c, eps, pts.points, m, md),
                            "eigen",
                            verifier,
                            l=l,
                            **params,
                        )
                    )
                if len(labels) >= 2:
                    results.append(
                        self.result(
                            "bethe.product_rule",
                            product_rule_residual(labels[0], labels[1], t, point.c, m, md),
                            "eigen",
                            verifier,
                            **params,
                        )
                    )

                if m >= 1:
                    lame_multiple = eps_l(m - 1, t, point.c, m, md)
                    ratio = ell_fact(2 * m - 1, md) / ell_fact(m - 1, md) * X
                    results.append(
                        CheckResult(
                            "bethe.eps_lame_member",
                            {"m": m, **params},
                            abs(lame_multiple - ratio) / max(1.0, abs(ratio)),
                            verifier.tol("eigen"),
                        )
                    )
                eps_difference = eps_l(m + 1, t, point.c, m, md) - eps_l(-m - 1, t, point.c, m, md)
                results.append(
                    CheckResult(
                        "bethe.eps_N_difference",
                        {"m": m, **params},
                        abs(eps_difference - Y) / max(1.0, abs(Y)),
                        verifier.tol("eigen"),
                    )
                )

                results.extend(self._symmetries(point, X, Y, verifier, params))

                tr_pts = verifier.samples_for([L], avoid=psi_zeros(t) + [complex(j) for j in range(-1, m + 2)], count=20)
                results.append(
                    self.result(
                        "bethe.transformed_equation",
                        residual_transformed_eq(t, point.c, X, tr_pts.points, m, md),
                        "transformed",
                        verifier,
                        **params,
                    )
                )
                ell_pts = verifier.samples_for([], avoid=ellipticity_avoid_points(t, m), count=20)
                report = multiplier_ellipticity_check(t, point.c, m, md, ell_pts, verifier.tol("ellipticity"))
                results.append(self.result("bethe.multiplier_ellipticity", report.residual, "ellipticity", verifier, **params))

        if m >= 1:
            residual = random_point_eigen_residual(m, md, seed=verifier.config.seed)
            results.append(self.control("bethe.eigen_control", residual, "eigen", verifier))
        return results

    def _symmetries(self, point, X, Y, verifier, params) -> list[CheckResult]:
        """Partner, Z-action and lattice translations of a solved point."""
        m, md = self.m, verifier.md
        partner = point.partner()
        shifted = point.shift_c()
        partner_residual = max(
            partner.residual,
            abs(eps_L(partner.t, partner.c, m, md) - X) / max(1.0, abs(X)),
            abs(eps_N(partner.t, partner.c, m, md) + Y) / max(1.0, abs(Y)),
        )
        shift_residual = max(
            shifted.residual,
            abs(eps_L(shifted.t, shifted.c, m, md) + X) / max(1.0, abs(X)),
            abs(eps_N(shifted.t, shifted.c, m, md) + Y) / max(1.0, abs(Y)),
        )
        results = [
            self.result("bethe.partner_symmetry", partner_residual, "eigen", verifier, **params),
            self.result("bethe.shift_c_symmetry", shift_residual, "eigen", verifier, **params),
        ]
        if m >= 1:
            lattice_residual = max(
                point.translate(0, "omega").residual,
                point.translate(0, "omega_prime").residual,
            )
            results.append(self.result("bethe.lattice_translation", lattice_residual, "bethe", verifier, **params))
        return results


def random_point_eigen_residual(m: int, md, seed: int = 0) -> float:
    """Eigen-residual of L at a random (t, c) that solves nothing."""
    rng = np.random.default_rng(seed)
    t = tuple(complex(a, b) for a, b in zip(rng.uniform(0.2, 1.5, m), rng.uniform(0.1, 0.9, m)))
    c = complex(rng.uniform(0.1, 0.9), rng.uniform(-0.3, 0.3))
    L = make_L(m, md)
    pts = SampleSet.generate(md, 20, seed, operators=[L], avoid=psi_zeros(t))
    return eigen_residual(L, t, c, eps_L(t, c, m, md), pts.points, m, md)
