"""
Newton multistart and predictor-corrector continuation for the Bethe system.

At fixed c the system F_i(t) = b_i(t) - exp(2 gamma c), i = 1..m, is square
in the m unknown roots. It is solved on (Re t, Im t) by scipy.optimize.root
with a central-difference Jacobian; since b_i is meromorphic a real step
gives the complex derivative.
"""

from __future__ import annotations

import functools
import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy import optimize

from QLame.bethe.bethe_point import BethePoint
from QLame.bethe.equations import bethe_residual, bethe_vector
from QLame.elliptic import ModularData, lattice_distance
from QLame.errors import ContinuationStallError, PoleProximityError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NewtonSettings:
    fd_step: float = 1e-6
    converge_tol: float = 1e-12
    accept_tol: float = 1e-10
    max_iter: int = 100  # function evaluations per root solve
    starts: int = 64
    seed_perturbation: float = 0.05
    dedup_tol: float = 1e-6
    # continuation
    max_corrector_move: float = 0.5
    min_step: float = 1e-4


class BetheSolver:
    """
    Solver for b_i(t) = exp(2 gamma c) at a fixed coupling index m.

    Parameters
    ----------
    m : int
        Number of Bethe roots.
    md : ModularData
        Lattice parameters.
    settings : NewtonSettings, optional
        Newton and continuation constants.
    seed : int, optional
        Seed of the random initial guesses, by default 0.
    """

    def __init__(
        self,
        m: int,
        md: ModularData,
        settings: Optional[NewtonSettings] = None,
        seed: int = 0,
    ):
        if m < 0:
            raise ValueError(f"m must be nonnegative, got {m}")
        self.m = m
        self.md = md
        self.settings = settings or NewtonSettings()
        self.seed = seed

    def __repr__(self) -> str:
        return f"BetheSolver(m={self.m}, gamma={self.md.gamma}, tau={self.md.tau})"

    # ------------------------------------------------------------------
    # Newton
    # ------------------------------------------------------------------
    def _F(self, t: np.ndarray, target: complex) -> np.ndarray:
        return (bethe_vector(t, self.m, self.md) - target) / abs(target)

    def _jacobian(self, t: np.ndarray, target: complex) -> np.ndarray:
        h = self.settings.fd_step
        J = np.empty((self.m, self.m), dtype=complex)
        for i in range(self.m):
            e = np.zeros(self.m, dtype=complex)
            e[i] = h
            J[:, i] = (self._F(t + e, target) - self._F(t - e, target)) / (2 * h)
        return J

    def _real_system(self, target: complex):
        """
        F and its Jacobian on (Re t, Im t). F is analytic in t, so the real
        Jacobian is the block [[Re J, -Im J], [Im J, Re J]].
        """
        m = self.m

        def fun(z: np.ndarray) -> np.ndarray:
            y = self._F(z[:m] + 1j * z[m:], target)
            if not np.all(np.isfinite(y)):
                raise PoleProximityError("non-finite Bethe residual")
            return np.concatenate([y.real, y.imag])

        def jac(z: np.ndarray) -> np.ndarray:
            J = self._jacobian(z[:m] + 1j * z[m:], target)
            return np.block([[J.real, -J.imag], [J.imag, J.real]])

        return fun, jac

    def newton(self, t0: Sequence[complex], c: complex) -> Optional[np.ndarray]:
        """
        Powell-hybrid Newton solve from ``t0`` (``scipy.optimize.root``);
        returns the converged roots or ``None`` when the solve fails.
        """
        s = self.settings
        target = np.exp(2 * self.md.gamma * complex(c))
        t0 = np.array(t0, dtype=complex)
        fun, jac = self._real_system(target)
        try:
            sol = optimize.root(
                fun,
                np.concatenate([t0.real, t0.imag]),
                jac=jac,
                method="hybr",
                options={"xtol": s.converge_tol, "maxfev": s.max_iter},
            )
            t = sol.x[: self.m] + 1j * sol.x[self.m :]
            err = float(np.max(np.abs(self._F(t, target))))
        except (np.linalg.LinAlgError, PoleProximityError):
            return None

        logger.debug("root after %d evaluations -> max. rel. error = %8.1e (%s)", sol.nfev, err, sol.message)
        return t if np.isfinite(err) and err < s.accept_tol else None

    # ------------------------------------------------------------------
    # Multistart
    # ------------------------------------------------------------------
    def initial_guesses(self, starts: Optional[int] = None) -> list[np.ndarray]:
        """
        Random points of the fundamental parallelogram, plus perturbed copies
        of the degenerate points P+ = (-(m-1), ..., -1, 0) and P- = -P+.
        """
        s = self.settings
        starts = s.starts if starts is None else starts
        rng = np.random.default_rng(self.seed)
        p_plus = -np.arange(self.m - 1, -1, -1, dtype=complex)
        shift = s.seed_perturbation * (1 + 1j)
        guesses = [p_plus + shift, -p_plus - shift]
        while len(guesses) < starts:
            u = rng.uniform(0.0, 1.0, self.m)
            v = rng.uniform(0.0, 1.0, self.m)
            guesses.append(u * self.md.omega + v * self.md.omega_prime)
        return guesses[:starts]

    def accept(self, t: np.ndarray, c: complex) -> Optional[BethePoint]:
        point = BethePoint(tuple(t), c, bethe_residual(t, c, self.m, self.md), self.md)
        if point.residual >= self.settings.accept_tol:
            return None
        if not point.is_separated():
            logger.warning("discarded Bethe solution violating separation: %s", point.t)
            return None
        if not point.is_normalizable():
            logger.warning("discarded Bethe solution with vanishing [t_j]: %s", point.t)
            return None
        return point

    def same_solution(self, a: BethePoint, b: BethePoint) -> bool:
        """Equal up to permutation and lattice translation of single roots."""
        tol = self.settings.dedup_tol
        for perm in itertools.permutations(range(self.m)):
            if all(
                lattice_distance(a.t[i] - b.t[j], self.md) < tol
                for i, j in enumerate(perm)
            ):
                return True
        return False

    def _solve_start(self, guess: np.ndarray, c: complex) -> Optional[BethePoint]:
        t = self.newton(guess, c)
        return None if t is None else self.accept(t, c)

    def solve_given_c(
        self, c: complex, starts: Optional[int] = None, workers: Union[int, Callable] = 1
    ) -> list[BethePoint]:
        """
        All distinct solutions found from the multistart guesses at fixed c.

        The starts are independent and may fan out: ``workers`` is either a
        thread count or a map-like callable (as ``scipy.optimize.brute``
        takes). Deduplication runs afterwards in start order, so the result
        does not depend on ``workers``. An empty list means no start
        converged; it is not an error.
        """
        c = complex(c)
        if self.m == 0:
            return [BethePoint((), c, 0.0, self.md)]

        guesses = self.initial_guesses(starts)
        solve = functools.partial(self._solve_start, c=c)
        if callable(workers):
            candidates = list(workers(solve, guesses))
        elif workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                candidates = list(pool.map(solve, guesses))
        else:
            candidates = [solve(guess) for guess in guesses]

        found: list[BethePoint] = []
        for point in candidates:
            if point is None:
                continue
            if not any(self.same_solution(point, other) for other in found):
                found.append(point)
        logger.info("c=%s: %d distinct Bethe solution(s)", c, len(found))
        return found

    # ------------------------------------------------------------------
    # Continuation
    # ------------------------------------------------------------------
    def _correct(
        self, predicted: np.ndarray, c: complex
    ) -> Optional[BethePoint]:
        t = self.newton(predicted, c)
        if t is None:
            return None
        if np.max(np.abs(t - predicted)) > self.settings.max_corrector_move:
            logger.debug("corrector moved too far at c=%s", c)
            return None
        return self.accept(t, c)

    def trace_curve(
        self, c_path: Sequence[complex], start: Optional[BethePoint] = None
    ) -> list[BethePoint]:
        """
        Follow one solution branch along ``c_path``.

        The first point comes from ``start`` or from ``solve_given_c`` at
        c_path[0]. Each step uses a secant predictor in c and a Newton
        corrector; a failed corrector halves the step until it drops below
        ``min_step``.

        Raises
        ------
        ContinuationStallError
            When no solution exists at c_path[0] or the step underflows.
        """
        path = [complex(c) for c in c_path]
        if not path:
            return []
        if start is None:
            seeds = self.solve_given_c(path[0])
            if not seeds:
                raise ContinuationStallError(f"no Bethe solution at c={path[0]}")
            start = seeds[0]
        if self.m == 0:
            return [BethePoint((), c, 0.0, self.md) for c in path]

        s = self.settings
        previous: Optional[BethePoint] = None
        current = start
        accepted = [start]
        for c_target in path[1:]:
            while current.c != c_target:
                step = c_target - current.c
                while True:
                    full = step == c_target - current.c
                    c_try = c_target if full else current.c + step
                    predicted = np.array(current.t)
                    if previous is not None and previous.c != current.c:
                        slope = (np.array(current.t) - np.array(previous.t)) / (
                            current.c - previous.c
                        )
                        predicted = predicted + slope * step
                    point = self._correct(predicted, c_try)
                    if point is not None:
                        break
                    step /= 2
                    logger.info("halving continuation step to %.2e at c=%s", abs(step), current.c)
                    if abs(step) < s.min_step:
                        raise ContinuationStallError(
                            f"continuation stalled at c={current.c}", last_point=current
                        )
                previous, current = current, point
            accepted.append(current)
        return accepted


def solve_given_c(
    c: complex,
    m: int,
    md: ModularData,
    starts: int = 64,
    seed: int = 0,
    workers: Union[int, Callable] = 1,
) -> list[BethePoint]:
    return BetheSolver(m, md, seed=seed).solve_given_c(c, starts, workers)


def trace_curve(
    c_path: Sequence[complex],
    m: int,
    md: ModularData,
    start: Optional[BethePoint] = None,
    seed: int = 0,
) -> list[BethePoint]:
    return BetheSolver(m, md, seed=seed).trace_curve(c_path, start)
