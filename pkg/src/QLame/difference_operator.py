"""
Finite difference operators ``M = sum_j A_j(x) T_j`` with ``T_j f(x) = f(x + j)``.

Coefficients are evaluable closures, not symbolic expressions. Operators are
immutable; every operation returns a new operator. Internally an operator
evaluates all of its coefficients at once on a numpy array of points, so a
composition evaluates its right factor a single time on the stacked shifted
points instead of once per coefficient.
"""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike

from QLame.elliptic import GUARD, ModularData, lattice_distance
from QLame.errors import ComplexShiftError, PoleProximityError

logger = logging.getLogger(__name__)

SHIFT_TOL = 1e-9
PRUNE_TOL = 1e-12
OVERFLOW_RATIO = 1e12
SAMPLE_OFFSET = complex(np.sqrt(2) / 17, np.sqrt(3) / 29)
MAX_EXPR_LENGTH = 160

# Fixed generic points on which vanishing coefficients are detected and the
# typical size of each coefficient is measured.
_PRUNE_POINTS = (
    SAMPLE_OFFSET
    + np.random.default_rng(1998).uniform(-3.0, 3.0, 20)
    + 1j * np.random.default_rng(2002).uniform(0.2, 2.5, 20)
)

Evaluator = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class CoefficientFn:
    """
    A complex coefficient function of one complex variable.

    Parameters
    ----------
    fn : callable
        Vectorized map from an array of points to an array of values.
    expr : str
        Human-readable formula, for display only.
    poles : tuple of complex
        Points (modulo the period lattice) where ``fn`` may be singular.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    expr: str
    poles: tuple[complex, ...] = ()

    def __call__(self, x: ArrayLike):
        x_arr = np.asarray(x, dtype=complex)
        values = np.asarray(self.fn(x_arr), dtype=complex)
        values = np.broadcast_to(values, x_arr.shape)
        return complex(values) if x_arr.ndim == 0 else np.array(values)

    @classmethod
    def constant(cls, value: complex, expr: Optional[str] = None) -> CoefficientFn:
        value = complex(value)
        return cls(
            fn=lambda x: np.full(np.shape(x), value, dtype=complex),
            expr=expr if expr is not None else f"{value:.6g}",
        )


@dataclass(frozen=True)
class EqualityReport:
    passed: bool
    residual: float
    tolerance: float
    worst_shift: Optional[complex] = None
    mismatched_shift: Optional[complex] = None

    def __bool__(self) -> bool:
        return self.passed


def _find_or_add(keys: list[complex], shift: complex, tol: float) -> int:
    for i, key in enumerate(keys):
        if abs(key - shift) <= tol:
            return i
    keys.append(shift)
    return len(keys) - 1


def _unique_poles(poles: Iterable[complex]) -> tuple[complex, ...]:
    seen: dict[tuple[float, float], complex] = {}
    for p in poles:
        p = complex(p)
        seen.setdefault((round(p.real, 9), round(p.imag, 9)), p)
    return tuple(seen.values())


def _short(expr: str) -> str:
    return expr if len(expr) <= MAX_EXPR_LENGTH else expr[: MAX_EXPR_LENGTH - 3] + "..."


class DifferenceOperator:
    """
    A difference operator with finitely many complex shifts.

    Parameters
    ----------
    terms : iterable of (shift, CoefficientFn)
        Terms of the operator. Shifts closer than ``shift_tol`` are merged by
        adding their coefficients.
    shift_tol : float, optional
        Tolerance under which two shifts are considered equal, by default 1e-9.
    prune_tol : float, optional
        Coefficients whose modulus stays below ``prune_tol`` times the local
        coefficient scale at every pruning point are dropped, by default 1e-12.

    Examples
    --------
    >>> shift = DifferenceOperator.shift(1)
    >>> shift.apply(lambda x: x, 2.0)
    (3+0j)
    """

    def __init__(
        self,
        terms: Iterable[tuple[complex, CoefficientFn]] = (),
        shift_tol: float = SHIFT_TOL,
        prune_tol: float = PRUNE_TOL,
    ):
        keys: list[complex] = []
        groups: list[list[CoefficientFn]] = []
        for shift, coeff in terms:
            g = _find_or_add(keys, complex(shift), shift_tol)
            if g == len(groups):
                groups.append([])
            groups[g].append(coeff)

        def evaluator(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
            values = np.zeros((len(groups), x.size), dtype=complex)
            mags = np.zeros((len(groups), x.size))
            for g, coeffs in enumerate(groups):
                for coeff in coeffs:
                    v = coeff(x)
                    values[g] += v
                    mags[g] += np.abs(v)
            return values, mags

        exprs = [" + ".join(c.expr for c in coeffs) for coeffs in groups]
        poles = [p for coeffs in groups for c in coeffs for p in c.poles]
        self._init(keys, evaluator, exprs, poles, shift_tol, prune_tol, prune=True)

    def _init(
        self,
        shifts: Sequence[complex],
        evaluator: Evaluator,
        exprs: Sequence[str],
        poles: Iterable[complex],
        shift_tol: float,
        prune_tol: float,
        prune: bool,
    ) -> None:
        self.shift_tol = shift_tol
        self.prune_tol = prune_tol
        keep = list(range(len(shifts)))
        if prune and shifts:
            values, mags = evaluator(_PRUNE_POINTS)
            scale = mags.max(axis=0)
            keep = [
                g
                for g in range(len(shifts))
                if not np.all(np.abs(values[g]) <= prune_tol * scale)
            ]
            if len(keep) < len(shifts):
                logger.debug(
                    "pruned %d vanishing coefficient(s)", len(shifts) - len(keep)
                )
        self._shifts: tuple[complex, ...] = tuple(complex(shifts[g]) for g in keep)
        self._exprs: tuple[str, ...] = tuple(_short(exprs[g]) for g in keep)
        self._poles: tuple[complex, ...] = _unique_poles(poles)
        if len(keep) == len(shifts):
            self._evaluator = evaluator
        else:
            index = np.array(keep, dtype=int)

            def selected(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
                values, mags = evaluator(x)
                return values[index], mags[index]

            self._evaluator = selected

    @classmethod
    def _from_evaluator(
        cls,
        shifts: Sequence[complex],
        evaluator: Evaluator,
        exprs: Sequence[str],
        poles: Iterable[complex],
        shift_tol: float = SHIFT_TOL,
        prune_tol: float = PRUNE_TOL,
        prune: bool = True,
    ) -> DifferenceOperator:
        op = cls.__new__(cls)
        op._init(shifts, evaluator, exprs, poles, shift_tol, prune_tol, prune)
        return op

    # ------------------------------------------------------------------
    # Constructors
    # ------------------------------------------------------------------
    @classmethod
    def identity(cls) -> DifferenceOperator:
        return cls([(0, CoefficientFn.constant(1.0, "1"))])

    @classmethod
    def shift(cls, j: complex) -> DifferenceOperator:
        """The pure shift T_j."""
        return cls([(j, CoefficientFn.constant(1.0, "1"))])

    @classmethod
    def zero(cls) -> DifferenceOperator:
        return cls([])

    # ------------------------------------------------------------------
    # Inspection
    # ------------------------------------------------------------------
    @property
    def shifts(self) -> tuple[complex, ...]:
        return self._shifts

    @property
    def poles(self) -> tuple[complex, ...]:
        return self._poles

    @property
    def terms(self) -> list[tuple[complex, CoefficientFn]]:
        return [
            (shift, self._coefficient_fn(i)) for i, shift in enumerate(self._shifts)
        ]

    def _coefficient_fn(self, i: int) -> CoefficientFn:
        def fn(x: np.ndarray) -> np.ndarray:
            flat = np.atleast_1d(x).ravel()
            return self._evaluator(flat)[0][i].reshape(np.shape(x))

        return CoefficientFn(fn=fn, expr=self._exprs[i], poles=self._poles)

    def coefficient(self, shift: complex) -> CoefficientFn:
        """The coefficient of T_shift; the zero function if absent."""
        for i, s in enumerate(self._shifts):
            if abs(s - shift) <= self.shift_tol:
                return self._coefficient_fn(i)
        return CoefficientFn.constant(0.0, "0")

    def coefficients(self, x: ArrayLike) -> np.ndarray:
        """All coefficient values at the points ``x``, shape (n_terms, n_points)."""
        flat = np.atleast_1d(np.asarray(x, dtype=complex)).ravel()
        return self._evaluator(flat)[0]

    def _evaluate(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self._evaluator(x)

    def __len__(self) -> int:
        return len(self._shifts)

    def is_zero(self) -> bool:
        return len(self._shifts) == 0

    def __repr__(self) -> str:
        if self.is_zero():
            return "DifferenceOperator(0)"
        body = " + ".join(
            f"({expr})T[{_fmt_shift(s)}]" for s, expr in zip(self._shifts, self._exprs)
        )
        return f"DifferenceOperator({_short(body)})"

    # ------------------------------------------------------------------
    # Action
    # ------------------------------------------------------------------
    @functools.cached_property
    def _reference_scale(self) -> np.ndarray:
        """Median modulus of each coefficient over the reference points; 0 where unknown."""
        if self.is_zero():
            return np.zeros(0)
        with np.errstate(all="ignore"):
            moduli = np.abs(self._evaluator(_PRUNE_POINTS)[0])
            moduli[~np.isfinite(moduli)] = np.nan
            scale = np.nanmedian(moduli, axis=1)
        return np.nan_to_num(scale, nan=0.0)

    def apply(self, f: Callable[[np.ndarray], np.ndarray], x: ArrayLike):
        """
        Evaluate (M f)(x) = sum_j A_j(x) f(x + j).

        ``f`` must accept numpy arrays of complex points.

        Raises
        ------
        PoleProximityError
            If a coefficient is not finite or exceeds 1e12 times its median
            modulus over the fixed reference points.
        """
        x_arr = np.asarray(x, dtype=complex)
        flat = np.atleast_1d(x_arr).ravel()
        if self.is_zero():
            result = np.zeros(flat.shape, dtype=complex)
        else:
            values, _ = self._evaluator(flat)
            moduli = np.abs(values)
            if not np.all(np.isfinite(values)):
                raise PoleProximityError("coefficient is not finite at an input point")
            scale = self._reference_scale[:, None]
            if np.any((scale > 0) & (moduli > OVERFLOW_RATIO * scale)):
                raise PoleProximityError(
                    "coefficient exceeds the overflow guard; point is too close to a pole"
                )
            result = np.zeros(flat.shape, dtype=complex)
            for i, s in enumerate(self._shifts):
                result += values[i] * np.asarray(f(flat + s), dtype=complex)
        return complex(result[0]) if x_arr.ndim == 0 else result.reshape(x_arr.shape)

    # ------------------------------------------------------------------
    # Algebra
    # ------------------------------------------------------------------
    def add(self, other: DifferenceOperator) -> DifferenceOperator:
        keys: list[complex] = []
        sources: list[list[tuple[int, int]]] = []
        for side, op in enumerate((self, other)):
            for i, shift in enumerate(op._shifts):
                g = _find_or_add(keys, shift, self.shift_tol)
                if g == len(sources):
                    sources.append([])
                sources[g].append((side, i))
        left, right = self._evaluator, other._evaluator

        def evaluator(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
            parts = (left(x), right(x))
            values = np.zeros((len(keys), x.size), dtype=complex)
            mags = np.zeros((len(keys), x.size))
            for g, members in enumerate(sources):
                for side, i in members:
                    values[g] += parts[side][0][i]
                    mags[g] += parts[side][1][i]
            return values, mags

        exprs = [
            " + ".join((self._exprs, other._exprs)[side][i] for side, i in members)
            for members in sources
        ]
        return self._from_evaluator(
            keys,
            evaluator,
            exprs,
            self._poles + other._poles,
            self.shift_tol,
            self.prune_tol,
        )

    def scale(self, factor: complex) -> DifferenceOperator:
        factor = complex(factor)
        if factor == 0 or self.is_zero():
            return DifferenceOperator.zero()
        inner = self._evaluator

        def evaluator(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
            values, mags = inner(x)
            return factor * values, abs(factor) * mags

        exprs = [f"{factor:.6g}*({e})" for e in self._exprs]
        return self._from_evaluator(
            self._shifts,
            evaluator,
            exprs,
            self._poles,
            self.shift_tol,
            self.prune_tol,
            prune=False,
        )

    def compose(self, other: DifferenceOperator) -> DifferenceOperator:
        """
        The product ``self o other``.

        The coefficient at s is ``sum_{j+k=s} A_j(x) B_k(x + j)``.
        """
        if self.is_zero() or other.is_zero():
            return DifferenceOperator.zero()
        a_shifts, b_shifts = self._shifts, other._shifts
        keys: list[complex] = []
        pairs: list[list[tuple[int, int]]] = []
        for ia, j in enumerate(a_shifts):
            for ib, k in enumerate(b_shifts):
                g = _find_or_add(keys, j + k, self.shift_tol)
                if g == len(pairs):
                    pairs.append([])
                pairs[g].append((ia, ib))

        left, right = self._evaluator, other._evaluator
        offsets = np.array(a_shifts, dtype=complex)

        def evaluator(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
            a_values, _ = left(x)
            stacked = (offsets[:, None] + x[None, :]).ravel()
            b_values, _ = right(stacked)
            b_values = b_values.reshape(len(b_shifts), len(a_shifts), x.size)
            values = np.zeros((len(keys), x.size), dtype=complex)
            mags = np.zeros((len(keys), x.size))
            for g, members in enumerate(pairs):
                for ia, ib in members:
                    contribution = a_values[ia] * b_values[ib, ia]
                    values[g] += contribution
                    mags[g] += np.abs(contribution)
            return values, mags

        exprs = [
            " + ".join(
                f"({self._exprs[ia]})*({other._exprs[ib]})|x->x{_fmt_shift(a_shifts[ia], sign=True)}"
                for ia, ib in members
            )
            for members in pairs
        ]
        poles = list(self._poles) + [p - j for p in other._poles for j in a_shifts]
        return self._from_evaluator(
            keys, evaluator, exprs, poles, self.shift_tol, self.prune_tol
        )

    def commutator(self, other: DifferenceOperator) -> DifferenceOperator:
        """[A, B] = AB - BA with vanishing coefficients pruned."""
        return self.compose(other).add(other.compose(self).scale(-1))

    def power(self, n: int) -> DifferenceOperator:
        if n < 0:
            raise ValueError(f"power needs n >= 0, got {n}")
        result = DifferenceOperator.identity()
        for _ in range(n):
            result = self.compose(result)
        return result

    def __add__(self, other: DifferenceOperator) -> DifferenceOperator:
        return self.add(other)

    def __sub__(self, other: DifferenceOperator) -> DifferenceOperator:
        return self.add(other.scale(-1))

    def __neg__(self) -> DifferenceOperator:
        return self.scale(-1)

    def __mul__(self, factor: complex) -> DifferenceOperator:
        return self.scale(factor)

    __rmul__ = __mul__

    def __matmul__(self, other: DifferenceOperator) -> DifferenceOperator:
        return self.compose(other)

    # ------------------------------------------------------------------
    # Symmetries
    # ------------------------------------------------------------------
    def conj_S(self) -> DifferenceOperator:
        """S M S with S f(x) = f(-x): the term (j, A_j(x)) becomes (-j, A_j(-x))."""
        inner = self._evaluator

        def evaluator(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
            return inner(-x)

        return self._from_evaluator(
            [-s for s in self._shifts],
            evaluator,
            [f"({e})|x->-x" for e in self._exprs],
            [-p for p in self._poles],
            self.shift_tol,
            self.prune_tol,
            prune=False,
        )

    def conj_U(self, inverse: bool = False) -> DifferenceOperator:
        """
        U M U^-1 with U f(x) = exp(pi i x) f(x): the coefficient of T_j is
        multiplied by exp(-pi i j). ``inverse=True`` conjugates the other way.
        """
        sign = 1.0 if inverse else -1.0
        phases = np.exp(sign * np.pi * 1j * np.array(self._shifts, dtype=complex))
        inner = self._evaluator

        def evaluator(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
            values, mags = inner(x)
            return phases[:, None] * values, np.abs(phases)[:, None] * mags

        return self._from_evaluator(
            self._shifts,
            evaluator,
            [f"exp({sign:+.0f}i*pi*{_fmt_shift(s)})*({e})" for s, e in zip(self._shifts, self._exprs)],
            self._poles,
            self.shift_tol,
            self.prune_tol,
            prune=False,
        )

    # ------------------------------------------------------------------
    # Degree and length
    # ------------------------------------------------------------------
    def _real_shifts(self) -> list[float]:
        if self.is_zero():
            raise ValueError("the zero operator has no degree")
        bad = [s for s in self._shifts if abs(s.imag) >= self.shift_tol]
        if bad:
            raise ComplexShiftError(
                f"degree and length need real shifts, got {_fmt_shift(bad[0])}"
            )
        return [s.real for s in self._shifts]

    @property
    def degree(self) -> float:
        return max(self._real_shifts())

    @property
    def length(self) -> float:
        shifts = self._real_shifts()
        return max(shifts) - min(shifts)

    # ------------------------------------------------------------------
    # Comparison
    # ------------------------------------------------------------------
    def equal_on(
        self, other: DifferenceOperator, samples: SampleSet, tol: float
    ) -> EqualityReport:
        """
        Coefficient-wise comparison on a sample set.

        Shifts are aligned within ``shift_tol``; a shift present on one side
        only is compared against zero. The residual at a point is scaled by
        max(1, largest coefficient modulus of either operator at that point).
        """
        x = np.asarray(samples.points, dtype=complex)
        a_values = self._evaluator(x)[0] if not self.is_zero() else np.zeros((0, x.size))
        b_values = other._evaluator(x)[0] if not other.is_zero() else np.zeros((0, x.size))

        keys: list[complex] = []
        rows: list[list[Optional[int]]] = []
        for side, op in enumerate((self, other)):
            for i, shift in enumerate(op._shifts):
                g = _find_or_add(keys, shift, self.shift_tol)
                if g == len(rows):
                    rows.append([None, None])
                rows[g][side] = i

        scale = np.ones(x.size)
        for block in (a_values, b_values):
            if block.size:
                scale = np.maximum(scale, np.abs(block).max(axis=0))

        worst, worst_shift, mismatched = 0.0, None, None
        zeros = np.zeros(x.size, dtype=complex)
        for shift, (ia, ib) in zip(keys, rows):
            a = a_values[ia] if ia is not None else zeros
            b = b_values[ib] if ib is not None else zeros
            diff = np.abs(a - b) / scale
            residual = float(np.max(diff)) if np.all(np.isfinite(diff)) else float("inf")
            if (ia is None or ib is None) and residual >= tol and mismatched is None:
                mismatched = shift
            if residual > worst or worst_shift is None:
                worst, worst_shift = max(worst, residual), shift
        passed = worst < tol and mismatched is None
        if not passed:
            logger.debug(
                "operators differ: residual %.3e at shift %s", worst, worst_shift
            )
        return EqualityReport(passed, worst, tol, worst_shift, mismatched)


def _fmt_shift(s: complex, sign: bool = False) -> str:
    s = complex(s)
    if abs(s.imag) < SHIFT_TOL:
        return f"{s.real:+.6g}" if sign else f"{s.real:.6g}"
    text = f"({s.real:.6g}{s.imag:+.6g}j)"
    return f"+{text}" if sign else text


@dataclass(frozen=True)
class SampleSet:
    """
    Generic sample points for coefficient-wise comparisons.

    Points are drawn uniformly from the period parallelogram spanned by
    omega and omega', translated by a fixed irrational offset, and rejected
    when closer than ``guard`` (modulo the lattice) to a forbidden point.
    """

    points: np.ndarray
    guard: float = GUARD

    def __len__(self) -> int:
        return len(self.points)

    @classmethod
    def generate(
        cls,
        md: ModularData,
        count: int = 50,
        seed: int = 0,
        operators: Iterable[DifferenceOperator] = (),
        avoid: Iterable[complex] = (),
        guard: float = GUARD,
        max_draws: int = 100_000,
    ) -> SampleSet:
        forbidden = np.array(
            _unique_poles(list(avoid) + [p for op in operators for p in op.poles]),
            dtype=complex,
        )
        rng = np.random.default_rng(seed)
        accepted: list[complex] = []
        draws = 0
        while len(accepted) < count:
            if draws >= max_draws:
                raise PoleProximityError(
                    f"could only place {len(accepted)} of {count} sample points"
                )
            u, v = rng.uniform(0.0, 1.0, 2)
            draws += 1
            x = SAMPLE_OFFSET + u * md.omega + v * md.omega_prime
            if forbidden.size and np.min(lattice_distance(x - forbidden, md)) <= guard:
                logger.debug("rejected sample point %s", x)
                continue
            accepted.append(x)
        return cls(np.array(accepted, dtype=complex), guard)
