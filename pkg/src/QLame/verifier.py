from __future__ import annotations

import logging
from typing import Iterable, Optional

import pandas as pd

from QLame import __version__
from QLame.bethe import BethePoint
from QLame.checks import (
    BetheCheck,
    Check,
    CheckResult,
    CommutationCheck,
    CurveCheck,
    EllipticCheck,
    FamilyIdentityCheck,
    ProductRuleCheck,
    RecurrenceCheck,
    StructureCheck,
)
from QLame.data_wrangling.config_loader import RunConfig
from QLame.difference_operator import DifferenceOperator, SampleSet
from QLame.elliptic import GUARD
from QLame.spectral_curve import SpectralFit

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


class Report:
    """Ordered collection of check results plus the configuration echo."""

    def __init__(self, entries: Iterable[CheckResult], config: RunConfig):
        self.entries = sorted(entries, key=lambda e: e.sort_key)
        self.config = config

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    @property
    def failures(self) -> list[CheckResult]:
        return [e for e in self.entries if not e.passed]

    def summary(self) -> dict:
        n_failed = len(self.failures)
        return {
            "total": len(self.entries),
            "passed": len(self.entries) - n_failed,
            "failed": n_failed,
            "overall": self.passed,
        }

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "version": __version__,
            "config": self.config.as_dict(),
            "summary": self.summary(),
            "entries": [e.as_dict() for e in self.entries],
        }

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [
                {
                    "name": e.name,
                    "params": ", ".join(f"{k}={v}" for k, v in e.as_dict()["params"].items()),
                    "residual": e.residual,
                    "threshold": e.threshold,
                    "passed": e.passed,
                }
                for e in self.entries
            ],
            columns=["name", "params", "residual", "threshold", "passed"],
        )

    def __repr__(self) -> str:
        s = self.summary()
        return f"Report({s['passed']}/{s['total']} passed)"


class Verifier:
    """
    Runs verification checks for a RunConfig and collects a Report.

    Checks are added per coupling index with ``add_checks`` or all at once
    with ``add_default_suite``; ``run`` applies them in insertion order.
    Bethe points and curve fits found on the way are kept for inspection.

    Examples
    --------
    >>> verifier = Verifier(RunConfig(m_list=[1]))
    >>> verifier.add_default_suite()
    >>> report = verifier.run()
    >>> report.summary()["failed"]
    0
    """

    def __init__(self, config: Optional[RunConfig] = None, name: str = "qlame"):
        self.config = config or RunConfig()
        self.md = self.config.modular_data
        self.name = name
        self.guard = GUARD
        self.checks: list[Check] = []
        self.bethe_points: dict[int, list[BethePoint]] = {}
        self.fits: dict[int, SpectralFit] = {}
        self._sample_calls = 0

    def tol(self, name: str) -> float:
        return self.config.tolerances[name]

    def samples_for(
        self,
        operators: Iterable[DifferenceOperator],
        avoid: Iterable[complex] = (),
        count: Optional[int] = None,
    ) -> SampleSet:
        """A fresh guarded sample set; successive calls use successive seeds."""
        self._sample_calls += 1
        return SampleSet.generate(
            self.md,
            count or self.config.sample_count,
            seed=self.config.seed * 100_003 + self._sample_calls,
            operators=operators,
            avoid=avoid,
            guard=self.guard,
        )

    def add_checks(self, checks: list[Check]) -> None:
        self.checks.extend(checks)

    def add_default_suite(self) -> None:
        self.add_checks([EllipticCheck()])
        for m in self.config.m_list:
            self.add_checks(
                [
                    FamilyIdentityCheck(m),
                    StructureCheck(m),
                    CommutationCheck(m),
                    RecurrenceCheck(m),
                    ProductRuleCheck(m),
                    BetheCheck(m),
                    CurveCheck(m),
                ]
            )

    def run(self) -> Report:
        if not self.checks:
            raise ValueError("No checks added, please add checks first.")
        entries: list[CheckResult] = []
        for check in self.checks:
            logger.info("running %r", check)
            results = check.apply(self)
            failed = sum(not r.passed for r in results)
            logger.info("%r: %d result(s), %d failed", check, len(results), failed)
            entries.extend(results)
        return Report(entries, self.config)

    def __repr__(self) -> str:
        return f"Verifier({self.name}, m_list={self.config.m_list})"
