from .check import Check, CheckResult
from .elliptic_checks import EllipticCheck
from .family_checks import (
    CommutationCheck,
    FamilyIdentityCheck,
    ProductRuleCheck,
    RecurrenceCheck,
    StructureCheck,
)
from .bethe_checks import BetheCheck
from .curve_checks import CurveCheck

__all__ = [
    "Check",
    "CheckResult",
    "EllipticCheck",
    "FamilyIdentityCheck",
    "StructureCheck",
    "CommutationCheck",
    "RecurrenceCheck",
    "ProductRuleCheck",
    "BetheCheck",
    "CurveCheck",
]
