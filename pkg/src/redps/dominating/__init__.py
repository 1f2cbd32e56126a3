from redps.dominating.qp import QpResult, min_rate_point
from redps.dominating.search import DominatingPoint, DominatingSet, find_dominating_set
from redps.dominating.verify import VerificationReport, verify_dominating_set

__all__ = [
    "QpResult",
    "min_rate_point",
    "DominatingPoint",
    "DominatingSet",
    "find_dominating_set",
    "VerificationReport",
    "verify_dominating_set",
]
