"""Rank-one probes, Legendre-Hadamard scans and scalar inequality checks."""
from .inequalities import (
    baker_ericksen_check,
    baker_ericksen_ordering_check,
    convexify_1d_check,
    convexify_1d_coefficient,
    criterion_2d,
    max_convexify_coefficient,
    monotonicity_necessity_check,
    profile_derivatives,
    sendova_walton_check,
)
from .probes import (
    CriticalPointVerdict,
    LineDerivatives,
    LineProfile,
    RankOneProbe,
    concave_critical_point,
    line_derivatives,
    line_profile,
)
from .reports import ConvexityReport, Verdict
from .scan import lh_scan
from .search import SearchConfig, SearchResult, search_violation
