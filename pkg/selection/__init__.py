"""
ADAptation Selection
Dual-score informativeness and single-pass top-alpha% selection.
"""

from .scoring import (
    COMBINE_MODES,
    UNCERTAINTY_MODES,
    ScoringConfig,
    informativeness,
    representativeness_score,
    selection_count,
    uncertainty_score,
)
from .selector import (
    SELECTION_HEADER,
    SelectionReport,
    SelectionRow,
    select,
    write_selection_csv,
)

__all__ = [
    "COMBINE_MODES",
    "SELECTION_HEADER",
    "UNCERTAINTY_MODES",
    "ScoringConfig",
    "SelectionReport",
    "SelectionRow",
    "informativeness",
    "representativeness_score",
    "select",
    "selection_count",
    "uncertainty_score",
    "write_selection_csv",
]
