"""
Ensemble Statistics
===================
Monte-Carlo means with standard errors, and the comparisons the reports
build on them.
"""

import math
from typing import Iterable, Optional, Sequence

import numpy as np

from spde_engine.config.thresholds import STANDARD_ERRORS
from spde_engine.models.results import EnsembleStatistic


# =========================
# MEANS AND STANDARD ERRORS
# =========================

def ensemble_mean(values: Iterable[float]) -> EnsembleStatistic:
    """
    Sample mean and standard error (ddof=1 stddev / sqrt(n)).

    The standard error is NaN when fewer than two finite values remain.
    """
    array = np.asarray(list(values), dtype=float)
    array = array[np.isfinite(array)]
    count = int(array.size)
    if count == 0:
        return EnsembleStatistic(mean=math.nan, standard_error=math.nan, count=0)
    mean = float(np.mean(array))
    if count < 2:
        return EnsembleStatistic(mean=mean, standard_error=math.nan, count=count)
    return EnsembleStatistic(mean=mean, standard_error=float(np.std(array, ddof=1) / math.sqrt(count)), count=count)


def scaled(stat: EnsembleStatistic, factor: float) -> EnsembleStatistic:
    """Statistic of factor·X for a deterministic factor."""
    return EnsembleStatistic(
        mean=stat.mean * factor,
        standard_error=stat.standard_error * abs(factor),
        count=stat.count,
    )


def within_standard_errors(stat: EnsembleStatistic, target: float = 0.0, errors: Optional[float] = None) -> bool:
    """|mean − target| <= errors·SE, errors defaulting to the documented 3 SE."""
    errors = STANDARD_ERRORS.value if errors is None else errors
    if not math.isfinite(stat.standard_error):
        return False
    return stat.within(target, errors)


# =========================
# FLATNESS
# =========================

def flatness(values: Sequence[float]) -> float:
    """max/min of positive values; 1.0 for all-zero input, inf if the min is 0."""
    array = np.asarray(values, dtype=float)
    high = float(np.max(array))
    low = float(np.min(array))
    if high == 0.0:
        return 1.0
    if low <= 0.0:
        return math.inf
    return high / low
