"""Summary statistics for Monte Carlo experiments: Wilson intervals for
proportions, normal intervals for real-valued metrics, z-scores against
theory predictions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

__all__ = ["SummaryStats", "wilson_ci", "normal_ci", "summarize"]

_Z95 = 1.959963984540054


def wilson_ci(successes: int, trials: int, level: float = 0.95) -> tuple:
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 0 <= successes <= trials:
        raise ValueError("successes must lie in [0, trials]")
    if level != 0.95:
        raise ValueError("only the 95% level is supported")
    z = _Z95
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    lo = 0.0 if successes == 0 else max(0.0, center - half)  # exact at p̂ = 0
    hi = 1.0 if successes == trials else min(1.0, center + half)  # exact at p̂ = 1
    return (lo, hi)


def normal_ci(mean: float, variance: float, count: int) -> tuple:
    """Normal-approximation 95% interval for a sample mean."""
    if count < 1:
        raise ValueError("count must be >= 1")
    half = _Z95 * math.sqrt(max(variance, 0.0) / count)
    return (mean - half, mean + half)


@dataclass(frozen=True)
class SummaryStats:
    """Per-metric summary: sample moments, 95% CI, and the prediction the
    metric is compared against (z = (mean - predicted) / observed stderr)."""

    name: str
    count: int
    mean: float
    variance: float
    ci95: tuple
    predicted: Optional[float] = None
    scale: Optional[float] = None
    z: Optional[float] = None

    def as_dict(self) -> dict:
        return {
            "count": self.count,
            "mean": self.mean,
            "var": self.variance,
            "ci": [self.ci95[0], self.ci95[1]],
            "predicted": self.predicted,
            "scale": self.scale,
            "z": self.z,
        }


def summarize(name: str, values, predicted: Optional[float] = None,
              scale: Optional[float] = None, proportion: bool = False) -> SummaryStats:
    """Aggregate per-trial values.  Proportions (0/1 values) get Wilson
    intervals; real metrics get normal intervals with the sample stderr."""
    vals = list(values)
    count = len(vals)
    if count == 0:
        raise ValueError("no values to summarize")
    mean = sum(vals) / count
    variance = sum((x - mean) ** 2 for x in vals) / (count - 1) if count > 1 else 0.0
    if proportion:
        successes = int(round(sum(vals)))
        ci = wilson_ci(successes, count)
    else:
        ci = normal_ci(mean, variance, count)
    z = None
    if predicted is not None:
        stderr = math.sqrt(variance / count) if variance > 0 else 0.0
        z = (mean - predicted) / stderr if stderr > 0 else None
    return SummaryStats(name=name, count=count, mean=mean, variance=variance,
                        ci95=ci, predicted=predicted, scale=scale, z=z)
