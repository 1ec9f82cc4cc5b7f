"""Monte-Carlo summaries."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MCEstimate:
    """Sample mean with standard error ``std(ddof=1) / sqrt(trials)``."""

    mean: float
    stderr: float
    trials: int

    @classmethod
    def from_samples(cls, values) -> "MCEstimate":
        x = np.asarray(values, dtype=np.float64).reshape(-1)
        if x.size < 1:
            raise ValueError("need at least one trial")
        se = float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
        return cls(float(x.mean()), se, int(x.size))

    def __str__(self) -> str:
        return f"{self.mean:.6g} ± {self.stderr:.2g} (T={self.trials})"


@dataclass(frozen=True)
class PairedRatio:
    """Ratio of means of paired samples ``X`` (algorithm) and ``Y`` (baseline).

    The standard error comes from the delta method on the paired difference
    ``X - R*Y``, so variance shared by both samples cancels.
    """

    ratio: float
    stderr: float
    num: MCEstimate
    den: MCEstimate
    diff: MCEstimate

    @classmethod
    def from_samples(cls, x, y) -> "PairedRatio":
        x = np.asarray(x, dtype=np.float64).reshape(-1)
        y = np.asarray(y, dtype=np.float64).reshape(-1)
        if x.shape != y.shape:
            raise ValueError("paired samples must have equal length")
        num, den = MCEstimate.from_samples(x), MCEstimate.from_samples(y)
        diff = MCEstimate.from_samples(x - y)
        if den.mean == 0.0:
            r = 1.0 if num.mean == 0.0 else math.inf
            return cls(r, 0.0 if num.mean == 0.0 else math.inf, num, den, diff)
        r = num.mean / den.mean
        resid = MCEstimate.from_samples(x - r * y)
        return cls(r, resid.stderr / den.mean, num, den, diff)
