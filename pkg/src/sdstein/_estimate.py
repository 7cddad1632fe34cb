from __future__ import annotations

from typing import NamedTuple

import numpy as np


class Estimate(NamedTuple):
    """A Monte Carlo (or quadrature) value with its standard error."""

    value: float
    se: float

    def __float__(self):
        return float(self.value)


def mean_se(samples, axis=0):
    """Sample mean and standard error of iid draws along ``axis``."""
    samples = np.asarray(samples, dtype=float)
    n = samples.shape[axis]
    mean = samples.mean(axis=axis)
    if n < 2:
        return mean, np.zeros_like(mean)
    se = samples.std(axis=axis, ddof=1) / np.sqrt(n)
    return mean, se


def mc_estimate(samples) -> Estimate:
    m, s = mean_se(np.ravel(samples))
    return Estimate(float(m), float(s))


def combined_se(*ses):
    return float(np.sqrt(np.sum(np.square(ses))))
