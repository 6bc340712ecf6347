"""Population-moment statistics and Pearson correlation.

All moments use divisor ``n`` (expectations over the empirical
distribution), and kurtosis is reported raw, so a normal distribution
sits at 3 rather than 0.  Central moments are computed in two passes
(mean first), which keeps them accurate on data spanning several orders
of magnitude.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

__all__ = [
    "StatsError",
    "EmptySeriesError",
    "InsufficientDataError",
    "ZeroVarianceError",
    "LengthMismatchError",
    "Series",
    "MomentSummary",
    "mean",
    "variance",
    "skewness",
    "kurtosis",
    "pearson",
    "moment_summary",
]


class StatsError(ValueError):
    """Base class for invalid statistical input."""


class EmptySeriesError(StatsError):
    pass


class InsufficientDataError(StatsError):
    pass


class ZeroVarianceError(StatsError):
    pass


class LengthMismatchError(StatsError):
    pass


class Series:
    """An ordered, immutable collection of finite observations."""

    __slots__ = ("values", "label")

    def __init__(self, values: Iterable[float], label: str = "") -> None:
        arr = np.array(values, dtype=np.float64).ravel()
        if not np.all(np.isfinite(arr)):
            bad = int(np.flatnonzero(~np.isfinite(arr))[0])
            raise StatsError(f"non-finite value at index {bad} in series {label!r}")
        arr.setflags(write=False)
        self.values = arr
        self.label = label

    def __repr__(self) -> str:
        return f"Series(n={self.values.size}, label={self.label!r})"

    def __len__(self) -> int:
        return self.values.size

    def __iter__(self):
        return iter(self.values.tolist())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Series):
            return NotImplemented
        return self.label == other.label and np.array_equal(self.values, other.values)

    __hash__ = None  # type: ignore[assignment]


SeriesLike = Union[Series, Iterable[float]]


@dataclass(frozen=True)
class MomentSummary:
    n: int
    mean: float
    variance: float
    skewness: float
    kurtosis: float

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "mean": self.mean,
            "variance": self.variance,
            "skewness": self.skewness,
            "kurtosis": self.kurtosis,
        }


def _values(s: SeriesLike) -> np.ndarray:
    if isinstance(s, Series):
        return s.values
    return Series(s).values


def _mean(x: np.ndarray) -> float:
    if x.size == 0:
        raise EmptySeriesError("mean of an empty series")
    m = float(np.mean(x))
    # one corrective pass absorbs the rounding error of the first sum
    return m + float(np.mean(x - m))


def _centered(x: np.ndarray, need: int = 2) -> tuple[np.ndarray, float]:
    """Return deviations from the mean and the population variance."""
    if x.size == 0:
        raise EmptySeriesError("empty series")
    if x.size < need:
        raise InsufficientDataError(f"need at least {need} observations, got {x.size}")
    if np.all(x == x[0]):
        return np.zeros_like(x), 0.0
    d = x - _mean(x)
    return d, float(np.mean(d * d))


def _dispersed(x: np.ndarray) -> tuple[np.ndarray, float]:
    d, m2 = _centered(x)
    scale = float(np.max(np.abs(x)))
    # a variance at rounding level of the data is indistinguishable from zero
    if m2 <= (4.0 * np.finfo(np.float64).eps * scale) ** 2:
        raise ZeroVarianceError("series has zero variance")
    return d, m2


def mean(s: SeriesLike) -> float:
    """Arithmetic mean."""
    return _mean(_values(s))


def variance(s: SeriesLike) -> float:
    """Population variance E[(x - mu)^2], divisor n."""
    return _centered(_values(s))[1]


def skewness(s: SeriesLike) -> float:
    """Third standardized central moment E[(x - mu)^3] / Var^(3/2)."""
    d, m2 = _dispersed(_values(s))
    return float(np.mean(d**3)) / m2**1.5


def kurtosis(s: SeriesLike) -> float:
    """Raw kurtosis E[(x - mu)^4] / Var^2 (normal distribution -> 3)."""
    d, m2 = _dispersed(_values(s))
    return float(np.mean(d**4)) / (m2 * m2)


def pearson(x: SeriesLike, y: SeriesLike) -> float:
    """Pearson correlation coefficient, clipped to [-1, 1]."""
    xv, yv = _values(x), _values(y)
    if xv.size != yv.size:
        raise LengthMismatchError(f"series lengths differ: {xv.size} != {yv.size}")
    dx, vx = _dispersed(xv)
    dy, vy = _dispersed(yv)
    r = float(np.mean(dx * dy)) / np.sqrt(vx * vy)
    return float(min(1.0, max(-1.0, r)))


def moment_summary(s: SeriesLike) -> MomentSummary:
    x = _values(s)
    d, m2 = _dispersed(x)
    return MomentSummary(
        n=int(x.size),
        mean=_mean(x),
        variance=m2,
        skewness=float(np.mean(d**3)) / m2**1.5,
        kurtosis=float(np.mean(d**4)) / (m2 * m2),
    )
