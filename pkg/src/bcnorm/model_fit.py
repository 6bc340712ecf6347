"""Density histograms and normal-curve fits to them."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .stats_core import SeriesLike, StatsError, _dispersed, _mean, _values

__all__ = [
    "DEFAULT_BINS",
    "FitError",
    "DegenerateRangeError",
    "FitMethod",
    "Histogram",
    "GaussianFit",
    "build_histogram",
    "normal_pdf",
    "histogram_rss",
    "fit_gaussian_moments",
    "fit_gaussian_least_squares",
]

DEFAULT_BINS = 50
MAX_ITER = 100
RSS_RTOL = 1e-10
# a least-squares normal further than this from the binned moments is
# describing only part of the histogram (e.g. one mode of several)
MAX_VARIANCE_RATIO = 2.0
MAX_MEAN_SHIFT_SD = 0.5


class FitError(ValueError):
    pass


class DegenerateRangeError(FitError):
    pass


class FitMethod(str, enum.Enum):
    MOMENTS = "moments"
    LEAST_SQUARES = "least_squares"


@dataclass(frozen=True)
class Histogram:
    bin_edges: np.ndarray
    densities: np.ndarray
    counts: np.ndarray
    n_total: int

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.bin_edges)

    def binned_moments(self) -> tuple[float, float]:
        """Mean and variance of the bin centres weighted by bin probability."""
        w = self.densities * self.widths
        w = w / w.sum()
        m = float(np.dot(w, self.centers))
        return m, float(np.dot(w, (self.centers - m) ** 2))

    def as_dict(self) -> dict:
        return {
            "bin_edges": self.bin_edges.tolist(),
            "densities": self.densities.tolist(),
            "counts": self.counts.tolist(),
            "n_total": self.n_total,
        }


@dataclass(frozen=True)
class GaussianFit:
    """Normal density ``exp(-(x-mu)^2 / (2 sigma2)) / sqrt(2 pi sigma2)``.

    ``rss`` is the residual sum of squares against the histogram densities
    at bin centres.  ``flagged`` marks a least-squares fit that should not
    be trusted, with the cause in ``reason``.
    """

    mu: float
    sigma2: float
    rss: float
    method: FitMethod
    flagged: bool = False
    iterations: int = 0
    reason: str = ""

    def as_dict(self) -> dict:
        return {
            "mu": self.mu,
            "sigma2": self.sigma2,
            "rss": self.rss,
            "method": FitMethod(self.method).value,
            "flagged": self.flagged,
            "iterations": self.iterations,
            "reason": self.reason,
        }


def build_histogram(s: SeriesLike, bins: int = DEFAULT_BINS) -> Histogram:
    """Equal-width bins over ``[min, max]``; the last bin is closed on the right."""
    x = _values(s)
    if x.size < 2:
        raise StatsError(f"need at least 2 observations, got {x.size}")
    if int(bins) != bins or bins < 1:
        raise FitError(f"bins must be a positive integer, got {bins}")
    lo, hi = float(x.min()), float(x.max())
    if lo == hi:
        raise DegenerateRangeError(f"all observations equal {lo}; histogram range is empty")
    counts, edges = np.histogram(x, bins=int(bins), range=(lo, hi))
    densities = counts / (x.size * np.diff(edges))
    return Histogram(bin_edges=edges, densities=densities, counts=counts, n_total=int(x.size))


def normal_pdf(x, mu: float, sigma2: float):
    return np.exp(-((x - mu) ** 2) / (2.0 * sigma2)) / np.sqrt(2.0 * np.pi * sigma2)


def histogram_rss(h: Histogram, mu: float, sigma2: float) -> float:
    r = h.densities - normal_pdf(h.centers, mu, sigma2)
    return float(np.dot(r, r))


def fit_gaussian_moments(s: SeriesLike, bins: int = DEFAULT_BINS, hist: Histogram | None = None) -> GaussianFit:
    x = _values(s)
    _, var = _dispersed(x)
    mu = _mean(x)
    h = hist if hist is not None else build_histogram(x, bins)
    return GaussianFit(mu=mu, sigma2=var, rss=histogram_rss(h, mu, var), method=FitMethod.MOMENTS)


def fit_gaussian_least_squares(h: Histogram, init: GaussianFit) -> GaussianFit:
    """Refine ``init`` by damped Gauss-Newton on the binned densities.

    The fit is parameterised by ``(mu, log sigma2)`` to keep the variance
    positive.  Each accepted step strictly lowers the rss (step halving
    enforces it), so the result never does worse than ``init``.

    Flagged outcomes:

    * ``no_improvement`` / ``not_converged``: ``init`` is returned unchanged
      apart from its rss, which is re-scored on ``h``.
    * ``moment_mismatch``: the refined normal is far from the binned mean and
      variance of ``h``, which happens when it locks onto one part of a
      multimodal histogram.  The refined parameters are kept.
    """
    if not (init.sigma2 > 0 and math.isfinite(init.mu) and math.isfinite(init.sigma2)):
        raise FitError(f"initial fit must have finite mu and positive sigma2, got {init}")
    xc, d = h.centers, h.densities

    def residual(mu, log_s2):
        return d - normal_pdf(xc, mu, math.exp(log_s2))

    mu, ls = float(init.mu), math.log(init.sigma2)
    r = residual(mu, ls)
    rss = float(np.dot(r, r))
    if not math.isfinite(rss):
        raise FitError("non-finite residual at the initial fit")
    start = replace(init, rss=rss, flagged=True, iterations=0)
    if not np.sum(h.densities * h.widths) > 0:
        raise FitError("histogram has no mass")

    converged = False
    it = 0
    for it in range(1, MAX_ITER + 1):
        s2 = math.exp(ls)
        g = normal_pdf(xc, mu, s2)
        dev = xc - mu
        # Jacobian of the model density; residual Jacobian is its negative
        jac = np.column_stack([g * dev / s2, g * (dev * dev / (2.0 * s2) - 0.5)])
        step, *_ = np.linalg.lstsq(jac, r, rcond=None)
        if not np.all(np.isfinite(step)):
            raise FitError("non-finite Gauss-Newton step")
        t = 1.0
        accepted = False
        while t > 1e-10:
            cand_mu, cand_ls = mu + t * float(step[0]), ls + t * float(step[1])
            cand_r = residual(cand_mu, cand_ls)
            cand_rss = float(np.dot(cand_r, cand_r))
            # overflowing trial steps are simply rejected
            if math.isfinite(cand_rss) and cand_rss < rss:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            converged = True
            break
        change = (rss - cand_rss) / rss
        mu, ls, r, rss = cand_mu, cand_ls, cand_r, cand_rss
        if change < RSS_RTOL:
            converged = True
            break

    if rss >= start.rss:
        return replace(start, iterations=it, reason="no_improvement")
    if not converged:
        return replace(start, iterations=it, reason="not_converged")
    s2 = math.exp(ls)
    hm, hv = h.binned_moments()
    mismatch = (
        not 1.0 / MAX_VARIANCE_RATIO <= s2 / hv <= MAX_VARIANCE_RATIO
        or abs(mu - hm) > MAX_MEAN_SHIFT_SD * math.sqrt(hv)
    )
    return GaussianFit(
        mu=float(mu),
        sigma2=s2,
        rss=rss,
        method=FitMethod.LEAST_SQUARES,
        flagged=mismatch,
        iterations=it,
        reason="moment_mismatch" if mismatch else "",
    )
