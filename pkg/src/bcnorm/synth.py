"""Seeded log-normal generators used as stand-ins for firm-size data.

Normal variates come from the Box-Muller transform applied to the raw
64-bit output of numpy's PCG64 bit generator.  The PCG64 bit stream is
stable across numpy releases and platforms (unlike the distribution
methods of ``numpy.random.Generator``), so a seed pins the output.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .stats_core import Series

__all__ = [
    "EMPLOYEES_DEFAULT",
    "SALE_DEFAULT",
    "SynthError",
    "LogNormalSpec",
    "BivariateSpec",
    "standard_normals",
    "generate_lognormal",
    "generate_bivariate_lognormal",
]

_TWO_POW_M53 = 2.0**-53


class SynthError(ValueError):
    pass


@dataclass(frozen=True)
class LogNormalSpec:
    """Log-normal law: ``exp(N(mu, sigma2))``, ``n`` draws from ``seed``."""

    mu: float
    sigma2: float
    n: int
    seed: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.mu) and math.isfinite(self.sigma2)):
            raise SynthError("mu and sigma2 must be finite")
        if not self.sigma2 > 0:
            raise SynthError(f"sigma2 must be positive, got {self.sigma2}")
        if int(self.n) != self.n or self.n < 2:
            raise SynthError(f"n must be an integer >= 2, got {self.n}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise SynthError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    def as_dict(self) -> dict:
        return asdict(self)


# parameters of the fitted normals reported for employees and sale
EMPLOYEES_DEFAULT = LogNormalSpec(mu=6.42, sigma2=2.24, n=3206)
SALE_DEFAULT = LogNormalSpec(mu=11.37, sigma2=4.22, n=3206)


@dataclass(frozen=True)
class BivariateSpec:
    """Pair of log-normals whose underlying normals have correlation ``rho``.

    ``n`` is taken from ``spec_x`` (``spec_y.n`` must agree); the member
    seeds are ignored in favour of ``seed``.
    """

    spec_x: LogNormalSpec
    spec_y: LogNormalSpec
    rho: float
    seed: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.rho) and -1.0 <= self.rho <= 1.0):
            raise SynthError(f"rho must lie in [-1, 1], got {self.rho}")
        if self.spec_x.n != self.spec_y.n:
            raise SynthError(f"sample sizes differ: {self.spec_x.n} != {self.spec_y.n}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise SynthError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    def as_dict(self) -> dict:
        return {
            "spec_x": self.spec_x.as_dict(),
            "spec_y": self.spec_y.as_dict(),
            "rho": self.rho,
            "seed": self.seed,
        }


def _uniforms(bitgen: np.random.PCG64, n: int) -> np.ndarray:
    # top 53 bits, offset by half a unit so the result lies in (0, 1)
    raw = bitgen.random_raw(n)
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO_POW_M53


def standard_normals(seed: int, n: int) -> np.ndarray:
    """``n`` standard normal variates, deterministic in ``seed``."""
    bitgen = np.random.PCG64(int(seed))
    pairs = (n + 1) // 2
    u1 = _uniforms(bitgen, pairs)
    u2 = _uniforms(bitgen, pairs)
    r = np.sqrt(-2.0 * np.log(u1))
    theta = 2.0 * np.pi * u2
    z = np.empty(2 * pairs)
    z[0::2] = r * np.cos(theta)
    z[1::2] = r * np.sin(theta)
    return z[:n]


def generate_lognormal(spec: LogNormalSpec, label: str = "") -> Series:
    z = standard_normals(spec.seed, spec.n)
    return Series(np.exp(spec.mu + math.sqrt(spec.sigma2) * z), label=label)


def generate_bivariate_lognormal(
    spec: BivariateSpec, labels: tuple[str, str] = ("x", "y")
) -> tuple[Series, Series]:
    n = spec.spec_x.n
    z = standard_normals(spec.seed, 2 * n)
    z1, z2 = z[:n], z[n:]
    w = spec.rho * z1 + math.sqrt(max(0.0, 1.0 - spec.rho * spec.rho)) * z2
    log_x = spec.spec_x.mu + math.sqrt(spec.spec_x.sigma2) * z1
    log_y = spec.spec_y.mu + math.sqrt(spec.spec_y.sigma2) * w
    return Series(np.exp(log_x), label=labels[0]), Series(np.exp(log_y), label=labels[1])
