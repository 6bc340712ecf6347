"""Box-Cox power transform and kurtosis-driven selection of its exponent.

The transform maps a positive value ``x`` (after adding ``shift``) to
``((x + shift)**lam - 1) / lam``, or ``log(x + shift)`` at ``lam == 0``.
:func:`optimize_lambda` picks ``lam`` so the transformed data look as
normal as possible, measured by the distance of their raw kurtosis from 3
(or, optionally, by the magnitude of their skewness).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .stats_core import Series, SeriesLike, StatsError, _dispersed, _values

__all__ = [
    "LAMBDA_SWITCH",
    "LAMBDA_EXPM1",
    "BoxCoxError",
    "DomainError",
    "CurveError",
    "Objective",
    "BoxCoxParams",
    "LambdaSearchConfig",
    "TracePoint",
    "OptimalLambda",
    "transform_one",
    "transform_series",
    "inverse_transform",
    "kurtosis_curve",
    "golden_section",
    "optimize_lambda",
]

# below LAMBDA_SWITCH the log branch is exact to double precision;
# below LAMBDA_EXPM1 the power form is evaluated through expm1
LAMBDA_SWITCH = 1e-8
LAMBDA_EXPM1 = 1e-4


class BoxCoxError(ValueError):
    pass


class DomainError(BoxCoxError):
    """Raised when an argument falls outside the transform's domain."""

    def __init__(self, message: str, index: int | None = None, required_shift: float | None = None):
        super().__init__(message)
        self.index = index
        self.required_shift = required_shift


class CurveError(BoxCoxError):
    """A statistic could not be evaluated at some exponent on the grid."""

    def __init__(self, message: str, lmbda: float):
        super().__init__(message)
        self.lmbda = lmbda


class Objective(str, enum.Enum):
    KURTOSIS_TO_3 = "kurtosis_to_3"
    ABS_SKEWNESS = "abs_skewness"


@dataclass(frozen=True)
class BoxCoxParams:
    lmbda: float
    shift: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.lmbda):
            raise BoxCoxError(f"lambda must be finite, got {self.lmbda}")
        if not (math.isfinite(self.shift) and self.shift >= 0):
            raise BoxCoxError(f"shift must be finite and >= 0, got {self.shift}")


@dataclass(frozen=True)
class LambdaSearchConfig:
    lambda_min: float = -2.0
    lambda_max: float = 2.0
    grid_steps: int = 81
    refine_tolerance: float = 1e-4
    objective: Objective = Objective.KURTOSIS_TO_3
    shift: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "objective", Objective(self.objective))
        if not self.lambda_min < self.lambda_max:
            raise BoxCoxError(
                f"lambda_min ({self.lambda_min}) must be below lambda_max ({self.lambda_max})"
            )
        if int(self.grid_steps) != self.grid_steps or self.grid_steps < 3:
            raise BoxCoxError(f"grid_steps must be an integer >= 3, got {self.grid_steps}")
        if not self.refine_tolerance > 0:
            raise BoxCoxError(f"refine_tolerance must be positive, got {self.refine_tolerance}")
        if not (math.isfinite(self.shift) and self.shift >= 0):
            raise BoxCoxError(f"shift must be finite and >= 0, got {self.shift}")

    def grid(self) -> np.ndarray:
        return np.linspace(self.lambda_min, self.lambda_max, int(self.grid_steps))

    def as_dict(self) -> dict:
        return {
            "lambda_min": self.lambda_min,
            "lambda_max": self.lambda_max,
            "grid_steps": int(self.grid_steps),
            "refine_tolerance": self.refine_tolerance,
            "objective": self.objective.value,
            "shift": self.shift,
        }


class TracePoint(NamedTuple):
    lmbda: float
    kurtosis: float
    objective: float


@dataclass(frozen=True)
class OptimalLambda:
    lmbda: float
    kurtosis_at_optimum: float
    objective_value: float
    trace: list[TracePoint] = field(default_factory=list)
    boundary: bool = False
    skewness_at_optimum: float = float("nan")

    def as_dict(self) -> dict:
        return {
            "lambda": self.lmbda,
            "kurtosis_at_optimum": self.kurtosis_at_optimum,
            "skewness_at_optimum": self.skewness_at_optimum,
            "objective_value": self.objective_value,
            "boundary_warning": self.boundary,
            "trace": [[p.lmbda, p.kurtosis, p.objective] for p in self.trace],
        }


def _power(y, lmbda: float):
    """Box-Cox of already-shifted positive values ``y``."""
    if abs(lmbda) < LAMBDA_SWITCH:
        return np.log(y)
    if abs(lmbda) < LAMBDA_EXPM1:
        return np.expm1(lmbda * np.log(y)) / lmbda
    return (np.power(y, lmbda) - 1.0) / lmbda


def transform_one(x: float, p: BoxCoxParams) -> float:
    y = x + p.shift
    if not y > 0:
        raise DomainError(
            f"x + shift must be positive, got {x} + {p.shift}",
            required_shift=_required_shift(x),
        )
    return float(_power(np.float64(y), p.lmbda))


def _required_shift(xmin: float) -> float:
    # smallest representable shift strictly above -xmin
    return float(np.nextafter(-xmin, np.inf)) if xmin <= 0 else 0.0


def _shifted(x: np.ndarray, shift: float) -> np.ndarray:
    y = x + shift
    bad = np.flatnonzero(~(y > 0))
    if bad.size:
        i = int(bad[0])
        raise DomainError(
            f"value {x[i]!r} at index {i} is not positive after shift {shift}; "
            f"a shift greater than {-float(x.min())!r} is required",
            index=i,
            required_shift=_required_shift(float(x.min())),
        )
    return y


def transform_series(s: SeriesLike, p: BoxCoxParams) -> Series:
    x = _values(s)
    label = s.label if isinstance(s, Series) else ""
    return Series(_power(_shifted(x, p.shift), p.lmbda), label=label)


def inverse_transform(y: float, p: BoxCoxParams) -> float:
    lam = p.lmbda
    if abs(lam) < LAMBDA_SWITCH:
        return math.exp(y) - p.shift
    base = lam * y + 1.0
    if not base > 0:
        raise DomainError(f"lambda * y + 1 must be positive, got {base} (lambda={lam}, y={y})")
    if abs(lam) < LAMBDA_EXPM1:
        return math.exp(math.log1p(lam * y) / lam) - p.shift
    return base ** (1.0 / lam) - p.shift


def _log_deviations(s: SeriesLike, shift: float, first_lambda: float) -> np.ndarray:
    x = _values(s)
    logs = np.log(_shifted(x, shift))
    try:
        u, _ = _dispersed(logs)
    except StatsError as exc:
        # a degenerate log sample is degenerate at every exponent
        raise CurveError(f"{exc} at lambda={first_lambda}", first_lambda) from exc
    return u


def _standard_form(u: np.ndarray, lmbda: float) -> np.ndarray:
    # Box-Cox of exp(u) up to an affine map: kurtosis and skewness are
    # unchanged, while centring u removes both overflow and the
    # dependence on the data's overall scale.
    if abs(lmbda) < LAMBDA_SWITCH:
        return u
    return np.expm1(lmbda * u) / lmbda


def _shape(u: np.ndarray, lmbda: float) -> tuple[float, float]:
    """Kurtosis and skewness of the transformed data."""
    with np.errstate(over="raise", invalid="raise"):
        try:
            z = _standard_form(u, lmbda)
            d, m2 = _dispersed(z)
            kurt = float(np.mean(d**4)) / (m2 * m2)
            skew = float(np.mean(d**3)) / m2**1.5
        except FloatingPointError as exc:
            raise CurveError(f"overflow evaluating transform at lambda={lmbda}", lmbda) from exc
        except StatsError as exc:
            raise CurveError(f"{exc} at lambda={lmbda}", lmbda) from exc
    if not (math.isfinite(kurt) and math.isfinite(skew)):
        raise CurveError(f"non-finite moments at lambda={lmbda}", lmbda)
    return kurt, skew


def kurtosis_curve(s: SeriesLike, cfg: LambdaSearchConfig | None = None) -> list[tuple[float, float]]:
    """Kurtosis of the transformed series at each exponent of the search grid."""
    cfg = cfg or LambdaSearchConfig()
    u = _log_deviations(s, cfg.shift, cfg.lambda_min)
    return [(float(lam), _shape(u, float(lam))[0]) for lam in cfg.grid()]


def _objective(kind: Objective) -> Callable[[float, float], float]:
    if kind is Objective.KURTOSIS_TO_3:
        return lambda kurt, skew: abs(kurt - 3.0)
    return lambda kurt, skew: abs(skew)


INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(
    f: Callable[[float], float], a: float, b: float, tol: float = 1e-5, max_iter: int = 200
) -> tuple[float, float]:
    """Golden-section search for a minimum of ``f`` on ``[a, b]``.

    Returns ``(x, f(x))`` for the best point evaluated; the final bracket
    is narrower than ``tol``.  Only meaningful when ``f`` is unimodal on
    the interval, otherwise it converges to some local minimum.
    """
    a, b = min(a, b), max(a, b)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    best = (c, fc) if fc <= fd else (d, fd)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
            if fc < best[1]:
                best = (c, fc)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
            if fd < best[1]:
                best = (d, fd)
    return best


def optimize_lambda(s: SeriesLike, cfg: LambdaSearchConfig | None = None) -> OptimalLambda:
    """Choose the Box-Cox exponent that makes ``s`` look most normal.

    A coarse scan over ``cfg.grid()`` locates the best grid point (ties go
    to the smallest ``|lambda|``); golden-section search then refines
    inside the bracket formed by its two grid neighbours.  The full scan is
    returned as ``trace`` so a multimodal objective can be spotted by the
    caller.  ``boundary`` is set when the best grid point is an endpoint of
    the search range.
    """
    cfg = cfg or LambdaSearchConfig()
    u = _log_deviations(s, cfg.shift, cfg.lambda_min)
    score = _objective(cfg.objective)

    grid = cfg.grid()
    trace = []
    for lam in grid:
        kurt, skew = _shape(u, float(lam))
        trace.append(TracePoint(float(lam), kurt, score(kurt, skew)))

    i = min(range(len(trace)), key=lambda k: (trace[k].objective, abs(trace[k].lmbda)))
    lo = trace[max(i - 1, 0)].lmbda
    hi = trace[min(i + 1, len(trace) - 1)].lmbda

    def f(lam: float) -> float:
        return score(*_shape(u, lam))

    lam_best, f_best = golden_section(f, lo, hi, tol=cfg.refine_tolerance)
    if not f_best < trace[i].objective:
        lam_best, f_best = trace[i].lmbda, trace[i].objective
    kurt, skew = _shape(u, lam_best)
    return OptimalLambda(
        lmbda=float(lam_best),
        kurtosis_at_optimum=kurt,
        objective_value=float(f_best),
        trace=trace,
        boundary=i in (0, len(trace) - 1),
        skewness_at_optimum=skew,
    )
