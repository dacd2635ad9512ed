"""
Direct-method iteration schemes constructing the additive approximant A.

Every scheme is normalized to one kernel: term_n(x) = f(mu**n x) / mu**n,
where mu = scale for forward schemes and mu = 1 / scale for backward ones.
Backward (1 + beta) schemes with |1 + beta| < 1 therefore run as expanding
iterations, and forward ones with |scale| > 1 as well.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from stability.choices import Corollary, Direction, SchemeKind
from stability.exceptions import (
    DegenerateScale,
    NotConverged,
    NumericFailure,
    ScaleOverflow,
)
from stability.functions import TestFunction
from stability.space import CVector

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9
DEFAULT_MAX_N = 200
MAX_ORBIT_INDEX = 512

_LOG_MAX = math.log(np.finfo(np.float64).max)
_LOG_TINY = math.log(np.finfo(np.float64).tiny)

_COROLLARIES = {
    (SchemeKind.DYADIC, Direction.FORWARD): Corollary.C24,
    (SchemeKind.DYADIC, Direction.BACKWARD): Corollary.C26,
    (SchemeKind.BETA, Direction.FORWARD): Corollary.C34,
    (SchemeKind.BETA, Direction.BACKWARD): Corollary.C36,
}


@dataclass(frozen=True)
class Scheme:
    direction: Direction
    scale: float
    kind: SchemeKind = SchemeKind.BETA

    def __post_init__(self):
        object.__setattr__(self, "direction", Direction(self.direction))
        object.__setattr__(self, "kind", SchemeKind(self.kind))
        object.__setattr__(self, "scale", float(self.scale))

        if self.scale == 0 or abs(self.scale) == 1 or not math.isfinite(self.scale):
            raise DegenerateScale(f"Scheme scale {self.scale!r} is degenerate.")

    @classmethod
    def dyadic(cls, direction: Direction = Direction.FORWARD) -> "Scheme":
        return cls(direction, 2.0, SchemeKind.DYADIC)

    @classmethod
    def beta(cls, beta: float, direction: Direction = Direction.FORWARD) -> "Scheme":
        return cls(direction, 1.0 + beta, SchemeKind.BETA)

    @property
    def step(self) -> float:
        if self.direction == Direction.FORWARD:
            return self.scale
        return 1.0 / self.scale

    @property
    def growth(self) -> float:
        """Factor by which orbit argument norms grow per step."""
        return abs(self.step)

    @property
    def label(self) -> str:
        return f"{self.direction}-{self.kind}"

    @property
    def name(self) -> str:
        """Label plus scale; tells apart beta schemes sharing a label."""
        return f"{self.label} (scale {self.scale:g})"

    @property
    def corollary(self) -> Corollary:
        return _COROLLARIES[(self.kind, self.direction)]

    def power(self, n: int) -> float:
        exponent = n * math.log(self.growth)
        if n > MAX_ORBIT_INDEX or not _LOG_TINY < exponent < _LOG_MAX:
            raise ScaleOverflow(
                f"{self.name}: step**{n} leaves the double range."
            )
        return self.step ** n


@dataclass(frozen=True, eq=False)
class ConvergenceReport:
    point: CVector
    value: CVector
    iterations: int
    residuals: tuple
    tail_bound: float | None
    converged: bool
    scheme: str = ""
    tolerance: float = DEFAULT_TOL


def orbit_term(f: TestFunction, x, scheme: Scheme, n: int) -> CVector:
    if n < 0:
        raise ValueError("Orbit index must be nonnegative.")

    x = f.space.check(x)
    if n == 0:
        return f(x)

    multiplier = scheme.power(n)
    return f(multiplier * x) / multiplier


def approximate(
    f: TestFunction,
    x,
    scheme: Scheme,
    tol: float = DEFAULT_TOL,
    max_n: int = DEFAULT_MAX_N,
    tail_estimator: Callable[[int], float | None] | None = None,
) -> ConvergenceReport:
    """
    Iterate the scheme at ``x`` until two consecutive residuals are within
    ``tol`` (an exactly stationary step confirms at once), or ``max_n`` terms.
    """
    if tol <= 0:
        raise ValueError("tol must be positive.")

    x = f.space.check(x)
    previous = orbit_term(f, x, scheme, 0)
    residuals = []
    hits = 0
    converged = False

    for n in range(1, max_n + 1):
        current = orbit_term(f, x, scheme, n)
        if not np.all(np.isfinite(current)):
            raise NumericFailure(f"{scheme.name}: term {n} is not finite.")

        residual = f.space.norm(current - previous)
        residuals.append(residual)
        previous = current

        if residual == 0.0:
            converged = True
            break

        hits = hits + 1 if residual <= tol else 0
        if hits >= 2:
            converged = True
            break

    iterations = len(residuals)
    tail_bound = tail_estimator(iterations) if tail_estimator else None

    logger.debug(
        "%s at |x|=%.3g: %s after %d steps (last residual %.3g)",
        scheme.label,
        f.space.norm(x),
        "converged" if converged else "not converged",
        iterations,
        residuals[-1] if residuals else 0.0,
    )

    return ConvergenceReport(
        point=x,
        value=previous,
        iterations=iterations,
        residuals=tuple(residuals),
        tail_bound=tail_bound,
        converged=converged,
        scheme=scheme.label,
        tolerance=tol,
    )


def _limit(f, x, scheme, tol, max_n) -> CVector:
    report = approximate(f, x, scheme, tol=tol, max_n=max_n)
    if not report.converged:
        raise NotConverged(
            f"{scheme.name} did not converge at |x|={f.space.norm(x):.6g} "
            f"within {max_n} steps."
        )
    return report.value


def additive_limit_check(
    f: TestFunction,
    scheme: Scheme,
    tol: float,
    pairs: Iterable[tuple],
    max_n: int = DEFAULT_MAX_N,
) -> float:
    worst = 0.0

    for x, y in pairs:
        x, y = f.space.check(x), f.space.check(y)
        limit_sum = _limit(f, x + y, scheme, tol, max_n)
        limit_x = _limit(f, x, scheme, tol, max_n)
        limit_y = _limit(f, y, scheme, tol, max_n)
        worst = max(worst, f.space.norm(limit_sum - limit_x - limit_y))

    return worst


def uniqueness_crosscheck(
    f: TestFunction,
    scheme1: Scheme,
    scheme2: Scheme,
    points: Iterable,
    tol: float,
    max_n: int = DEFAULT_MAX_N,
) -> float:
    worst = 0.0

    for x in points:
        first = _limit(f, x, scheme1, tol, max_n)
        second = _limit(f, x, scheme2, tol, max_n)
        worst = max(worst, f.space.norm(first - second))

    return worst


def decay_rate(report: ConvergenceReport) -> float:
    """Least-squares slope of ln(residual) against the step index."""
    steps = np.arange(1, len(report.residuals) + 1)
    residuals = np.asarray(report.residuals)
    positive = residuals > 0

    if positive.sum() < 2:
        raise ValueError("Need at least two positive residuals to fit a rate.")

    slope, _ = np.polyfit(steps[positive], np.log(residuals[positive]), 1)
    return float(slope)
