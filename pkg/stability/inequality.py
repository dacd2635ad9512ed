"""
Admissibility and defect evaluation for the two 3-variable Jensen
rho-functional inequalities, plus empirical control-envelope measurement.

Family A::

    ||f(x+y+az) + f(x+y-az) - 2f(x) - 2f(y)||
        <= |rho1| ||f(x+y+az) - f(x+y) - f(az)||
         + |rho2| ||f(x+y-az) + f(-x) + f(az-y)||

Family B::

    ||f(x+by+az) - f(x-az) - b f(y) - 2f(az)||
        <= |rho1| ||f(x+az) - f(x) - f(az)||
         + |rho2| ||f(x+by-az) - f(x) - b f(y) + f(az)||
"""
import logging
from dataclasses import dataclass

import numpy as np

from stability.choices import Family
from stability.controls import ControlFunction
from stability.exceptions import (
    DegenerateParameter,
    EmptySample,
    FamilyMismatch,
    Inadmissible,
)
from stability.functions import TestFunction
from stability.space import ATOL, SamplePlan, draw_samples

logger = logging.getLogger(__name__)

DEFAULT_SHELLS = 8

# r grid for the power-law fit: -1.00, -0.99, ..., 3.00
FIT_EXPONENTS = np.arange(-100, 301) / 100


@dataclass(frozen=True)
class RhoParams:
    family: Family
    rho1: complex = 0j
    rho2: complex = 0j
    alpha: float = 1.0
    beta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "rho1", complex(self.rho1))
        object.__setattr__(self, "rho2", complex(self.rho2))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))

    def check_degenerate(self):
        if self.alpha == 0:
            raise DegenerateParameter("alpha must be nonzero.")
        if self.family == Family.B and self.beta == 0:
            raise DegenerateParameter("beta must be nonzero for family B.")


@dataclass(frozen=True)
class Admissibility:
    admissible: bool
    message: str

    def __bool__(self) -> bool:
        return self.admissible


@dataclass(frozen=True, eq=False)
class DefectSample:
    family: Family
    triple: tuple
    lhs_norm: float
    rhs_norm: float
    defect: float


@dataclass(frozen=True, eq=False)
class Envelope:
    control: ControlFunction
    shell_maxima: np.ndarray
    samples: list


def admissible(params: RhoParams) -> Admissibility:
    params.check_degenerate()
    rho1, rho2 = abs(params.rho1), abs(params.rho2)

    if params.family == Family.A:
        total = rho1 + 3 * rho2
        verdict = total < 2
        relation = "<" if verdict else ">="
        message = f"|rho1| + 3|rho2| = {total:.17g} {relation} 2 (|rho2| = {rho2:.17g})"
        return Admissibility(verdict, message)

    failures = []
    if not rho2 < 1:
        failures.append(f"|rho2| = {rho2:.17g} >= 1")

    lhs = abs(params.beta + 2)
    rhs = rho1 + abs(params.rho2 * (1 - params.beta))
    if not lhs >= rhs:
        failures.append(
            f"|beta + 2| = {lhs:.17g} < |rho1| + |rho2 (1 - beta)| = {rhs:.17g}"
        )

    if failures:
        return Admissibility(False, "; ".join(failures))

    return Admissibility(
        True,
        f"|rho2| = {rho2:.17g} < 1 and |beta + 2| = {lhs:.17g} >= {rhs:.17g}",
    )


def _check_family(params: RhoParams, family: Family):
    if params.family != family:
        raise FamilyMismatch(
            f"Expected family {family} parameters, got family {params.family}."
        )
    params.check_degenerate()


def defect_a(f: TestFunction, x, y, z, params: RhoParams) -> DefectSample:
    _check_family(params, Family.A)
    space = f.space
    x, y, z = space.check(x), space.check(y), space.check(z)

    az = params.alpha * z
    f_plus = f(x + y + az)
    f_minus = f(x + y - az)

    lhs = space.norm(f_plus + f_minus - 2 * f(x) - 2 * f(y))
    first = space.norm(f_plus - f(x + y) - f(az))
    second = space.norm(f_minus + f(-x) + f(az - y))
    rhs = abs(params.rho1) * first + abs(params.rho2) * second

    return DefectSample(Family.A, (x, y, z), lhs, rhs, lhs - rhs)


def defect_b(f: TestFunction, x, y, z, params: RhoParams) -> DefectSample:
    _check_family(params, Family.B)
    space = f.space
    x, y, z = space.check(x), space.check(y), space.check(z)

    az = params.alpha * z
    by = params.beta * y
    f_y = f(y)
    f_az = f(az)
    f_x = f(x)

    lhs = space.norm(f(x + by + az) - f(x - az) - params.beta * f_y - 2 * f_az)
    first = space.norm(f(x + az) - f_x - f_az)
    second = space.norm(f(x + by - az) - f_x - params.beta * f_y + f_az)
    rhs = abs(params.rho1) * first + abs(params.rho2) * second

    return DefectSample(Family.B, (x, y, z), lhs, rhs, lhs - rhs)


def defect(f: TestFunction, x, y, z, params: RhoParams) -> DefectSample:
    if params.family == Family.A:
        return defect_a(f, x, y, z, params)
    return defect_b(f, x, y, z, params)


def fit_power_law(
    norms: np.ndarray,
    defects: np.ndarray,
    atol: float = ATOL,
) -> tuple[float, float]:
    """
    Least-squares fit of ``defect ~ theta * sum(norm ** r)`` over triples.

    theta has a closed form for each r; r is scanned on ``FIT_EXPONENTS``.
    Returns ``(0, 0)`` when every defect is within ``atol`` of zero.
    """
    norms = np.asarray(norms, dtype=np.float64)
    defects = np.asarray(defects, dtype=np.float64)

    if defects.size == 0 or defects.max() <= atol:
        return 0.0, 0.0

    best = (np.inf, 0.0, 0.0)
    positive = norms > 0
    safe = np.where(positive, norms, 1.0)

    for r in FIT_EXPONENTS:
        basis = np.where(positive, safe ** r, 0.0).sum(axis=1)
        weight = basis @ basis
        if weight == 0:
            continue

        theta = (basis @ defects) / weight
        residual = float(np.sum((defects - theta * basis) ** 2))
        if residual < best[0]:
            best = (residual, float(theta), float(r))

    return best[1], best[2]


def _backfill(shell_maxima: np.ndarray, index: np.ndarray) -> np.ndarray:
    """Empty shells take the value of the nearest populated shell outwards."""
    populated = np.unique(index)
    nearest = np.searchsorted(populated, np.arange(len(shell_maxima)))
    nearest = populated[np.minimum(nearest, len(populated) - 1)]
    return shell_maxima[nearest]


def measure_envelope(
    f: TestFunction,
    params: RhoParams,
    plan: SamplePlan,
    shells: int = DEFAULT_SHELLS,
    atol: float = ATOL,
) -> Envelope:
    """
    Measure a control envelope for ``f`` from sampled defects.

    Triples are assigned to log-spaced shells by their largest argument
    norm; each shell keeps ``max(0, defect)``, empty shells borrow from the
    next populated shell outwards and the table is made nondecreasing.
    """
    verdict = admissible(params)
    if not verdict:
        raise Inadmissible(verdict.message)
    if shells < 1:
        raise ValueError("shells must be positive.")

    space = f.space
    triples = draw_samples(space, plan, arity=3)
    if not triples:
        raise EmptySample("Envelope measurement needs at least one triple.")

    samples = [defect(f, x, y, z, params) for x, y, z in triples]
    norms = np.array([[space.norm(v) for v in sample.triple] for sample in samples])
    clamped = np.maximum(np.array([sample.defect for sample in samples]), 0.0)

    edges = np.geomspace(plan.inner_radius, plan.radius, shells + 1)
    index = np.searchsorted(edges, norms.max(axis=1), side="left") - 1
    index = np.clip(index, 0, shells - 1)

    shell_maxima = np.zeros(shells)
    np.maximum.at(shell_maxima, index, clamped)
    monotone = np.maximum.accumulate(_backfill(shell_maxima, index))

    theta, r = fit_power_law(norms, clamped, atol=atol)
    logger.info(
        "Measured envelope over %d triples: max defect %.3g, fit theta=%.4g r=%.2f",
        len(samples), clamped.max(), theta, r,
    )

    return Envelope(
        control=ControlFunction.measured(edges, monotone, theta, r),
        shell_maxima=shell_maxima,
        samples=samples,
    )
