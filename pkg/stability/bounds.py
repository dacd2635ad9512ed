"""
Stability bounds: the phi-tilde series of the four schemes, the closed-form
corollary constants, convergence predicates and the constant audit.

Series terms (s = ||x||, lam = |scale|, c = 1 / (2 - |rho2|),
k = 2|rho2| / (1 - |rho2|), c' = 1 / (1 - |rho2|)):

    forward dyadic   2**-(i+1) c [phi(2**i x, 2**i x, 0) + k phi(0, 0, 2**i x / alpha)]
    backward dyadic  2**i c [phi(x / 2**(i+1), x / 2**(i+1), 0)
                             + k phi(0, 0, x / (2**(i+1) alpha))]
    forward beta     lam**-(i+1) c' phi((1+beta)**i x, (1+beta)**i x, 0)
    backward beta    lam**i c' phi(x / (1+beta)**(i+1), x / (1+beta)**(i+1), 0)

With ``printed_display`` the dyadic forward series evaluates
phi(0, 0, 2**i x) and the forward beta series uses 1 / (1 - |rho1|).
"""
import logging
import math
from dataclasses import dataclass, field

from stability.choices import (
    ControlKind,
    Corollary,
    Direction,
    SchemeKind,
    TailMode,
)
from stability.controls import ControlFunction
from stability.direct_method import (
    DEFAULT_MAX_N,
    DEFAULT_TOL,
    Scheme,
    approximate,
)
from stability.exceptions import (
    ControlKindError,
    DegenerateScale,
    DivergentSeries,
    Inadmissible,
    NotConverged,
    NumericFailure,
    OutOfRegime,
    SingularPoint,
)
from stability.functions import TestFunction
from stability.inequality import RhoParams
from stability.space import NormedSpace

logger = logging.getLogger(__name__)

DEFAULT_TRUNC_TERMS = 64
AUDIT_RTOL = 1e-6

# r-ranges printed alongside each corollary constant.
PRINTED_RANGES = {
    Corollary.C24: ("r < 1", lambda r: r < 1),
    Corollary.C26: ("r > 1", lambda r: r > 1),
    Corollary.C34: ("r > 1", lambda r: r > 1),
    Corollary.C36: ("r > 1", lambda r: r > 1),
}


@dataclass(frozen=True)
class SeriesSpec:
    scheme: Scheme
    rho2_abs: float = 0.0
    alpha: float = 1.0
    trunc_terms: int = DEFAULT_TRUNC_TERMS
    tail_mode: TailMode = TailMode.GEOMETRIC
    rho1_abs: float = 0.0
    printed_display: bool = False

    def __post_init__(self):
        object.__setattr__(self, "tail_mode", TailMode(self.tail_mode))

        if self.trunc_terms < 1:
            raise ValueError("trunc_terms must be at least 1.")
        if self.alpha == 0:
            raise ValueError("alpha must be nonzero.")
        if self.rho2_abs < 0 or self.rho1_abs < 0:
            raise ValueError("rho magnitudes must be nonnegative.")


@dataclass(frozen=True)
class SeriesValue:
    value: float
    tail: float | None

    @property
    def total(self) -> float:
        return self.value + (self.tail or 0.0)


@dataclass(frozen=True)
class ConvergenceVerdict:
    converges: bool
    ratio: float
    condition: str
    note: str | None = None

    def __bool__(self) -> bool:
        return self.converges


@dataclass(frozen=True)
class BoundAudit:
    which: Corollary
    theta: float
    r: float
    rho2: float
    alpha: float
    beta: float
    paper_constant: float | None
    derived_constant: float | None
    empirical_sup: float
    verdicts: dict = field(default_factory=dict)


class _Series:
    """Term generator for one (control, spec) pair at a fixed norm."""

    def __init__(self, control: ControlFunction, spec: SeriesSpec):
        self.control = control
        self.spec = spec
        scheme = spec.scheme
        self.lam = abs(scheme.scale)
        self.forward = scheme.direction == Direction.FORWARD

        if scheme.kind == SchemeKind.DYADIC:
            if spec.rho2_abs >= 1:
                raise Inadmissible("The dyadic series needs |rho2| < 1.")
            self.weight = 1.0 / (2.0 - spec.rho2_abs)
            self.odd_weight = 2.0 * spec.rho2_abs / (1.0 - spec.rho2_abs)
            if spec.printed_display and self.forward:
                self.alpha_scale = 1.0
            else:
                self.alpha_scale = 1.0 / abs(spec.alpha)
        else:
            rho = spec.rho1_abs if spec.printed_display and self.forward else spec.rho2_abs
            if rho >= 1:
                raise Inadmissible("The (1 + beta) series needs |rho| < 1.")
            self.weight = 1.0 / (1.0 - rho)
            self.odd_weight = 0.0
            self.alpha_scale = 1.0

    def argument(self, i: int, size: float) -> float:
        if self.forward:
            return self.lam ** i * size
        return size / self.lam ** (i + 1)

    def multiplier(self, i: int) -> float:
        if self.forward:
            return self.lam ** -(i + 1)
        return self.lam ** i

    def queried_norms(self, i: int, size: float) -> tuple:
        argument = self.argument(i, size)
        if self.odd_weight:
            return argument, argument * self.alpha_scale
        return (argument,)

    def term(self, i: int, size: float) -> float:
        argument = self.argument(i, size)
        value = self.control.at_norms(argument, argument, 0.0)
        if self.odd_weight:
            value += self.odd_weight * self.control.at_norms(
                0.0, 0.0, argument * self.alpha_scale
            )

        term = self.multiplier(i) * self.weight * value
        if not math.isfinite(term):
            raise NumericFailure(f"Series term {i} is not finite.")
        return term

    def ratio(self) -> float | None:
        exponent = self.control.exponent
        if exponent is None:
            return None
        growth = self.lam if self.forward else 1.0 / self.lam
        return growth ** (exponent - 1.0)

    def in_extrapolation(self, i: int, size: float) -> bool:
        expanding = self.forward == (self.lam > 1)
        edges = self.control.edges
        if expanding:
            return all(n > edges[-1] for n in self.queried_norms(i, size))
        return all(n <= edges[0] for n in self.queried_norms(i, size))


def phi_tilde(
    control: ControlFunction,
    space: NormedSpace,
    x,
    spec: SeriesSpec,
    start: int = 0,
) -> SeriesValue:
    """
    Truncated phi-tilde series at ``x`` from index ``start``.

    Sums ``spec.trunc_terms`` terms. The tail is the closed geometric tail
    for power controls, the tail of the extrapolated envelope for measured
    controls once the orbit has left the shell table, and ``None``
    (unavailable) otherwise. Tabulated controls stop at table coverage.
    """
    size = space.norm(x)
    if (
        size == 0.0
        and control.kind in (ControlKind.POWER, ControlKind.MEASURED)
        and control.r < 0
    ):
        raise SingularPoint(f"phi-tilde with r={control.r} at the origin.")
    if control.kind == ControlKind.ZERO or size == 0.0:
        return SeriesValue(0.0, 0.0)

    series = _Series(control, spec)
    ratio = series.ratio()

    if control.kind == ControlKind.POWER and ratio >= 1:
        raise DivergentSeries(
            f"{spec.scheme.name} series with r={control.r} has term ratio "
            f"{ratio:.6g} >= 1."
        )

    value = 0.0
    stop = start + spec.trunc_terms

    for i in range(start, stop):
        if control.kind == ControlKind.TABULATED and not all(
            control.covers(n) for n in series.queried_norms(i, size)
        ):
            return SeriesValue(value, None)
        value += series.term(i, size)

    if spec.tail_mode == TailMode.NONE or control.kind == ControlKind.TABULATED:
        return SeriesValue(value, None)

    if control.kind == ControlKind.MEASURED:
        if not series.in_extrapolation(stop, size):
            return SeriesValue(value, None)
        if ratio >= 1:
            raise DivergentSeries(
                f"Measured envelope extrapolates with ratio {ratio:.6g} >= 1."
            )

    return SeriesValue(value, series.term(stop, size) / (1.0 - ratio))


def series_constant(
    scheme: Scheme,
    theta: float,
    r: float,
    rho2_abs: float,
    alpha: float = 1.0,
    rho1_abs: float = 0.0,
    printed_display: bool = False,
) -> float:
    """
    Closed-form K with phi_tilde(power(theta, r), x) = K * ||x|| ** r.

    At |alpha| = 1 the forward dyadic value is the c24 constant and the
    backward dyadic value is 2 theta / ((2**r - 2)(1 - |rho2|)(2 - |rho2|)).
    """
    lam = abs(scheme.scale)
    forward = scheme.direction == Direction.FORWARD
    growth = lam if forward else 1.0 / lam
    ratio = growth ** (r - 1.0)

    if ratio >= 1:
        raise DivergentSeries(
            f"{scheme.name} series with r={r} has term ratio {ratio:.6g} >= 1."
        )

    if scheme.kind == SchemeKind.DYADIC:
        if rho2_abs >= 1:
            raise Inadmissible("The dyadic series needs |rho2| < 1.")
        odd = 2.0 * rho2_abs / (1.0 - rho2_abs)
        alpha_factor = 1.0 if printed_display and forward else abs(alpha) ** -r
        bracket = theta * (2.0 + odd * alpha_factor) / (2.0 - rho2_abs)
    else:
        rho = rho1_abs if printed_display and forward else rho2_abs
        if rho >= 1:
            raise Inadmissible("The (1 + beta) series needs |rho| < 1.")
        bracket = 2.0 * theta / (1.0 - rho)

    if forward:
        first_term = bracket / lam
    else:
        first_term = bracket * lam ** -r

    return first_term / (1.0 - ratio)


def _positive(factors: dict) -> None:
    for condition, value in factors.items():
        if not value > 0:
            raise OutOfRegime(f"{condition} fails (value {value:.6g}).")


def corollary_constant(
    which: Corollary,
    theta: float,
    r: float,
    rho2_abs: float,
    beta: float | None = None,
) -> float:
    """The printed closed-form constant of each corollary."""
    which = Corollary(which)
    common = {
        "1 - |rho2| > 0": 1.0 - rho2_abs,
        "2 - |rho2| > 0": 2.0 - rho2_abs,
    }

    if which == Corollary.C24:
        _positive({"2 - 2**r > 0": 2.0 - 2.0 ** r, **common})
        return 2.0 * theta / ((2.0 - 2.0 ** r) * (1.0 - rho2_abs) * (2.0 - rho2_abs))

    if which == Corollary.C26:
        _positive({"2**r - 1 > 0": 2.0 ** r - 1.0, **common})
        return (
            2.0 ** (1.0 + r) * theta
            / ((2.0 ** r - 1.0) * (1.0 - rho2_abs) * (2.0 - rho2_abs))
        )

    if beta is None:
        raise ValueError(f"{which} needs beta.")
    lam = abs(1.0 + beta)

    if which == Corollary.C34:
        _positive({"|1+beta| - |1+beta|**r > 0": lam - lam ** r, "1 - |rho2| > 0": 1.0 - rho2_abs})
        return 2.0 * theta / ((lam - lam ** r) * (1.0 - rho2_abs))

    _positive({"|1+beta|**r - |1+beta| > 0": lam ** r - lam, "1 - |rho2| > 0": 1.0 - rho2_abs})
    return 2.0 * theta / ((lam ** r - lam) * (1.0 - rho2_abs))


def convergence_predicate(scheme: Scheme, r: float) -> ConvergenceVerdict:
    if abs(scheme.scale) == 1:
        raise DegenerateScale("Convergence is undefined for |scale| = 1.")

    scale_name = "2" if scheme.kind == SchemeKind.DYADIC else "|1+beta|"
    lam = abs(scheme.scale)

    if scheme.direction == Direction.FORWARD:
        ratio = lam ** (r - 1.0)
        condition = f"{scale_name}**(r-1) < 1"
    else:
        ratio = lam ** (1.0 - r)
        condition = f"{scale_name}**(1-r) < 1"

    converges = ratio < 1
    printed, in_range = PRINTED_RANGES[scheme.corollary]
    note = None
    if in_range(r) != converges:
        note = (
            f"{'converges' if converges else 'diverges'} at r={r:g} although the "
            f"{scheme.corollary} constant is printed for {printed}"
        )

    return ConvergenceVerdict(converges, ratio, condition, note)


def _verdict(value: float, bound: float | None, rtol: float) -> str:
    if bound is None:
        return "unavailable"
    return "pass" if value <= bound + rtol * abs(bound) else "fail"


def audit(
    f: TestFunction,
    params: RhoParams,
    scheme: Scheme,
    control: ControlFunction,
    points,
    tol: float = DEFAULT_TOL,
    max_n: int = DEFAULT_MAX_N,
    printed_display: bool = False,
    rtol: float = AUDIT_RTOL,
) -> BoundAudit:
    """
    Compare the printed corollary constant, the series constant and the
    empirical sup of ||f(x) - A(x)|| / ||x||**r over ``points``.
    """
    if control.kind != ControlKind.POWER:
        raise ControlKindError("The audit needs a power control.")

    which = scheme.corollary
    theta, r = control.theta, control.r
    rho2 = abs(params.rho2)

    try:
        printed = corollary_constant(which, theta, r, rho2, beta=params.beta)
    except OutOfRegime as exc:
        logger.warning("Printed constant %s unavailable: %s", which, exc.detail)
        printed = None

    try:
        derived = series_constant(
            scheme, theta, r, rho2,
            alpha=params.alpha,
            rho1_abs=abs(params.rho1),
            printed_display=printed_display,
        )
    except DivergentSeries as exc:
        logger.warning("Derived constant unavailable: %s", exc.detail)
        derived = None

    empirical = 0.0
    for x in points:
        size = f.space.norm(x)
        if size == 0.0:
            continue

        report = approximate(f, x, scheme, tol=tol, max_n=max_n)
        if not report.converged:
            raise NotConverged(
                f"{scheme.name} did not converge at |x|={size:.6g}."
            )
        distance = f.space.norm(f(x) - report.value)
        empirical = max(empirical, distance / size ** r)

    if printed is None or derived is None:
        agreement = "unavailable"
    elif abs(printed - derived) <= rtol * max(abs(printed), abs(derived)):
        agreement = "consistent"
    else:
        agreement = "mismatched"

    verdicts = {
        "empirical_le_derived": _verdict(empirical, derived, rtol),
        "empirical_le_paper": _verdict(empirical, printed, rtol),
        "derived_vs_paper": agreement,
    }
    logger.info(
        "Audit %s: printed=%s derived=%s empirical=%.6g -> %s",
        which, printed, derived, empirical, verdicts,
    )

    return BoundAudit(
        which=which,
        theta=theta,
        r=r,
        rho2=rho2,
        alpha=params.alpha,
        beta=params.beta,
        paper_constant=printed,
        derived_constant=derived,
        empirical_sup=empirical,
        verdicts=verdicts,
    )
