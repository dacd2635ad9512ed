from dataclasses import dataclass, field
from pathlib import Path

from stability.controls import ControlFunction
from stability.direct_method import DEFAULT_MAX_N, DEFAULT_TOL, Scheme
from stability.bounds import DEFAULT_TRUNC_TERMS
from stability.functions import TestFunction
from stability.inequality import DEFAULT_SHELLS, RhoParams
from stability.space import ATOL, RTOL, SamplePlan


@dataclass(frozen=True)
class Tolerances:
    tol: float = DEFAULT_TOL
    atol: float = ATOL
    rtol: float = RTOL
    max_n: int = DEFAULT_MAX_N
    trunc_terms: int = DEFAULT_TRUNC_TERMS
    shells: int = DEFAULT_SHELLS


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """
    A validated experiment document.

    ``control`` is ``None`` when the control is to be measured from ``function``
    over ``envelope_plan``. ``echo`` is the document with every default filled
    in, as written back into reports.
    """
    function: TestFunction
    params: RhoParams
    scheme: Scheme
    control: ControlFunction | None
    plan: SamplePlan
    envelope_plan: SamplePlan
    tolerances: Tolerances = field(default_factory=Tolerances)
    forced: bool = False
    printed_display: bool = False
    audit: bool = False
    output: Path | None = None
    echo: dict = field(default_factory=dict)

    @property
    def space(self):
        return self.function.space
