"""
Experiment drivers behind the CLI subcommands and the API actions.

Every driver takes a validated ``ExperimentConfig`` and returns a ``RunReport``.
A failing stage re-raises its ``LabError`` with ``stage`` set.
"""
import copy
import itertools
import logging
import time
from collections import Counter
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from experiment.config import ExperimentConfig
from experiment.models import ExperimentRun
from experiment.serializers import ExperimentConfigSerializer
from stability.bounds import (
    SeriesSpec,
    audit,
    convergence_predicate,
    corollary_constant,
    phi_tilde,
    series_constant,
)
from stability.choices import ControlKind
from stability.controls import ControlFunction
from stability.direct_method import approximate
from stability.exceptions import (
    ControlKindError,
    DivergentSeries,
    Inadmissible,
    LabError,
    NotConverged,
    OutOfRegime,
)
from stability.inequality import admissible, defect, measure_envelope
from stability.serializers import (
    BoundAuditSerializer,
    ConvergenceReportSerializer,
    DefectSampleSerializer,
)
from stability.space import draw_samples

logger = logging.getLogger(__name__)

VERIFY_COLUMNS = ("index", "x_norm", "distance", "bound", "tail", "margin")
DEFECT_COLUMNS = ("family", "x_norm", "y_norm", "z_norm", "lhs", "rhs", "defect")
APPROXIMATE_COLUMNS = (
    "index", "x_norm", "iterations", "converged", "last_residual", "tail_bound",
)
CHECK_COLUMNS = (
    "family", "admissible", "message", "scheme", "converges", "ratio",
    "condition", "note",
)
AUDIT_COLUMNS = (
    "which", "theta", "r", "rho2", "alpha", "beta", "paper_constant",
    "derived_constant", "empirical_sup", "empirical_le_derived",
    "empirical_le_paper", "derived_vs_paper",
)
SWEEP_COLUMNS = (
    "family", "rho1_re", "rho1_im", "rho2_re", "rho2_im", "alpha", "beta",
    "theta", "r", "admissible", "converges", "max_violation", "paper_constant",
    "derived_constant", "empirical_sup", "status",
)
GRID_AXES = ("rho1", "rho2", "alpha", "beta", "r", "theta")


@dataclass(eq=False)
class RunReport:
    kind: str
    config: dict
    columns: tuple = ()
    points: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    audit: dict | None = None
    notes: list = field(default_factory=list)
    runtime: float = 0.0

    @property
    def passed(self) -> bool:
        return self.summary.get("passed") is not False

    @property
    def status(self) -> str:
        if "passed" not in self.summary:
            return "done"
        return "pass" if self.passed else "fail"

    def to_dict(self, include_runtime: bool = False) -> dict:
        summary = dict(self.summary)
        if include_runtime:
            summary["runtime"] = self.runtime

        data = {
            "kind": self.kind,
            "config": self.config,
            "points": self.points,
            "summary": summary,
            "notes": self.notes,
        }
        if self.audit is not None:
            data["audit"] = self.audit

        return data


@contextmanager
def stage(name: str):
    try:
        yield
    except LabError as exc:
        if exc.stage is None:
            exc.stage = name
        logger.warning("Stage %s failed: %s", name, exc)
        raise


def _vector(v) -> list:
    return [[float(c.real), float(c.imag)] for c in np.asarray(v)]


def _notes(config: ExperimentConfig) -> list:
    notes = []
    if config.forced:
        notes.append(
            f"forced pairing: family {config.params.family} "
            f"with {config.scheme.label} scheme"
        )
    if config.printed_display:
        notes.append("series evaluated with the printed-display variant")
    return notes


def _series_spec(config: ExperimentConfig) -> SeriesSpec:
    return SeriesSpec(
        scheme=config.scheme,
        rho2_abs=abs(config.params.rho2),
        alpha=config.params.alpha,
        trunc_terms=config.tolerances.trunc_terms,
        rho1_abs=abs(config.params.rho1),
        printed_display=config.printed_display,
    )


def _require_admissible(config: ExperimentConfig):
    verdict = admissible(config.params)
    if not verdict:
        raise Inadmissible(verdict.message)
    return verdict


def _resolve_control(config: ExperimentConfig) -> ControlFunction:
    if config.control is not None:
        return config.control

    envelope = measure_envelope(
        config.function,
        config.params,
        config.envelope_plan,
        shells=config.tolerances.shells,
        atol=config.tolerances.atol,
    )
    if envelope.control.values.max() <= config.tolerances.atol:
        logger.info("Measured envelope vanishes within atol; using the zero control.")
        return ControlFunction.zero()

    return envelope.control


def _check_convergence(config: ExperimentConfig, control: ControlFunction):
    exponent = control.exponent
    if exponent is None or control.kind == ControlKind.ZERO:
        return None

    verdict = convergence_predicate(config.scheme, exponent)
    if not verdict.converges:
        raise DivergentSeries(
            f"{config.scheme.name} series with r={exponent:g}: "
            f"{verdict.condition} fails (ratio {verdict.ratio:.6g})."
        )
    return verdict


def _tail_estimator(control, space, x, spec):
    def estimate(n):
        value = phi_tilde(control, space, x, spec, start=n)
        return None if value.tail is None else value.total

    return estimate


def run_check_params(config: ExperimentConfig) -> RunReport:
    with stage("params"):
        verdict = admissible(config.params)

    row = {
        "family": str(config.params.family),
        "admissible": bool(verdict),
        "message": verdict.message,
        "scheme": config.scheme.label,
        "converges": None,
        "ratio": None,
        "condition": None,
        "note": None,
    }

    control = config.control
    if control is not None and control.exponent is not None:
        with stage("convergence"):
            predicate = convergence_predicate(config.scheme, control.exponent)
        row.update(
            converges=predicate.converges,
            ratio=predicate.ratio,
            condition=predicate.condition,
            note=predicate.note,
        )

    passed = row["admissible"] and row["converges"] is not False
    logger.info("check-params: %s", verdict.message)

    return RunReport(
        kind="check-params",
        config=config.echo,
        columns=CHECK_COLUMNS,
        points=[row],
        summary={"passed": passed},
        notes=_notes(config),
    )


def run_defects(config: ExperimentConfig) -> RunReport:
    """Sample the inequality defect; checked against the control when one is given."""
    started = time.perf_counter()
    f, space = config.function, config.space

    with stage("params"):
        config.params.check_degenerate()

    with stage("defect"):
        triples = draw_samples(space, config.plan, arity=3)
        samples = [defect(f, x, y, z, config.params) for x, y, z in triples]

    rows = [
        dict(row)
        for row in DefectSampleSerializer(
            samples, many=True, context={"space": space}
        ).data
    ]
    summary = {"count": len(rows), "max_defect": max(row["defect"] for row in rows)}

    if config.control is not None:
        atol, rtol = config.tolerances.atol, config.tolerances.rtol
        bounds = [config.control(space, *sample.triple) for sample in samples]
        violations = sum(
            sample.defect > bound + atol + rtol * abs(bound)
            for sample, bound in zip(samples, bounds)
        )
        summary.update(violations=violations, passed=violations == 0)

    return RunReport(
        kind="defect",
        config=config.echo,
        columns=DEFECT_COLUMNS,
        points=rows,
        summary=summary,
        notes=_notes(config),
        runtime=time.perf_counter() - started,
    )


def run_approximate(config: ExperimentConfig) -> RunReport:
    started = time.perf_counter()
    f, space, tolerances = config.function, config.space, config.tolerances
    control = config.control
    spec = _series_spec(config) if control is not None else None

    with stage("approximate"):
        records = []
        for index, x in enumerate(draw_samples(space, config.plan)):
            estimator = _tail_estimator(control, space, x, spec) if spec else None
            report = approximate(
                f, x, config.scheme,
                tol=tolerances.tol,
                max_n=tolerances.max_n,
                tail_estimator=estimator,
            )
            records.append({
                "index": index,
                "x_norm": space.norm(x),
                **ConvergenceReportSerializer(report).data,
                "last_residual": report.residuals[-1] if report.residuals else 0.0,
            })

    failed = sum(not record["converged"] for record in records)
    return RunReport(
        kind="approximate",
        config=config.echo,
        columns=APPROXIMATE_COLUMNS,
        points=records,
        summary={"points": len(records), "not_converged": failed, "passed": failed == 0},
        notes=_notes(config),
        runtime=time.perf_counter() - started,
    )


def run_verify(config: ExperimentConfig) -> RunReport:
    """
    Check ``||f(x) - A(x)|| <= phi_tilde(x) + tail`` at every sample point.

    The run passes when the largest violation is within ``tol``.
    """
    started = time.perf_counter()
    f, space, tolerances = config.function, config.space, config.tolerances

    with stage("params"):
        _require_admissible(config)

    with stage("envelope"):
        control = _resolve_control(config)

    with stage("convergence"):
        predicate = _check_convergence(config, control)

    spec = _series_spec(config)
    notes = _notes(config)
    if predicate is not None and predicate.note:
        notes.append(predicate.note)

    with stage("sampling"):
        points = draw_samples(space, config.plan)

    records = []
    with stage("verify"):
        for index, x in enumerate(points):
            bound = phi_tilde(control, space, x, spec)
            report = approximate(
                f, x, config.scheme,
                tol=tolerances.tol,
                max_n=tolerances.max_n,
                tail_estimator=_tail_estimator(control, space, x, spec),
            )
            if not report.converged:
                raise NotConverged(
                    f"{config.scheme.name} did not converge at point {index} "
                    f"within {tolerances.max_n} steps."
                )

            distance = space.norm(f(x) - report.value)
            margin = bound.total - distance
            records.append({
                "index": index,
                "point": _vector(x),
                "x_norm": space.norm(x),
                "distance": distance,
                "bound": bound.value,
                "tail": bound.tail,
                "margin": margin,
                "iterations": report.iterations,
                "tail_bound": report.tail_bound,
            })

    max_violation = max(-record["margin"] for record in records)
    passed = max_violation <= tolerances.tol
    summary = {
        "points": len(records),
        "max_violation": max_violation,
        "passed": passed,
        "control": control.describe(),
        "tail_unavailable": sum(record["tail"] is None for record in records),
    }
    if control.kind == ControlKind.POWER:
        summary["empirical_sup"] = max(
            record["distance"] / record["x_norm"] ** control.r for record in records
        )

    audit_block = None
    if config.audit:
        with stage("audit"):
            audit_block = _audit_block(config, control, points)

    logger.info(
        "verify %s: %d points, max violation %.3g -> %s",
        config.scheme.label, len(records), max_violation, "pass" if passed else "fail",
    )

    return RunReport(
        kind="verify",
        config=config.echo,
        columns=VERIFY_COLUMNS,
        points=records,
        summary=summary,
        audit=audit_block,
        notes=notes,
        runtime=time.perf_counter() - started,
    )


def _audit_block(config: ExperimentConfig, control: ControlFunction, points) -> dict:
    if control.kind != ControlKind.POWER:
        raise ControlKindError("The audit needs a power control.")

    result = audit(
        config.function,
        config.params,
        config.scheme,
        control,
        points,
        tol=config.tolerances.tol,
        max_n=config.tolerances.max_n,
        printed_display=config.printed_display,
    )
    return dict(BoundAuditSerializer(result).data)


def run_audit(config: ExperimentConfig) -> RunReport:
    """Compare the printed, derived and empirical constants of the scheme."""
    started = time.perf_counter()

    with stage("params"):
        _require_admissible(config)

    control = config.control
    with stage("audit"):
        if control is None or control.kind != ControlKind.POWER:
            raise ControlKindError("The audit needs a power control.")

    with stage("convergence"):
        predicate = convergence_predicate(config.scheme, control.r)

    with stage("audit"):
        points = draw_samples(config.space, config.plan)
        block = _audit_block(config, control, points)

    notes = _notes(config)
    if predicate.note:
        notes.append(predicate.note)

    row = {
        **{key: block[key] for key in AUDIT_COLUMNS if key in block},
        **block["verdicts"],
    }

    return RunReport(
        kind="audit",
        config=config.echo,
        columns=AUDIT_COLUMNS,
        points=[row],
        summary={
            "passed": block["verdicts"]["empirical_le_derived"] != "fail",
            "convergence": {
                "converges": predicate.converges,
                "ratio": predicate.ratio,
                "condition": predicate.condition,
            },
        },
        audit=block,
        notes=notes,
        runtime=time.perf_counter() - started,
    )


def _grid_cells(grid: dict) -> list:
    axes = [(name, grid[name]) for name in GRID_AXES if name in grid]
    if not axes or any(not values for _, values in axes):
        return []

    names = [name for name, _ in axes]
    return [dict(zip(names, cell)) for cell in itertools.product(*(v for _, v in axes))]


def _apply_cell(document: dict, cell: dict) -> dict:
    document = copy.deepcopy(document)
    params = document.setdefault("params", {})

    for name in ("rho1", "rho2"):
        if name in cell:
            value = complex(cell[name])
            params[name] = [value.real, value.imag]
    for name in ("alpha", "beta"):
        if name in cell:
            params[name] = cell[name]

    if "r" in cell or "theta" in cell:
        control = document.setdefault("control", {})
        control["kind"] = ControlKind.POWER.value
        control.pop("edges", None)
        control.pop("values", None)
        for name in ("r", "theta"):
            if name in cell:
                control[name] = cell[name]

    return document


def _sweep_row(config: ExperimentConfig, build_error: str | None, cell: dict) -> dict:
    row = dict.fromkeys(SWEEP_COLUMNS)

    if config is None:
        for name in ("rho1", "rho2"):
            if name in cell:
                value = complex(cell[name])
                row[f"{name}_re"], row[f"{name}_im"] = value.real, value.imag
        row.update({name: cell[name] for name in ("alpha", "beta", "theta", "r") if name in cell})
        row["status"] = build_error
        return row

    params, control = config.params, config.control
    row.update(
        family=str(params.family),
        rho1_re=params.rho1.real,
        rho1_im=params.rho1.imag,
        rho2_re=params.rho2.real,
        rho2_im=params.rho2.imag,
        alpha=params.alpha,
        beta=params.beta,
    )
    if control is not None and control.kind in (ControlKind.POWER, ControlKind.MEASURED):
        row.update(theta=control.theta, r=control.r)

    try:
        verdict = admissible(params)
    except LabError as exc:
        row["status"] = exc.code
        return row
    row["admissible"] = bool(verdict)

    if control is not None and control.kind == ControlKind.POWER:
        rho2 = abs(params.rho2)
        row["converges"] = convergence_predicate(config.scheme, control.r).converges
        try:
            row["paper_constant"] = corollary_constant(
                config.scheme.corollary, control.theta, control.r, rho2, beta=params.beta
            )
        except OutOfRegime:
            pass
        try:
            row["derived_constant"] = series_constant(
                config.scheme, control.theta, control.r, rho2,
                alpha=params.alpha,
                rho1_abs=abs(params.rho1),
                printed_display=config.printed_display,
            )
        except (DivergentSeries, Inadmissible):
            pass

    if not verdict:
        row["status"] = "inadmissible"
        return row

    try:
        report = run_verify(config)
    except LabError as exc:
        row["status"] = exc.code
        return row

    row.update(
        max_violation=report.summary["max_violation"],
        empirical_sup=report.summary.get("empirical_sup"),
        status=report.status,
    )
    return row


def run_sweep(document: dict, grid: dict) -> RunReport:
    """
    Run ``verify`` over the cartesian product of the grid axes, in the order
    rho1, rho2, alpha, beta, r, theta. A grid with no axes, or an empty axis,
    has no cells. Cell failures are recorded as the row status.
    """
    started = time.perf_counter()
    cells = _grid_cells(grid)
    rows = []

    for index, cell in enumerate(cells):
        serializer = ExperimentConfigSerializer(data=_apply_cell(document, cell))
        config, build_error = None, None

        if not serializer.is_valid():
            build_error = "invalid-config"
        else:
            try:
                config = serializer.save()
            except LabError as exc:
                build_error = exc.code

        row = _sweep_row(config, build_error, cell)
        logger.info("sweep cell %d %s -> %s", index, cell, row["status"])
        rows.append(row)

    base = ExperimentConfigSerializer(data=document)
    base.is_valid(raise_exception=True)

    return RunReport(
        kind="sweep",
        config={
            "base": dict(base.to_representation(base.validated_data)),
            "grid": {
                name: [
                    [complex(v).real, complex(v).imag] if name in ("rho1", "rho2") else v
                    for v in grid[name]
                ]
                for name in GRID_AXES if name in grid
            },
        },
        columns=SWEEP_COLUMNS,
        points=rows,
        summary={
            "cells": len(rows),
            "statuses": dict(sorted(Counter(row["status"] for row in rows).items())),
        },
        runtime=time.perf_counter() - started,
    )


RUNNERS = {
    "check-params": run_check_params,
    "defect": run_defects,
    "approximate": run_approximate,
    "verify": run_verify,
    "audit": run_audit,
}


def save_run(report: RunReport, user=None) -> ExperimentRun:
    config = report.config.get("base", report.config)

    return ExperimentRun.objects.create(
        kind=report.kind,
        family=config.get("params", {}).get("family", ""),
        status=report.status,
        passed=report.summary.get("passed"),
        max_violation=report.summary.get("max_violation"),
        runtime=report.runtime,
        config=report.config,
        report=report.to_dict(),
        created_by=user,
    )
