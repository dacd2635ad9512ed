import json
import math
import numbers
from pathlib import Path

import numpy as np
from rest_framework import serializers
from rest_framework.exceptions import ValidationError

from stability.choices import (
    ControlKind,
    CoreKind,
    Direction,
    DirectionMode,
    Family,
    NormKind,
    PerturbationKind,
    SchemeKind,
)
from stability.controls import ControlFunction
from stability.direct_method import Scheme
from stability.exceptions import ReportIOError
from stability.functions import AdditiveCore, Perturbation, TestFunction
from stability.inequality import RhoParams
from stability.space import NormedSpace, SamplePlan


class ComplexField(serializers.Field):
    """A complex scalar written as a number or an ``[re, im]`` pair."""
    default_error_messages = {
        "invalid": "Expected a number or an [re, im] pair.",
        "not_finite": "Complex components must be finite.",
    }

    def to_internal_value(self, data):
        if isinstance(data, bool):
            self.fail("invalid")

        if isinstance(data, numbers.Real):
            value = complex(float(data), 0.0)
        elif (
            isinstance(data, (list, tuple))
            and len(data) == 2
            and all(
                isinstance(part, numbers.Real) and not isinstance(part, bool)
                for part in data
            )
        ):
            value = complex(float(data[0]), float(data[1]))
        else:
            self.fail("invalid")

        if not (math.isfinite(value.real) and math.isfinite(value.imag)):
            self.fail("not_finite")

        return value

    def to_representation(self, value):
        value = complex(value)
        return [float(value.real), float(value.imag)]


class VectorField(serializers.ListField):
    child = ComplexField()

    def __init__(self, **kwargs):
        kwargs.setdefault("min_length", 1)
        super().__init__(**kwargs)

    def to_internal_value(self, data):
        return np.array(super().to_internal_value(data), dtype=np.complex128)


class MatrixField(serializers.ListField):
    child = VectorField()

    def __init__(self, **kwargs):
        kwargs.setdefault("min_length", 1)
        super().__init__(**kwargs)

    def to_internal_value(self, data):
        rows = super().to_internal_value(data)
        if len({len(row) for row in rows}) != 1:
            raise ValidationError("Matrix rows must all have the same length.")

        return np.array(rows, dtype=np.complex128)


class SpaceSerializer(serializers.Serializer):
    dim = serializers.IntegerField(min_value=1)
    norm = serializers.ChoiceField(choices=NormKind.choices, default=NormKind.L2)

    def create(self, validated_data):
        return NormedSpace(validated_data["dim"], validated_data["norm"])


class CoreSerializer(serializers.Serializer):
    """
    Additive core: an explicit ``matrix``, a Gaussian matrix drawn from
    ``seed``, or the identity when neither is given.
    """
    kind = serializers.ChoiceField(
        choices=CoreKind.choices, default=CoreKind.COMPLEX_LINEAR
    )
    matrix = MatrixField(required=False)
    seed = serializers.IntegerField(min_value=0, required=False)

    def validate(self, data):
        if "matrix" in data and "seed" in data:
            raise ValidationError("Give either a core matrix or a seed, not both.")

        if data["kind"] == CoreKind.REAL_LINEAR and "matrix" in data:
            if np.any(data["matrix"].imag):
                raise ValidationError(
                    {"matrix": "A real-linear core matrix must be real."}
                )
            data["matrix"] = data["matrix"].real

        return data


def build_core(data: dict, dim: int) -> AdditiveCore:
    if "matrix" in data:
        return AdditiveCore(data["kind"], data["matrix"])
    if "seed" in data:
        return AdditiveCore.random(dim, data["seed"], data["kind"])
    if data["kind"] == CoreKind.REAL_LINEAR:
        return AdditiveCore(CoreKind.REAL_LINEAR, np.eye(2 * dim))
    return AdditiveCore.identity(dim)


class TableEntrySerializer(serializers.Serializer):
    point = VectorField()
    value = VectorField()


class PerturbationSerializer(serializers.Serializer):
    kind = serializers.ChoiceField(
        choices=PerturbationKind.choices, default=PerturbationKind.NONE
    )
    epsilon = serializers.FloatField(min_value=0.0, default=0.0)
    theta = serializers.FloatField(min_value=0.0, default=0.0)
    r = serializers.FloatField(default=0.0)
    entries = TableEntrySerializer(many=True, required=False)
    default = VectorField(required=False)
    direction_seed = serializers.IntegerField(min_value=0, default=0)
    direction_mode = serializers.ChoiceField(
        choices=DirectionMode.choices, default=DirectionMode.HASHED
    )

    def validate(self, data):
        if data["kind"] != PerturbationKind.TABULATED and (
            "entries" in data or "default" in data
        ):
            raise ValidationError(
                "Table entries and defaults only apply to tabulated perturbations."
            )

        return data


def build_perturbation(data: dict, space: NormedSpace) -> Perturbation:
    if data["kind"] != PerturbationKind.TABULATED:
        return Perturbation(
            kind=data["kind"],
            epsilon=data["epsilon"],
            theta=data["theta"],
            r=data["r"],
            direction_seed=data["direction_seed"],
            direction_mode=data["direction_mode"],
        )

    entries = [
        (space.check(entry["point"]), space.check(entry["value"]))
        for entry in data.get("entries", [])
    ]
    default = data.get("default")
    if default is not None:
        if len(default) == 1:
            default = np.broadcast_to(default, (space.dim,))
        default = space.check(default)

    return Perturbation.tabulated(entries, default=default)


class TestFunctionSerializer(serializers.Serializer):
    __test__ = False

    space = SpaceSerializer()
    core = CoreSerializer(default=dict)
    perturbation = PerturbationSerializer(default=dict)
    force_zero_at_origin = serializers.BooleanField(default=False)

    def to_internal_value(self, data):
        # nested defaults skip validation, so fill them before it runs
        if isinstance(data, dict):
            data = {"core": {}, "perturbation": {}, **data}
        return super().to_internal_value(data)

    def validate(self, data):
        space = data["space"]
        core = data["core"]

        if "matrix" in core:
            expected = space["dim"] * (2 if core["kind"] == CoreKind.REAL_LINEAR else 1)
            if core["matrix"].shape != (expected, expected):
                raise ValidationError(
                    {"core": f"Matrix must be {expected}x{expected} for this space."}
                )

        for entry in data["perturbation"].get("entries", []):
            if len(entry["point"]) != space["dim"] or len(entry["value"]) != space["dim"]:
                raise ValidationError(
                    {"perturbation": f"Table vectors must have {space['dim']} coordinates."}
                )

        default = data["perturbation"].get("default")
        if default is not None and len(default) not in (1, space["dim"]):
            raise ValidationError(
                {"perturbation": f"Default must have 1 or {space['dim']} coordinates."}
            )

        return data

    def create(self, validated_data):
        space = SpaceSerializer().create(validated_data["space"])

        return TestFunction(
            space=space,
            core=build_core(validated_data["core"], space.dim),
            perturbation=build_perturbation(validated_data["perturbation"], space),
            force_zero_at_origin=validated_data["force_zero_at_origin"],
        )


class RhoParamsSerializer(serializers.Serializer):
    family = serializers.ChoiceField(choices=Family.choices)
    rho1 = ComplexField(default=0.0)
    rho2 = ComplexField(default=0.0)
    alpha = serializers.FloatField(default=1.0)
    beta = serializers.FloatField(default=0.0)

    def validate(self, data):
        for name in ("alpha", "beta"):
            if not math.isfinite(data[name]):
                raise ValidationError({name: "Must be finite."})

        return data

    def create(self, validated_data):
        return RhoParams(**validated_data)


class SchemeSerializer(serializers.Serializer):
    """
    ``dyadic`` schemes scale by 2; ``beta`` schemes scale by ``1 + beta``,
    beta defaulting to the one in the inequality parameters.
    """
    kind = serializers.ChoiceField(choices=SchemeKind.choices)
    direction = serializers.ChoiceField(
        choices=Direction.choices, default=Direction.FORWARD
    )
    beta = serializers.FloatField(required=False)

    def validate(self, data):
        if data["kind"] == SchemeKind.DYADIC and "beta" in data:
            raise ValidationError({"beta": "Dyadic schemes do not take beta."})

        return data


def build_scheme(data: dict, beta: float = 0.0) -> Scheme:
    if data["kind"] == SchemeKind.DYADIC:
        return Scheme.dyadic(data["direction"])
    return Scheme.beta(data.get("beta", beta), data["direction"])


class ControlSerializer(serializers.Serializer):
    """
    Control function. A ``measured`` control without a shell table is
    measured from the test function by the harness.
    """
    kind = serializers.ChoiceField(
        choices=ControlKind.choices, default=ControlKind.MEASURED
    )
    theta = serializers.FloatField(min_value=0.0, default=0.0)
    r = serializers.FloatField(default=0.0)
    edges = serializers.ListField(
        child=serializers.FloatField(), required=False, min_length=2
    )
    values = serializers.ListField(
        child=serializers.FloatField(min_value=0.0), required=False, min_length=1
    )

    def validate(self, data):
        kind = data["kind"]
        has_table = "edges" in data or "values" in data

        if kind == ControlKind.TABULATED and not has_table:
            raise ValidationError("A tabulated control needs edges and values.")
        if kind in (ControlKind.ZERO, ControlKind.POWER) and has_table:
            raise ValidationError(f"A {kind} control takes no shell table.")

        if has_table:
            edges, values = data.get("edges", []), data.get("values", [])
            if len(edges) != len(values) + 1:
                raise ValidationError("A shell table needs one more edge than values.")
            if edges[0] <= 0 or any(b <= a for a, b in zip(edges, edges[1:])):
                raise ValidationError({"edges": "Edges must be positive and increasing."})

        return data

    def create(self, validated_data):
        kind = validated_data["kind"]

        if kind == ControlKind.ZERO:
            return ControlFunction.zero()
        if kind == ControlKind.POWER:
            return ControlFunction.power(validated_data["theta"], validated_data["r"])
        if kind == ControlKind.TABULATED:
            return ControlFunction.tabulated(
                validated_data["edges"], validated_data["values"]
            )
        if "edges" not in validated_data:
            return None

        return ControlFunction.measured(
            validated_data["edges"],
            validated_data["values"],
            validated_data["theta"],
            validated_data["r"],
        )


class SamplePlanSerializer(serializers.Serializer):
    seed = serializers.IntegerField(min_value=0, max_value=2 ** 64 - 1, default=0)
    count = serializers.IntegerField(min_value=1, default=100)
    radius = serializers.FloatField(default=1.0)
    exclude_origin_below = serializers.FloatField(min_value=0.0, default=0.0)

    def validate(self, data):
        if not data["radius"] > 0 or not math.isfinite(data["radius"]):
            raise ValidationError({"radius": "Radius must be positive and finite."})
        if data["exclude_origin_below"] >= data["radius"]:
            raise ValidationError(
                {"exclude_origin_below": "Must be smaller than the radius."}
            )

        return data

    def create(self, validated_data):
        return SamplePlan(**validated_data)


class ConvergenceReportSerializer(serializers.Serializer):
    point = VectorField(read_only=True)
    value = VectorField(read_only=True)
    iterations = serializers.IntegerField(read_only=True)
    residuals = serializers.ListField(child=serializers.FloatField(), read_only=True)
    tail_bound = serializers.FloatField(read_only=True, allow_null=True)
    converged = serializers.BooleanField(read_only=True)


class DefectSampleSerializer(serializers.Serializer):
    """Flat defect record; the norms are taken in ``context["space"]``."""
    family = serializers.CharField(read_only=True)
    x_norm = serializers.SerializerMethodField()
    y_norm = serializers.SerializerMethodField()
    z_norm = serializers.SerializerMethodField()
    lhs = serializers.FloatField(source="lhs_norm", read_only=True)
    rhs = serializers.FloatField(source="rhs_norm", read_only=True)
    defect = serializers.FloatField(read_only=True)

    def _norm(self, obj, index):
        return self.context["space"].norm(obj.triple[index])

    def get_x_norm(self, obj) -> float:
        return self._norm(obj, 0)

    def get_y_norm(self, obj) -> float:
        return self._norm(obj, 1)

    def get_z_norm(self, obj) -> float:
        return self._norm(obj, 2)


class BoundAuditSerializer(serializers.Serializer):
    which = serializers.CharField(read_only=True)
    theta = serializers.FloatField(read_only=True)
    r = serializers.FloatField(read_only=True)
    rho2 = serializers.FloatField(read_only=True)
    alpha = serializers.FloatField(read_only=True)
    beta = serializers.FloatField(read_only=True)
    paper_constant = serializers.FloatField(read_only=True, allow_null=True)
    derived_constant = serializers.FloatField(read_only=True, allow_null=True)
    empirical_sup = serializers.FloatField(read_only=True)
    verdicts = serializers.DictField(child=serializers.CharField(), read_only=True)


def load_test_function(path) -> TestFunction:
    """Load a JSON test-function document."""
    try:
        document = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ReportIOError(f"Cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError({"document": f"{path} is not valid JSON: {exc}"}) from exc

    serializer = TestFunctionSerializer(data=document)
    serializer.is_valid(raise_exception=True)
    return serializer.save()
