from pathlib import Path

from django.conf import settings
from rest_framework import serializers
from rest_framework.exceptions import ValidationError

from experiment.config import ExperimentConfig, Tolerances
from experiment.models import ExperimentRun
from stability.choices import Family, SchemeKind
from stability.serializers import (
    ComplexField,
    ControlSerializer,
    RhoParamsSerializer,
    SamplePlanSerializer,
    SchemeSerializer,
    TestFunctionSerializer,
    build_scheme,
)

PAIRED_SCHEMES = {
    Family.A: SchemeKind.DYADIC,
    Family.B: SchemeKind.BETA,
}


def lab_default(key):
    return lambda: settings.STABILITY_LAB[key]


class ToleranceSerializer(serializers.Serializer):
    tol = serializers.FloatField(min_value=0.0, default=lab_default("TOL"))
    atol = serializers.FloatField(min_value=0.0, default=lab_default("ATOL"))
    rtol = serializers.FloatField(min_value=0.0, default=lab_default("RTOL"))
    max_n = serializers.IntegerField(min_value=1, default=lab_default("MAX_N"))
    trunc_terms = serializers.IntegerField(
        min_value=1, default=lab_default("TRUNC_TERMS")
    )
    shells = serializers.IntegerField(min_value=1, default=lab_default("SHELLS"))

    def validate_tol(self, value):
        if value <= 0:
            raise ValidationError("tol must be positive.")

        return value


class ExperimentConfigSerializer(serializers.Serializer):
    """
    Experiment document. Family A pairs with dyadic schemes and family B with
    (1 + beta) schemes unless ``force`` is set; the scheme defaults to the
    forward one of the family.
    """
    function = TestFunctionSerializer()
    params = RhoParamsSerializer()
    scheme = SchemeSerializer(required=False)
    control = ControlSerializer(default=dict)
    plan = SamplePlanSerializer(default=dict)
    envelope = SamplePlanSerializer(required=False)
    tolerances = ToleranceSerializer(default=dict)
    force = serializers.BooleanField(default=False)
    printed_display = serializers.BooleanField(default=False)
    audit = serializers.BooleanField(default=False)
    output = serializers.CharField(required=False, write_only=True)

    def to_internal_value(self, data):
        if isinstance(data, dict):
            data = {"control": {}, "plan": {}, "tolerances": {}, **data}
        return super().to_internal_value(data)

    def validate(self, data):
        family = data["params"]["family"]
        paired = PAIRED_SCHEMES[Family(family)]

        if "scheme" not in data:
            data["scheme"] = {"kind": paired, "direction": "forward"}

        if data["scheme"]["kind"] != paired and not data["force"]:
            raise ValidationError(
                {
                    "scheme": (
                        f"Family {family} pairs with {paired} schemes; "
                        "set force to cross-pair."
                    )
                }
            )

        if "envelope" not in data:
            plan = data["plan"]
            data["envelope"] = {
                "seed": plan["seed"] + 1,
                "count": settings.STABILITY_LAB["ENVELOPE_SAMPLES"],
                "radius": plan["radius"],
                "exclude_origin_below": plan["exclude_origin_below"],
            }

        return data

    def create(self, validated_data):
        params = RhoParamsSerializer().create(validated_data["params"])
        output = validated_data.get("output")

        return ExperimentConfig(
            function=TestFunctionSerializer().create(validated_data["function"]),
            params=params,
            scheme=build_scheme(validated_data["scheme"], params.beta),
            control=ControlSerializer().create(validated_data["control"]),
            plan=SamplePlanSerializer().create(validated_data["plan"]),
            envelope_plan=SamplePlanSerializer().create(validated_data["envelope"]),
            tolerances=Tolerances(**validated_data["tolerances"]),
            forced=validated_data["force"],
            printed_display=validated_data["printed_display"],
            audit=validated_data["audit"],
            output=Path(output) if output else None,
            echo=dict(self.to_representation(validated_data)),
        )


class GridSerializer(serializers.Serializer):
    rho1 = serializers.ListField(child=ComplexField(), required=False)
    rho2 = serializers.ListField(child=ComplexField(), required=False)
    alpha = serializers.ListField(child=serializers.FloatField(), required=False)
    beta = serializers.ListField(child=serializers.FloatField(), required=False)
    r = serializers.ListField(child=serializers.FloatField(), required=False)
    theta = serializers.ListField(
        child=serializers.FloatField(min_value=0.0), required=False
    )


class SweepRequestSerializer(serializers.Serializer):
    config = serializers.DictField()
    grid = GridSerializer(default=dict)

    def to_internal_value(self, data):
        if isinstance(data, dict):
            data = {"grid": {}, **data}
        return super().to_internal_value(data)

    def validate_config(self, value):
        ExperimentConfigSerializer(data=value).is_valid(raise_exception=True)

        return value


class ExperimentRunSerializer(serializers.ModelSerializer):
    created_by = serializers.SlugRelatedField(read_only=True, slug_field="username")

    class Meta:
        model = ExperimentRun
        fields = (
            "id",
            "kind",
            "family",
            "status",
            "passed",
            "max_violation",
            "runtime",
            "created_by",
            "created_at",
        )


class ExperimentRunDetailSerializer(ExperimentRunSerializer):

    class Meta(ExperimentRunSerializer.Meta):
        fields = ExperimentRunSerializer.Meta.fields + ("config", "report",)
