from drf_spectacular.types import OpenApiTypes
from drf_spectacular.utils import extend_schema
from rest_framework import mixins, status, viewsets
from rest_framework.authtoken.views import ObtainAuthToken
from rest_framework.decorators import action
from rest_framework.permissions import IsAdminUser, IsAuthenticated
from rest_framework.response import Response
from rest_framework.settings import api_settings
from rest_framework.views import exception_handler

from experiment.models import ExperimentRun
from experiment.runner import run_audit, run_check_params, run_sweep, run_verify, save_run
from experiment.serializers import (
    ExperimentConfigSerializer,
    ExperimentRunDetailSerializer,
    ExperimentRunSerializer,
    SweepRequestSerializer,
)
from stability.exceptions import LabError

CONFIG_ACTIONS = ("check_params", "verify", "audit")


def lab_exception_handler(exc, context):
    """Lab errors answer 422 with their code and failing stage."""
    if isinstance(exc, LabError):
        return Response(
            {"code": exc.code, "detail": exc.detail, "stage": exc.stage},
            status=status.HTTP_422_UNPROCESSABLE_ENTITY,
        )

    return exception_handler(exc, context)


class LoginUserView(ObtainAuthToken):
    """
    View for creating a new auth token.
    """
    renderer_classes = api_settings.DEFAULT_RENDERER_CLASSES


class ExperimentRunViewSet(
    mixins.ListModelMixin,
    mixins.RetrieveModelMixin,
    mixins.DestroyModelMixin,
    viewsets.GenericViewSet,
):
    """
    ViewSet for running experiments and browsing the run history.

    - list, retrieve: own runs; staff see every run
    - destroy: staff only
    - check-params: validate a document and report admissibility, not saved
    - verify, audit, sweep: run and save the run
    """
    serializer_class = ExperimentRunSerializer

    def get_serializer_class(self):
        if self.action == "retrieve":
            return ExperimentRunDetailSerializer
        if self.action in CONFIG_ACTIONS:
            return ExperimentConfigSerializer
        if self.action == "sweep":
            return SweepRequestSerializer

        return self.serializer_class

    def get_permissions(self):
        if self.action == "destroy":
            permission_classes = (IsAdminUser,)
        else:
            permission_classes = (IsAuthenticated,)

        return [permission() for permission in permission_classes]

    def get_queryset(self):
        user = self.request.user
        queryset = ExperimentRun.objects.select_related("created_by")

        if not user.is_staff:
            queryset = queryset.filter(created_by=user)

        return queryset

    def _run_config(self, request, runner):
        serializer = self.get_serializer(data=request.data)
        serializer.is_valid(raise_exception=True)

        return runner(serializer.save())

    def _saved(self, request, report) -> Response:
        run = save_run(report, user=request.user)

        return Response(
            ExperimentRunDetailSerializer(run).data,
            status=status.HTTP_201_CREATED,
        )

    @extend_schema(request=ExperimentConfigSerializer, responses={200: OpenApiTypes.OBJECT})
    @action(detail=False, methods=["post"], url_path="check-params")
    def check_params(self, request):
        report = self._run_config(request, run_check_params)

        return Response(report.to_dict(), status=status.HTTP_200_OK)

    @extend_schema(
        request=ExperimentConfigSerializer,
        responses={201: ExperimentRunDetailSerializer},
    )
    @action(detail=False, methods=["post"])
    def verify(self, request):
        return self._saved(request, self._run_config(request, run_verify))

    @extend_schema(
        request=ExperimentConfigSerializer,
        responses={201: ExperimentRunDetailSerializer},
    )
    @action(detail=False, methods=["post"])
    def audit(self, request):
        return self._saved(request, self._run_config(request, run_audit))

    @extend_schema(
        request=SweepRequestSerializer,
        responses={201: ExperimentRunDetailSerializer},
    )
    @action(detail=False, methods=["post"])
    def sweep(self, request):
        serializer = self.get_serializer(data=request.data)
        serializer.is_valid(raise_exception=True)

        report = run_sweep(
            serializer.validated_data["config"],
            serializer.validated_data["grid"],
        )
        return self._saved(request, report)
