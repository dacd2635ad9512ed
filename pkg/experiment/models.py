from django.conf import settings
from django.db import models
from django.utils.translation import gettext_lazy as _

from auditlog.registry import auditlog


class ExperimentRun(models.Model):

    class Kind(models.TextChoices):
        CHECK_PARAMS = "check-params", _("Check parameters")
        DEFECT = "defect", _("Defect sampling")
        APPROXIMATE = "approximate", _("Approximation")
        VERIFY = "verify", _("Verification")
        AUDIT = "audit", _("Constant audit")
        SWEEP = "sweep", _("Parameter sweep")

    kind = models.CharField(max_length=16, choices=Kind)
    family = models.CharField(max_length=1, blank=True)
    status = models.CharField(max_length=32)
    passed = models.BooleanField(null=True, blank=True)
    max_violation = models.FloatField(null=True, blank=True)
    runtime = models.FloatField(default=0.0)
    config = models.JSONField(default=dict)
    report = models.JSONField(default=dict)
    created_by = models.ForeignKey(
        settings.AUTH_USER_MODEL,
        on_delete=models.SET_NULL,
        null=True,
        blank=True,
        related_name="experiment_runs",
    )
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ("-created_at", "-id",)

    def __str__(self) -> str:
        return f"{self.kind} #{self.pk}: {self.status}"


auditlog.register(ExperimentRun)
