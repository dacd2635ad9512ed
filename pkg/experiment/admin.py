from django.contrib import admin
from experiment.models import ExperimentRun


@admin.register(ExperimentRun)
class ExperimentRunAdmin(admin.ModelAdmin):
    list_display = ("id", "kind", "family", "status", "passed", "created_at",)
    list_filter = ("kind", "family", "passed",)
    readonly_fields = ("config", "report", "runtime", "created_at",)
