import json
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError
from rest_framework.exceptions import ValidationError

from experiment.reports import render_report, write_report
from experiment.runner import RUNNERS, run_sweep, save_run
from experiment.serializers import ExperimentConfigSerializer, SweepRequestSerializer
from stability.choices import ReportFormat
from stability.exceptions import LabError

SUBCOMMANDS = ("check-params", "defect", "approximate", "verify", "audit", "sweep")


class Command(BaseCommand):
    help = (
        "Run stability experiments from a JSON document. Exit codes: 0 pass, "
        "1 bound violation, 2 inadmissible or divergent, 3 runtime error."
    )

    def add_arguments(self, parser):
        parser.add_argument("subcommand", choices=SUBCOMMANDS)
        parser.add_argument("--config", required=True, help="Experiment JSON document.")
        parser.add_argument("--seed", type=int, help="Override the sample seed.")
        parser.add_argument("--points", type=int, help="Override the sample count.")
        parser.add_argument(
            "--format",
            choices=ReportFormat.values,
            default=ReportFormat.JSON,
            dest="report_format",
        )
        parser.add_argument("--out", help="Report path; stdout when omitted.")
        parser.add_argument(
            "--force",
            action="store_true",
            help="Allow family/scheme cross-pairing.",
        )
        parser.add_argument("--grid", help="Sweep grid JSON document.")
        parser.add_argument(
            "--save",
            action="store_true",
            help="Persist the run in the run history.",
        )

    def handle(self, *args, **options):
        subcommand = options["subcommand"]

        try:
            document = self._load_json(options["config"])
            self._apply_overrides(document, options)

            if subcommand == "sweep":
                report = self._run_sweep(document, options)
            else:
                serializer = ExperimentConfigSerializer(data=document)
                serializer.is_valid(raise_exception=True)
                config = serializer.save()
                report = RUNNERS[subcommand](config)

            output = options["out"] or self._document_output(document)
            if output:
                write_report(report, options["report_format"], output)
                self.stdout.write(
                    self.style.SUCCESS(f"{subcommand} report written to {output}.")
                )
            else:
                self.stdout.write(render_report(report, options["report_format"]), ending="")

        except ValidationError as exc:
            raise CommandError(f"invalid config: {exc.detail}", returncode=3)
        except LabError as exc:
            raise CommandError(str(exc), returncode=exc.exit_code)

        if options["save"]:
            run = save_run(report)
            self.stdout.write(self.style.SUCCESS(f"Saved run {run.pk}."))

        if not report.passed:
            returncode = 2 if subcommand == "check-params" else 1
            raise CommandError(f"{subcommand}: {report.status}", returncode=returncode)

    @staticmethod
    def _load_json(path) -> dict:
        try:
            document = json.loads(Path(path).read_text())
        except OSError as exc:
            raise CommandError(f"Cannot read {path}: {exc}", returncode=3)
        except json.JSONDecodeError as exc:
            raise CommandError(f"{path} is not valid JSON: {exc}", returncode=3)

        if not isinstance(document, dict):
            raise CommandError(f"{path} must hold a JSON object.", returncode=3)

        return document

    @staticmethod
    def _document_output(document: dict):
        output = document.get("output")
        if output and not Path(output).is_absolute():
            return settings.STABILITY_LAB["OUTPUT_DIR"] / output
        return output

    @staticmethod
    def _apply_overrides(document: dict, options: dict):
        plan = document.setdefault("plan", {})

        if options["seed"] is not None:
            plan["seed"] = options["seed"]
        if options["points"] is not None:
            plan["count"] = options["points"]
        if options["force"]:
            document["force"] = True

    def _run_sweep(self, document: dict, options: dict):
        grid = document.pop("grid", {})
        if options["grid"]:
            grid = self._load_json(options["grid"])

        serializer = SweepRequestSerializer(data={"config": document, "grid": grid})
        serializer.is_valid(raise_exception=True)

        return run_sweep(
            serializer.validated_data["config"],
            serializer.validated_data["grid"],
        )
