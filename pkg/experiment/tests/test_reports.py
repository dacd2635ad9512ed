import json
import tempfile
from pathlib import Path

from django.test import SimpleTestCase

from experiment.reports import (
    ReportEncoder,
    format_float,
    render_csv,
    render_report,
    write_report,
)
from experiment.runner import RunReport, run_approximate, run_sweep, run_verify
from experiment.tests.test_runner import build_config, load_document
from stability.choices import ReportFormat
from stability.exceptions import ReportIOError


class FormattingTests(SimpleTestCase):

    def test_float_round_trip_precision(self):
        self.assertEqual(format_float(1.0), "1.0")
        self.assertEqual(format_float(-3.0), "-3.0")
        self.assertEqual(format_float(0.1), "0.10000000000000001")
        self.assertEqual(float(format_float(2 / 3)), 2 / 3)

    def test_encoder_writes_17_digits(self):
        text = json.dumps({"value": 0.1, "count": 2, "flag": True}, cls=ReportEncoder)

        self.assertEqual(text, '{"value": 0.10000000000000001, "count": 2, "flag": true}')

    def test_csv_cells(self):
        text = render_csv(
            ("a", "b", "c", "d"),
            [{"a": None, "b": True, "c": 0.5, "d": "inadmissible"}],
        )

        self.assertEqual(text, "a,b,c,d\n,true,0.5,inadmissible\n")

    def test_header_only_csv(self):
        report = RunReport(kind="sweep", config={}, columns=("family", "status"))

        self.assertEqual(render_report(report, ReportFormat.CSV), "family,status\n")


class RenderReportTests(SimpleTestCase):

    def setUp(self):
        self.document = load_document("scalar_offset.json")
        self.document["plan"]["count"] = 10

    def test_identical_runs_render_identically(self):
        first = render_report(run_verify(build_config(self.document)))
        second = render_report(run_verify(build_config(self.document)))

        self.assertEqual(first, second)
        self.assertNotIn("runtime", json.loads(first)["summary"])

    def test_identical_sweeps_render_identically(self):
        document = load_document("sweep_rho2.json")
        grid = document.pop("grid")

        for report_format in (ReportFormat.JSON, ReportFormat.CSV):
            first = render_report(run_sweep(document, grid), report_format)
            second = render_report(run_sweep(document, grid), report_format)

            self.assertEqual(first, second)

    def test_json_report_contents(self):
        data = json.loads(render_report(run_verify(build_config(self.document))))

        self.assertEqual(data["kind"], "verify")
        self.assertEqual(len(data["points"]), 10)
        self.assertTrue(data["summary"]["passed"])
        self.assertEqual(data["config"]["plan"]["seed"], 7)

    def test_approximate_records(self):
        data = json.loads(render_report(run_approximate(build_config(self.document))))
        record = data["points"][0]

        self.assertEqual(len(data["points"]), 10)
        for key in ("point", "value", "iterations", "residuals", "tail_bound", "converged"):
            self.assertIn(key, record)
        self.assertNotIn("x", record)
        self.assertEqual(len(record["point"]), 1)
        self.assertEqual(len(record["residuals"]), record["iterations"])
        self.assertTrue(record["converged"])
        point, value = complex(*record["point"][0]), complex(*record["value"][0])
        self.assertLessEqual(abs(value - point), 1e-8)

    def test_single_point(self):
        self.document["plan"]["count"] = 1
        report = run_verify(build_config(self.document))

        self.assertEqual(len(json.loads(render_report(report))["points"]), 1)
        self.assertEqual(len(render_report(report, ReportFormat.CSV).splitlines()), 2)

    def test_csv_has_header_and_one_row_per_point(self):
        text = render_report(run_verify(build_config(self.document)), ReportFormat.CSV)
        lines = text.splitlines()

        self.assertEqual(len(lines), 11)
        self.assertEqual(lines[0], "index,x_norm,distance,bound,tail,margin")

    def test_write_report_creates_directories(self):
        report = run_verify(build_config(self.document))

        with tempfile.TemporaryDirectory() as tmp:
            path = write_report(report, ReportFormat.JSON, Path(tmp) / "nested" / "verify.json")

            self.assertEqual(path.read_text(), render_report(report))

    def test_write_report_io_error(self):
        report = RunReport(kind="verify", config={})

        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(ReportIOError) as ctx:
                write_report(report, ReportFormat.JSON, tmp)

        self.assertEqual(ctx.exception.exit_code, 3)
