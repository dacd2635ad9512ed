"""
Report rendering. Output is byte-stable for identical reports: JSON keys are
sorted and floats carry 17 significant digits in both JSON and CSV.
"""
import csv
import io
import json
import logging
import math
from pathlib import Path

import numpy as np

from experiment.runner import RunReport
from stability.choices import ReportFormat
from stability.exceptions import ReportIOError

logger = logging.getLogger(__name__)


def format_float(value: float) -> str:
    text = format(value, ".17g")
    if text.lstrip("-").isdigit():
        text += ".0"
    return text


class ReportEncoder(json.JSONEncoder):

    def default(self, o):
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, complex):
            return [o.real, o.imag]
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, Path):
            return str(o)

        return super().default(o)

    def iterencode(self, o, _one_shot=False):
        def floatstr(value):
            if math.isfinite(value):
                return format_float(value)
            if not self.allow_nan:
                raise ValueError(f"Out of range float value: {value!r}")
            return "NaN" if value != value else ("Infinity" if value > 0 else "-Infinity")

        encoder = (
            json.encoder.encode_basestring_ascii
            if self.ensure_ascii else json.encoder.encode_basestring
        )
        markers = {} if self.check_circular else None
        _iterencode = json.encoder._make_iterencode(
            markers, self.default, encoder, self.indent, floatstr,
            self.key_separator, self.item_separator, self.sort_keys,
            self.skipkeys, _one_shot,
        )
        return _iterencode(o, 0)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format_float(float(value)) if math.isfinite(value) else ""
    return str(value)


def render_csv(columns, rows) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)

    for row in rows:
        writer.writerow([_cell(row.get(column)) for column in columns])

    return buffer.getvalue()


def render_report(report: RunReport, fmt: ReportFormat = ReportFormat.JSON) -> str:
    if ReportFormat(fmt) == ReportFormat.CSV:
        return render_csv(report.columns, report.points)

    return json.dumps(report.to_dict(), cls=ReportEncoder, sort_keys=True, indent=2) + "\n"


def write_report(report: RunReport, fmt: ReportFormat, path) -> Path:
    path = Path(path)
    text = render_report(report, fmt)

    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise ReportIOError(f"Cannot write {path}: {exc}") from exc

    logger.info("Wrote %s %s report to %s", fmt, report.kind, path)
    return path
