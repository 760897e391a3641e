"""
Report writing module: deterministic CSV / JSON emission
"""
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from config.settings import DEFAULT_OUTPUT_FORMAT, OUTPUT_FORMATS, SCHEMA_VERSION, SIGNIFICANT_DIGITS
from modules.errors import InvalidParameterError

logger = logging.getLogger(__name__)

STDOUT_TARGET = "-"


def format_number(value) -> str:
    """Fixed significant-digit text used for every emitted number."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        text = f"{value:.{SIGNIFICANT_DIGITS}g}"
        return "0" if text == "-0" else text
    return str(value)


def _json_value(value):
    if isinstance(value, dict):
        return {str(k): _json_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_value(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return None
        return float(format_number(value))
    return value


class ReportWriter:
    """Writes tables and key-value documents to a file path or stdout."""

    def __init__(self, output_format: str = DEFAULT_OUTPUT_FORMAT):
        """
        Initialize report writer.

        Args:
            output_format: 'csv' or 'json'
        """
        if output_format not in OUTPUT_FORMATS:
            raise InvalidParameterError(f"Unknown output format '{output_format}'")
        self.output_format = output_format

    def write_table(
        self,
        rows: Sequence[Dict],
        columns: Sequence[str],
        target: Union[str, Path],
        schema_header: bool = False
    ) -> str:
        """
        Write rows with a fixed column order.

        Args:
            rows: Row dictionaries; missing keys are left empty
            columns: Column order
            target: Output path or '-' for stdout
            schema_header: Prefix CSV output with a '# schema_version' line

        Returns:
            Where the table was written
        """
        if self.output_format == "json":
            document = {
                'schema_version': SCHEMA_VERSION,
                'columns': list(columns),
                'rows': [[_json_value(row.get(c)) for c in columns] for row in rows],
            }
            return self._emit(self._dump_json(document), target)

        buffer = io.StringIO()
        if schema_header:
            buffer.write(f"# schema_version: {SCHEMA_VERSION}\n")
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_number(row.get(c)) for c in columns])
        return self._emit(buffer.getvalue(), target)

    def write_document(self, document: Dict, target: Union[str, Path]) -> str:
        """Flat key-value document (CSV 'key,value' rows or a JSON object)."""
        payload = {'schema_version': SCHEMA_VERSION}
        payload.update(document)
        if self.output_format == "json":
            return self._emit(self._dump_json(payload), target)

        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["key", "value"])
        for key, value in payload.items():
            if isinstance(value, (list, tuple)):
                value = "; ".join(str(v) for v in value)
            writer.writerow([key, format_number(value)])
        return self._emit(buffer.getvalue(), target)

    def _dump_json(self, document: Dict) -> str:
        return json.dumps(_json_value(document), indent=2, ensure_ascii=False) + "\n"

    def _emit(self, text: str, target: Union[str, Path]) -> str:
        if str(target) == STDOUT_TARGET:
            sys.stdout.write(text)
            sys.stdout.flush()
            return "<stdout>"
        path = Path(target)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8', newline='') as f:
            f.write(text)
        logger.info("Wrote %s", path)
        return str(path)


def default_target(command: str, name: Optional[str], output_format: str, output_dir: Path) -> Path:
    """outputs/<command>_<preset>.<format>; no timestamp so reruns overwrite identically."""
    stem = f"{command}_{name}" if name else command
    return output_dir / f"{stem}.{output_format}"


def table_columns(rows: List[Dict], leading: Sequence[str]) -> List[str]:
    """Leading columns first, then any further keys in first-seen order."""
    columns = list(leading)
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    return columns
