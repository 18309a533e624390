#!/usr/bin/env python3
"""
Check reports and their JSON / CSV serialization.

Only the `runtime` and `generated_at` fields vary between two runs with
the same config and seed.
"""
import csv
import io
import json
import math
from dataclasses import dataclass, field, asdict
from datetime import datetime, timezone
from typing import List

import numpy as np

from app.io import format_number


@dataclass
class CheckReport:
    """Result of one numerical experiment."""
    check_name: str
    parameters: dict
    measured: dict
    threshold: dict
    passed: bool
    runtime: float = 0.0
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return _plain(asdict(self))


def _plain(value):
    """Convert numpy scalars/arrays and non-finite floats into JSON-safe values."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        if math.isnan(value):
            return 'nan'
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        return value
    return value


def reports_to_json(reports: List[CheckReport], config: dict) -> str:
    """One JSON document: config, per-check reports and an overall flag."""
    document = {
        'generated_at': datetime.now(timezone.utc).isoformat(timespec='seconds'),
        'config': _plain(config),
        'passed': all(r.passed for r in reports),
        'checks': [r.to_dict() for r in reports],
    }
    return json.dumps(document, indent=2, sort_keys=True)


def _flatten(prefix: str, value, rows: list):
    if isinstance(value, dict):
        for key in sorted(value):
            _flatten(f"{prefix}.{key}" if prefix else str(key), value[key], rows)
    elif isinstance(value, list):
        for i, item in enumerate(value):
            _flatten(f"{prefix}[{i}]", item, rows)
    else:
        rows.append((prefix, value))


def reports_to_csv(reports: List[CheckReport]) -> str:
    """Long format: check_name, section, key, value, passed."""
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(['check_name', 'section', 'key', 'value', 'passed'])
    for report in reports:
        data = report.to_dict()
        for section in ('parameters', 'measured', 'threshold'):
            rows = []
            _flatten('', data[section], rows)
            for key, value in rows:
                text = format_number(value) if isinstance(value, float) else value
                writer.writerow([report.check_name, section, key, text, report.passed])
    return buffer.getvalue()
