"""Output artifacts: ``leaves.csv``, ``report.json`` and ``checks.txt``."""
from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .foliation import LEAF_COLUMNS


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""

    def line(self):
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}" + (f"  ({self.detail})" if self.detail else "")


def fmt(x):
    """Round-trip decimal text for a number (17 significant digits)."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def write_leaves_csv(path, leaves):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LEAF_COLUMNS)
        for leaf in leaves:
            w.writerow([fmt(v) for v in leaf.row().values()])


def read_leaves_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return {k: np.array([float(r[k]) for r in rows]) for k in LEAF_COLUMNS}


def write_report_json(path, data):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_clean(data), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_checks(path, checks):
    with open(path, "w", encoding="utf-8") as fh:
        for c in checks:
            fh.write(c.line() + "\n")


def write_outputs(out_dir, report_data, checks, leaves=None):
    os.makedirs(out_dir, exist_ok=True)
    write_report_json(os.path.join(out_dir, "report.json"), report_data)
    write_checks(os.path.join(out_dir, "checks.txt"), checks)
    if leaves is not None:
        write_leaves_csv(os.path.join(out_dir, "leaves.csv"), leaves)
