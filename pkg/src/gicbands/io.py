"""CSV ingestion, band/report serialization, and the QQ diagnostic export.

Numbers are rendered with their shortest round-trip representation, so
emitting and re-parsing reproduces every value bit-exactly.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import ndtri

from .bands import Band
from .errors import DataValidationError
from .quantiles import Sample
from .backend import kernels


def _parse_cell(text: str, path: str, line_no: int, column: str) -> float | None:
    cell = text.strip()
    if cell == "":
        return None
    try:
        value = float(cell)
    except ValueError:
        raise DataValidationError(
            f"{path}, line {line_no}, column {column!r}: cannot parse {cell!r} as a number"
        ) from None
    if not np.isfinite(value) or value <= 0.0:
        raise DataValidationError(
            f"{path}, line {line_no}, column {column!r}: value {cell} is not strictly positive"
        )
    return value


def _read_column(path: str, selector: str) -> tuple[list[float], int]:
    """All positive values of one CSV column; blank cells are skipped and counted."""
    try:
        handle = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataValidationError(f"cannot open {path}: {exc}") from None
    with handle:
        rows = list(csv.reader(handle))
    if not rows:
        raise DataValidationError(f"{path} is empty")
    header = rows[0]
    col_idx: int
    data_start = 0
    if selector.lstrip("+-").isdigit():
        col_idx = int(selector)
        # an all-numeric first row is data; otherwise treat it as a header
        try:
            float(header[col_idx])
        except (ValueError, IndexError):
            data_start = 1
    else:
        names = [cell.strip() for cell in header]
        if selector not in names:
            raise DataValidationError(f"{path}: no column named {selector!r} (header: {names})")
        col_idx = names.index(selector)
        data_start = 1
    values: list[float] = []
    skipped = 0
    for i, row in enumerate(rows[data_start:], start=data_start + 1):
        if col_idx >= len(row):
            skipped += 1
            continue
        value = _parse_cell(row[col_idx], path, i, selector)
        if value is None:
            skipped += 1
        else:
            values.append(value)
    if len(values) < 2:
        raise DataValidationError(
            f"{path}, column {selector!r}: need at least 2 valid positive values, got {len(values)}"
        )
    return values, skipped


def load_samples(paths, selectors) -> tuple[Sample, Sample, dict[str, int]]:
    """Two samples from one two-column CSV or from two separate files.

    Columns may have different lengths (blank padding is skipped); the skip
    counts per column are reported alongside the samples.
    """
    paths = list(paths)
    selectors = list(selectors)
    if len(paths) == 1:
        paths = paths * 2
    if len(paths) != 2 or len(selectors) != 2:
        raise DataValidationError("need one or two input files and exactly two column selectors")
    v1, skip1 = _read_column(paths[0], selectors[0])
    v2, skip2 = _read_column(paths[1], selectors[1])
    skipped = {f"{paths[0]}:{selectors[0]}": skip1, f"{paths[1]}:{selectors[1]}": skip2}
    return Sample.from_values(v1), Sample.from_values(v2), skipped


def band_payload(band: Band) -> dict:
    return {
        "method": band.method,
        "scale": band.scale,
        "level": band.level,
        "m": band.m,
        "grid": band.grid.points.tolist(),
        "lower": band.lower.tolist(),
        "center": band.center.tolist(),
        "upper": band.upper.tolist(),
        "effective_trim": list(band.effective_trim),
        "warnings": list(band.warnings),
    }


def emit_band(band: Band, fmt: str = "json", path: str | None = None) -> str:
    """Serialize a band as JSON or CSV; optionally write it to a file."""
    if fmt == "json":
        text = json.dumps(band_payload(band), indent=2) + "\n"
    elif fmt == "csv":
        lines = ["p,lower,center,upper"]
        for p, lo, ce, hi in zip(band.grid.points, band.lower, band.center, band.upper):
            lines.append(f"{float(p)!r},{float(lo)!r},{float(ce)!r},{float(hi)!r}")
        text = "\n".join(lines) + "\n"
    else:
        raise DataValidationError(f"unknown output format {fmt!r}; use json or csv")
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def parse_band_csv(text: str) -> dict[str, np.ndarray]:
    rows = list(csv.reader(text.strip().splitlines()))
    header, data = rows[0], rows[1:]
    cols = {name: np.array([float(r[i]) for r in data]) for i, name in enumerate(header)}
    return cols


@dataclass(frozen=True)
class QQDiagnostic:
    """Standardised log-data quantiles against normal and cross-sample references."""

    probs1: np.ndarray
    normal1: np.ndarray
    standardized1: np.ndarray
    probs2: np.ndarray
    normal2: np.ndarray
    standardized2: np.ndarray
    cross_probs: np.ndarray
    cross1: np.ndarray
    cross2: np.ndarray
    r_squared: float
    threshold: float
    location_scale_plausible: bool

    def to_dict(self) -> dict:
        return {
            "sample1": {
                "p": self.probs1.tolist(),
                "normal_quantiles": self.normal1.tolist(),
                "standardized_log_quantiles": self.standardized1.tolist(),
            },
            "sample2": {
                "p": self.probs2.tolist(),
                "normal_quantiles": self.normal2.tolist(),
                "standardized_log_quantiles": self.standardized2.tolist(),
            },
            "cross": {
                "p": self.cross_probs.tolist(),
                "sample1": self.cross1.tolist(),
                "sample2": self.cross2.tolist(),
            },
            "r_squared": self.r_squared,
            "r_squared_threshold": self.threshold,
            "location_scale_plausible": self.location_scale_plausible,
        }


def _standardized_log(sample: Sample) -> np.ndarray:
    logs = sample.log_sorted
    sd = float(np.std(logs, ddof=1))
    if sd <= 0.0:
        raise DataValidationError("zero variance on the log scale; QQ diagnostic undefined")
    return (logs - float(np.mean(logs))) / sd


def qq_diagnostic(s1: Sample, s2: Sample, r2_threshold: float = 0.99) -> QQDiagnostic:
    """QQ data of standardised log samples and the location-scale plausibility flag.

    The flag is set when a straight-line fit to the central 98% of the
    cross-sample QQ points explains at least ``r2_threshold`` of the variance.
    """
    std1, std2 = _standardized_log(s1), _standardized_log(s2)
    p1 = (np.arange(1, s1.n + 1) - 0.5) / s1.n
    p2 = (np.arange(1, s2.n + 1) - 0.5) / s2.n
    k = min(s1.n, s2.n)
    pc = (np.arange(1, k + 1) - 0.5) / k
    cross1 = kernels.quantile_values(std1, pc)
    cross2 = kernels.quantile_values(std2, pc)
    drop = int(0.01 * k)
    if k - 2 * drop < 10:
        drop = 0
    x, y = cross1[drop : k - drop], cross2[drop : k - drop]
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    total = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / total if total > 0.0 else 0.0
    return QQDiagnostic(
        probs1=p1,
        normal1=ndtri(p1),
        standardized1=std1,
        probs2=p2,
        normal2=ndtri(p2),
        standardized2=std2,
        cross_probs=pc,
        cross1=cross1,
        cross2=cross2,
        r_squared=r2,
        threshold=r2_threshold,
        location_scale_plausible=bool(r2 >= r2_threshold),
    )


def qq_export(s1: Sample, s2: Sample, path: str | None = None, r2_threshold: float = 0.99) -> str:
    diag = qq_diagnostic(s1, s2, r2_threshold)
    text = json.dumps(diag.to_dict(), indent=2) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def coverage_table(reports) -> str:
    """Aligned plain-text table: one row per sample size, one column per method."""
    reports = list(reports)
    methods: list[str] = []
    for rep in reports:
        for name in rep.methods:
            if name not in methods:
                methods.append(name)
    header = ["setting", "n"] + methods
    rows = [header]
    for rep in reports:
        row = [rep.setting, str(rep.n)]
        for name in methods:
            mc = rep.methods.get(name)
            row.append(f"{mc.coverage:.3f}" if mc is not None else "-")
        rows.append(row)
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip() for row in rows]
    return "\n".join(lines) + "\n"


def parse_flat_config(path: str) -> dict[str, str]:
    """Flat ``key = value`` configuration file with '#' comments."""
    out: dict[str, str] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataValidationError(f"cannot open {path}: {exc}") from None
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataValidationError(f"{path}, line {i}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip().strip("\"'")
    return out
