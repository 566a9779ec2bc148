"""Utility functions for the benchmark runner: seeds, CSV rows, grouping and rate fits."""

from __future__ import annotations

import csv
import logging
from collections.abc import Iterable
from pathlib import Path

import numpy as np

from .const import CSV_HEADER, FLOAT_FORMAT
from .exceptions import InputError, ParameterError
from .linalg import mix_seed
from .models.experiment import RateFit, RunRecord

_LOGGER = logging.getLogger(__name__)


def realization_seeds(master: int, realizations: int) -> list[int]:
    """Seeds master XOR splitmix64(i); realization i uses the same seed at every delta."""
    return [mix_seed(master, i) for i in range(realizations)]


def format_float(value: float) -> str:
    """Fixed 17-significant-digit rendering."""
    return format(float(value), FLOAT_FORMAT)


def record_to_row(record: RunRecord, include_timing: bool = False) -> list[str]:
    """CSV fields in header order; wall time is written as 0 unless requested."""
    return [
        format_float(record.delta),
        format_float(record.alpha_or_n),
        format_float(record.error),
        format_float(record.residual),
        record.rule,
        record.method,
        str(record.seed),
        format_float(record.wall_ms if include_timing else 0.0),
    ]


def check_discrepancy(record: RunRecord) -> None:
    """Re-assert residual <= tau delta for records produced by discrepancy rules."""
    bound = record.discrepancy_bound
    if bound is not None and record.residual > bound * (1.0 + 1e-12):
        raise InputError(
            f"{record.method}/{record.rule} at delta={record.delta:.6g}: "
            f"residual {record.residual:.6g} exceeds {bound:.6g}"
        )


def write_csv(records: Iterable[RunRecord], path: str | Path, include_timing: bool = False) -> int:
    """Write records with the fixed header; returns the number of rows."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for record in records:
            check_discrepancy(record)
            writer.writerow(record_to_row(record, include_timing))
            count += 1
    _LOGGER.info("Wrote %d records to %s", count, path)
    return count


def read_csv(path: str | Path) -> list[RunRecord]:
    """Parse a results table written by ``write_csv``."""
    with Path(path).open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise InputError(f"{path} does not have the header {','.join(CSV_HEADER)}")
        return [
            RunRecord(
                delta=float(row["delta"]),
                alpha_or_n=float(row["alpha_or_N"]),
                error=float(row["error"]),
                residual=float(row["residual"]),
                rule=row["rule"],
                method=row["method"],
                seed=int(row["seed"]),
                wall_ms=float(row["wall_ms"]),
            )
            for row in reader
        ]


def group_records(records: Iterable[RunRecord], key: str) -> dict[str, list[RunRecord]]:
    """Group records by ``method``, ``rule`` or ``method_rule``, keeping first-seen order."""
    groups: dict[str, list[RunRecord]] = {}
    for record in records:
        if key == "method":
            label = record.method
        elif key == "rule":
            label = record.rule
        elif key == "method_rule":
            label = f"{record.method}_{record.rule}"
        else:
            raise ParameterError(f"unknown grouping {key!r}")
        groups.setdefault(label, []).append(record)
    return groups


def aggregate_errors(records: Iterable[RunRecord], aggregate: str = "median") -> tuple[np.ndarray, np.ndarray]:
    """Distinct deltas (descending) with the aggregated error over realizations."""
    by_delta: dict[float, list[float]] = {}
    for record in records:
        by_delta.setdefault(record.delta, []).append(record.error)
    if aggregate == "median":
        reduce = np.median
    elif aggregate == "mean":
        reduce = np.mean
    else:
        raise ParameterError(f"unknown aggregate {aggregate!r}")
    deltas = np.array(sorted(by_delta, reverse=True))
    errors = np.array([float(reduce(by_delta[delta])) for delta in deltas])
    return deltas, errors


def fit_rate(records: Iterable[RunRecord], aggregate: str = "median") -> RateFit:
    """Least-squares line through (log delta, log aggregated error).

    Needs at least three distinct deltas; ``residual`` is the Euclidean norm of
    the fit residuals in log scale.
    """
    deltas, errors = aggregate_errors(records, aggregate)
    if deltas.size < 3:
        raise ParameterError(f"rate fit needs at least 3 distinct deltas, got {deltas.size}")
    if np.any(errors <= 0):
        raise ParameterError("rate fit needs positive errors")
    x, y = np.log(deltas), np.log(errors)
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.linalg.norm(y - (slope * x + intercept)))
    return RateFit(slope=float(slope), intercept=float(intercept), residual=residual, points=int(deltas.size))


def plot_data_lines(records: Iterable[RunRecord], aggregate: str = "median") -> list[str]:
    """Two whitespace-separated columns: log10 delta and log10 aggregated error."""
    deltas, errors = aggregate_errors(records, aggregate)
    return [f"{format_float(np.log10(d))} {format_float(np.log10(e))}" for d, e in zip(deltas, errors, strict=True)]


def write_plot_data(
    records: list[RunRecord], directory: str | Path, stem: str, aggregate: str = "median"
) -> list[Path]:
    """One plot-data file per (method, rule) pair; returns the written paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for label, group in group_records(records, "method_rule").items():
        if any(record.error <= 0 for record in group):
            _LOGGER.warning("Skipping plot data for %s: nonpositive errors", label)
            continue
        path = directory / f"{stem}_{label}.dat"
        path.write_text("\n".join(plot_data_lines(group, aggregate)) + "\n", encoding="utf-8")
        written.append(path)
    return written
