"""Delimited and JSON input/output with atomic writes.

All numeric CSV columns are written with 17 significant digits so that a
write/read cycle reproduces every float bit-for-bit, and every file is
written to a temporary name in the target directory and renamed into
place.
"""

from __future__ import annotations

import json
import math
import os
import tempfile

import numpy as np

from .spectra import Spectrum

SPECTRUM_HEADER = ("frequency_hz", "contrast")


class MalformedCsvError(ValueError):
    """Raised when a spectrum CSV violates the expected format."""


def format_float(x):
    """Shortest representation that round-trips a double (17 significant digits)."""
    return f"{float(x):.17g}"


def atomic_write_text(path, text):
    """Write text to path via a temporary file plus rename."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".nvzf-tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_spectrum_csv(spectrum, path):
    """Spectrum as CSV with the fixed two-column header."""
    lines = [",".join(SPECTRUM_HEADER)]
    for f, c in zip(spectrum.frequencies_hz, spectrum.contrast):
        lines.append(f"{format_float(f)},{format_float(c)}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_spectrum_csv(path):
    """Parse a spectrum CSV, reporting the offending line on failure."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw_lines = fh.read().splitlines()
    except OSError as exc:
        raise MalformedCsvError(f"cannot read {path}: {exc}") from exc
    if not raw_lines:
        raise MalformedCsvError(f"{path}: empty file, expected a header line")
    header = raw_lines[0]
    if tuple(part.strip() for part in header.split(",")) != SPECTRUM_HEADER:
        raise MalformedCsvError(
            f"{path}: line 1: header must be exactly "
            f"'{','.join(SPECTRUM_HEADER)}', got {header!r}")
    freqs = []
    contrast = []
    for lineno, line in enumerate(raw_lines[1:], start=2):
        if not line.strip():
            raise MalformedCsvError(f"{path}: line {lineno}: blank line")
        parts = line.split(",")
        if len(parts) != 2:
            raise MalformedCsvError(
                f"{path}: line {lineno}: expected 2 fields, got {len(parts)}")
        try:
            f = float(parts[0])
            c = float(parts[1])
        except ValueError as exc:
            raise MalformedCsvError(
                f"{path}: line {lineno}: non-numeric value: {exc}") from exc
        if not (math.isfinite(f) and math.isfinite(c)):
            raise MalformedCsvError(
                f"{path}: line {lineno}: values must be finite")
        if freqs and f <= freqs[-1]:
            raise MalformedCsvError(
                f"{path}: line {lineno}: frequencies must be strictly ascending")
        freqs.append(f)
        contrast.append(c)
    if not freqs:
        raise MalformedCsvError(f"{path}: no data rows after the header")
    return Spectrum(frequencies_hz=np.array(freqs), contrast=np.array(contrast))


def write_table_csv(path, header, columns):
    """Aligned numeric columns under a given header row."""
    columns = [np.asarray(col) for col in columns]
    if len(columns) != len(header):
        raise ValueError("header and column counts differ")
    n = columns[0].size
    if any(col.size != n for col in columns):
        raise ValueError("columns must have equal length")
    lines = [",".join(header)]
    for i in range(n):
        lines.append(",".join(format_float(col[i]) for col in columns))
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_json_file(obj, path):
    """Deterministic JSON: sorted keys, two-space indent, trailing newline."""
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True,
                                       allow_nan=False) + "\n")
