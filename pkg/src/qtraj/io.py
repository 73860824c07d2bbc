"""CSV and JSON artifacts.

Floats are written with 17 significant digits so every double round-trips;
files always use '\\n' line endings.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .info import LEDGER_COLUMNS

SERIES_COLUMNS = ("time",) + tuple(
    f"rho{i}{j}_{part}" for i in (0, 1) for j in (0, 1) for part in ("re", "im")
) + ("vn_entropy_bits", "purity")


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def series_rows(series):
    entropies = series.entropies()
    purities = series.purities()
    for t, rho, s, p in zip(series.times, series.rhos, entropies, purities):
        flat = rho.reshape(-1)
        yield [t, *[v for z in flat for v in (z.real, z.imag)], s, p]


def write_series_csv(path, series):
    _write_csv(path, SERIES_COLUMNS, series_rows(series))


def write_ledger_csv(path, rows):
    """``rows`` are InfoLedgerEntry objects or plain 5-tuples in column order."""
    _write_csv(path, LEDGER_COLUMNS, (
        [r.step, r.shannon_bits, r.info_gain_bits, r.entanglement_bits, r.vn_entropy_bits]
        if hasattr(r, "step") else list(r) for r in rows))


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(v) for v in r] for r in rows[1:]])


def trajectories_document(records) -> dict:
    first = records[0]
    return {
        "seed": first.seed,
        "unraveling": first.unraveling,
        "steps": first.steps,
        "stride": first.stride,
        "trajectories": [r.to_json() for r in records],
    }


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, separators=(",", ":")) + "\n")
