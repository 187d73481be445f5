"""CSV and JSON output for every result type, and readers for them.

Numbers are written with 12 significant digits, '.' as decimal separator and
LF line endings; files are written to a temporary sibling and renamed into
place so a failed run never leaves a partial file behind.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import tempfile
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from magnopurcell.core.errors import InvalidParameterError
from magnopurcell.physics.purcell import (
    PhaseDiagram,
    SpinLinewidth,
    SpinPoint,
    SpinScaling,
    fit_spin_scaling,
)
from magnopurcell.physics.transmission import (
    ComplexSpectrum,
    FieldSweepMap,
    FrequencyGrid,
    TimeTrace,
)

logger = logging.getLogger(__name__)

SPECTRUM_COLUMNS = ("freq_Hz", "re", "im", "mag", "mag_dB")
MAP_COLUMNS = ("H_Oe", "freq_Hz", "mag_dB")
TIME_COLUMNS = ("t_s", "mag")
EIGEN_COLUMNS = ("alpha", "re_plus_Hz", "im_plus_Hz", "re_minus_Hz", "im_minus_Hz", "gap_Hz")
PHASE_COLUMNS = ("alpha", "beta", "g_Hz", "re_delta_Hz", "purcell")
SPIN_COLUMNS = ("thickness_um", "N", "g_Hz")
SPIN_LINEWIDTH_COLUMNS = ("thickness_um", "g_Hz", "photon_hwhm_Hz", "beta_eff")


def format_number(value: float) -> str:
    """Fixed 12-significant-digit rendering used in every output file."""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    # -0.0 reads back as 0.0
    return format(float(value) + 0.0, ".12g")


def _round(value: Any) -> Any:
    """Round floats inside a JSON payload to 12 significant digits."""
    if isinstance(value, dict):
        return {str(k): _round(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return float(format(v + 0.0, ".12g")) if math.isfinite(v) else None
    return value


def atomic_write(path: str | Path, text: str) -> Path:
    """Write ``text`` to ``path`` via a temporary file and an atomic rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    logger.info("Wrote %s", path)
    return path


def write_csv(path: str | Path, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_number(v) for v in row])
    return atomic_write(path, buf.getvalue())


def read_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    """Header and a 2-D float array of the rows (shape ``(0, n)`` when header-only)."""
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader if row]
    data = np.array(rows, dtype=float) if rows else np.empty((0, len(header)))
    return header, data


def _expect(header: list[str], columns: Sequence[str], path) -> None:
    if tuple(header) != tuple(columns):
        raise InvalidParameterError(
            f"{path}: expected columns {', '.join(columns)}, got {', '.join(header)}"
        )


def write_json(path: str | Path, payload: dict[str, Any]) -> Path:
    text = json.dumps(_round(payload), indent=2, sort_keys=True) + "\n"
    return atomic_write(path, text)


def read_json(path: str | Path) -> dict[str, Any]:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


# --- spectra --------------------------------------------------------------


def write_spectrum_csv(path, spec: ComplexSpectrum, db_reference: float = 1.0) -> Path:
    rows = zip(
        spec.frequencies,
        spec.samples.real,
        spec.samples.imag,
        spec.magnitude,
        spec.magnitude_db(db_reference),
    )
    return write_csv(path, SPECTRUM_COLUMNS, rows)


def read_spectrum_csv(path) -> ComplexSpectrum:
    header, data = read_csv(path)
    _expect(header, SPECTRUM_COLUMNS, path)
    if len(data) < 2:
        raise InvalidParameterError(f"{path}: a spectrum needs at least 2 rows")
    freqs = data[:, 0]
    grid = FrequencyGrid(float(freqs[0]), float(freqs[-1]), len(freqs))
    if not np.allclose(grid.frequencies, freqs, rtol=1e-11, atol=0.0):
        raise InvalidParameterError(f"{path}: frequencies are not on a uniform grid")
    return ComplexSpectrum(grid=grid, samples=data[:, 1] + 1j * data[:, 2])


@dataclass(frozen=True, eq=False)
class MapTable:
    """Long-format field sweep read back from CSV: ``mag_db[field, freq]``."""

    fields: np.ndarray
    frequencies: np.ndarray
    mag_db: np.ndarray


def write_map_csv(path, sweep: FieldSweepMap | None, db_reference: float = 1.0) -> Path:
    def rows():
        if sweep is None:
            return
        for field_oe, spec in zip(sweep.fields, sweep.spectra):
            for f, db in zip(spec.frequencies, spec.magnitude_db(db_reference)):
                yield field_oe, f, db

    return write_csv(path, MAP_COLUMNS, rows())


def read_map_csv(path) -> MapTable:
    header, data = read_csv(path)
    _expect(header, MAP_COLUMNS, path)
    if len(data) == 0:
        return MapTable(np.empty(0), np.empty(0), np.empty((0, 0)))
    # one block of frequencies per field, fields may repeat
    restarts = np.flatnonzero(data[1:, 1] == data[0, 1]) + 1
    n_freq = int(restarts[0]) if len(restarts) else len(data)
    if len(data) % n_freq:
        raise InvalidParameterError(f"{path}: rows do not form equal frequency blocks")
    fields = data[::n_freq, 0]
    freqs = data[:n_freq, 1]
    mag_db = data[:, 2].reshape(len(fields), n_freq)
    if not np.all(data[:, 1].reshape(len(fields), n_freq) == freqs):
        raise InvalidParameterError(f"{path}: frequency blocks differ between fields")
    return MapTable(fields, freqs, mag_db)


def write_time_csv(path, trace: TimeTrace) -> Path:
    return write_csv(path, TIME_COLUMNS, zip(trace.times, trace.magnitudes))


def read_time_csv(path) -> TimeTrace:
    header, data = read_csv(path)
    _expect(header, TIME_COLUMNS, path)
    return TimeTrace(times=data[:, 0], magnitudes=data[:, 1], carrier=math.nan)


# --- tables ---------------------------------------------------------------


def write_phase_csv(path, diagram: PhaseDiagram) -> Path:
    def rows():
        for i, a in enumerate(diagram.alpha_axis):
            for j, b in enumerate(diagram.beta_axis):
                for k, g in enumerate(diagram.g_axis):
                    yield (
                        a,
                        b,
                        g / (2.0 * math.pi),
                        diagram.re_delta[i, j, k],
                        int(diagram.purcell_mask[i, j, k]),
                    )

    return write_csv(path, PHASE_COLUMNS, rows())


def read_phase_csv(path, omega_c: float = math.nan) -> PhaseDiagram:
    header, data = read_csv(path)
    _expect(header, PHASE_COLUMNS, path)
    alphas = np.unique(data[:, 0])
    betas = np.unique(data[:, 1])
    g_hz = np.unique(data[:, 2])
    shape = (len(alphas), len(betas), len(g_hz))
    return PhaseDiagram(
        alpha_axis=alphas,
        beta_axis=betas,
        g_axis=g_hz * 2.0 * math.pi,
        omega_c=omega_c,
        re_delta=data[:, 3].reshape(shape),
        purcell_mask=data[:, 4].reshape(shape).astype(bool),
    )


def write_spin_csv(path, scaling: SpinScaling) -> Path:
    return write_csv(path, SPIN_COLUMNS, ((e.thickness_um, e.n, e.g) for e in scaling.entries))


def read_spin_csv(path) -> SpinScaling:
    header, data = read_csv(path)
    _expect(header, SPIN_COLUMNS, path)
    entries = tuple(SpinPoint(float(t), float(n), float(g)) for t, n, g in data)
    g0, residual = fit_spin_scaling(data[:, 1], data[:, 2]) if len(data) else (math.nan, math.nan)
    return SpinScaling(entries=entries, g0=g0, fit_residual=residual)


def write_spin_linewidth_csv(path, rows: Iterable[SpinLinewidth]) -> Path:
    return write_csv(
        path,
        SPIN_LINEWIDTH_COLUMNS,
        ((r.thickness_um, r.g, r.hwhm, r.beta_eff) for r in rows),
    )


def write_eigen_csv(path, rows: Iterable[Sequence[float]]) -> Path:
    return write_csv(path, EIGEN_COLUMNS, rows)
