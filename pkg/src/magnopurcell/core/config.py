"""Run configuration for magnopurcell.

A run is described by a YAML file with one mapping per section::

    system:
      cavity_ghz: 5.33
      alpha: 2.8e-2
    grid:
      points: 2001

Frequencies are given in GHz, couplings and rates (as γ/2π) in MHz and fields
in Oe. Unknown sections or keys are rejected. Conversion to the angular units
used by the physics modules happens in the ``RunConfig`` builder methods.
"""

from __future__ import annotations

import dataclasses
import importlib.resources
import logging
import math
import os
import traceback
from collections.abc import Iterator
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from magnopurcell.core.errors import ConfigError, MagnoPurcellError
from magnopurcell.physics.analysis import FIT_PARAMETERS, PeakGapConvention
from magnopurcell.physics.model import HybridSystem, KittelParams, ModeParams, angular
from magnopurcell.physics.purcell import TableRow
from magnopurcell.physics.transmission import FrequencyGrid, Window

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "MAGNOPURCELL_OUTPUT_DIR"


@dataclass
class SystemSection:
    cavity_ghz: float = 5.33
    magnon_ghz: float = 5.33
    alpha: float = 1.4e-5
    beta: float = 4.688e-3
    g_mhz: float = 127.3
    gamma_c_mhz: float = 12.5
    gamma_m_mhz: float = 0.0


@dataclass
class KittelSection:
    gyro_mhz_per_oe: float = 2.8
    four_pi_ms_gauss: float = 1750.0


@dataclass
class GridSection:
    start_ghz: float = 4.8
    stop_ghz: float = 5.9
    points: int = 2001


@dataclass
class SweepSection:
    alphas: list[float] = field(default_factory=list)
    fields_oe: list[float] = field(default_factory=list)


@dataclass
class TimeDomainSection:
    window: str = "none"
    pad_factor: int = 4
    field_oe: float | None = None


@dataclass
class FitSection:
    data: str | None = None
    free: list[str] = field(default_factory=lambda: ["g", "alpha", "beta"])
    max_iter: int = 200
    auto_init: bool = False


@dataclass
class PhaseSection:
    alpha_axis: Any = field(default_factory=lambda: {"start": 0.0, "stop": 3e-2, "num": 61})
    beta_axis: Any = field(default_factory=lambda: {"start": 4e-3, "stop": 1e-2, "num": 25})
    g_mhz_axis: Any = field(default_factory=lambda: {"start": 50.0, "stop": 150.0, "num": 41})


@dataclass
class SpinSection:
    thicknesses_um: list[float] = field(default_factory=lambda: [5.0, 10.0, 20.0, 40.0])
    area_mm2: float = 9.0
    spin_density_m3: float = 2.1e28
    reference_thickness_um: float = 20.0
    reference_g_mhz: float = 127.3


@dataclass
class TableSection:
    rows: list[dict] = field(default_factory=list)


@dataclass
class ConventionsSection:
    peak_gap: str = "splitting"
    db_reference: float = 1.0


@dataclass
class OutputSection:
    dir: str = "."


@dataclass
class RunConfig:
    """Configuration container for one run; every section has defaults."""

    system: SystemSection = field(default_factory=SystemSection)
    kittel: KittelSection = field(default_factory=KittelSection)
    grid: GridSection = field(default_factory=GridSection)
    sweep: SweepSection = field(default_factory=SweepSection)
    timedomain: TimeDomainSection = field(default_factory=TimeDomainSection)
    fit: FitSection = field(default_factory=FitSection)
    phase: PhaseSection = field(default_factory=PhaseSection)
    spin: SpinSection = field(default_factory=SpinSection)
    table: TableSection = field(default_factory=TableSection)
    conventions: ConventionsSection = field(default_factory=ConventionsSection)
    output: OutputSection = field(default_factory=OutputSection)

    # Directory of the file the config was read from; relative paths resolve against it.
    source_dir: Path | None = field(default=None, repr=False, compare=False)

    def build_system(self) -> HybridSystem:
        s = self.system
        with _field_errors("system"):
            return HybridSystem(
                photon=ModeParams(angular(s.cavity_ghz * 1e9), s.beta, angular(s.gamma_c_mhz * 1e6)),
                magnon=ModeParams(angular(s.magnon_ghz * 1e9), s.alpha, angular(s.gamma_m_mhz * 1e6)),
                g=angular(s.g_mhz * 1e6),
            )

    def build_kittel(self) -> KittelParams:
        k = self.kittel
        with _field_errors("kittel"):
            return KittelParams(angular(k.gyro_mhz_per_oe * 1e6), k.four_pi_ms_gauss)

    def build_grid(self) -> FrequencyGrid:
        gr = self.grid
        with _field_errors("grid"):
            return FrequencyGrid(gr.start_ghz * 1e9, gr.stop_ghz * 1e9, gr.points)

    def build_table(self) -> list[TableRow]:
        rows = []
        omega_c = angular(self.system.cavity_ghz * 1e9)
        omega_m = angular(self.system.magnon_ghz * 1e9)
        for i, row in enumerate(self.table.rows):
            rows.append(
                TableRow(
                    alpha=row["alpha"],
                    omega_c=omega_c,
                    omega_m=omega_m,
                    k_c=angular(row["kc_mhz"] * 1e6),
                    g=angular(row["g_mhz"] * 1e6),
                )
            )
        return rows

    def phase_axes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """α, β and g (rad/s) axes of the phase diagram."""
        p = self.phase
        return (
            _axis_values(p.alpha_axis, "phase.alpha_axis"),
            _axis_values(p.beta_axis, "phase.beta_axis"),
            angular(_axis_values(p.g_mhz_axis, "phase.g_mhz_axis") * 1e6),
        )

    @property
    def window(self) -> Window:
        return Window(self.timedomain.window)

    @property
    def peak_gap_convention(self) -> PeakGapConvention:
        return PeakGapConvention(self.conventions.peak_gap)

    def resolve(self, path: str) -> Path:
        """Resolve a path from the config relative to the config file."""
        p = Path(path)
        if not p.is_absolute() and self.source_dir is not None:
            p = self.source_dir / p
        return p

    def output_dir(self, override: str | None = None) -> Path:
        """Output directory: explicit override, then the environment, then ``output.dir``."""
        if override:
            return Path(override)
        env = os.environ.get(OUTPUT_DIR_ENV)
        if env:
            return Path(env)
        return self.resolve(self.output.dir)


@contextmanager
def _field_errors(section: str) -> Iterator[None]:
    """Re-raise model validation errors as ConfigError tagged with a section."""
    try:
        yield
    except ConfigError:
        raise
    except MagnoPurcellError as e:
        raise ConfigError(str(e), field=section) from e


def _axis_values(spec: Any, path: str) -> np.ndarray:
    if isinstance(spec, dict):
        if set(spec) != {"start", "stop", "num"}:
            raise ConfigError("axis mapping needs exactly start, stop and num", field=path)
        try:
            values = np.linspace(float(spec["start"]), float(spec["stop"]), int(spec["num"]))
        except (TypeError, ValueError) as e:
            raise ConfigError(f"bad axis mapping: {e}", field=path) from e
    else:
        values = np.asarray(_number_list(spec, path), dtype=float)
    if values.size == 0:
        raise ConfigError("axis is empty", field=path)
    if np.any(values < 0) or np.any(np.diff(values) <= 0):
        raise ConfigError("axis must be non-negative and strictly increasing", field=path)
    return values


_SECTIONS = {f.name: f.type for f in dataclasses.fields(RunConfig) if f.name != "source_dir"}


def _coerce(value: Any, default: Any, path: str) -> Any:
    """Coerce a YAML value to the type of the section default."""
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"expected true/false, got {value!r}", field=path)
        return value
    if isinstance(default, int) and not isinstance(default, bool):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"expected an integer, got {value!r}", field=path)
        return value
    if isinstance(default, float) or (default is None and isinstance(value, (int, float))):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"expected a number, got {value!r}", field=path)
        if not math.isfinite(value):
            raise ConfigError(f"expected a finite number, got {value!r}", field=path)
        return float(value)
    if isinstance(default, str) or default is None:
        if not isinstance(value, str):
            raise ConfigError(f"expected a string, got {value!r}", field=path)
        return value
    return value


def _number_list(value: Any, path: str, minimum: float | None = 0.0) -> list[float]:
    if not isinstance(value, list):
        raise ConfigError("expected a list", field=path)
    out = []
    for i, item in enumerate(value):
        item_path = f"{path}[{i}]"
        if isinstance(item, bool) or not isinstance(item, (int, float)) or not math.isfinite(item):
            raise ConfigError(f"expected a finite number, got {item!r}", field=item_path)
        if minimum is not None and item < minimum:
            raise ConfigError(f"must be >= {minimum:g}, got {item!r}", field=item_path)
        out.append(float(item))
    return out


_NON_NEGATIVE = {
    "system": ("alpha", "beta", "g_mhz", "gamma_c_mhz", "gamma_m_mhz"),
    "spin": ("area_mm2", "spin_density_m3", "reference_thickness_um", "reference_g_mhz"),
}
_POSITIVE = {
    "system": ("cavity_ghz", "magnon_ghz"),
    "kittel": ("gyro_mhz_per_oe", "four_pi_ms_gauss"),
    "timedomain": ("pad_factor",),
    "fit": ("max_iter",),
    "conventions": ("db_reference",),
    "spin": ("area_mm2", "spin_density_m3", "reference_thickness_um", "reference_g_mhz"),
}
_TABLE_KEYS = ("alpha", "kc_mhz", "g_mhz")


def _parse_section(name: str, cls: type, data: Any) -> Any:
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError("section must be a mapping", field=name)
    section = cls()
    known = {f.name for f in dataclasses.fields(cls)}
    for key, value in data.items():
        path = f"{name}.{key}"
        if key not in known:
            raise ConfigError("unknown key", field=path)
        default = getattr(section, key)
        if isinstance(default, list) and key not in ("free", "rows"):
            value = _number_list(value, path, minimum=0.0)
        elif key not in ("alpha_axis", "beta_axis", "g_mhz_axis", "free", "rows"):
            value = _coerce(value, default, path)
        setattr(section, key, value)

    for key in _NON_NEGATIVE.get(name, ()):
        if getattr(section, key) < 0:
            raise ConfigError(f"must be >= 0, got {getattr(section, key)!r}", field=f"{name}.{key}")
    for key in _POSITIVE.get(name, ()):
        if getattr(section, key) <= 0:
            raise ConfigError(f"must be > 0, got {getattr(section, key)!r}", field=f"{name}.{key}")
    return section


def _validate(config: RunConfig) -> None:
    field_oe = config.timedomain.field_oe
    if field_oe is not None:
        if not isinstance(field_oe, float):
            raise ConfigError(f"expected a number, got {field_oe!r}", field="timedomain.field_oe")
        if field_oe < 0:
            raise ConfigError(f"must be >= 0, got {field_oe!r}", field="timedomain.field_oe")
    if config.fit.data is not None and not isinstance(config.fit.data, str):
        raise ConfigError(f"expected a path, got {config.fit.data!r}", field="fit.data")
    if config.timedomain.window not in {w.value for w in Window}:
        raise ConfigError(f"unknown window {config.timedomain.window!r}", field="timedomain.window")
    if config.conventions.peak_gap not in {c.value for c in PeakGapConvention}:
        raise ConfigError(
            f"unknown convention {config.conventions.peak_gap!r}", field="conventions.peak_gap"
        )
    if not isinstance(config.fit.free, list):
        raise ConfigError("expected a list of parameter names", field="fit.free")
    for i, name in enumerate(config.fit.free):
        if name not in FIT_PARAMETERS:
            raise ConfigError(
                f"unknown parameter {name!r} (choose from {', '.join(FIT_PARAMETERS)})",
                field=f"fit.free[{i}]",
            )
    if not isinstance(config.table.rows, list):
        raise ConfigError("expected a list of rows", field="table.rows")
    for i, row in enumerate(config.table.rows):
        path = f"table.rows[{i}]"
        if not isinstance(row, dict):
            raise ConfigError("row must be a mapping", field=path)
        extra = set(row) - set(_TABLE_KEYS)
        if extra:
            raise ConfigError(f"unknown key {sorted(extra)[0]!r}", field=path)
        for key in _TABLE_KEYS:
            if key not in row:
                raise ConfigError("missing key", field=f"{path}.{key}")
            _number_list([row[key]], f"{path}.{key}")
            row[key] = float(row[key])
    for i, t in enumerate(config.spin.thicknesses_um):
        if t <= 0:
            raise ConfigError(f"must be > 0, got {t!r}", field=f"spin.thicknesses_um[{i}]")
    config.phase_axes()
    config.build_system()
    config.build_kittel()
    config.build_grid()


def parse_config(data: dict[str, Any] | None, source_dir: Path | None = None) -> RunConfig:
    """Build a validated RunConfig from a parsed YAML mapping.

    Raises:
        ConfigError: naming the offending ``section.key``.
    """
    config = RunConfig(source_dir=source_dir)
    if data is None:
        return config
    if not isinstance(data, dict):
        raise ConfigError("top level must be a mapping of sections")
    for name, value in data.items():
        if name not in _SECTIONS:
            raise ConfigError("unknown section", field=str(name))
        section_cls = type(getattr(config, name))
        setattr(config, name, _parse_section(name, section_cls, value))
    _validate(config)
    return config


def read_config(path: str | Path) -> RunConfig:
    """Load and validate a config file, raising ConfigError on any problem."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigError(f"error parsing YAML in {path}:\n{e}") from e
    config = parse_config(data, source_dir=path.parent)
    logger.info("Loaded config from %s", path)
    return config


def read_bundled_config(name: str) -> RunConfig:
    """Load one of the configs shipped in ``magnopurcell.data`` (``table1``, ``fig5``, ...)."""
    resource = importlib.resources.files("magnopurcell.data").joinpath(f"{name}.yaml")
    if not resource.is_file():
        raise ConfigError(f"no bundled config named {name!r}")
    try:
        data = yaml.safe_load(resource.read_text(encoding="utf-8"))
    except yaml.YAMLError as e:
        raise ConfigError(f"error parsing bundled config {name}:\n{e}") from e
    return parse_config(data)


def load_config(path: str | Path | None = None) -> tuple[RunConfig, str | None]:
    """Load configuration, returning ``(config, error_message)``.

    With no path the defaults are returned. On failure the default config is
    returned together with a message naming the offending field.
    """
    if path is None:
        logger.debug("No config file given, using defaults")
        return RunConfig(), None
    try:
        return read_config(path), None
    except ConfigError as e:
        return RunConfig(), str(e)
    except Exception:
        return RunConfig(), f"Error loading config:\n{traceback.format_exc()}"
