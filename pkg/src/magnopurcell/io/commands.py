"""One pipeline per CLI subcommand.

Every ``cmd_*`` function takes a validated RunConfig and an output directory,
runs a single module pipeline and returns the paths it wrote. Errors propagate;
the CLI maps them onto exit codes.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from pathlib import Path

from magnopurcell.core.config import RunConfig
from magnopurcell.core.errors import ConfigError
from magnopurcell.io import serialize
from magnopurcell.physics.analysis import (
    extract_coupling,
    find_peaks,
    fit_model,
    initial_guess,
    linewidth_vs_alpha,
    track_branches,
)
from magnopurcell.physics.model import angular, damping_constant, eigenmodes, hz, mode_gap
from magnopurcell.physics.purcell import (
    classify_table,
    cooperativity,
    phase_diagram,
    spin_count,
    spin_linewidths,
    spin_scaling,
)
from magnopurcell.physics.transmission import (
    decay_rate,
    decay_time,
    field_sweep,
    spectrum,
    time_domain,
)

logger = logging.getLogger(__name__)

Command = Callable[[RunConfig, Path], list[Path]]


def _nan_if_none(value: float | None) -> float:
    return math.nan if value is None else value


def cmd_eigen(config: RunConfig, out_dir: Path) -> list[Path]:
    """Complex eigenfrequencies and gap for each α in ``sweep.alphas``."""
    base = config.build_system()
    rows = []
    for alpha in config.sweep.alphas:
        sys = base.with_magnon(intrinsic_damping=alpha)
        plus, minus = eigenmodes(sys)
        gap = mode_gap(sys).real if sys.is_resonant() else hz((plus - minus).real)
        rows.append((alpha, hz(plus.real), hz(plus.imag), hz(minus.real), hz(minus.imag), gap))
    return [serialize.write_eigen_csv(out_dir / "eigen.csv", rows)]


def cmd_spectrum(config: RunConfig, out_dir: Path) -> list[Path]:
    """S21 of the configured system plus its peak report."""
    spec = spectrum(config.build_system(), config.build_grid())
    report = find_peaks(spec)
    coupling = None
    if spec.system is not None and spec.system.is_resonant():
        coupling = extract_coupling(spec, config.peak_gap_convention)
    summary = {
        "peaks": [
            {"center_Hz": p.center, "hwhm_Hz": p.hwhm, "height": p.height} for p in report.peaks
        ],
        "gap_Hz": report.gap,
        "coupling_Hz": coupling,
        "convention": config.peak_gap_convention.value,
    }
    return [
        serialize.write_spectrum_csv(
            out_dir / "spectrum.csv", spec, config.conventions.db_reference
        ),
        serialize.write_json(out_dir / "peaks.json", summary),
    ]


def cmd_linewidths(config: RunConfig, out_dir: Path) -> list[Path]:
    """Resonant peak positions and FWHMs across ``sweep.alphas``."""
    rows = []
    if config.sweep.alphas:
        for row in linewidth_vs_alpha(
            config.sweep.alphas, config.build_system(), config.build_grid()
        ):
            lower = (row.centers[0], row.fwhms[0]) if row.centers else (math.nan, math.nan)
            upper = (row.centers[-1], row.fwhms[-1]) if len(row.centers) > 1 else (math.nan, math.nan)
            rows.append((row.alpha, lower[0], lower[1], upper[0], upper[1], _nan_if_none(row.gap)))
    columns = ("alpha", "lower_Hz", "lower_fwhm_Hz", "upper_Hz", "upper_fwhm_Hz", "gap_Hz")
    return [serialize.write_csv(out_dir / "linewidths.csv", columns, rows)]


def cmd_map(config: RunConfig, out_dir: Path) -> list[Path]:
    """|S21| over the (f, H) plane and the tracked hybrid branches."""
    sweep = None
    branches = []
    if config.sweep.fields_oe:
        sweep = field_sweep(
            config.build_system(),
            config.build_kittel(),
            config.sweep.fields_oe,
            config.build_grid(),
        )
        branches = [
            (b.field, _nan_if_none(b.lower), _nan_if_none(b.upper)) for b in track_branches(sweep)
        ]
    else:
        logger.info("No fields configured, writing header-only map")
    return [
        serialize.write_map_csv(out_dir / "map.csv", sweep, config.conventions.db_reference),
        serialize.write_csv(out_dir / "branches.csv", ("H_Oe", "lower_Hz", "upper_Hz"), branches),
    ]


def cmd_timedomain(config: RunConfig, out_dir: Path) -> list[Path]:
    """Ringdown envelope of the configured spectrum and its decay measures."""
    sys = config.build_system()
    if config.timedomain.field_oe is not None:
        sys = sys.at_field(config.timedomain.field_oe, config.build_kittel())
    trace = time_domain(
        spectrum(sys, config.build_grid()), config.window, config.timedomain.pad_factor
    )
    rate = decay_rate(trace)
    summary = {
        "carrier_Hz": trace.carrier,
        "decay_time_s": decay_time(trace),
        "decay_rate_per_s": rate,
        "hwhm_Hz": hz(rate),
        "edge_warning": trace.edge_warning,
        "scale": trace.scale,
        "window": config.window.value,
        "pad_factor": config.timedomain.pad_factor,
    }
    return [
        serialize.write_time_csv(out_dir / "time.csv", trace),
        serialize.write_json(out_dir / "timedomain.json", summary),
    ]


def cmd_classify(config: RunConfig, out_dir: Path) -> list[Path]:
    """Purcell verdicts for every row of ``table.rows``."""
    verdicts = classify_table(config.build_table())
    rows = []
    for spec_row, verdict in zip(config.table.rows, verdicts):
        rows.append(
            {
                "alpha": spec_row["alpha"],
                "k_m_Hz": verdict.k_m,
                "k_c_Hz": verdict.k_c,
                "g_Hz": verdict.g,
                "lhs_Hz": verdict.lhs,
                "regime": verdict.regime.value,
                "purcell": verdict.label,
                "cooperativity": cooperativity(verdict.k_m, verdict.k_c, verdict.g),
            }
        )
    payload = {
        "dispersion_kind": "anti_crossing",
        "regime": [v.regime.value for v in verdicts],
        "verdicts": [v.label for v in verdicts],
        "rows": rows,
    }
    return [serialize.write_json(out_dir / "classify.json", payload)]


def cmd_fit(config: RunConfig, out_dir: Path) -> list[Path]:
    """Fit the model to the magnitude of a spectrum CSV named by ``fit.data``."""
    if not config.fit.data:
        raise ConfigError("a spectrum CSV is required", field="fit.data")
    path = config.resolve(config.fit.data)
    if not path.exists():
        raise ConfigError(f"file not found: {path}", field="fit.data")
    data = serialize.read_spectrum_csv(path)
    init = config.build_system()
    if config.fit.auto_init:
        init = initial_guess(data, init, convention=config.peak_gap_convention)
    result = fit_model(data, init, config.fit.free, config.fit.max_iter)
    p = result.params
    payload = {
        "params": {
            "cavity_Hz": hz(p.photon.omega),
            "magnon_Hz": hz(p.magnon.omega),
            "g_Hz": hz(p.g),
            "alpha": p.magnon.intrinsic_damping,
            "beta": p.photon.intrinsic_damping,
            "gamma_c_Hz": hz(p.photon.extrinsic_rate),
            "gamma_m_Hz": hz(p.magnon.extrinsic_rate),
        },
        "free": list(config.fit.free),
        "residual": result.residual_norm,
        "iterations": result.iterations,
        "converged": result.converged,
        "gradient_steps": result.gradient_steps,
    }
    if not result.converged:
        logger.warning("Fit stopped after %d iterations without converging", result.iterations)
    return [serialize.write_json(out_dir / "fit.json", payload)]


def cmd_phase(config: RunConfig, out_dir: Path) -> list[Path]:
    """Re(Δ) phase diagram, with the table rows placed on it as markers."""
    omega_c = angular(config.system.cavity_ghz * 1e9)
    alphas, betas, gs = config.phase_axes()
    diagram = phase_diagram(alphas, betas, gs, omega_c)
    markers = []
    for row in config.build_table():
        beta = damping_constant(row.k_c, row.omega_c)
        point = phase_diagram([row.alpha], [beta], [row.g], omega_c)
        markers.append(
            {
                "alpha": row.alpha,
                "beta": beta,
                "g_Hz": hz(row.g),
                "re_delta_Hz": float(point.re_delta[0, 0, 0]),
                "purcell": bool(point.purcell_mask[0, 0, 0]),
            }
        )
    return [
        serialize.write_phase_csv(out_dir / "phase.csv", diagram),
        serialize.write_json(out_dir / "phase_markers.json", {"markers": markers}),
    ]


def cmd_spinscale(config: RunConfig, out_dir: Path) -> list[Path]:
    """Coupling against spin number across film thicknesses, plus the photon linewidth at each."""
    s = config.spin
    n_ref = spin_count(s.reference_thickness_um, s.area_mm2, s.spin_density_m3)
    scaling = spin_scaling(
        s.thicknesses_um,
        s.area_mm2,
        s.spin_density_m3,
        g_reference=(n_ref, s.reference_g_mhz * 1e6),
    )
    widths = spin_linewidths(scaling, config.build_system(), config.build_grid())
    return [
        serialize.write_spin_csv(out_dir / "spin.csv", scaling),
        serialize.write_spin_linewidth_csv(out_dir / "spin_linewidths.csv", widths),
        serialize.write_json(
            out_dir / "spin.json",
            {"g0_Hz": scaling.g0, "fit_residual": scaling.fit_residual, "N_ref": n_ref},
        ),
    ]


COMMANDS: dict[str, tuple[Command, str]] = {
    "eigen": (cmd_eigen, "eigenvalue table over sweep.alphas"),
    "spectrum": (cmd_spectrum, "S21 spectrum and peak report"),
    "linewidths": (cmd_linewidths, "peak positions and widths over sweep.alphas"),
    "map": (cmd_map, "field-sweep transmission map"),
    "timedomain": (cmd_timedomain, "ringdown envelope via FFT"),
    "classify": (cmd_classify, "Purcell verdicts for table.rows"),
    "fit": (cmd_fit, "fit the model to a spectrum CSV"),
    "phase": (cmd_phase, "(alpha, beta, g) phase diagram of Re(gap)"),
    "spinscale": (cmd_spinscale, "g = g0 sqrt(N) across film thicknesses"),
}
