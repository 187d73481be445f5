"""Purcell-regime classification, (α, β, g) phase diagram and spin-number scaling."""

from __future__ import annotations

import enum
import logging
import math
from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np

from magnopurcell.core.errors import InvalidParameterError, PreconditionError
from magnopurcell.physics.analysis import PeakReport, find_peaks
from magnopurcell.physics.model import TWO_PI, HybridSystem, hz
from magnopurcell.physics.transmission import DEFAULT_GRID, FrequencyGrid, spectrum

logger = logging.getLogger(__name__)

# Standard YIG spin density (m^-3).
YIG_SPIN_DENSITY = 2.1e28


class Regime(str, enum.Enum):
    STRONG_COUPLING = "strong_coupling"
    PURCELL = "purcell"
    WEAK = "weak"


class DispersionKind(str, enum.Enum):
    ANTI_CROSSING = "anti_crossing"
    CROSSING = "crossing"


@dataclass(frozen=True)
class RegimeVerdict:
    """Regime of one (K_m, K_c, g) triple; all terms in Hz.

    ``lhs`` is (K_m - K_c)/2, the lower bound of the Purcell window.
    """

    regime: Regime
    k_m: float
    k_c: float
    g: float
    lhs: float
    dispersion_kind: DispersionKind = DispersionKind.ANTI_CROSSING

    @property
    def is_purcell(self) -> bool:
        return self.regime is Regime.PURCELL

    @property
    def label(self) -> str:
        """"Yes"/"No" as in a Purcell-condition table column."""
        return "Yes" if self.is_purcell else "No"


def classify(
    k_m: float,
    k_c: float,
    g: float,
    dispersion_kind: DispersionKind | str = DispersionKind.ANTI_CROSSING,
) -> RegimeVerdict:
    """Classify the coupling regime from linewidths and coupling (Hz).

    Anti-crossing dispersion: Purcell iff (K_m - K_c)/2 < g <= K_m; strong
    coupling iff g exceeds both K_m and (K_m - K_c)/2. Crossing dispersion uses
    the mirrored window (K_m - K_c)/2 >= g > K_m. Everything else is weak.
    """
    for name, value in (("K_m", k_m), ("K_c", k_c), ("g", g)):
        if not math.isfinite(value) or value < 0:
            raise InvalidParameterError(f"{name} must be finite and >= 0, got {value!r}")
    kind = DispersionKind(dispersion_kind)
    lhs = 0.5 * (k_m - k_c)

    if kind is DispersionKind.ANTI_CROSSING:
        purcell = lhs < g <= k_m
    else:
        purcell = lhs >= g > k_m

    if purcell:
        regime = Regime.PURCELL
    elif g > k_m and g > lhs:
        regime = Regime.STRONG_COUPLING
    else:
        regime = Regime.WEAK
    return RegimeVerdict(regime, k_m, k_c, g, lhs, kind)


@dataclass(frozen=True)
class TableRow:
    """One row of a Purcell-condition table; frequencies and rates in rad/s."""

    alpha: float
    omega_c: float
    omega_m: float
    k_c: float
    g: float


def classify_table(rows: Iterable[TableRow]) -> list[RegimeVerdict]:
    """Verdict per row, with K_m derived as α·ω_m."""
    verdicts = []
    for row in rows:
        k_m = row.alpha * row.omega_m
        verdicts.append(classify(hz(k_m), hz(row.k_c), hz(row.g)))
    return verdicts


def cooperativity(k_m: float, k_c: float, g: float) -> float:
    """C = g²/(K_m·K_c); infinite when either linewidth is zero."""
    if k_m <= 0 or k_c <= 0:
        return math.inf
    return g * g / (k_m * k_c)


def linewidth_enhancement(bare: PeakReport, coupled: PeakReport) -> float:
    """Coupled over bare photon HWHM, each from the tallest peak of its report."""
    bare_peak, coupled_peak = bare.tallest, coupled.tallest
    if bare_peak is None or coupled_peak is None:
        raise PreconditionError("linewidth_enhancement needs a peak in both spectra")
    return coupled_peak.hwhm / bare_peak.hwhm


@dataclass(frozen=True, eq=False)
class PhaseDiagram:
    """Re(Δ) (Hz) and the Purcell region over an (α, β, g) grid.

    ``g_axis`` and ``omega_c`` are angular (rad/s); arrays are indexed
    ``[alpha, beta, g]``.
    """

    alpha_axis: np.ndarray
    beta_axis: np.ndarray
    g_axis: np.ndarray
    omega_c: float
    re_delta: np.ndarray
    purcell_mask: np.ndarray

    def index_of(self, alpha: float, beta: float, g: float) -> tuple[int, int, int]:
        """Grid index of an (α, β, g) point that lies on the axes."""
        idx = []
        for axis, value, name in (
            (self.alpha_axis, alpha, "alpha"),
            (self.beta_axis, beta, "beta"),
            (self.g_axis, g, "g"),
        ):
            hits = np.flatnonzero(np.isclose(axis, value, rtol=1e-12, atol=0.0))
            if hits.size == 0:
                raise KeyError(f"{name}={value!r} is not on the diagram axis")
            idx.append(int(hits[0]))
        return idx[0], idx[1], idx[2]


def _axis(values, name: str) -> np.ndarray:
    arr = np.asarray(list(values), dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidParameterError(f"{name} must be a non-empty sequence")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise InvalidParameterError(f"{name} values must be finite and >= 0")
    if np.any(np.diff(arr) <= 0):
        raise InvalidParameterError(f"{name} must be strictly increasing")
    return arr


def phase_diagram(alpha_axis, beta_axis, g_axis, omega_c: float) -> PhaseDiagram:
    """Re(Δ) at the anti-crossing center over an (α, β, g) grid, extrinsic rates zero.

    Where dissipation wins the root is imaginary and Re(Δ) is stored as 0. The
    Purcell mask applies the anti-crossing window with K_m = α·ω_c and K_c = β·ω_c.
    """
    alphas = _axis(alpha_axis, "alpha_axis")
    betas = _axis(beta_axis, "beta_axis")
    gs = _axis(g_axis, "g_axis")
    if not math.isfinite(omega_c) or omega_c <= 0:
        raise InvalidParameterError(f"omega_c must be > 0, got {omega_c!r}")

    a = alphas[:, None, None]
    b = betas[None, :, None]
    g = gs[None, None, :]
    bracket = omega_c * (b - a)
    re_delta = np.sqrt(np.clip(4.0 * g * g - bracket * bracket, 0.0, None)) / TWO_PI

    k_m = a * omega_c
    k_c = b * omega_c
    mask = (0.5 * (k_m - k_c) < g) & (g <= k_m)
    logger.debug(
        "Phase diagram %s points, %d inside the Purcell window", re_delta.shape, int(mask.sum())
    )
    return PhaseDiagram(
        alpha_axis=alphas,
        beta_axis=betas,
        g_axis=gs,
        omega_c=omega_c,
        re_delta=re_delta,
        purcell_mask=np.broadcast_to(mask, re_delta.shape).copy(),
    )


@dataclass(frozen=True)
class SpinPoint:
    thickness_um: float
    n: float
    g: float


@dataclass(frozen=True)
class SpinScaling:
    """Coupling (Hz) against spin number with the fitted single-spin coupling g0."""

    entries: tuple[SpinPoint, ...]
    g0: float
    fit_residual: float


def spin_count(thickness_um: float, area_mm2: float, spin_density: float = YIG_SPIN_DENSITY) -> float:
    """Number of spins in a film of the given thickness (µm) and area (mm²)."""
    return spin_density * (area_mm2 * 1e-6) * (thickness_um * 1e-6)


def fit_spin_scaling(n_values, g_values) -> tuple[float, float]:
    """Least-squares g0 of g = g0·√N through the origin and the relative residual."""
    n = np.asarray(list(n_values), dtype=float)
    g = np.asarray(list(g_values), dtype=float)
    if n.size == 0 or n.shape != g.shape:
        raise InvalidParameterError("need matching, non-empty N and g sequences")
    if np.any(n <= 0):
        raise InvalidParameterError("spin numbers must be > 0")
    root_n = np.sqrt(n)
    g0 = float(np.sum(g * root_n) / np.sum(n))
    norm = float(np.linalg.norm(g))
    misfit = float(np.linalg.norm(g - g0 * root_n))
    return g0, (misfit / norm if norm > 0 else misfit)


def spin_scaling(
    thicknesses_um,
    area_mm2: float,
    spin_density: float = YIG_SPIN_DENSITY,
    g_reference: tuple[float, float] | None = None,
) -> SpinScaling:
    """Collective coupling g = g0·√N across film thicknesses.

    Args:
        thicknesses_um: Strictly increasing film thicknesses (µm).
        area_mm2: Film area (mm²).
        spin_density: Spins per m³.
        g_reference: (N_ref, g_ref in Hz) anchoring the curve.
    """
    if g_reference is None:
        raise InvalidParameterError("spin_scaling needs a (N_ref, g_ref) anchor")
    n_ref, g_ref = g_reference
    for name, value in (("area_mm2", area_mm2), ("spin_density", spin_density), ("N_ref", n_ref), ("g_ref", g_ref)):
        if not math.isfinite(value) or value <= 0:
            raise InvalidParameterError(f"{name} must be finite and > 0, got {value!r}")
    thicknesses = [float(t) for t in thicknesses_um]
    if not thicknesses:
        raise InvalidParameterError("spin_scaling needs at least one thickness")
    if any(not math.isfinite(t) or t <= 0 for t in thicknesses):
        raise InvalidParameterError("thicknesses must be finite and > 0")
    if any(b <= a for a, b in zip(thicknesses, thicknesses[1:])):
        raise InvalidParameterError("thicknesses must be strictly increasing")

    entries = []
    for t in thicknesses:
        n = spin_count(t, area_mm2, spin_density)
        entries.append(SpinPoint(thickness_um=t, n=n, g=g_ref * math.sqrt(n / n_ref)))
    _, residual = fit_spin_scaling([e.n for e in entries], [e.g for e in entries])
    return SpinScaling(entries=tuple(entries), g0=g_ref / math.sqrt(n_ref), fit_residual=residual)


@dataclass(frozen=True)
class SpinLinewidth:
    """Photon-like peak of the resonant spectrum at one film thickness (Hz)."""

    thickness_um: float
    g: float
    hwhm: float
    beta_eff: float


def spin_linewidths(
    scaling: SpinScaling,
    base: HybridSystem,
    grid: FrequencyGrid = DEFAULT_GRID,
) -> tuple[SpinLinewidth, ...]:
    """Effective photon damping K/ω_c as the spin number grows.

    Each entry's coupling replaces ``base.g``; K is the HWHM of the peak
    nearest the cavity frequency. ``nan`` when the spectrum has no peak.
    """
    f_c = hz(base.photon.omega)
    rows = []
    for e in scaling.entries:
        report = find_peaks(spectrum(base.replace(g=TWO_PI * e.g), grid))
        if report.peaks:
            peak = min(report.peaks, key=lambda p: abs(p.center - f_c))
            hwhm = peak.hwhm
        else:
            hwhm = math.nan
        logger.debug("t=%g um: g=%.6e Hz, photon HWHM=%.6e Hz", e.thickness_um, e.g, hwhm)
        rows.append(SpinLinewidth(e.thickness_um, e.g, hwhm, hwhm / f_c))
    return tuple(rows)
