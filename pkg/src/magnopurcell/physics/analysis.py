"""Peak, linewidth and coupling extraction from transmission spectra, and
least-squares fitting of the hybrid model to |S21| data."""

from __future__ import annotations

import enum
import logging
import math
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks as _local_maxima

from magnopurcell.core.errors import InvalidParameterError, PreconditionError
from magnopurcell.physics.model import HybridSystem, angular
from magnopurcell.physics.transmission import (
    ComplexSpectrum,
    FieldSweepMap,
    FrequencyGrid,
    s21_at,
    spectrum,
)

logger = logging.getLogger(__name__)

DEFAULT_PROMINENCE = 0.05
HALF_POWER = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class Peak:
    """One resonance peak of |S21| (frequencies in Hz)."""

    center: float
    hwhm: float
    height: float

    @property
    def fwhm(self) -> float:
        return 2.0 * self.hwhm


@dataclass(frozen=True)
class PeakReport:
    """Peaks of one spectrum, sorted by center.

    ``gap`` is the center distance of the two tallest peaks, ``None`` for fewer than two.
    """

    peaks: tuple[Peak, ...] = ()
    gap: float | None = None

    @property
    def centers(self) -> tuple[float, ...]:
        return tuple(p.center for p in self.peaks)

    @property
    def tallest(self) -> Peak | None:
        return max(self.peaks, key=lambda p: p.height) if self.peaks else None


class PeakGapConvention(str, enum.Enum):
    """How a measured peak gap maps onto the coupling strength g/2π.

    SPLITTING: the gap is the full splitting 2g (what the model's spectra show).
    GAP: the gap is read directly as g.
    """

    SPLITTING = "splitting"
    GAP = "gap"

    def coupling_from_gap(self, gap: float) -> float:
        return gap / 2.0 if self is PeakGapConvention.SPLITTING else gap


def _crossing(mag, freqs, i: int, level: float, direction: int) -> float | None:
    """Frequency where |S21| first drops below ``level`` walking away from peak ``i``.

    Returns None when the walk hits an edge or starts climbing another peak first.
    """
    n = len(mag)
    j = i
    while 0 <= j + direction < n:
        k = j + direction
        if mag[k] < level:
            frac = (mag[j] - level) / (mag[j] - mag[k])
            return float(freqs[j] + frac * (freqs[k] - freqs[j]))
        if mag[k] > mag[j]:
            return None
        j = k
    return None


def _refine(mag, freqs, i: int, step: float) -> tuple[float, float]:
    """Three-point parabolic refinement of a sampled maximum."""
    if i == 0 or i == len(mag) - 1:
        return float(freqs[i]), float(mag[i])
    y0, y1, y2 = mag[i - 1], mag[i], mag[i + 1]
    denom = y0 - 2.0 * y1 + y2
    if denom == 0.0:
        return float(freqs[i]), float(y1)
    shift = 0.5 * (y0 - y2) / denom
    return float(freqs[i] + shift * step), float(y1 - 0.25 * (y0 - y2) * shift)


def find_peaks(spec: ComplexSpectrum, prominence_frac: float = DEFAULT_PROMINENCE) -> PeakReport:
    """Local maxima of |S21| with their linewidths.

    Peaks need a prominence of at least ``prominence_frac`` of the spectrum
    maximum. Linewidths are HWHM at half power (|S21| = height/√2), linearly
    interpolated between grid points; centers are refined parabolically. A flat
    or monotone spectrum gives an empty report.
    """
    if not 0.0 < prominence_frac < 1.0:
        raise InvalidParameterError(f"prominence_frac must be in (0, 1), got {prominence_frac!r}")
    mag = spec.magnitude
    freqs = spec.frequencies
    top = float(np.max(mag))
    if top == 0.0:
        return PeakReport()

    indices, _ = _local_maxima(mag, prominence=prominence_frac * top)
    peaks = []
    for i in indices:
        center, height = _refine(mag, freqs, int(i), spec.grid.step)
        level = height * HALF_POWER
        left = _crossing(mag, freqs, int(i), level, -1)
        right = _crossing(mag, freqs, int(i), level, +1)
        if left is not None and right is not None:
            hwhm = 0.5 * (right - left)
        elif left is not None:
            hwhm = center - left
        elif right is not None:
            hwhm = right - center
        else:
            logger.debug("No half-power crossing around %.6e Hz", center)
            continue
        if hwhm > 0:
            peaks.append(Peak(center=center, hwhm=hwhm, height=height))

    peaks.sort(key=lambda p: p.center)
    gap = None
    if len(peaks) >= 2:
        a, b = sorted(peaks, key=lambda p: p.height, reverse=True)[:2]
        gap = abs(a.center - b.center)
    return PeakReport(peaks=tuple(peaks), gap=gap)


def extract_coupling(
    spec_at_resonance: ComplexSpectrum,
    convention: PeakGapConvention | str = PeakGapConvention.SPLITTING,
    prominence_frac: float = DEFAULT_PROMINENCE,
) -> float | None:
    """Coupling strength g/2π (Hz) read off the peak gap of a resonant spectrum.

    Returns None when the doublet has merged into a single peak.
    """
    system = spec_at_resonance.system
    if system is not None and not system.is_resonant():
        raise PreconditionError("extract_coupling needs a spectrum computed at omega_c == omega_m")
    report = find_peaks(spec_at_resonance, prominence_frac)
    if report.gap is None:
        return None
    return PeakGapConvention(convention).coupling_from_gap(report.gap)


def calibrate_gap_convention(
    base: HybridSystem,
    grid: FrequencyGrid,
    g_ladder_hz: Iterable[float],
) -> tuple[float, PeakGapConvention]:
    """Regress the extracted peak gap against known g/2π over a ladder of couplings.

    Returns the fitted slope (gap per unit g/2π, through the origin) and the
    convention it selects: a slope near 2 means the spectra show the full
    splitting 2g.
    """
    g_values, gaps = [], []
    for g_hz in g_ladder_hz:
        sys = base.with_magnon(omega=base.photon.omega).replace(g=angular(g_hz))
        gap = find_peaks(spectrum(sys, grid)).gap
        if gap is not None:
            g_values.append(g_hz)
            gaps.append(gap)
    if len(g_values) < 2:
        raise PreconditionError("fewer than two resolved doublets on the coupling ladder")
    g_arr = np.asarray(g_values)
    slope = float(np.dot(g_arr, gaps) / np.dot(g_arr, g_arr))
    convention = PeakGapConvention.SPLITTING if slope > 1.5 else PeakGapConvention.GAP
    logger.info("Peak gap / coupling slope %.4f selects %s", slope, convention.value)
    return slope, convention


# --- model fitting --------------------------------------------------------

FIT_PARAMETERS = ("g", "alpha", "beta", "gamma_c", "gamma_m")

# Normalization used for parameters whose initial value is zero.
_ZERO_SCALE = {
    "g": angular(1e6),
    "alpha": 1e-3,
    "beta": 1e-3,
    "gamma_c": angular(1e6),
    "gamma_m": angular(1e6),
}


def _get(sys: HybridSystem, name: str) -> float:
    return {
        "g": sys.g,
        "alpha": sys.magnon.intrinsic_damping,
        "beta": sys.photon.intrinsic_damping,
        "gamma_c": sys.photon.extrinsic_rate,
        "gamma_m": sys.magnon.extrinsic_rate,
    }[name]


def _set(sys: HybridSystem, values: Mapping[str, float]) -> HybridSystem:
    photon, magnon = {}, {}
    g = sys.g
    for name, value in values.items():
        if name == "g":
            g = value
        elif name == "alpha":
            magnon["intrinsic_damping"] = value
        elif name == "beta":
            photon["intrinsic_damping"] = value
        elif name == "gamma_c":
            photon["extrinsic_rate"] = value
        elif name == "gamma_m":
            magnon["extrinsic_rate"] = value
    return sys.with_photon(**photon).with_magnon(**magnon).replace(g=g)


def _free_names(free) -> tuple[str, ...]:
    if isinstance(free, Mapping):
        names = [name for name, flag in free.items() if flag]
    else:
        names = list(free)
    unknown = [n for n in names if n not in FIT_PARAMETERS]
    if unknown:
        raise InvalidParameterError(f"unknown fit parameters: {', '.join(unknown)}")
    ordered = tuple(n for n in FIT_PARAMETERS if n in names)
    if not ordered:
        raise PreconditionError("fit_model needs at least one free parameter")
    return ordered


@dataclass(frozen=True)
class FitResult:
    """Outcome of :func:`fit_model`.

    Attributes:
        params: Best system found.
        residual_norm: ‖model - data‖ / ‖data‖ of |S21| at ``params``.
        iterations: Accepted plus rejected outer iterations performed.
        converged: Whether a convergence criterion was met within ``max_iter``.
        gradient_steps: Number of times singular normal equations forced a gradient step.
        cost_history: Sum of squared residuals at the start and after each accepted step.
    """

    params: HybridSystem
    residual_norm: float
    iterations: int
    converged: bool
    gradient_steps: int = 0
    cost_history: tuple[float, ...] = ()


class _MagnitudeProblem:
    """|S21| residuals as a function of normalized free parameters."""

    def __init__(self, data: ComplexSpectrum, init: HybridSystem, names: tuple[str, ...]):
        self.init = init
        self.names = names
        self.omegas = data.grid.omegas
        self.target = data.magnitude
        self.scales = np.array(
            [_get(init, n) if _get(init, n) > 0 else _ZERO_SCALE[n] for n in names]
        )

    @property
    def x0(self) -> np.ndarray:
        return np.array([_get(self.init, n) for n in self.names]) / self.scales

    def system(self, x: np.ndarray) -> HybridSystem:
        return _set(self.init, dict(zip(self.names, (x * self.scales).tolist())))

    def residuals(self, x: np.ndarray) -> np.ndarray:
        return np.abs(s21_at(self.system(x), self.omegas)) - self.target


def jacobian(
    func: Callable[[np.ndarray], np.ndarray],
    x: np.ndarray,
    scheme: str = "forward",
    rel_step: float = 1e-6,
) -> np.ndarray:
    """Finite-difference Jacobian of ``func`` at ``x`` (forward or central)."""
    x = np.asarray(x, dtype=float)
    f0 = func(x)
    jac = np.empty((f0.size, x.size))
    for j in range(x.size):
        h = rel_step * max(abs(x[j]), 1.0)
        xp = x.copy()
        xp[j] += h
        if scheme == "central":
            xm = x.copy()
            xm[j] -= h
            jac[:, j] = (func(xp) - func(xm)) / (2.0 * h)
        elif scheme == "forward":
            jac[:, j] = (func(xp) - f0) / h
        else:
            raise ValueError(f"unknown difference scheme {scheme!r}")
    return jac


def model_jacobian(data: ComplexSpectrum, init: HybridSystem, free, scheme: str = "forward"):
    """Jacobian of the |S21| residuals with respect to the normalized free parameters."""
    problem = _MagnitudeProblem(data, init, _free_names(free))
    return jacobian(problem.residuals, problem.x0, scheme)


def fit_model(
    data: ComplexSpectrum,
    init: HybridSystem,
    free=("g", "alpha", "beta"),
    max_iter: int = 200,
) -> FitResult:
    """Fit the hybrid model to the magnitude of ``data`` by damped Gauss-Newton.

    Free parameters are picked from ``FIT_PARAMETERS`` (names, or a mapping of
    name to flag) and kept non-negative by projection. The damping factor starts
    at 1e-3 and moves by 10× on each reject/accept. Iteration stops when the
    relative decrease of the squared residual drops below 1e-10 or the step
    norm below 1e-12. Forward-difference Jacobian with relative step 1e-6.
    """
    names = _free_names(free)
    if max_iter < 1:
        raise InvalidParameterError(f"max_iter must be >= 1, got {max_iter!r}")
    problem = _MagnitudeProblem(data, init, names)
    x = problem.x0
    r = problem.residuals(x)
    cost = float(r @ r)
    lam = 1e-3
    history = [cost]
    converged = False
    gradient_steps = 0
    iterations = 0

    while iterations < max_iter and not converged:
        iterations += 1
        jac = jacobian(problem.residuals, x)
        normal = jac.T @ jac
        grad = jac.T @ r
        diag = np.diag(normal).copy()
        diag[diag == 0.0] = 1.0
        accepted = False
        while lam < 1e20:
            try:
                step = np.linalg.solve(normal + lam * np.diag(diag), -grad)
                if not np.all(np.isfinite(step)):
                    raise np.linalg.LinAlgError("non-finite step")
            except np.linalg.LinAlgError:
                gradient_steps += 1
                curvature = float(np.sum((jac @ grad) ** 2))
                step = -grad * (float(grad @ grad) / curvature if curvature > 0 else 1.0)
                logger.warning("Singular normal equations; taking a gradient step")
            x_new = np.maximum(x + step, 0.0)
            r_new = problem.residuals(x_new)
            cost_new = float(r_new @ r_new)
            step_norm = float(np.linalg.norm(x_new - x))
            if cost_new < cost:
                decrease = (cost - cost_new) / cost
                x, r, cost = x_new, r_new, cost_new
                history.append(cost)
                lam = max(lam / 10.0, 1e-15)
                accepted = True
                converged = decrease < 1e-10 or step_norm < 1e-12 or cost == 0.0
                break
            if step_norm < 1e-12:
                converged = True
                break
            lam *= 10.0
        if not accepted and not converged:
            # No direction reduces the residual at any damping: local minimum.
            converged = True
        logger.debug("fit iteration %d: cost=%.6e lambda=%.1e", iterations, cost, lam)

    norm = float(np.linalg.norm(problem.target))
    residual_norm = math.sqrt(cost) / norm if norm > 0 else math.sqrt(cost)
    return FitResult(
        params=problem.system(x),
        residual_norm=residual_norm,
        iterations=iterations,
        converged=converged,
        gradient_steps=gradient_steps,
        cost_history=tuple(history),
    )


def initial_guess(
    data: ComplexSpectrum,
    template: HybridSystem,
    bare_cavity: ComplexSpectrum | None = None,
    convention: PeakGapConvention | str = PeakGapConvention.SPLITTING,
) -> HybridSystem:
    """Deterministic starting point for :func:`fit_model`.

    β comes from the bare-cavity linewidth (keeping the template's γ_c), α from
    the template (the target magnon linewidth) and g from the resonant peak gap.
    """
    guess = template
    if bare_cavity is not None:
        bare = find_peaks(bare_cavity).tallest
        if bare is not None:
            kappa = angular(bare.hwhm) - template.photon.extrinsic_rate
            guess = guess.with_photon(intrinsic_damping=max(kappa, 0.0) / template.photon.omega)
    g_hz = extract_coupling(data, convention)
    if g_hz is not None:
        guess = guess.replace(g=angular(g_hz))
    return guess


# --- sweeps ---------------------------------------------------------------


@dataclass(frozen=True)
class LinewidthRow:
    """Peak centers and FWHMs (Hz) of the resonant spectrum at one magnon damping."""

    alpha: float
    centers: tuple[float, ...]
    fwhms: tuple[float, ...]
    gap: float | None


def linewidth_vs_alpha(
    alphas: Iterable[float],
    base: HybridSystem,
    grid: FrequencyGrid,
    prominence_frac: float = DEFAULT_PROMINENCE,
) -> list[LinewidthRow]:
    """Peak positions and linewidths at the anti-crossing center for each α."""
    alphas = list(alphas)
    if not alphas:
        raise PreconditionError("linewidth_vs_alpha needs at least one alpha")
    rows = []
    for alpha in alphas:
        sys = base.with_magnon(omega=base.photon.omega, intrinsic_damping=alpha)
        report = find_peaks(spectrum(sys, grid), prominence_frac)
        rows.append(
            LinewidthRow(
                alpha=alpha,
                centers=report.centers,
                fwhms=tuple(p.fwhm for p in report.peaks),
                gap=report.gap,
            )
        )
    return rows


@dataclass(frozen=True)
class BranchPoint:
    """Upper and lower hybrid branch positions (Hz) at one bias field."""

    field: float
    lower: float | None
    upper: float | None


def track_branches(
    sweep: FieldSweepMap, prominence_frac: float = DEFAULT_PROMINENCE
) -> list[BranchPoint]:
    """Follow the two hybrid branches across a field sweep.

    With two or more peaks the two tallest define the branches. A lone peak is
    put on the lower branch when the magnon sits above the cavity, otherwise on
    the upper one.
    """
    points = []
    for field, spec in zip(sweep.fields, sweep.spectra):
        report = find_peaks(spec, prominence_frac)
        if len(report.peaks) >= 2:
            a, b = sorted(report.peaks, key=lambda p: p.height, reverse=True)[:2]
            lo, hi = sorted((a.center, b.center))
            points.append(BranchPoint(field, lo, hi))
        elif report.peaks:
            only = report.peaks[0].center
            magnon_above = spec.system is not None and spec.system.detuning < 0
            points.append(
                BranchPoint(field, only, None) if magnon_above else BranchPoint(field, None, only)
            )
        else:
            points.append(BranchPoint(field, None, None))
    return points

