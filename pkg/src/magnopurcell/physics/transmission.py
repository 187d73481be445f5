"""Transmission spectra of the hybrid system and their time-domain ringdown."""

from __future__ import annotations

import enum
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from magnopurcell.core.errors import (
    DegenerateInputError,
    InvalidParameterError,
    PreconditionError,
    SingularityError,
)
from magnopurcell.physics.model import (
    TWO_PI,
    HybridSystem,
    KittelParams,
    angular,
)

logger = logging.getLogger(__name__)

SINGULAR_DENOMINATOR = 1e-300
EDGE_LEAKAGE_FRACTION = 0.1


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform frequency grid in Hz, endpoints included."""

    start: float
    stop: float
    points: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise InvalidParameterError("grid endpoints must be finite")
        if self.start >= self.stop:
            raise InvalidParameterError(
                f"grid start must be < stop, got {self.start!r} >= {self.stop!r}"
            )
        if int(self.points) != self.points or self.points < 2:
            raise InvalidParameterError(f"grid needs at least 2 points, got {self.points!r}")

    @property
    def frequencies(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)

    @property
    def omegas(self) -> np.ndarray:
        return TWO_PI * self.frequencies

    @property
    def step(self) -> float:
        return (self.stop - self.start) / (self.points - 1)

    @property
    def span(self) -> float:
        return self.stop - self.start


DEFAULT_GRID = FrequencyGrid(4.8e9, 5.9e9, 2001)


@dataclass(frozen=True, eq=False)
class ComplexSpectrum:
    """Complex S21 samples on a frequency grid.

    Attributes:
        grid: The frequency grid.
        samples: Complex S21, one per grid point.
        system: The HybridSystem that generated the samples, if any.
    """

    grid: FrequencyGrid
    samples: np.ndarray
    system: HybridSystem | None = None

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=complex)
        if samples.shape != (self.grid.points,):
            raise InvalidParameterError(
                f"expected {self.grid.points} samples, got shape {samples.shape}"
            )
        if not np.all(np.isfinite(samples)):
            raise InvalidParameterError("spectrum samples must be finite")
        object.__setattr__(self, "samples", samples)

    @property
    def frequencies(self) -> np.ndarray:
        return self.grid.frequencies

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.samples)

    def magnitude_db(self, reference: float = 1.0) -> np.ndarray:
        """20·log10(|S21|/reference); zero magnitudes map to -inf."""
        with np.errstate(divide="ignore"):
            return 20.0 * np.log10(self.magnitude / reference)


@dataclass(frozen=True, eq=False)
class FieldSweepMap:
    """|S21| over the (f, H) plane: one spectrum per bias field on a shared grid."""

    fields: tuple[float, ...]
    spectra: tuple[ComplexSpectrum, ...]

    def __post_init__(self) -> None:
        if len(self.fields) != len(self.spectra):
            raise InvalidParameterError("one spectrum per field is required")
        grids = {s.grid for s in self.spectra}
        if len(grids) > 1:
            raise InvalidParameterError("all spectra in a sweep must share one grid")

    @property
    def grid(self) -> FrequencyGrid | None:
        return self.spectra[0].grid if self.spectra else None


@dataclass(frozen=True, eq=False)
class TimeTrace:
    """Envelope of the time-domain response of a spectrum.

    Attributes:
        times: Uniform sample times starting at 0 (s).
        magnitudes: Envelope, normalized to 1 at t = 0.
        carrier: Frequency the spectrum was shifted by before transforming (Hz).
        scale: Envelope value at t = 0 before normalization.
        edge_warning: True when the spectrum edges were not quiet enough for a clean transform.
    """

    times: np.ndarray
    magnitudes: np.ndarray
    carrier: float
    scale: float = 1.0
    edge_warning: bool = False

    @property
    def step(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0


class Window(str, enum.Enum):
    """Spectral window applied before the transform."""

    NONE = "none"
    HANN = "hann"


def s21_at(sys: HybridSystem, omega):
    """Complex transmission coefficient S21 at angular frequency ``omega``.

    ``omega`` may be a scalar or an array; the result has the same shape.

    Raises:
        InvalidParameterError: for non-finite frequencies.
        SingularityError: where the denominator vanishes (only possible with
            zero damping in every channel).
    """
    w = np.asarray(omega, dtype=float)
    if not np.all(np.isfinite(w)):
        raise InvalidParameterError("omega must be finite")

    wc, beta, gc = sys.photon.omega, sys.photon.intrinsic_damping, sys.photon.extrinsic_rate
    wm, alpha, gm = sys.magnon.omega, sys.magnon.intrinsic_damping, sys.magnon.extrinsic_rate
    g = sys.g
    root = sys.dissipative_coupling

    numerator = (
        2.0 * alpha * gc * wm
        + 2.0 * beta * gm * wc
        - 4j * g * root
        - 2j * gc * (w - wm)
        - 2j * gm * (w - wc)
    )
    denominator = (1j * g + root) ** 2 + (1j * beta * wc + 1j * gc + w - wc) * (
        1j * alpha * wm + 1j * gm + w - wm
    )

    small = np.abs(denominator) < SINGULAR_DENOMINATOR
    if np.any(small):
        index = int(np.flatnonzero(np.atleast_1d(small))[0]) if w.ndim else None
        raise SingularityError(
            f"S21 denominator vanishes at omega={float(np.atleast_1d(w)[index or 0]):.6e} rad/s",
            index=index,
        )
    result = numerator / denominator
    return complex(result) if w.ndim == 0 else result


def spectrum(sys: HybridSystem, grid: FrequencyGrid = DEFAULT_GRID) -> ComplexSpectrum:
    """Evaluate S21 at every point of ``grid``."""
    return ComplexSpectrum(grid=grid, samples=s21_at(sys, grid.omegas), system=sys)


def field_sweep(
    sys_template: HybridSystem,
    kp: KittelParams,
    fields,
    grid: FrequencyGrid = DEFAULT_GRID,
    workers: int = 1,
) -> FieldSweepMap:
    """Spectra over a list of bias fields (Oe), magnon retuned by the Kittel law.

    With ``workers > 1`` the fields are evaluated on a thread pool; output order
    follows the input order regardless of scheduling.
    """
    fields = tuple(float(h) for h in fields)
    if not fields:
        raise PreconditionError("field_sweep needs at least one field")
    for h in fields:
        if not math.isfinite(h) or h < 0:
            raise InvalidParameterError(f"fields must be finite and >= 0, got {h!r}")

    def _one(field_oe: float) -> ComplexSpectrum:
        logger.debug("Sweep point H=%.3f Oe", field_oe)
        return spectrum(sys_template.at_field(field_oe, kp), grid)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            spectra = tuple(pool.map(_one, fields))
    else:
        spectra = tuple(_one(h) for h in fields)
    return FieldSweepMap(fields=fields, spectra=spectra)


def time_domain(
    spec: ComplexSpectrum,
    window: Window | str = Window.NONE,
    pad_factor: int = 1,
) -> TimeTrace:
    """Ringdown envelope of a spectrum via a discrete Fourier transform.

    The samples are shifted to baseband around the grid's center point (the
    carrier), zero-padded symmetrically to ``pad_factor`` times their length and
    transformed with the e^{-iωt} time convention, so a response ``1/(δ + iκ)``
    rings down as ``exp(-κt)`` for t >= 0. The orthonormal transform keeps
    Σ|x(t)|² equal to Σ|S21|².
    Samples are 1/(pad_factor·n·df) apart: the transform period is n·df, one grid
    step longer than the span (n-1)·df.

    Raises:
        DegenerateInputError: if every sample is zero.
        InvalidParameterError: for a pad factor below 1.
    """
    window = Window(window)
    if int(pad_factor) != pad_factor or pad_factor < 1:
        raise InvalidParameterError(f"pad_factor must be an integer >= 1, got {pad_factor!r}")

    samples = spec.samples
    peak = float(np.max(np.abs(samples)))
    if peak == 0.0:
        raise DegenerateInputError("time_domain needs a spectrum with nonzero energy")

    edge = max(abs(samples[0]), abs(samples[-1]))
    edge_warning = bool(edge >= EDGE_LEAKAGE_FRACTION * peak)
    if edge_warning:
        logger.warning(
            "Spectrum edges carry %.1f%% of the peak magnitude; ringdown will show leakage",
            100.0 * edge / peak,
        )

    if window is Window.HANN:
        samples = samples * np.hanning(len(samples))

    n = len(samples)
    centre = n // 2
    carrier = float(spec.frequencies[centre])
    m = int(pad_factor) * n
    buffer = np.zeros(m, dtype=complex)
    buffer[: n - centre] = samples[centre:]
    if centre:
        buffer[m - centre :] = samples[:centre]

    signal = np.fft.fft(buffer, norm="ortho")
    envelope = np.abs(signal)
    times = np.arange(m) / (m * spec.grid.step)

    scale = float(envelope[0])
    if scale == 0.0:
        logger.warning("Ringdown starts at zero; normalizing to its maximum instead")
        scale = float(np.max(envelope))
    return TimeTrace(
        times=times,
        magnitudes=envelope / scale,
        carrier=carrier,
        scale=scale,
        edge_warning=edge_warning,
    )


def decay_time(trace: TimeTrace) -> float:
    """Time (s) for the envelope to fall from its peak to peak/e.

    The crossing is linearly interpolated between samples.
    """
    mags = trace.magnitudes
    start = int(np.argmax(mags))
    threshold = mags[start] / math.e
    below = np.flatnonzero(mags[start:] < threshold)
    if below.size == 0:
        raise PreconditionError("envelope never falls to 1/e of its peak")
    i = start + int(below[0])
    t0, t1 = trace.times[i - 1], trace.times[i]
    y0, y1 = mags[i - 1], mags[i]
    return float(t0 + (y0 - threshold) * (t1 - t0) / (y0 - y1) - trace.times[start])


def decay_rate(trace: TimeTrace, upper: float = 0.7, lower: float = 0.1) -> float:
    """Exponential decay rate (1/s, i.e. an angular HWHM) of the envelope.

    Least-squares line through log(envelope) over the stretch after the peak
    where the envelope lies between ``lower`` and ``upper`` times the peak.
    """
    mags = trace.magnitudes
    start = int(np.argmax(mags))
    peak = mags[start]
    tail = mags[start:]
    first = int(np.argmax(tail <= upper * peak))
    below = np.flatnonzero(tail < lower * peak)
    last = int(below[0]) if below.size else len(tail)
    if last - first < 3:
        raise PreconditionError("too few samples in the decay window to fit a rate")
    t = trace.times[start + first : start + last]
    y = np.log(tail[first:last])
    slope, _ = np.polyfit(t, y, 1)
    return float(-slope)


def lorentzian_spectrum(
    grid: FrequencyGrid, centre_hz: float, hwhm_hz: float, amplitude: float = 1.0
) -> ComplexSpectrum:
    """Single complex Lorentzian ``-i·A·κ/(δ + iκ)``, peak magnitude A."""
    kappa = angular(hwhm_hz)
    delta = grid.omegas - angular(centre_hz)
    return ComplexSpectrum(grid=grid, samples=-1j * amplitude * kappa / (delta + 1j * kappa))
