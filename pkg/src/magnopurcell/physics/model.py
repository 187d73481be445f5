"""Hybrid photon-magnon mode algebra.

All frequencies and rates are angular (rad/s) inside this package; conversion
to Hz, MHz, GHz happens at the I/O boundary with :func:`hz` and :func:`angular`.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from magnopurcell.core.errors import InvalidParameterError, PreconditionError

TWO_PI = 2.0 * math.pi

# Relative |ω_c - ω_m| / ω_c accepted as "at the anti-crossing center".
RESONANCE_TOLERANCE = 1e-9


def angular(freq_hz: float) -> float:
    """Convert a frequency in Hz to angular frequency in rad/s."""
    return TWO_PI * freq_hz


def hz(omega: float) -> float:
    """Convert an angular frequency in rad/s to Hz."""
    return omega / TWO_PI


def _check_finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise InvalidParameterError(f"{name} must be finite, got {value!r}")


def _check_non_negative(name: str, value: float) -> None:
    _check_finite(name, value)
    if value < 0:
        raise InvalidParameterError(f"{name} must be >= 0, got {value!r}")


@dataclass(frozen=True)
class ModeParams:
    """One resonant mode.

    Attributes:
        omega: Center angular frequency (rad/s).
        intrinsic_damping: Dimensionless damping constant (β for the photon, α for the magnon).
        extrinsic_rate: Dissipation rate into the feed line, γ (rad/s).
    """

    omega: float
    intrinsic_damping: float = 0.0
    extrinsic_rate: float = 0.0

    def __post_init__(self) -> None:
        _check_finite("omega", self.omega)
        if self.omega <= 0:
            raise InvalidParameterError(f"omega must be > 0, got {self.omega!r}")
        _check_non_negative("intrinsic_damping", self.intrinsic_damping)
        _check_non_negative("extrinsic_rate", self.extrinsic_rate)

    @property
    def complex_omega(self) -> complex:
        """ω̃ = ω - i·damping·ω."""
        return complex(self.omega, -self.intrinsic_damping * self.omega)

    @property
    def loaded_omega(self) -> complex:
        """ω̃′ = ω̃ - iγ, the mode as seen with the feed line attached."""
        return self.complex_omega - 1j * self.extrinsic_rate

    @property
    def intrinsic_linewidth(self) -> float:
        """HWHM from intrinsic damping alone, damping·ω (rad/s)."""
        return self.intrinsic_damping * self.omega


@dataclass(frozen=True)
class HybridSystem:
    """Photon mode and magnon mode coherently coupled with strength g (rad/s)."""

    photon: ModeParams
    magnon: ModeParams
    g: float = 0.0

    def __post_init__(self) -> None:
        _check_non_negative("g", self.g)

    @property
    def dissipative_coupling(self) -> float:
        """√(γ_c·γ_m), the line-mediated coupling."""
        return math.sqrt(self.photon.extrinsic_rate * self.magnon.extrinsic_rate)

    @property
    def effective_coupling(self) -> complex:
        """g′ = g - i√(γ_c·γ_m)."""
        return complex(self.g, -self.dissipative_coupling)

    @property
    def detuning(self) -> float:
        """ω_c - ω_m (rad/s)."""
        return self.photon.omega - self.magnon.omega

    def is_resonant(self, tolerance: float = RESONANCE_TOLERANCE) -> bool:
        return abs(self.detuning) <= tolerance * self.photon.omega

    def replace(self, **changes) -> HybridSystem:
        return dataclasses.replace(self, **changes)

    def with_magnon(self, **changes) -> HybridSystem:
        """Copy with selected magnon fields changed."""
        return dataclasses.replace(self, magnon=dataclasses.replace(self.magnon, **changes))

    def with_photon(self, **changes) -> HybridSystem:
        """Copy with selected photon fields changed."""
        return dataclasses.replace(self, photon=dataclasses.replace(self.photon, **changes))

    def at_field(self, field_oe: float, kp: KittelParams) -> HybridSystem:
        """Copy with the magnon retuned to the Kittel frequency at ``field_oe``.

        The photon mode does not depend on the bias field.
        """
        return self.with_magnon(omega=kittel_frequency(field_oe, kp))


@dataclass(frozen=True)
class KittelParams:
    """In-plane thin film dispersion parameters.

    Attributes:
        gyromagnetic_ratio: γ in rad/s per Oe (default 2π·2.8 MHz/Oe).
        effective_magnetization: 4πM_s in Oe (default 1750 G, YIG).
    """

    gyromagnetic_ratio: float = TWO_PI * 2.8e6
    effective_magnetization: float = 1750.0

    def __post_init__(self) -> None:
        for name in ("gyromagnetic_ratio", "effective_magnetization"):
            value = getattr(self, name)
            _check_finite(name, value)
            if value <= 0:
                raise InvalidParameterError(f"{name} must be > 0, got {value!r}")


def resonant_system(
    freq_hz: float,
    alpha: float,
    beta: float,
    g_hz: float,
    gamma_c_hz: float = 0.0,
    gamma_m_hz: float = 0.0,
) -> HybridSystem:
    """Build a system at the anti-crossing center from Hz-valued inputs."""
    return HybridSystem(
        photon=ModeParams(angular(freq_hz), beta, angular(gamma_c_hz)),
        magnon=ModeParams(angular(freq_hz), alpha, angular(gamma_m_hz)),
        g=angular(g_hz),
    )


def damping_constant(linewidth: float, omega: float) -> float:
    """Dimensionless damping from an HWHM linewidth: β = K_c/ω_c, α = K_m/ω_m.

    Any consistent units work (both Hz or both rad/s).
    """
    _check_non_negative("linewidth", linewidth)
    _check_finite("omega", omega)
    if omega <= 0:
        raise InvalidParameterError(f"omega must be > 0, got {omega!r}")
    return linewidth / omega


def linewidth(damping: float, omega: float) -> float:
    """HWHM linewidth K = damping·ω, in the units of ``omega``."""
    _check_non_negative("damping", damping)
    _check_non_negative("omega", omega)
    return damping * omega


def effective_hamiltonian(sys: HybridSystem) -> np.ndarray:
    """Non-Hermitian 2×2 effective Hamiltonian of the coupled system (rad/s).

    Diagonal entries are the loaded mode frequencies ω̃ - iγ; both off-diagonal
    entries are the same complex coupling g′, so the matrix is complex-symmetric.
    """
    g_eff = sys.effective_coupling
    return np.array(
        [
            [sys.photon.loaded_omega, g_eff],
            [g_eff, sys.magnon.loaded_omega],
        ],
        dtype=complex,
    )


def _ordered(first: complex, second: complex) -> tuple[complex, complex]:
    scale = max(abs(first.real), abs(second.real), 1.0)
    if abs(first.real - second.real) <= 1e-15 * scale:
        return (first, second) if first.imag >= second.imag else (second, first)
    return (first, second) if first.real > second.real else (second, first)


def eigenmodes(sys: HybridSystem) -> tuple[complex, complex]:
    """Complex eigenfrequencies (ω̃₊, ω̃₋) of the effective Hamiltonian.

    Closed form with the principal square root, then ordered so that
    Re(ω̃₊) >= Re(ω̃₋) (ties broken by the imaginary part). A degenerate pair is
    returned twice.
    """
    a = sys.photon.loaded_omega
    b = sys.magnon.loaded_omega
    g_eff = sys.effective_coupling
    root = complex(np.sqrt(complex((a - b) ** 2 + 4.0 * g_eff**2)))
    centre = a + b
    return _ordered(0.5 * (centre + root), 0.5 * (centre - root))


def mode_gap(sys: HybridSystem, tolerance: float = RESONANCE_TOLERANCE) -> complex:
    """Complex frequency gap Δ (Hz) between the hybrid modes at the anti-crossing center.

    Δ = (1/2π)·√(4g′² - [ω_c(β - α) + (γ_c - γ_m)]²), principal root. Re(Δ) is
    the observable splitting; it is zero when dissipation wins.

    Raises:
        PreconditionError: if ω_c and ω_m differ by more than ``tolerance`` (relative).
    """
    if not sys.is_resonant(tolerance):
        raise PreconditionError(
            f"mode_gap requires omega_c == omega_m; relative detuning is "
            f"{abs(sys.detuning) / sys.photon.omega:.3e} (tolerance {tolerance:.1e})"
        )
    omega_c = sys.photon.omega
    bracket = omega_c * (sys.photon.intrinsic_damping - sys.magnon.intrinsic_damping) + (
        sys.photon.extrinsic_rate - sys.magnon.extrinsic_rate
    )
    g_eff = sys.effective_coupling
    return complex(np.sqrt(complex(4.0 * g_eff**2 - bracket**2))) / TWO_PI


def kittel_frequency(field_oe: float, kp: KittelParams) -> float:
    """Magnon angular frequency γ·√(H·(H + 4πM_s)) for an in-plane magnetized film."""
    _check_non_negative("field_oe", field_oe)
    return kp.gyromagnetic_ratio * math.sqrt(field_oe * (field_oe + kp.effective_magnetization))


def resonance_field(freq_hz: float, kp: KittelParams) -> float:
    """Bias field (Oe) that puts the Kittel mode at ``freq_hz``.

    Positive root of H² + 4πM_s·H - (ω/γ)² = 0, written in the form that stays
    accurate as the frequency goes to zero.
    """
    _check_finite("freq_hz", freq_hz)
    if freq_hz <= 0:
        raise InvalidParameterError(f"freq_hz must be > 0, got {freq_hz!r}")
    x = (angular(freq_hz) / kp.gyromagnetic_ratio) ** 2
    m = kp.effective_magnetization
    return 2.0 * x / (m + math.sqrt(m * m + 4.0 * x))
