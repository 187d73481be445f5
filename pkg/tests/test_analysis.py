"""Tests for peak extraction, coupling readout, sweeps and branch tracking."""

import numpy as np
import pytest

from magnopurcell.core.errors import InvalidParameterError, PreconditionError
from magnopurcell.physics.analysis import (
    PeakGapConvention,
    calibrate_gap_convention,
    extract_coupling,
    find_peaks,
    linewidth_vs_alpha,
    track_branches,
)
from magnopurcell.physics.model import (
    KittelParams,
    angular,
    mode_gap,
    resonance_field,
    resonant_system,
)
from magnopurcell.physics.transmission import (
    ComplexSpectrum,
    FrequencyGrid,
    field_sweep,
    lorentzian_spectrum,
    spectrum,
)

CAVITY_HZ = 5.33e9


class TestFindPeaks:
    def test_single_lorentzian(self, fine_grid):
        report = find_peaks(lorentzian_spectrum(fine_grid, CAVITY_HZ, 25e6, amplitude=0.8))
        assert len(report.peaks) == 1
        peak = report.peaks[0]
        assert peak.center == pytest.approx(CAVITY_HZ, abs=fine_grid.step / 10)
        assert peak.hwhm == pytest.approx(25e6, rel=1e-3)
        assert peak.fwhm == pytest.approx(50e6, rel=1e-3)
        assert peak.height == pytest.approx(0.8, rel=1e-6)
        assert report.gap is None

    def test_flat_spectrum_has_no_peaks(self):
        grid = FrequencyGrid(1.0, 2.0, 50)
        assert find_peaks(ComplexSpectrum(grid, np.ones(50))).peaks == ()
        assert find_peaks(ComplexSpectrum(grid, np.zeros(50))).peaks == ()

    def test_monotone_spectrum_has_no_peaks(self):
        grid = FrequencyGrid(1.0, 2.0, 50)
        assert find_peaks(ComplexSpectrum(grid, np.linspace(0.1, 1.0, 50))).gap is None

    def test_two_lorentzians(self, fine_grid):
        a = lorentzian_spectrum(fine_grid, 5.2e9, 10e6).samples
        b = lorentzian_spectrum(fine_grid, 5.45e9, 10e6, amplitude=0.5).samples
        report = find_peaks(ComplexSpectrum(fine_grid, a + b))
        assert len(report.peaks) == 2
        assert report.centers[0] < report.centers[1]
        assert report.gap == pytest.approx(0.25e9, rel=5e-3)
        assert report.tallest.center == pytest.approx(5.2e9, rel=1e-4)

    def test_small_bumps_ignored(self, fine_grid):
        a = lorentzian_spectrum(fine_grid, 5.2e9, 10e6).samples
        b = lorentzian_spectrum(fine_grid, 5.5e9, 10e6, amplitude=0.01).samples
        assert len(find_peaks(ComplexSpectrum(fine_grid, a + b)).peaks) == 1

    @pytest.mark.parametrize("scale", [1e-3, 0.5, 250.0])
    def test_centers_unchanged_by_scaling(self, row1_system, fine_grid, scale):
        spec = spectrum(row1_system, fine_grid)
        scaled = find_peaks(ComplexSpectrum(fine_grid, scale * spec.samples))
        reference = find_peaks(spec)
        assert len(scaled.peaks) == len(reference.peaks) == 2
        for a, b in zip(scaled.centers, reference.centers):
            assert a == pytest.approx(b, rel=1e-12)

    def test_invalid_prominence(self, fine_grid):
        with pytest.raises(InvalidParameterError):
            find_peaks(lorentzian_spectrum(fine_grid, CAVITY_HZ, 25e6), prominence_frac=0.0)


class TestExtractCoupling:
    def test_row1_splitting_convention(self, row1_system, fine_grid):
        g = extract_coupling(spectrum(row1_system, fine_grid))
        assert g == pytest.approx(127.3e6, rel=1e-3)

    def test_gap_convention_doubles(self, row1_system, fine_grid):
        spec = spectrum(row1_system, fine_grid)
        split = extract_coupling(spec, PeakGapConvention.SPLITTING)
        assert extract_coupling(spec, "gap") == pytest.approx(2 * split)

    def test_uncoupled_is_absent(self, fine_grid):
        sys = resonant_system(CAVITY_HZ, 1e-3, 4.688e-3, 0.0, gamma_c_hz=12.5e6)
        assert extract_coupling(spectrum(sys, fine_grid)) is None

    def test_off_resonance_rejected(self, row1_system, fine_grid):
        detuned = row1_system.with_magnon(omega=angular(5.4e9))
        with pytest.raises(PreconditionError):
            extract_coupling(spectrum(detuned, fine_grid))

    def test_calibration_selects_splitting(self, row1_system, fine_grid):
        ladder = np.linspace(60e6, 150e6, 10)
        slope, convention = calibrate_gap_convention(row1_system, fine_grid, ladder)
        assert slope == pytest.approx(2.0, abs=0.02)
        assert convention is PeakGapConvention.SPLITTING

    def test_calibration_needs_doublets(self, row1_system, fine_grid):
        with pytest.raises(PreconditionError):
            calibrate_gap_convention(row1_system, fine_grid, [0.0])


class TestDampingLadder:
    def test_gap_shrinks_with_magnon_damping(self, table1, fine_grid):
        gaps = []
        for alpha, _, g_mhz, beta in table1:
            sys = resonant_system(CAVITY_HZ, alpha, beta, g_mhz * 1e6, gamma_c_hz=12.5e6)
            gaps.append(find_peaks(spectrum(sys, fine_grid)).gap)
        assert all(g is not None for g in gaps[:5])
        assert all(a > b for a, b in zip(gaps[:5], gaps[1:5]))
        for late in gaps[5:]:
            assert late is None or late < gaps[4]
        assert gaps[6] is None or gaps[6] / 2 < 70e6

    def test_separation_keeps_shrinking_into_the_merged_rows(self, table1, fine_grid):
        separations = []
        splittings = []
        for alpha, _, g_mhz, beta in table1:
            sys = resonant_system(CAVITY_HZ, alpha, beta, g_mhz * 1e6, gamma_c_hz=12.5e6)
            # a shallow dip still counts as two peaks; merged peaks count as zero separation
            gap = find_peaks(spectrum(sys, fine_grid), prominence_frac=0.01).gap
            separations.append(0.0 if gap is None else gap)
            splittings.append(mode_gap(sys).real)
        assert separations[5] > 0.0
        assert all(a > b for a, b in zip(separations, separations[1:]))
        assert all(a > b for a, b in zip(splittings, splittings[1:]))

    def test_linewidth_rows(self, row1_system, fine_grid):
        alphas = [1.4e-5, 1.4e-3, 1.4e-2]
        rows = linewidth_vs_alpha(alphas, row1_system, fine_grid)
        assert [r.alpha for r in rows] == alphas
        assert all(len(r.centers) == 2 for r in rows)
        assert rows[0].fwhms[0] < rows[2].fwhms[0]

    def test_identical_alphas_give_identical_rows(self, row1_system, fine_grid):
        a, b = linewidth_vs_alpha([7e-3, 7e-3], row1_system, fine_grid)
        assert a == b

    def test_forces_resonance(self, row1_system, fine_grid):
        detuned = row1_system.with_magnon(omega=angular(5.0e9))
        rows = linewidth_vs_alpha([1.4e-5], detuned, fine_grid)
        assert rows[0].gap == pytest.approx(2 * 127.3e6, rel=1e-3)

    def test_empty(self, row1_system, fine_grid):
        with pytest.raises(PreconditionError):
            linewidth_vs_alpha([], row1_system, fine_grid)


class TestTrackBranches:
    def test_branches_straddle_cavity_at_resonance(self, row1_system):
        kp = KittelParams()
        sweep = field_sweep(row1_system, kp, [resonance_field(CAVITY_HZ, kp)])
        (point,) = track_branches(sweep)
        assert point.lower < CAVITY_HZ < point.upper
        assert point.upper - point.lower == pytest.approx(2 * 127.3e6, rel=1e-2)

    def test_lone_cavity_peak_below_magnon(self):
        sys = resonant_system(CAVITY_HZ, 1e-3, 4.688e-3, 0.0, gamma_c_hz=12.5e6)
        (point,) = track_branches(field_sweep(sys, KittelParams(), [1400.0]))
        assert point.upper is None
        assert point.lower == pytest.approx(CAVITY_HZ, abs=1e6)

    def test_lone_cavity_peak_above_magnon(self):
        sys = resonant_system(CAVITY_HZ, 1e-3, 4.688e-3, 0.0, gamma_c_hz=12.5e6)
        (point,) = track_branches(field_sweep(sys, KittelParams(), [900.0]))
        assert point.lower is None
        assert point.upper == pytest.approx(CAVITY_HZ, abs=1e6)
