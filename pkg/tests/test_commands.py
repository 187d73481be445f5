"""Tests for the subcommand pipelines."""

import math

import numpy as np
import pytest

from magnopurcell.core.config import RunConfig, parse_config, read_bundled_config
from magnopurcell.core.errors import ConfigError, InvalidParameterError
from magnopurcell.io import serialize
from magnopurcell.io.commands import (
    COMMANDS,
    cmd_classify,
    cmd_eigen,
    cmd_fit,
    cmd_linewidths,
    cmd_map,
    cmd_phase,
    cmd_spectrum,
    cmd_spinscale,
    cmd_timedomain,
)
from magnopurcell.physics.model import angular, eigenmodes, hz, mode_gap


def lorentzian_config():
    """Uncoupled cavity with a 24.99 MHz HWHM on a wide grid."""
    return parse_config(
        {
            "system": {"g_mhz": 0.0, "beta": 12.49 / 5330.0, "gamma_c_mhz": 12.5, "gamma_m_mhz": 0.0},
            "grid": {"start_ghz": 3.5, "stop_ghz": 7.2, "points": 8001},
            "timedomain": {"pad_factor": 4},
        }
    )


class TestEigen:
    def test_table1_ladder(self, tmp_output_dir):
        config = read_bundled_config("table1")
        (path,) = cmd_eigen(config, tmp_output_dir)
        header, data = serialize.read_csv(path)
        assert header == list(serialize.EIGEN_COLUMNS)
        assert data.shape == (7, 6)
        sys = config.build_system().with_magnon(intrinsic_damping=2.8e-2)
        plus, _ = eigenmodes(sys)
        assert data[6, 0] == 2.8e-2
        assert data[6, 1] == pytest.approx(hz(plus.real), rel=1e-11)
        assert data[6, 5] == pytest.approx(mode_gap(sys).real, rel=1e-11)

    def test_empty_sweep_writes_header_only(self, tmp_output_dir):
        (path,) = cmd_eigen(RunConfig(), tmp_output_dir)
        assert path.read_text() == "alpha,re_plus_Hz,im_plus_Hz,re_minus_Hz,im_minus_Hz,gap_Hz\n"

    def test_detuned_system_uses_eigen_splitting(self, tmp_output_dir):
        config = parse_config({"system": {"magnon_ghz": 5.2}, "sweep": {"alphas": [1.0e-3]}})
        (path,) = cmd_eigen(config, tmp_output_dir)
        _, data = serialize.read_csv(path)
        assert data[0, 5] == pytest.approx(data[0, 1] - data[0, 3], rel=1e-9)


class TestSpectrum:
    def test_writes_spectrum_and_peaks(self, tmp_output_dir):
        spec_path, peaks_path = cmd_spectrum(RunConfig(), tmp_output_dir)
        assert len(spec_path.read_text().splitlines()) == 2002
        peaks = serialize.read_json(peaks_path)
        assert len(peaks["peaks"]) == 2
        assert peaks["coupling_Hz"] == pytest.approx(127.3e6, rel=5e-3)
        assert peaks["convention"] == "splitting"

    def test_detuned_has_no_coupling(self, tmp_output_dir):
        config = parse_config({"system": {"magnon_ghz": 5.0}})
        _, peaks_path = cmd_spectrum(config, tmp_output_dir)
        assert serialize.read_json(peaks_path)["coupling_Hz"] is None


class TestLinewidths:
    def test_table1_ladder(self, tmp_output_dir):
        alphas = read_bundled_config("table1").sweep.alphas
        config = parse_config({"sweep": {"alphas": alphas}})
        (path,) = cmd_linewidths(config, tmp_output_dir)
        _, data = serialize.read_csv(path)
        assert data.shape == (7, 6)
        assert data[0, 5] == pytest.approx(2 * 127.3e6, rel=1e-2)

    def test_empty(self, tmp_output_dir):
        (path,) = cmd_linewidths(RunConfig(), tmp_output_dir)
        assert len(path.read_text().splitlines()) == 1


class TestMap:
    def test_zero_fields_header_only(self, tmp_output_dir):
        map_path, branches_path = cmd_map(RunConfig(), tmp_output_dir)
        assert map_path.read_text() == "H_Oe,freq_Hz,mag_dB\n"
        assert branches_path.read_text() == "H_Oe,lower_Hz,upper_Hz\n"

    def test_long_format(self, tmp_output_dir):
        config = parse_config(
            {"sweep": {"fields_oe": [1200.0, 1220.0]}, "grid": {"points": 101}}
        )
        map_path, branches_path = cmd_map(config, tmp_output_dir)
        assert len(map_path.read_text().splitlines()) == 1 + 2 * 101
        _, branches = serialize.read_csv(branches_path)
        assert branches.shape == (2, 3)


class TestTimeDomain:
    def test_decay_rate_matches_hwhm(self, tmp_output_dir):
        time_path, summary_path = cmd_timedomain(lorentzian_config(), tmp_output_dir)
        summary = serialize.read_json(summary_path)
        assert summary["hwhm_Hz"] == pytest.approx(24.99e6, rel=0.05)
        assert summary["decay_rate_per_s"] == pytest.approx(angular(24.99e6), rel=0.05)
        assert summary["edge_warning"] is False
        _, data = serialize.read_csv(time_path)
        assert data.shape == (4 * 8001, 2)

    def test_field_retunes_magnon(self, tmp_output_dir):
        config = parse_config(
            {
                "system": {"alpha": 2.8e-2, "beta": 8.536e-3, "g_mhz": 62.6},
                "grid": {"start_ghz": 3.5, "stop_ghz": 7.2, "points": 4001},
                "timedomain": {"field_oe": 900.0},
            }
        )
        _, summary_path = cmd_timedomain(config, tmp_output_dir)
        assert serialize.read_json(summary_path)["decay_time_s"] > 0


class TestClassify:
    def test_table1_verdicts(self, tmp_output_dir, table1_verdicts):
        (path,) = cmd_classify(read_bundled_config("table1"), tmp_output_dir)
        payload = serialize.read_json(path)
        assert payload["verdicts"] == table1_verdicts
        assert payload["regime"][:5] == ["strong_coupling"] * 5
        assert payload["regime"][5:] == ["purcell", "purcell"]
        row6 = payload["rows"][5]
        assert row6["k_m_Hz"] == pytest.approx(111.93e6, rel=5e-4)
        assert row6["lhs_Hz"] == pytest.approx((row6["k_m_Hz"] - row6["k_c_Hz"]) / 2)
        assert row6["cooperativity"] == pytest.approx(1.187, rel=1e-3)

    def test_empty_table(self, tmp_output_dir):
        (path,) = cmd_classify(RunConfig(), tmp_output_dir)
        assert serialize.read_json(path)["verdicts"] == []


class TestFit:
    def test_recovers_coupling_from_spectrum_csv(self, tmp_path):
        truth = {"alpha": 7.0e-3, "beta": 5.44e-3, "g_mhz": 116.61}
        cmd_spectrum(parse_config({"system": truth}), tmp_path)
        config = parse_config(
            {
                "system": {"alpha": 5.6e-3, "beta": 6.528e-3, "g_mhz": 139.932},
                "fit": {"data": "spectrum.csv"},
            },
            source_dir=tmp_path,
        )
        (path,) = cmd_fit(config, tmp_path / "out")
        payload = serialize.read_json(path)
        assert payload["converged"] is True
        assert payload["iterations"] <= 200
        assert payload["params"]["g_Hz"] == pytest.approx(116.61e6, rel=1e-2)
        assert payload["params"]["alpha"] == pytest.approx(7.0e-3, rel=1e-2)
        assert payload["params"]["beta"] == pytest.approx(5.44e-3, rel=1e-2)

    def test_auto_init(self, tmp_path):
        cmd_spectrum(RunConfig(), tmp_path)
        config = parse_config(
            {"system": {"g_mhz": 90.0}, "fit": {"data": "spectrum.csv", "free": ["g"], "auto_init": True}},
            source_dir=tmp_path,
        )
        payload = serialize.read_json(cmd_fit(config, tmp_path)[0])
        assert payload["params"]["g_Hz"] == pytest.approx(127.3e6, rel=1e-3)

    def test_missing_data(self, tmp_output_dir):
        with pytest.raises(ConfigError) as excinfo:
            cmd_fit(RunConfig(), tmp_output_dir)
        assert excinfo.value.field == "fit.data"

    def test_data_file_not_found(self, tmp_path):
        config = parse_config({"fit": {"data": "absent.csv"}}, source_dir=tmp_path)
        with pytest.raises(ConfigError):
            cmd_fit(config, tmp_path)


class TestPhase:
    def test_fig5_markers(self, tmp_output_dir):
        phase_path, markers_path = cmd_phase(read_bundled_config("fig5"), tmp_output_dir)
        markers = serialize.read_json(markers_path)["markers"]
        assert [m["purcell"] for m in markers] == [False] * 5 + [True] * 2
        assert markers[0]["beta"] == pytest.approx(4.688e-3, rel=1e-3)
        assert len(phase_path.read_text().splitlines()) == 1 + 7**3

    def test_grid_membership(self, tmp_output_dir):
        phase_path, _ = cmd_phase(read_bundled_config("fig5"), tmp_output_dir)
        diagram = serialize.read_phase_csv(phase_path, angular(5.33e9))
        for alpha, beta, g_hz in [(2.1e-2, 8.161e-3, 76.03e6), (2.8e-2, 8.536e-3, 62.6e6)]:
            assert diagram.purcell_mask[diagram.index_of(alpha, beta, angular(g_hz))]


class TestSpinScale:
    def test_default_thicknesses(self, tmp_output_dir):
        csv_path, widths_path, json_path = cmd_spinscale(RunConfig(), tmp_output_dir)
        _, data = serialize.read_csv(csv_path)
        assert list(data[:, 0]) == [5.0, 10.0, 20.0, 40.0]
        assert data[2, 1] == pytest.approx(3.78e18, rel=1e-11)
        assert data[2, 2] == pytest.approx(127.3e6, rel=1e-11)
        summary = serialize.read_json(json_path)
        assert summary["g0_Hz"] == pytest.approx(127.3e6 / math.sqrt(3.78e18), rel=1e-11)
        assert summary["fit_residual"] < 1e-12
        header, widths = serialize.read_csv(widths_path)
        assert header == list(serialize.SPIN_LINEWIDTH_COLUMNS)
        np.testing.assert_allclose(widths[:, 1], data[:, 2], rtol=1e-11)
        assert np.all(widths[:, 2] > 0)

    def test_unsorted_thicknesses(self, tmp_output_dir):
        config = parse_config({"spin": {"thicknesses_um": [20.0, 10.0]}})
        with pytest.raises(InvalidParameterError):
            cmd_spinscale(config, tmp_output_dir)


@pytest.mark.parametrize("name", ["classify", "eigen", "phase", "spinscale"])
def test_bundled_runs_are_byte_identical(tmp_path, name):
    command, _ = COMMANDS[name]
    config = read_bundled_config("fig5" if name == "phase" else "table1")
    first = command(config, tmp_path / "a")
    second = command(config, tmp_path / "b")
    for a, b in zip(first, second):
        assert a.read_bytes() == b.read_bytes()
