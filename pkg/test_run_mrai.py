"""
End-to-end tests of the command-line front end.
"""

import numpy as np
import pandas as pd
import pytest

from conftest import transcribed_rhs
from data_handler import read_series, read_velocity
from run_mrai import cli_main

SIMULATE = ['simulate', '--nx', '8', '--ny', '7', '--nz', '4', '--nt', '4', '--delta', '1.4',
            '--dt', '0.5', '--sigma', '2.8', '--amp', '100', '--base', '50']


def _simulate(path, *extra):
    assert cli_main(SIMULATE + ['--out', str(path)] + list(extra)) == 0


def test_simulate_writes_series(tmp_path):
    _simulate(tmp_path / "phantom", '--vx', '0.7', '--cx', '4.0')
    series = read_series(tmp_path / "phantom")
    assert series.grid.series_shape == (8, 7, 4, 4)
    assert series.grid.delta_t == 0.5
    assert series.values.max() <= 150.0


def test_reconstruct_with_zero_iterations_gives_zero_field(tmp_path):
    _simulate(tmp_path / "phantom", '--vx', '0.7', '--vy', '0.3')
    code = cli_main(['reconstruct', '--in', str(tmp_path / "phantom"),
                     '--out', str(tmp_path / "velocity"), '--itmax', '0'])
    assert code == 0
    assert not np.any(read_velocity(tmp_path / "velocity").components)
    assert (tmp_path / "velocity.csv").exists()


def test_residual_log_starts_at_rhs_norm(tmp_path):
    _simulate(tmp_path / "phantom", '--vx', '0.7', '--vz', '-0.2', '--noise', '0.5', '--seed', '3')
    log = tmp_path / "r.csv"
    code = cli_main(['reconstruct', '--in', str(tmp_path / "phantom"), '--out', str(tmp_path / "velocity"),
                     '--itmax', '3', '--log', str(log)])
    assert code == 0

    residuals = pd.read_csv(log, float_precision='round_trip')
    assert list(residuals['iter']) == [0, 1, 2, 3]
    b_norm = np.linalg.norm(transcribed_rhs(read_series(tmp_path / "phantom")))
    assert residuals['residual'].iloc[0] == pytest.approx(b_norm, rel=1e-10)


def test_static_phantom_reconstructs_to_zero(tmp_path):
    _simulate(tmp_path / "phantom")
    assert cli_main(['reconstruct', '--in', str(tmp_path / "phantom"), '--out', str(tmp_path / "velocity")]) == 0
    assert np.max(np.abs(read_velocity(tmp_path / "velocity").components)) <= 1e-10 * 100.0


def test_pipeline_images_are_byte_identical(tmp_path):
    outputs = []
    for run in ("first", "second"):
        folder = tmp_path / run
        folder.mkdir()
        _simulate(folder / "phantom", '--vx', '0.7', '--vy', '0.35', '--noise', '1.0', '--seed', '5')
        assert cli_main(['reconstruct', '--in', str(folder / "phantom"), '--out', str(folder / "velocity"),
                         '--itmax', '4']) == 0
        assert cli_main(['mip', '--in', str(folder / "velocity"), '--norm', str(folder / "n.pgm"),
                         '--colour', str(folder / "c.ppm")]) == 0
        outputs.append(((folder / "n.pgm").read_bytes(), (folder / "c.ppm").read_bytes()))
    assert outputs[0] == outputs[1]
    assert outputs[0][0].startswith(b"P5\n8 7\n255\n")
    assert outputs[0][1].startswith(b"P6\n8 7\n255\n")


def test_adjoint_check_passes(capsys):
    assert cli_main(['adjoint-check', '--trials', '100', '--tol', '1e-10']) == 0
    out = capsys.readouterr().out
    assert "max relative adjoint defect" in out
    assert "PASSED" in out


def test_adjoint_check_fails_with_impossible_tolerance(capsys):
    assert cli_main(['adjoint-check', '--trials', '3', '--tol', '0']) == 1
    assert "FAILED" in capsys.readouterr().out


def test_info_prints_header(tmp_path, capsys):
    _simulate(tmp_path / "phantom")
    capsys.readouterr()
    assert cli_main(['info', '--in', str(tmp_path / "phantom")]) == 0
    out = capsys.readouterr().out
    assert "format=mrai-series-v1" in out
    assert "nt=4" in out


@pytest.mark.parametrize("argv", [
    [],
    ['transmogrify'],
    ['reconstruct', '--in', 'x'],
    ['simulate', '--out', 'x', '--nx', 'many'],
    ['mip', '--in', 'x'],
])
def test_usage_errors_exit_with_two(argv):
    assert cli_main(argv) == 2


def test_validation_errors_exit_with_one(tmp_path):
    assert cli_main(['info', '--in', str(tmp_path / "missing")]) == 1
    assert cli_main(['simulate', '--out', str(tmp_path / "bad"), '--nx', '1']) == 1
    _simulate(tmp_path / "phantom")
    assert cli_main(['reconstruct', '--in', str(tmp_path / "phantom"), '--out', str(tmp_path / "v"),
                     '--itmax', '-1']) == 1
    assert cli_main(['mip', '--in', str(tmp_path / "phantom"), '--norm', str(tmp_path / "n.pgm")]) == 1
