import math

import numpy as np
import pytest

from vibropol import (EmitterModel, NumericalError, PhononMode,
                      ValidationError, bose_occupation, debye_waller,
                      full_band_grid, lineshape, lineshape_bruteforce,
                      lineshape_density, make_grid, spectral_function,
                      total_dq, KB_MEV)
from vibropol.vibronic import acoustic_wing_density


def _mode(energy=165.0, hr=1.0, dq=0.3, **kw):
    return PhononMode(energy, hr, dq, **kw)


def _model(modes, temperature=0.0, linewidth=1.0, profile="gaussian", **kw):
    return EmitterModel(zpl_energy=1.848, equilibrium_angle=0.0,
                        equilibrium_dipole=1.0, modes=tuple(modes),
                        zpl_linewidth=linewidth, temperature=temperature,
                        zpl_profile=profile, **kw)


# ------------------------------------------------------------ occupation

def test_bose_zero_temperature():
    assert bose_occupation(10.0, 0.0) == 0.0


def test_bose_room_temperature():
    # independent evaluation with k_B * 300 K = 25.852 meV
    expected = 1.0 / (math.exp(10.0 / 25.852) - 1.0)
    assert abs(bose_occupation(10.0, 300.0) - expected) < 1e-4 * expected


def test_bose_cryogenic_negligible():
    assert bose_occupation(10.0, 6.0) < 1e-8


def test_bose_validation():
    with pytest.raises(ValidationError):
        bose_occupation(-1.0, 300.0)
    with pytest.raises(ValidationError):
        bose_occupation(10.0, -1.0)
    with pytest.raises(ValidationError):
        bose_occupation(np.nan, 300.0)


# ----------------------------------------------------------- debye-waller

def test_debye_waller_t0_single_mode():
    w = debye_waller([_mode(hr=2.71)], 0.0)
    assert abs(w - math.exp(-2.71)) < 1e-12


def test_debye_waller_t0_is_exp_total_hr():
    modes = [_mode(100.0, 0.4), _mode(150.0, 0.9), _mode(170.0, 0.2)]
    assert abs(debye_waller(modes, 0.0) - math.exp(-1.5)) < 1e-12


def test_debye_waller_monotone_in_temperature():
    modes = [_mode(50.0, 0.8), _mode(165.0, 1.2)]
    vals = [debye_waller(modes, t) for t in (0.0, 6.0, 77.0, 300.0)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))
    assert vals[-1] < vals[1]   # strictly smaller at 300 K than at 6 K


def test_debye_waller_monotone_in_coupling():
    w1 = debye_waller([_mode(hr=1.0)], 300.0)
    w2 = debye_waller([_mode(hr=1.5)], 300.0)
    assert w2 < w1


# --------------------------------------------------------------- total dq

def test_total_dq_single_mode():
    assert abs(total_dq([_mode(dq=0.42)]) - 0.42) < 1e-15


def test_total_dq_pythagorean():
    assert abs(total_dq([_mode(dq=0.3), _mode(dq=0.4)]) - 0.5) < 1e-15


def test_total_dq_empty():
    assert total_dq([]) == 0.0


# -------------------------------------------------------- spectral function

def test_spectral_function_single_mode_area():
    grid = make_grid(100.0, 230.0, 1301)
    spec = spectral_function([_mode(165.0, 1.0)], 2.0, grid)
    area = np.trapezoid(spec.intensity, grid.points)
    assert abs(area - 1.0) < 1e-6
    assert abs(grid.points[np.argmax(spec.intensity)] - 165.0) < 0.1


def test_spectral_function_total_hr_area():
    modes = [_mode(152.0, 0.40), _mode(160.0, 0.65),
             _mode(166.0, 0.80), _mode(173.0, 0.86)]
    grid = make_grid(100.0, 230.0, 2601)
    spec = spectral_function(modes, 2.0, grid)
    area = np.trapezoid(spec.intensity, grid.points)
    assert abs(area - 2.71) < 1e-5


def test_spectral_function_empty_modes():
    grid = make_grid(100.0, 200.0, 101)
    spec = spectral_function([], 2.0, grid)
    assert np.all(spec.intensity == 0.0)


def test_spectral_function_narrow_grid_names_mode():
    modes = [_mode(120.0, 0.5), _mode(190.0, 0.5)]
    grid = make_grid(100.0, 150.0, 101)
    with pytest.raises(ValidationError, match="mode 1.*190"):
        spectral_function(modes, 2.0, grid)


# ---------------------------------------------------------- lineshape (GF)

def _peak_weight(grid, dens, center_ev, half_mev):
    e = grid.points
    mask = np.abs(e - center_ev) * 1e3 <= half_mev
    return np.trapezoid(dens[mask], e[mask] * 1e3)


def test_lineshape_poisson_progression_t0():
    model = _model([_mode(165.0, 1.0)], linewidth=0.5)
    grid = full_band_grid(model, 0.1)
    spec = lineshape(model, grid)
    w = [_peak_weight(grid, spec.intensity,
                      model.zpl_energy - n * 0.165, 20.0) for n in range(3)]
    assert abs(w[1] / w[0] - 1.0) < 1e-3
    assert abs(w[2] / w[0] - 0.5) < 1e-3


def test_lineshape_zpl_weight_hr_271():
    modes = [_mode(152.0, 0.40, 0.21), _mode(160.0, 0.65, 0.21),
             _mode(166.0, 0.80, 0.21), _mode(173.0, 0.86, 0.21)]
    model = _model(modes, linewidth=1.0)
    grid = full_band_grid(model)
    spec = lineshape(model, grid)
    w = _peak_weight(grid, spec.intensity, model.zpl_energy, 40.0)
    assert abs(w - math.exp(-2.71)) < 1e-4


def test_lineshape_unit_area():
    model = _model([_mode(150.0, 1.2), _mode(80.0, 0.6)], temperature=300.0,
                   acoustic_coupling=1.5)
    grid = full_band_grid(model)
    spec = lineshape(model, grid)
    area = np.trapezoid(spec.intensity, grid.points * 1e3)
    assert abs(area - 1.0) < 1e-4


def test_lineshape_truncation_error():
    model = _model([_mode(165.0, 2.0)])
    grid = make_grid(model.zpl_energy - 0.9, model.zpl_energy + 0.01, 301)
    with pytest.raises(NumericalError):
        # grid misses deep Stokes weight at this coupling
        lineshape(_model([_mode(165.0, 6.0)]), grid)


def test_lineshape_grid_must_cover_zpl():
    model = _model([_mode(165.0, 1.0)])
    with pytest.raises(ValidationError):
        lineshape(model, make_grid(1.0, 1.5, 100))


def test_lineshape_no_anti_stokes_at_t0():
    model = _model([_mode(165.0, 1.5)], linewidth=1.0)
    grid = full_band_grid(model, 0.2)
    spec = lineshape(model, grid)
    cut = model.zpl_energy + 5.0 * model.zpl_linewidth * 1e-3
    above = spec.intensity[grid.points > cut]
    assert np.all(above < 1e-6 * spec.intensity.max())


def test_detailed_balance_single_mode():
    for omega in (10.0, 50.0, 165.0):
        model = _model([_mode(omega, 0.25)], temperature=300.0,
                       linewidth=1.0)
        grid = full_band_grid(model, 0.05)
        dens = lineshape_density(model, grid.points)
        half = min(0.45 * omega, 20.0)
        ws = _peak_weight(grid, dens, model.zpl_energy - omega * 1e-3, half)
        was = _peak_weight(grid, dens, model.zpl_energy + omega * 1e-3, half)
        expected = math.exp(-omega / (KB_MEV * 300.0))
        assert abs(was / ws - expected) < 1e-4 * expected


# -------------------------------------------------------------- wing model

def test_acoustic_wing_sides():
    model = _model([_mode()], temperature=300.0, acoustic_coupling=2.0,
                   acoustic_cutoff=2.0)
    d = 1.3
    rho_s = acoustic_wing_density(model, d)
    rho_as = acoustic_wing_density(model, -d)
    assert abs(rho_as / rho_s - math.exp(-d / (KB_MEV * 300.0))) < 1e-12
    cold = _model([_mode()], temperature=0.0, acoustic_coupling=2.0)
    assert acoustic_wing_density(cold, -d) == 0.0


# ----------------------------------------------------------- oracle (FC)

def test_oracle_single_mode_t0():
    model = _model([_mode(165.0, 0.5)], linewidth=0.8)
    grid = full_band_grid(model, 0.3)
    a = lineshape(model, grid).intensity
    b = lineshape_bruteforce(model, grid, max_quanta=20).intensity
    mask = a > 1e-8 * a.max()
    assert np.max(np.abs(a[mask] - b[mask]) / a[mask]) < 1e-6


def test_oracle_three_modes_room_temperature():
    model = _model([_mode(80.0, 0.8), _mode(140.0, 0.5), _mode(170.0, 1.1)],
                   temperature=300.0, linewidth=1.2)
    grid = full_band_grid(model, 0.5)
    a = lineshape(model, grid).intensity
    b = lineshape_bruteforce(model, grid, max_quanta=30).intensity
    mask = a > 1e-8 * a.max()
    assert np.max(np.abs(a[mask] - b[mask]) / a[mask]) < 1e-5


def test_oracle_zero_coupling_pure_profile():
    model = _model([_mode(165.0, 0.0)], linewidth=1.0)
    grid = make_grid(model.zpl_energy - 0.9, model.zpl_energy + 0.06, 2001)
    spec = lineshape_bruteforce(model, grid, max_quanta=5)
    area = np.trapezoid(spec.intensity, grid.points * 1e3)
    assert abs(area - 1.0) < 1e-4
    ipk = np.argmax(spec.intensity)
    assert abs(grid.points[ipk] - model.zpl_energy) < 1e-3


def test_oracle_mode_count_guard():
    modes = [_mode(50.0 + 10 * k, 0.2) for k in range(4)]
    model = _model(modes)
    with pytest.raises(ValidationError):
        lineshape_bruteforce(model, full_band_grid(model), max_quanta=5)


def test_oracle_max_quanta_guard():
    model = _model([_mode()])
    with pytest.raises(ValidationError):
        lineshape_bruteforce(model, full_band_grid(model), max_quanta=0)
    with pytest.raises(ValidationError):
        lineshape_bruteforce(model, full_band_grid(model), max_quanta=41)
