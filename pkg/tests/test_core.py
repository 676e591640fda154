import numpy as np
import pytest

from vibropol import (EnergyGrid, EmitterModel, PhononMode, PolarizationMap,
                      Spectrum, ValidationError, condon_limit, make_grid,
                      slice_map, wrap_orientation)
from vibropol.core import OrientationCurve, wrap_orientation_scalar


def test_two_point_grid():
    g = make_grid(1.80, 1.90, 2)
    assert np.allclose(g.points, [1.80, 1.90])


def test_grid_spacing_1mev():
    g = make_grid(1.60, 1.90, 301)
    assert abs(g.spacing - 1e-3) < 1e-15


def test_grid_rejects_inverted_bounds():
    with pytest.raises(ValidationError):
        make_grid(1.90, 1.80, 10)


def test_grid_rejects_bad_n():
    with pytest.raises(ValidationError):
        make_grid(1.0, 2.0, 1)
    with pytest.raises(ValidationError):
        make_grid(np.inf, 2.0, 5)


def test_grid_spacing_uniform():
    g = make_grid(1.2345, 2.6789, 1777)
    d = np.diff(g.points)
    assert np.ptp(d) < 1e-12 * d[0]


def test_wrap_orientation_branch():
    assert wrap_orientation_scalar(90.0) == -90.0
    assert wrap_orientation_scalar(-90.0) == -90.0
    assert abs(wrap_orientation_scalar(135.0) + 45.0) < 1e-12
    vals = wrap_orientation(np.array([0.0, 180.0, 359.0, -91.0]))
    assert np.all(vals >= -90.0) and np.all(vals < 90.0)
    assert abs(vals[1] - 0.0) < 1e-12


def test_spectrum_validation():
    g = make_grid(1.0, 2.0, 3)
    with pytest.raises(ValidationError):
        Spectrum(g, [1.0, 2.0])
    with pytest.raises(ValidationError):
        Spectrum(g, [1.0, -2.0, 0.0])
    s = Spectrum(g, [0.0, 1.0, 2.0])
    with pytest.raises(ValueError):
        s.intensity[0] = 5.0


def _mode(**kw):
    base = dict(energy_mev=165.0, partial_hr=1.0, partial_dq=0.3)
    base.update(kw)
    return PhononMode(**base)


def test_phonon_mode_validation():
    with pytest.raises(ValidationError):
        _mode(energy_mev=0.0)
    with pytest.raises(ValidationError):
        _mode(partial_hr=-0.1)
    m = _mode(grad_direction=135.0)
    assert abs(m.grad_direction + 45.0) < 1e-12


def _model(**kw):
    base = dict(zpl_energy=1.848, equilibrium_angle=0.0,
                equilibrium_dipole=1.0, modes=(_mode(),), zpl_linewidth=1.0)
    base.update(kw)
    return EmitterModel(**base)


def test_model_validation():
    with pytest.raises(ValidationError):
        _model(zpl_linewidth=0.0)
    with pytest.raises(ValidationError):
        _model(temperature=-5.0)
    with pytest.raises(ValidationError):
        _model(strain_bias=1.5)
    with pytest.raises(ValidationError):
        _model(zpl_profile="voigt")
    assert _model(equilibrium_angle=110.0).equilibrium_angle == -70.0


def test_acoustic_direction_default_perpendicular():
    m = _model(equilibrium_angle=10.0)
    assert abs(m.acoustic_direction - (-80.0)) < 1e-12
    m2 = _model(acoustic_grad_direction=95.0)
    assert abs(m2.acoustic_direction - (-85.0)) < 1e-12


def test_condon_limit_strips_gradients():
    m = _model(modes=(_mode(grad_magnitude=0.5, grad_direction=30.0),),
               acoustic_gradient=0.1, orientation_jitter=2.0)
    c = condon_limit(m)
    assert all(mm.grad_magnitude == 0.0 for mm in c.modes)
    assert c.acoustic_gradient == 0.0
    assert c.orientation_jitter == 0.0
    # coupling strengths untouched
    assert c.total_hr == m.total_hr


def _uniform_map(n_e=300, n_a=6, value=1.0):
    grid = make_grid(1.600, 1.600 + (n_e - 1) * 1e-3, n_e)
    angles = np.arange(0.0, 180.0, 180.0 / n_a)
    return PolarizationMap(grid, angles, np.full((n_e, n_a), value))


def test_slice_map_integer_tiling():
    slices = slice_map(_uniform_map(), 4.0)
    assert len(slices) == 75
    for s in slices:
        assert np.allclose(s.profile, 4.0)


def test_slice_map_uniform_profiles_identical():
    slices = slice_map(_uniform_map(n_e=301), 4.0)
    full = [s for s in slices if not s.partial]
    assert len(full) == 75
    assert slices[-1].partial
    for s in full:
        assert np.allclose(s.profile, full[0].profile)


def test_slice_map_conserves_counts():
    rng = np.random.default_rng(7)
    grid = make_grid(1.7, 1.75, 83)
    angles = np.arange(0.0, 180.0, 15.0)
    pmap = PolarizationMap(grid, angles, rng.random((83, angles.size)))
    for width in (1.0, 2.7, 4.0, 11.0):
        slices = slice_map(pmap, width)
        total = sum(s.profile.sum() for s in slices)
        assert abs(total - pmap.intensity.sum()) < 1e-9 * pmap.intensity.sum()


def test_slice_map_rejects_too_narrow_bin():
    with pytest.raises(ValidationError):
        slice_map(_uniform_map(), 0.5)


def test_orientation_curve_shape_checks():
    g = make_grid(1.0, 2.0, 4)
    with pytest.raises(ValidationError):
        OrientationCurve(g, np.zeros(3), np.zeros(4), np.zeros(4),
                         np.zeros(4, dtype=bool))
    c = OrientationCurve(g, np.array([0.0, 10.0, np.nan, 30.0]),
                         np.zeros(4), np.ones(4),
                         np.array([True, True, False, True]))
    assert abs(c.sweep() - 30.0) < 1e-12
