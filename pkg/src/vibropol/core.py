"""Shared domain types, unit conventions and energy grids.

Energies are stored in eV; phonon mode energies enter in meV and are
converted at the boundary.  All angles are degrees at the interfaces and
radians internally.  Orientation angles live on the canonical branch
[-90, 90) deg (a dipole is an axis, period 180 deg); ellipticity on
[-45, 45] deg.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
import numpy as np

# Boltzmann constant, eV/K and meV/K
KB_EV = 8.617333262e-5
KB_MEV = 8.617333262e-2

# display conversion only: lambda[nm] = EV_NM / E[eV]
EV_NM = 1239.841984


class ValidationError(ValueError):
    """Bad input: rejected before any computation starts."""


class NumericalError(RuntimeError):
    """A computation could not be carried out at the required accuracy."""


def wrap_orientation(angle_deg):
    """Reduce an orientation angle (period 180 deg) to [-90, 90)."""
    return (np.asarray(angle_deg) + 90.0) % 180.0 - 90.0


def wrap_orientation_scalar(angle_deg: float) -> float:
    return float((angle_deg + 90.0) % 180.0 - 90.0)


def axis_unit_vector(angle_deg):
    """In-plane unit vector for an axis angle given in degrees."""
    a = np.deg2rad(angle_deg)
    return np.array([np.cos(a), np.sin(a)])


@dataclass(frozen=True)
class EnergyGrid:
    """Uniform, strictly increasing energy axis.

    The same container is reused for phonon-energy axes (meV); the unit
    is then stated by the producing function.
    """

    min_energy: float
    max_energy: float
    n_points: int

    def __post_init__(self):
        if not (np.isfinite(self.min_energy) and np.isfinite(self.max_energy)):
            raise ValidationError("grid bounds must be finite")
        if self.min_energy >= self.max_energy:
            raise ValidationError(
                f"grid bounds inverted or degenerate: "
                f"[{self.min_energy}, {self.max_energy}]")
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise ValidationError("n_points must be an integer >= 2")
        object.__setattr__(self, "n_points", int(self.n_points))

    @property
    def spacing(self) -> float:
        return (self.max_energy - self.min_energy) / (self.n_points - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.min_energy, self.max_energy, self.n_points)


def make_grid(min_energy: float, max_energy: float, n_points: int) -> EnergyGrid:
    """Uniform grid with spacing (max - min)/(n - 1)."""
    return EnergyGrid(min_energy, max_energy, n_points)


@dataclass(frozen=True)
class Spectrum:
    """Intensity versus energy on a uniform grid."""

    grid: EnergyGrid
    intensity: np.ndarray

    def __post_init__(self):
        inten = np.asarray(self.intensity, dtype=float)
        if inten.shape != (self.grid.n_points,):
            raise ValidationError("intensity length must equal grid n_points")
        if not np.all(np.isfinite(inten)):
            raise ValidationError("intensity must be finite")
        if np.any(inten < 0):
            raise ValidationError("intensity must be non-negative")
        inten = inten.copy()
        inten.setflags(write=False)
        object.__setattr__(self, "intensity", inten)


@dataclass(frozen=True)
class PhononMode:
    """One vibrational mode coupled to the transition.

    energy_mev        phonon quantum, meV (> 0)
    partial_hr        partial Huang-Rhys factor S_k (>= 0)
    partial_dq        partial displacement, amu^1/2 A (>= 0)
    grad_magnitude    relative dipole-gradient strength g_k (>= 0)
    grad_direction    gradient axis angle, deg, canonical branch
    """

    energy_mev: float
    partial_hr: float
    partial_dq: float
    grad_magnitude: float = 0.0
    grad_direction: float = 0.0

    def __post_init__(self):
        if not self.energy_mev > 0:
            raise ValidationError("mode energy must be > 0 meV")
        if self.partial_hr < 0 or self.partial_dq < 0 or self.grad_magnitude < 0:
            raise ValidationError("mode parameters must be non-negative")
        object.__setattr__(
            self, "grad_direction", wrap_orientation_scalar(self.grad_direction))


@dataclass(frozen=True)
class EmitterModel:
    """Parametric phonon-coupled emitter with coordinate-dependent dipole.

    The equilibrium dipole has axis angle ``equilibrium_angle`` (deg) and
    magnitude ``equilibrium_dipole``.  Each optical mode carries its own
    dipole-gradient direction; the acoustic continuum is represented by a
    single effective gradient (``acoustic_gradient`` at axis angle
    ``acoustic_grad_direction``) whose rotation sense follows the sign of
    ``strain_bias``.  ``orientation_jitter`` sets the thermal orientation
    wobble that caps the observable degree of linear polarization.
    """

    zpl_energy: float
    equilibrium_angle: float
    equilibrium_dipole: float
    modes: tuple
    zpl_linewidth: float                 # meV, FWHM of the ZPL profile
    acoustic_coupling: float = 0.0       # dimensionless wing weight per side
    acoustic_cutoff: float = 2.0         # meV
    temperature: float = 300.0           # K
    strain_bias: float = 0.0
    zpl_profile: str = "lorentzian"      # lorentzian | gaussian
    acoustic_gradient: float = 0.0       # effective g_ac
    acoustic_grad_direction: float | None = None  # deg; default perp to dipole
    orientation_jitter: float = 0.0      # scale of thermal angle wobble

    def __post_init__(self):
        if not self.zpl_energy > 0:
            raise ValidationError("zpl_energy must be > 0")
        if not self.zpl_linewidth > 0:
            raise ValidationError("zpl_linewidth must be > 0")
        if not self.equilibrium_dipole > 0:
            raise ValidationError("equilibrium_dipole must be > 0")
        if self.temperature < 0:
            raise ValidationError("temperature must be >= 0")
        if not -1.0 <= self.strain_bias <= 1.0:
            raise ValidationError("strain_bias must lie in [-1, 1]")
        if self.acoustic_coupling < 0 or self.acoustic_gradient < 0:
            raise ValidationError("acoustic parameters must be non-negative")
        if not self.acoustic_cutoff > 0:
            raise ValidationError("acoustic_cutoff must be > 0 meV")
        if self.zpl_profile not in ("lorentzian", "gaussian"):
            raise ValidationError(f"unknown zpl_profile {self.zpl_profile!r}")
        modes = tuple(self.modes)
        for m in modes:
            if not isinstance(m, PhononMode):
                raise ValidationError("modes must be PhononMode instances")
        if not np.isfinite(sum(m.partial_hr for m in modes)):
            raise ValidationError("total HR factor must be finite")
        object.__setattr__(self, "modes", modes)
        object.__setattr__(
            self, "equilibrium_angle",
            wrap_orientation_scalar(self.equilibrium_angle))

    @property
    def total_hr(self) -> float:
        return sum(m.partial_hr for m in self.modes)

    @property
    def acoustic_direction(self) -> float:
        """Acoustic gradient axis; defaults to perpendicular to the dipole."""
        if self.acoustic_grad_direction is None:
            return wrap_orientation_scalar(self.equilibrium_angle + 90.0)
        return wrap_orientation_scalar(self.acoustic_grad_direction)


def condon_limit(model: EmitterModel) -> EmitterModel:
    """Copy of the model with every dipole gradient switched off."""
    modes = tuple(replace(m, grad_magnitude=0.0) for m in model.modes)
    return replace(model, modes=modes, acoustic_gradient=0.0,
                   orientation_jitter=0.0)


@dataclass(frozen=True)
class PolarizationMap:
    """Intensity versus (energy, analyzer or waveplate angle)."""

    grid: EnergyGrid
    angles: np.ndarray          # degrees
    intensity: np.ndarray       # shape (n_energy, n_angle)

    def __post_init__(self):
        ang = np.asarray(self.angles, dtype=float)
        inten = np.asarray(self.intensity, dtype=float)
        if ang.ndim != 1:
            raise ValidationError("angles must be a 1-D array")
        if inten.shape != (self.grid.n_points, ang.size):
            raise ValidationError("intensity shape must be (n_energy, n_angle)")
        if np.any(inten < 0) or not np.all(np.isfinite(inten)):
            raise ValidationError("intensities must be finite and >= 0")
        ang = ang.copy(); ang.setflags(write=False)
        inten = inten.copy(); inten.setflags(write=False)
        object.__setattr__(self, "angles", ang)
        object.__setattr__(self, "intensity", inten)


@dataclass(frozen=True)
class MapSlice:
    """One energy bin of a polarization map: summed angular profile."""

    center_energy: float
    profile: np.ndarray
    partial: bool = False


def slice_map(pmap: PolarizationMap, bin_width_mev: float) -> list:
    """Discretize a map into energy bins of the given width (meV).

    Each slice sums the intensity of the grid points whose energy falls
    in its bin; bins tile [min, max] starting at the grid minimum.  A
    trailing bin narrower than bin_width is kept and flagged partial.
    Total counts are conserved exactly.
    """
    grid = pmap.grid
    width_ev = bin_width_mev * 1e-3
    spacing = grid.spacing
    if not bin_width_mev > 0:
        raise ValidationError("bin_width must be > 0")
    if width_ev < spacing * (1.0 - 1e-9):
        raise ValidationError(
            f"bin width {bin_width_mev} meV is smaller than the grid "
            f"spacing {spacing * 1e3:.6g} meV")
    energies = grid.points
    # half-spacing shift so each point lands in exactly one bin
    idx = np.floor((energies - grid.min_energy) / width_ev + 1e-12).astype(int)
    n_bins = idx.max() + 1
    span = grid.max_energy - grid.min_energy
    slices = []
    for b in range(n_bins):
        sel = idx == b
        if not np.any(sel):
            continue
        lo = grid.min_energy + b * width_ev
        hi = min(lo + width_ev, grid.max_energy)
        partial = (span - b * width_ev) < width_ev * (1.0 - 1e-9)
        profile = pmap.intensity[sel, :].sum(axis=0)
        slices.append(MapSlice(0.5 * (lo + hi), profile, partial))
    return slices


@dataclass(frozen=True)
class OrientationCurve:
    """Orientation angle and DOLP versus photon energy.

    ``valid`` marks bins with enough signal for the angle to be defined;
    psi is NaN on invalid bins rather than interpolated.  ``chi`` and
    ``rms_residual`` are filled by the analyses that produce them.
    """

    grid: EnergyGrid
    psi: np.ndarray        # degrees, canonical branch, NaN where invalid
    dolp: np.ndarray
    weight: np.ndarray
    valid: np.ndarray
    chi: np.ndarray | None = None
    rms_residual: np.ndarray | None = None

    def __post_init__(self):
        n = self.grid.n_points
        for name in ("psi", "dolp", "weight", "valid"):
            arr = np.asarray(getattr(self, name))
            if arr.shape != (n,):
                raise ValidationError(f"{name} length must match the grid")
            arr = arr.copy(); arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        for name in ("chi", "rms_residual"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.asarray(arr, dtype=float).copy()
                if arr.shape != (n,):
                    raise ValidationError(f"{name} length must match the grid")
                arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def sweep(self) -> float:
        """Total orientation sweep max(psi) - min(psi) over valid bins."""
        psi = self.psi[self.valid.astype(bool)]
        if psi.size == 0:
            return 0.0
        return float(np.max(psi) - np.min(psi))
