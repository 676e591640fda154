"""Forward and inverse polarization optics.

Conventions: the Malus parametrization follows
I(theta) = i_max cos^2(theta - theta0) + i_min, so the measured peak is
i_max + i_min and the floor i_min; the degree of linear polarization is
(peak - floor)/(peak + floor) = i_max / (i_max + 2 i_min).  The RQWP
trace assumes an ideal quarter-wave plate at fast-axis angle theta in
front of a fixed horizontal polarizer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (EmitterModel, EnergyGrid, NumericalError,
                   OrientationCurve, PolarizationMap, ValidationError,
                   slice_map, wrap_orientation_scalar)
from .dipole import orientation_vs_energy
from .vibronic import lineshape_density

# a bin is valid when its summed counts exceed this (rel. error <~ 20%)
MIN_BIN_COUNTS = 25.0


@dataclass(frozen=True)
class StokesVector:
    """Classical polarization state (s0, s1, s2, s3) in intensity units.

    For exact states s0 >= |s| must hold to 1e-9 relative; states
    extracted from noisy data may carry a deficit, which is reported via
    ``physicality_deficit`` instead of being clamped silently.
    """

    s0: float
    s1: float
    s2: float
    s3: float

    def __post_init__(self):
        if not all(np.isfinite(v) for v in
                   (self.s0, self.s1, self.s2, self.s3)):
            raise ValidationError("Stokes components must be finite")

    @property
    def polarized_magnitude(self) -> float:
        return float(np.sqrt(self.s1 ** 2 + self.s2 ** 2 + self.s3 ** 2))

    @property
    def physicality_deficit(self) -> float:
        """How far the state is from physical: max(0, |s| - s0)."""
        return max(0.0, self.polarized_magnitude - self.s0)


@dataclass(frozen=True)
class PolarizationEllipse:
    """Degree of polarization, orientation psi and ellipticity chi (deg)."""

    dop: float
    psi: float
    chi: float

    def __post_init__(self):
        if not 0.0 <= self.dop <= 1.0:
            raise ValidationError("dop must lie in [0, 1]")
        if not -45.0 <= self.chi <= 45.0:
            raise ValidationError("chi must lie in [-45, 45] deg")
        object.__setattr__(self, "psi", wrap_orientation_scalar(self.psi))


@dataclass(frozen=True)
class MalusFit:
    """Result of a Malus-law fit.

    theta0 is NaN when the modulation amplitude vanishes (dolp = 0).
    ``unphysical_floor`` flags a reconstructed i_min below zero beyond
    numerical tolerance; the fit is still returned.
    """

    theta0: float
    i_max: float
    i_min: float
    dolp: float
    rms_residual: float
    unphysical_floor: bool = False

    def __post_init__(self):
        peak = self.i_max + self.i_min
        floor = self.i_min
        denom = peak + floor
        expected = (peak - floor) / denom if denom > 0 else 0.0
        if abs(self.dolp - expected) > 1e-9 + 1e-9 * abs(expected):
            raise ValidationError("dolp inconsistent with i_max/i_min")


def malus_intensity(theta_deg, fit: MalusFit):
    """I(theta) = i_max cos^2(theta - theta0) + i_min."""
    th = np.deg2rad(np.asarray(theta_deg, dtype=float) - fit.theta0)
    return fit.i_max * np.cos(th) ** 2 + fit.i_min


def fit_malus(angles_deg, intensities) -> MalusFit:
    """Closed-form linear least squares on the basis {1, cos2t, sin2t}."""
    th = np.asarray(angles_deg, dtype=float)
    inten = np.asarray(intensities, dtype=float)
    if th.shape != inten.shape or th.ndim != 1:
        raise ValidationError("angles and intensities must be equal 1-D arrays")
    if th.size < 4:
        raise ValidationError("need at least 4 samples")
    if np.ptp(th) < 135.0 - 1e-9:
        raise ValidationError("samples must span at least 135 deg of rotation")
    if np.any(inten < 0):
        raise ValidationError("intensities must be non-negative")
    t2 = np.deg2rad(2.0 * th)
    design = np.column_stack([np.ones_like(t2), np.cos(t2), np.sin(t2)])
    # rank check: all angles equal mod 90 deg makes cos/sin columns constant
    _, sv, _ = np.linalg.svd(design, full_matrices=False)
    if sv[-1] < 1e-9 * sv[0]:
        raise ValidationError("angle set is rank-deficient (degenerate mod 90)")
    coef, *_ = np.linalg.lstsq(design, inten, rcond=None)
    a, b, c = coef
    r = float(np.hypot(b, c))
    i_max = 2.0 * r
    i_min = float(a - r)
    resid = inten - design @ coef
    rms = float(np.sqrt(np.mean(resid ** 2)))
    unphysical = i_min < -1e-9 * max(a, 1e-300)
    if r < 1e-12 * max(abs(a), 1.0) or a <= 0:
        return MalusFit(np.nan, 0.0, float(a), 0.0, rms, unphysical)
    theta0 = wrap_orientation_scalar(0.5 * np.rad2deg(np.arctan2(c, b)))
    peak, floor = i_max + i_min, i_min
    dolp = (peak - floor) / (peak + floor)
    return MalusFit(theta0, i_max, i_min, float(dolp), rms, unphysical)


def ellipse_to_stokes(e: PolarizationEllipse, s0: float) -> StokesVector:
    psi = np.deg2rad(e.psi)
    chi = np.deg2rad(e.chi)
    p = e.dop
    return StokesVector(
        s0,
        s0 * p * np.cos(2 * chi) * np.cos(2 * psi),
        s0 * p * np.cos(2 * chi) * np.sin(2 * psi),
        s0 * p * np.sin(2 * chi))


def stokes_to_ellipse(s: StokesVector) -> PolarizationEllipse:
    if s.s0 <= 0:
        raise ValidationError("s0 must be > 0")
    mag = s.polarized_magnitude
    dop = min(mag / s.s0, 1.0)
    if mag == 0.0:
        return PolarizationEllipse(0.0, np.nan, 0.0)
    psi = 0.5 * np.rad2deg(np.arctan2(s.s2, s.s1))
    chi = 0.5 * np.rad2deg(np.arcsin(np.clip(s.s3 / mag, -1.0, 1.0)))
    return PolarizationEllipse(dop, psi, chi)


def rqwp_intensity(s: StokesVector, qwp_angle_deg):
    """Transmission of QWP (fast axis at theta) + horizontal polarizer.

    I(theta) = 1/2 (A + B sin 2t + C cos 4t + D sin 4t) with
    A = s0 + s1/2, B = -s3, C = s1/2, D = s2/2.
    """
    t = np.deg2rad(np.asarray(qwp_angle_deg, dtype=float))
    a = s.s0 + 0.5 * s.s1
    return 0.5 * (a - s.s3 * np.sin(2 * t) + 0.5 * s.s1 * np.cos(4 * t)
                  + 0.5 * s.s2 * np.sin(4 * t))


def extract_stokes_rqwp(qwp_angles_deg, intensity) -> StokesVector:
    """Fourier inversion of an RQWP trace on uniform full rotations."""
    th = np.asarray(qwp_angles_deg, dtype=float)
    inten = np.asarray(intensity, dtype=float)
    if th.shape != inten.shape or th.ndim != 1:
        raise ValidationError("angles and intensities must be equal 1-D arrays")
    n = th.size
    if n < 8:
        raise ValidationError("need at least 8 samples")
    steps = np.diff(th)
    if np.ptp(steps) > 1e-9 * abs(steps[0]) + 1e-12:
        raise ValidationError("angles must be uniformly spaced")
    total = th[-1] - th[0] + steps[0]
    k = total / 360.0
    if abs(k - round(k)) > 1e-9 or round(k) < 1:
        raise ValidationError(
            f"samples must cover whole rotations (got {total:.6g} deg)")
    t = np.deg2rad(th)
    a = 2.0 / n * inten.sum()
    b = 4.0 / n * (inten * np.sin(2 * t)).sum()
    c = 4.0 / n * (inten * np.cos(4 * t)).sum()
    d = 4.0 / n * (inten * np.sin(4 * t)).sum()
    return StokesVector(a - c, 2.0 * c, 2.0 * d, -b)


def simulate_polarization_map(model: EmitterModel, grid: EnergyGrid,
                              angles_deg, mode: str = "analyzer",
                              counts_per_point: float = 1e4,
                              noise: str = "none",
                              seed: int = 0) -> PolarizationMap:
    """Forward polarization map from the emitter model.

    Per energy the channel-mixed Stokes vector from orientation_vs_energy
    is scaled by the lineshape intensity and rendered through an ideal
    rotating analyzer or the RQWP formula.  ``counts_per_point`` sets the
    expected counts at the map maximum; poisson noise uses a seeded
    deterministic generator.
    """
    if mode not in ("analyzer", "rqwp"):
        raise ValidationError(f"unknown map mode {mode!r}")
    if noise not in ("none", "poisson"):
        raise ValidationError(f"unknown noise model {noise!r}")
    angles = np.asarray(angles_deg, dtype=float)
    curve = orientation_vs_energy(model, grid)
    dens = lineshape_density(model, grid.points)
    p = np.where(curve.valid, curve.dolp, 0.0)
    psi = np.where(curve.valid, curve.psi, 0.0)
    two_psi = np.deg2rad(2.0 * psi)
    s0 = dens
    s1 = s0 * p * np.cos(two_psi)
    s2 = s0 * p * np.sin(two_psi)
    t = np.deg2rad(angles)[None, :]
    if mode == "analyzer":
        inten = 0.5 * (s0[:, None] + s1[:, None] * np.cos(2 * t)
                       + s2[:, None] * np.sin(2 * t))
    else:
        a = (s0 + 0.5 * s1)[:, None]
        inten = 0.5 * (a + 0.5 * s1[:, None] * np.cos(4 * t)
                       + 0.5 * s2[:, None] * np.sin(4 * t))
    peak = inten.max()
    if peak <= 0:
        raise NumericalError("simulated map has no intensity")
    expected = inten * (counts_per_point / peak)
    if noise == "poisson":
        rng = np.random.default_rng(seed)
        expected = rng.poisson(expected).astype(float)
    return PolarizationMap(grid, angles, np.clip(expected, 0.0, None))


def analyze_map(pmap: PolarizationMap, mode: str = "analyzer",
                bin_width_mev: float = 4.0) -> OrientationCurve:
    """Per-bin polarization analysis of an energy-resolved map.

    Slices the map into energy bins, fits each angular profile (Malus
    for analyzer maps, RQWP Fourier inversion otherwise) and assembles
    an OrientationCurve over the full bins; per-slice failures mark the
    bin invalid instead of aborting the analysis.
    """
    if mode not in ("analyzer", "rqwp"):
        raise ValidationError(f"unknown map mode {mode!r}")
    slices = [s for s in slice_map(pmap, bin_width_mev) if not s.partial]
    if len(slices) < 2:
        raise ValidationError("map yields fewer than 2 full bins")
    centers = np.array([s.center_energy for s in slices])
    grid = EnergyGrid(centers[0], centers[-1], centers.size)
    n = centers.size
    psi = np.full(n, np.nan)
    dolp = np.zeros(n)
    chi = np.full(n, np.nan)
    rms = np.full(n, np.nan)
    weight = np.zeros(n)
    valid = np.zeros(n, dtype=bool)
    for i, s in enumerate(slices):
        weight[i] = s.profile.sum()
        if weight[i] <= MIN_BIN_COUNTS:
            continue
        try:
            if mode == "analyzer":
                fit = fit_malus(pmap.angles, s.profile)
                if np.isnan(fit.theta0):
                    continue
                psi[i] = fit.theta0
                dolp[i] = fit.dolp
                chi[i] = 0.0
                rms[i] = fit.rms_residual
            else:
                sv = extract_stokes_rqwp(pmap.angles, s.profile)
                ell = stokes_to_ellipse(sv)
                if np.isnan(ell.psi):
                    continue
                psi[i] = ell.psi
                dolp[i] = ell.dop
                chi[i] = ell.chi
            valid[i] = True
        except (ValidationError, NumericalError):
            continue
    return OrientationCurve(grid, psi, dolp, weight, valid, chi=chi,
                            rms_residual=rms)
