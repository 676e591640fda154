"""Coordinate-dependent transition dipole and energy-resolved orientation.

The dipole is expanded to first order in the mode displacements:

    mu(q) = mu0 * u(psi0) + sum_k g_k q_k dQ_k u(alpha_k)

with u(a) the in-plane unit vector of axis angle a.  Emission at a given
photon energy mixes vibronic channels incoherently (Stokes-vector
addition); each channel carries the dipole axis of its characteristic
displaced geometry.  Stokes replicas sample q_k = -sqrt(n), anti-Stokes
replicas +sqrt(n) with a fixed amplification factor of 2 (thermally
populated initial levels sample larger displacements).  The acoustic
wing is a pseudo-channel whose displacement grows as sqrt(delta/cutoff),
scaled by a thermal amplification that vanishes as T -> 0 and whose
rotation sense follows the sign of the strain bias.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import (EmitterModel, EnergyGrid, NumericalError, OrientationCurve,
                   ValidationError, wrap_orientation, wrap_orientation_scalar,
                   KB_MEV)
from .vibronic import (acoustic_wing_density, bose_occupation,
                       _acoustic_kernel_weights, mode_line_weights)

# anti-Stokes channels sample displacement sqrt(n) * (1 + this factor)
ANTI_STOKES_AMPLIFICATION = 1.0

# a grid point is invalid when its intensity is below this fraction of peak
LOW_SIGNAL_FRACTION = 1e-6


@dataclass(frozen=True)
class ModeRotation:
    """Dipole-axis deviation at the one-phonon displaced geometry."""

    mode_index: int
    phonon_energy: float     # meV
    delta_theta: float       # degrees, signed, canonical branch

    def __post_init__(self):
        if abs(self.delta_theta) > 90.0:
            raise ValidationError("|delta_theta| must be <= 90 deg")


def thermal_amplification(model: EmitterModel) -> float:
    """Thermal boost of the acoustic displacement; 0 at T = 0.

    sqrt(2 n(cutoff, T) + 1) - 1 with n the Bose occupation at the
    acoustic cutoff energy: the width of the thermally sampled nuclear
    distribution relative to the zero-point spread.
    """
    if model.temperature == 0:
        return 0.0
    n = bose_occupation(model.acoustic_cutoff, model.temperature)
    return float(np.sqrt(2.0 * n + 1.0) - 1.0)


def dipole_at_displacement(model: EmitterModel, q) -> tuple:
    """Dipole axis angle (deg) and magnitude at mode displacements q.

    q_k is in units of that mode's partial displacement dQ_k, so q_k = 1
    is the one-phonon-projected geometry.
    """
    q = np.asarray(q, dtype=float)
    if q.shape != (len(model.modes),):
        raise ValidationError(
            f"q must have one entry per mode ({len(model.modes)})")
    psi0 = np.deg2rad(model.equilibrium_angle)
    vec = model.equilibrium_dipole * np.array([np.cos(psi0), np.sin(psi0)])
    for mode, qk in zip(model.modes, q):
        a = np.deg2rad(mode.grad_direction)
        vec = vec + (mode.grad_magnitude * qk * mode.partial_dq
                     * np.array([np.cos(a), np.sin(a)]))
    mag = float(np.hypot(vec[0], vec[1]))
    if mag < 1e-12 * model.equilibrium_dipole:
        raise NumericalError(
            "transition dipole cancels at this displacement; axis undefined")
    angle = wrap_orientation_scalar(np.rad2deg(np.arctan2(vec[1], vec[0])))
    return angle, mag


def mode_rotations(model: EmitterModel) -> list:
    """Per-mode dipole rotation at the one-phonon displaced geometry."""
    out = []
    for k, mode in enumerate(model.modes):
        q = np.zeros(len(model.modes))
        q[k] = 1.0
        angle, _ = dipole_at_displacement(model, q)
        delta = wrap_orientation_scalar(angle - model.equilibrium_angle)
        out.append(ModeRotation(k, mode.energy_mev, delta))
    return out


def solve_gradient_for_rotation(delta_theta_deg: float, alpha_deg: float,
                                psi0_deg: float, dipole: float,
                                dq: float) -> float:
    """Gradient magnitude g so the one-phonon rotation equals the target.

    Closed form from tan(dtheta) = g dq sin(a-psi0) / (mu0 + g dq cos(a-psi0)).
    """
    t = np.tan(np.deg2rad(delta_theta_deg))
    rel = np.deg2rad(alpha_deg - psi0_deg)
    denom = np.sin(rel) - t * np.cos(rel)
    if abs(denom) < 1e-12:
        raise ValidationError("gradient direction cannot produce this rotation")
    g = t * dipole / (dq * denom)
    if g < 0:
        raise ValidationError(
            "target rotation has the wrong sign for this gradient direction")
    return float(g)


def apply_strain_bias(model: EmitterModel) -> EmitterModel:
    """Blend mode gradient directions toward a common rotation sense.

    Each alpha_k moves toward its mirror about the equilibrium axis
    (which flips the sign of the mode's rotation while preserving its
    magnitude) with blend weight |strain_bias|; the sign of the bias
    selects the shared sense.  bias = 0 is the identity.

    grad_direction stores the gradient vector on the right half-plane
    branch [-90, 90).  When the blended direction leaves that branch the
    wrapped axis points the opposite way, so the gradient magnitude is
    re-solved to keep the intended one-phonon rotation exact.
    """
    b = model.strain_bias
    if b == 0.0 or not model.modes:
        return model
    sense = 1.0 if b > 0 else -1.0
    rotations = mode_rotations(model)
    psi0 = model.equilibrium_angle
    new_modes = []
    for mode, rot in zip(model.modes, rotations):
        if rot.delta_theta * sense >= 0 or mode.grad_magnitude == 0:
            new_modes.append(mode)
            continue
        # step toward the mirror in vector space (period 360), so the
        # blend path is the true rotation of the gradient vector
        mirrored = 2.0 * psi0 - mode.grad_direction
        step = (mirrored - mode.grad_direction + 180.0) % 360.0 - 180.0
        raw = mode.grad_direction + abs(b) * step      # unwrapped vector angle
        alpha = wrap_orientation_scalar(raw)
        if abs(raw - alpha) < 1e-9:
            new_modes.append(replace(mode, grad_direction=alpha))
            continue
        # wrapping flipped the vector sense: recover the rotation the
        # unwrapped direction would have produced, then re-solve g
        rel = np.deg2rad(raw - psi0)
        gq = mode.grad_magnitude * mode.partial_dq
        target = np.rad2deg(np.arctan2(
            gq * np.sin(rel), model.equilibrium_dipole + gq * np.cos(rel)))
        g = solve_gradient_for_rotation(
            target, alpha, psi0, model.equilibrium_dipole, mode.partial_dq)
        new_modes.append(replace(mode, grad_direction=alpha, grad_magnitude=g))
    return replace(model, modes=tuple(new_modes))


def _profile_density(delta_mev, linewidth_mev, profile):
    """ZPL line profile density (1/meV) at shift delta from the line."""
    d = np.asarray(delta_mev, dtype=float)
    if profile == "lorentzian":
        g = 0.5 * linewidth_mev
        return g / np.pi / (d * d + g * g)
    sig = linewidth_mev / (2.0 * np.sqrt(2.0 * np.log(2.0)))
    return np.exp(-0.5 * (d / sig) ** 2) / (sig * np.sqrt(2.0 * np.pi))


def _enumerate_lines(model: EmitterModel, cutoff: float = 1e-9):
    """Vibronic lines: positions (meV below ZPL), weights, channel axes.

    Returns (shift, weight, cos2psi, sin2psi) arrays, one entry per
    multi-mode replica with weight above the cutoff.
    """
    psi0 = np.deg2rad(model.equilibrium_angle)
    base = model.equilibrium_dipole * np.array([np.cos(psi0), np.sin(psi0)])

    shifts = np.array([0.0])
    weights = np.array([1.0])
    vx = np.array([base[0]])
    vy = np.array([base[1]])
    for mode in model.modes:
        ms, ws = mode_line_weights(mode, model.temperature, 40)
        # channel displacement per net quanta: Stokes -sqrt(m),
        # anti-Stokes +sqrt(|m|) amplified
        qs = np.where(ms >= 0, -np.sqrt(np.abs(ms)),
                      (1.0 + ANTI_STOKES_AMPLIFICATION) * np.sqrt(np.abs(ms)))
        a = np.deg2rad(mode.grad_direction)
        gx = mode.grad_magnitude * mode.partial_dq * np.cos(a)
        gy = mode.grad_magnitude * mode.partial_dq * np.sin(a)
        shifts = (shifts[:, None] + ms[None, :] * mode.energy_mev).ravel()
        weights = (weights[:, None] * ws[None, :]).ravel()
        vx = (vx[:, None] + qs[None, :] * gx).ravel()
        vy = (vy[:, None] + qs[None, :] * gy).ravel()
        keep = weights > cutoff
        shifts, weights, vx, vy = (shifts[keep], weights[keep],
                                   vx[keep], vy[keep])
        if shifts.size > 400000:
            raise NumericalError("vibronic line enumeration exploded")
    return shifts, weights, vx, vy


def orientation_vs_energy(model: EmitterModel, grid: EnergyGrid,
                          ) -> OrientationCurve:
    """Orientation angle and DOLP across the vibronic manifold.

    The lineshape is decomposed into channels (multi-mode replicas plus
    the acoustic pseudo-channel dressing each replica); channel Stokes
    vectors are summed at each photon energy and converted back to
    (psi, DOLP).  Points below the low-signal threshold are invalid.
    """
    eff = apply_strain_bias(model)
    shifts, weights, vx, vy = _enumerate_lines(eff)

    amp = thermal_amplification(eff)
    sense = np.sign(eff.strain_bias)
    a_ac = np.deg2rad(eff.acoustic_direction)
    gac = eff.acoustic_gradient
    ux, uy = np.cos(a_ac), np.sin(a_ac)

    # per-channel DOLP ceiling from thermal orientation wobble
    sigma_jit = (gac * eff.orientation_jitter * amp
                 / eff.equilibrium_dipole)
    jitter_dolp = float(np.exp(-2.0 * sigma_jit ** 2))

    _, _, knorm = _acoustic_kernel_weights(eff)

    energies = grid.points
    shift_e = (eff.zpl_energy - energies) * 1e3      # meV below ZPL
    n_e = energies.size

    s0 = np.zeros(n_e)
    s1 = np.zeros(n_e)
    s2 = np.zeros(n_e)

    chunk = max(1, int(4e6) // max(n_e, 1))
    for start in range(0, shifts.size, chunk):
        sl = slice(start, start + chunk)
        sh = shifts[sl][:, None]
        w = weights[sl][:, None]
        bx = vx[sl][:, None]
        by = vy[sl][:, None]
        delta = shift_e[None, :] - sh                # >0: Stokes side of line

        # sharp replica part of each channel
        line_i = w * _profile_density(delta, eff.zpl_linewidth,
                                      eff.zpl_profile) / knorm
        r2 = bx * bx + by * by
        c2 = np.where(r2 > 0, (bx * bx - by * by) / np.where(r2 > 0, r2, 1), 0.0)
        sn2 = np.where(r2 > 0, 2 * bx * by / np.where(r2 > 0, r2, 1), 0.0)
        s0 += line_i.sum(axis=0)
        s1 += (line_i * c2).sum(axis=0) * jitter_dolp
        s2 += (line_i * sn2).sum(axis=0) * jitter_dolp

        # acoustic pseudo-channel dressing this line
        if eff.acoustic_coupling > 0:
            wing_i = w * acoustic_wing_density(eff, delta) / knorm
            q_ac = np.sqrt(np.abs(delta) / eff.acoustic_cutoff) * amp * sense
            q_ac = np.where(delta >= 0, -q_ac,
                            (1.0 + ANTI_STOKES_AMPLIFICATION) * q_ac)
            ax = bx + gac * q_ac * ux
            ay = by + gac * q_ac * uy
            r2 = ax * ax + ay * ay
            c2 = np.where(r2 > 0, (ax * ax - ay * ay) / np.where(r2 > 0, r2, 1), 0.0)
            sn2 = np.where(r2 > 0, 2 * ax * ay / np.where(r2 > 0, r2, 1), 0.0)
            s0 += wing_i.sum(axis=0)
            s1 += (wing_i * c2).sum(axis=0) * jitter_dolp
            s2 += (wing_i * sn2).sum(axis=0) * jitter_dolp

    peak = s0.max() if s0.size else 0.0
    valid = s0 > LOW_SIGNAL_FRACTION * peak
    psi = np.full(n_e, np.nan)
    dolp = np.zeros(n_e)
    psi[valid] = wrap_orientation(
        0.5 * np.rad2deg(np.arctan2(s2[valid], s1[valid])))
    dolp[valid] = np.hypot(s1[valid], s2[valid]) / s0[valid]
    return OrientationCurve(grid, psi, dolp, s0, valid)


def opsb_offset(model: EmitterModel) -> float:
    """Orientation offset (deg) of the one-phonon optical sideband center
    relative to the ZPL."""
    if not model.modes:
        raise ValidationError("model has no optical modes")
    w_lo = min(m.energy_mev for m in model.modes)
    w_hi = max(m.energy_mev for m in model.modes)
    pad = 6.0 * model.zpl_linewidth + 2.0
    lo = model.zpl_energy - (w_hi + pad) * 1e-3
    hi = model.zpl_energy - max(w_lo - pad, 1.0) * 1e-3
    n = max(101, int((hi - lo) / (0.2e-3)) + 1)
    grid = EnergyGrid(lo, hi, n)
    curve = orientation_vs_energy(model, grid)
    if not np.any(curve.valid) or curve.weight.sum() <= 0:
        raise NumericalError("no optical sideband weight in the window")
    center = float(np.sum(curve.weight * grid.points) / np.sum(curve.weight))
    zgrid = EnergyGrid(model.zpl_energy - 2e-3, model.zpl_energy + 2e-3, 41)
    zcurve = orientation_vs_energy(model, zgrid)
    iz = np.argmin(np.abs(zgrid.points - model.zpl_energy))
    psi_zpl = zcurve.psi[iz]
    ic = np.argmin(np.abs(grid.points - center))
    if not curve.valid[ic]:
        raise NumericalError("sideband center falls on an invalid point")
    return wrap_orientation_scalar(float(curve.psi[ic] - psi_zpl))
