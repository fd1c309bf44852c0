"""Invert a readout signal to the complex spin-wave S(x, y, z).

Pipeline order (fixed): bias unwind, chirp compensation, decay compensation,
adjoint z transform onto the requested grid, per-slice diffraction unwind,
unitary inverse transverse FFT, source-prefactor division, axis calibration
metadata.  Diffraction unwinding must happen in the mixed (k_x, k_y, z)
domain, which pins the stage order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .fields import (
    DOMAIN_KXY_Z,
    AxisSpec,
    ComplexField3D,
    GridSpec,
    KSpaceSignal,
    fft_axes,
)
from .physics import DecoherenceParams, PhysicsParams, decoherence_envelope


@dataclass(frozen=True)
class CalibParams:
    """Reconstruction calibration.

    z0           diffraction reference plane (m)
    zeta         temporal chirp to remove, phase e^{-i*zeta*t^2} (rad/s^2)
    omega_L_bar  bias rotation to remove (rad/s)
    axis_scale   (s_x, s_y, s_z) output axis scale factors
    rotation_xy  in-plane rotation of the output axes (rad), metadata
    eta_floor    lower clamp on the decay envelope when dividing it out
    """

    z0: float = 0.0
    zeta: float = 0.0
    omega_L_bar: float = 0.0
    axis_scale: tuple = (1.0, 1.0, 1.0)
    rotation_xy: float = 0.0
    eta_floor: float = 0.1

    def __post_init__(self):
        if not (0.0 < self.eta_floor <= 1.0):
            raise ValidationError(f"eta_floor must be in (0, 1], got {self.eta_floor}")
        if len(self.axis_scale) != 3 or not all(s > 0 for s in self.axis_scale):
            raise ValidationError(f"axis_scale must be three positive factors, got {self.axis_scale}")


def compensate_chirp(sig: KSpaceSignal, zeta: float) -> KSpaceSignal:
    """Remove the quadratic temporal phase: slice at t_R gains e^{-i*zeta*t_R^2}."""
    t = sig.times
    return sig.with_values(sig.values * np.exp(-1j * zeta * t**2)[None, None, :])


def compensate_decay(
    sig: KSpaceSignal, d: DecoherenceParams, eta_floor: float
) -> KSpaceSignal:
    """Divide each slice by max(eta(t_R), eta_floor)."""
    if not (eta_floor > 0):
        raise ValidationError(f"eta_floor must be > 0, got {eta_floor}")
    eta = np.maximum(decoherence_envelope(sig.times, d), eta_floor)
    return sig.with_values(sig.values / eta[None, None, :])


def shift_focus_reference(sig: KSpaceSignal, z0: float, k0: float) -> KSpaceSignal:
    """Re-reference the signal to a camera focused at plane z0: slices gain
    e^{-i*z0*k_perp^2/(2*k0)}.  Reconstructing with the matching z0 undoes it."""
    kx, ky = sig.transverse_k_grids()
    k_perp_sq = kx**2 + ky**2
    factor = np.exp(-1j * z0 * k_perp_sq / (2.0 * k0))
    return sig.with_values(sig.values * factor[:, :, None])


def default_z_axis(sig: KSpaceSignal, beta_bar: float, center: float = 0.0) -> AxisSpec:
    """Output z grid matching the information content of the time window:
    span 1/(beta_bar*dt), sample count n_t, centered on `center`."""
    n = sig.t_axis.n
    span = 1.0 / (beta_bar * sig.t_axis.step)
    step = span / n
    return AxisSpec(n, step, center - (n // 2) * step)


def reconstruct(
    sig: KSpaceSignal,
    p: PhysicsParams,
    c: CalibParams,
    z_axis: AxisSpec | None = None,
    decoherence: DecoherenceParams | None = None,
) -> ComplexField3D:
    """Invert the readout signal to the spin-wave on a real-space grid.

    The z grid defaults to default_z_axis(sig, p.beta_bar).  Decay is divided
    out (with the eta floor) only when decoherence parameters are given.
    """
    t = sig.times
    v = sig.values * np.exp(-1j * c.omega_L_bar * t)[None, None, :]
    v = v * np.exp(-1j * c.zeta * t**2)[None, None, :]
    if decoherence is not None:
        eta = np.maximum(decoherence_envelope(t, decoherence), c.eta_floor)
        v = v / eta[None, None, :]

    if z_axis is None:
        z_axis = default_z_axis(sig, p.beta_bar)
    z = z_axis.coords

    # adjoint of the forward Riemann sum; beta_bar*dt makes the pair an
    # identity on band-limited inputs regardless of grid choices
    kernel = np.exp(-2j * np.pi * p.beta_bar * np.outer(t, z)) * (p.beta_bar * sig.t_axis.step)
    vol = v @ kernel

    kx, ky = sig.transverse_k_grids()
    k_perp_sq = kx**2 + ky**2
    vol = vol * np.exp(
        -1j * (z[None, None, :] - c.z0) * k_perp_sq[:, :, None] / (2.0 * p.k0)
    )

    grid = GridSpec(sig.kx_axis, sig.ky_axis, z_axis)
    field = ComplexField3D(grid, vol, DOMAIN_KXY_Z)
    field = fft_axes(field, axes=("x", "y"), direction="inverse")
    values = field.values / p.g_omega_c

    sx, sy, sz = c.axis_scale
    out_grid = GridSpec(
        field.grid.x_axis.scaled(sx),
        field.grid.y_axis.scaled(sy),
        z_axis.scaled(sz),
        rotation_xy=c.rotation_xy,
    )
    return ComplexField3D(out_grid, values, field.domain_tag)


def normalize_and_mask(
    s: ComplexField3D, s_ref: ComplexField3D, threshold: float = 0.1
):
    """rho = s / s_ref where |s_ref| > threshold * max|s_ref|.

    Returns (rho_field, mask).  Outside the mask rho is set to zero and must
    be excluded from downstream statistics via the mask.
    """
    if s.grid.shape != s_ref.grid.shape:
        raise ValidationError(
            f"grid mismatch: {s.grid.shape} vs {s_ref.grid.shape}"
        )
    ref_mag = np.abs(s_ref.values)
    peak = ref_mag.max()
    if peak == 0.0:
        return s.with_values(np.zeros_like(s.values)), np.zeros(s.values.shape, dtype=bool)
    mask = ref_mag > threshold * peak
    rho = np.zeros_like(s.values)
    np.divide(s.values, s_ref.values, out=rho, where=mask)
    return s.with_values(rho), mask


def masked_phase_rmse(a: ComplexField3D, b: ComplexField3D, mask: np.ndarray) -> float:
    """RMS of the wrapped phase difference angle(a * conj(b)) inside mask."""
    if not np.any(mask):
        raise ValidationError("empty mask")
    dphi = np.angle(a.values[mask] * np.conj(b.values[mask]))
    return float(np.sqrt(np.mean(dphi**2)))


def masked_magnitude_rel_rmse(a: ComplexField3D, b: ComplexField3D, mask: np.ndarray) -> float:
    """RMS magnitude error relative to the RMS magnitude of b, inside mask."""
    if not np.any(mask):
        raise ValidationError("empty mask")
    diff = np.abs(a.values[mask]) - np.abs(b.values[mask])
    return float(np.sqrt(np.mean(diff**2) / np.mean(np.abs(b.values[mask]) ** 2)))


def reconstruction_report(p: PhysicsParams, c: CalibParams, sig: KSpaceSignal, field: ComplexField3D) -> dict:
    """Parameters and output geometry of a reconstruction, for the JSON report."""
    return {
        "beta_bar_hz_per_m": p.beta_bar,
        "k0_rad_per_m": p.k0,
        "z0_m": c.z0,
        "zeta_rad_per_s2": c.zeta,
        "omega_L_bar_rad_per_s": c.omega_L_bar,
        "axis_scale": list(c.axis_scale),
        "rotation_xy_rad": c.rotation_xy,
        "eta_floor": c.eta_floor,
        "n_times": sig.t_axis.n,
        "dt_s": sig.t_axis.step,
        "output_shape": list(field.grid.shape),
        "output_step_m": [ax.step for ax in field.grid.axes],
        "output_origin_m": [ax.origin for ax in field.grid.axes],
    }
