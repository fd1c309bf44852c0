"""Synthesize the readout signal from a spin-wave.

Two routes are provided:

* forward_fft   -- the analytic route: transverse unitary FFT, then an exact
                   DFT of the z axis onto the time-parameterized wavevectors
                   k_z(t_R) = -2*pi*beta_bar*t_R, with the linearized bias and
                   chirp prefactor exp(i*(omega_L_bar*t + zeta_theory*t^2)).
* forward_splitstep -- an independent split-step integrator of the one-way
                   propagation equation, used as an oracle for the fft route.

Both routes share one total phase model: the exact spatiotemporal phase
gem_phase(z, t) plus the bias offset (omega_L_bar - geometric_omega_L_bar)*t,
so PhysicsParams.omega_L_bar is honored identically on both paths.  The fft
route linearizes this model (it drops the z-dependent part of the chirp,
-pi*xi*z*t^2, which vanishes for xi = 0).

Normalization: the z transform is a Riemann sum (dz weight), so the signal
approximates the continuum integral and the reconstruction adjoint
(beta_bar*dt weight) inverts it independently of grid choices.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .fields import (
    DOMAIN_REAL,
    AxisSpec,
    ComplexField3D,
    KSpaceSignal,
    fft_axes,
)
from .physics import DecoherenceParams, PhysicsParams, decoherence_envelope, gem_phase

_METHODS = ("fft", "splitstep")


@dataclass(frozen=True)
class ForwardOptions:
    method: str = "fft"
    z_substeps_per_cell: int = 4
    include_diffraction: bool = True
    include_decay: bool = False
    decoherence: DecoherenceParams | None = None

    def __post_init__(self):
        if self.method not in _METHODS:
            raise ValidationError(f"method must be one of {_METHODS}, got {self.method!r}")
        if self.z_substeps_per_cell < 1:
            raise ValidationError(
                f"z_substeps_per_cell must be >= 1, got {self.z_substeps_per_cell}"
            )
        if self.include_decay and self.decoherence is None:
            raise ValidationError("include_decay requires decoherence parameters")


def imprint_phase(s: ComplexField3D, phase) -> ComplexField3D:
    """Multiply the field by e^{i*phase(x,y,z)} pointwise (modulus preserved)."""
    phase = np.asarray(phase, dtype=float)
    if phase.shape != s.values.shape:
        raise ValidationError(
            f"phase map shape {phase.shape} does not match field {s.values.shape}"
        )
    return s.with_values(s.values * np.exp(1j * phase))


def wind_to_echo_time(s: ComplexField3D, p: PhysicsParams, t_center: float) -> ComplexField3D:
    """Write-stage winding: displace the spin-wave spectrum along k_z so a
    k_z = 0 component echoes at t_center instead of t = 0.

    The readout gradient unwinds the coherence accumulated during the write
    stage, so the stored spin wave carries the conjugate of the readout-phase
    evolution over t_center.
    """
    z = s.grid.z_axis.coords[None, None, :]
    phase = -gem_phase(z, t_center, p)
    return s.with_values(s.values * np.exp(1j * phase))


def _model_phase(z, t, p: PhysicsParams):
    """Total readout phase shared by both routes (exact form)."""
    return gem_phase(z, t, p) + (p.omega_L_bar - p.geometric_omega_L_bar) * t


def _check_forward_inputs(s: ComplexField3D, p: PhysicsParams, times: AxisSpec):
    if s.domain_tag != DOMAIN_REAL:
        raise ValidationError(
            f"forward model expects a real-space field, got domain {s.domain_tag!r}"
        )
    frac = p.gradient_decay_fraction(np.max(np.abs(times.coords)))
    if frac > 0.1:
        warnings.warn(
            f"gradient decays by {frac:.1%} over the readout window; "
            "the linearized model assumes |xi|*t << beta0",
            stacklevel=3,
        )


def _transverse_spectrum(s: ComplexField3D):
    st = fft_axes(s, axes=("x", "y"), direction="forward")
    kx = st.grid.x_axis
    ky = st.grid.y_axis
    k_perp_sq = kx.coords[:, None] ** 2 + ky.coords[None, :] ** 2
    return st, kx, ky, k_perp_sq


def forward_fft(
    s: ComplexField3D,
    p: PhysicsParams,
    times: AxisSpec,
    opt: ForwardOptions = ForwardOptions(),
) -> KSpaceSignal:
    """Analytic readout signal on the (k_x, k_y, t_R) lattice."""
    _check_forward_inputs(s, p, times)
    st, kx, ky, k_perp_sq = _transverse_spectrum(s)
    z = s.grid.z_axis.coords
    dz = s.grid.z_axis.step
    t = times.coords

    vol = st.values
    if opt.include_diffraction:
        vol = vol * np.exp(1j * z[None, None, :] * k_perp_sq[:, :, None] / (2.0 * p.k0))

    # exact DFT kernel onto the nonuniform k_z(t_R) points, Riemann-weighted
    kernel = np.exp(2j * np.pi * p.beta_bar * np.outer(z, t)) * dz
    out = vol @ kernel

    prefactor = p.g_omega_c * np.exp(1j * (p.omega_L_bar * t + p.zeta_theory * t**2))
    out = out * prefactor[None, None, :]

    if opt.include_decay:
        out = out * decoherence_envelope(t, opt.decoherence)[None, None, :]
    return KSpaceSignal(kx, ky, times, out)


def forward_splitstep(
    s: ComplexField3D,
    p: PhysicsParams,
    times: AxisSpec,
    opt: ForwardOptions = ForwardOptions(method="splitstep"),
) -> KSpaceSignal:
    """March the one-way propagation equation through the cloud.

    Per time sample: the phased source sheets sit at the z sample planes;
    each cell's source is injected in z_substeps_per_cell kicks interleaved
    with half-step diffraction factors e^{-i*k_perp^2*h/(4*k0)}.  The exit
    field is referenced back to the z = 0 plane so the result is directly
    comparable with forward_fft.
    """
    _check_forward_inputs(s, p, times)
    st, kx, ky, k_perp_sq = _transverse_spectrum(s)
    z = s.grid.z_axis.coords
    dz = s.grid.z_axis.step
    n_z = z.size
    t = times.coords
    m = opt.z_substeps_per_cell
    h = dz / m

    if opt.include_diffraction:
        half_step = np.exp(-1j * k_perp_sq * h / (4.0 * p.k0))
        # cell edge after the last sample plane; unwind propagation back to z=0
        z_exit = z[-1] + 0.5 * dz
        exit_to_ref = np.exp(1j * k_perp_sq * z_exit / (2.0 * p.k0))
    else:
        half_step = None

    out = np.empty((kx.n, ky.n, times.n), dtype=np.complex128)
    bias = p.omega_L_bar - p.geometric_omega_L_bar
    for it, t_R in enumerate(t):
        phases = np.exp(1j * (gem_phase(z, t_R, p) + bias * t_R))
        source = p.g_omega_c * st.values * phases[None, None, :] * dz
        omega = np.zeros((kx.n, ky.n), dtype=np.complex128)
        for j in range(n_z):
            kick = source[:, :, j] / m
            for _ in range(m):
                if half_step is not None:
                    omega *= half_step
                omega += kick
                if half_step is not None:
                    omega *= half_step
        if half_step is not None:
            omega *= exit_to_ref
        out[:, :, it] = omega

    if opt.include_decay:
        out = out * decoherence_envelope(t, opt.decoherence)[None, None, :]
    return KSpaceSignal(kx, ky, times, out)


def apply_decay(sig: KSpaceSignal, d: DecoherenceParams) -> KSpaceSignal:
    """Multiply each time slice by the thermal envelope eta(t_R)."""
    eta = decoherence_envelope(sig.times, d)
    return sig.with_values(sig.values * eta[None, None, :])
