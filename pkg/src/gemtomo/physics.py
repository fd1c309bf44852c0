"""GEM phase evolution, coupling constant, and thermal decoherence formulas.

Unit conventions: the splitting gradient beta is stored as a cyclic
Zeeman-splitting gradient (Hz/m); every phase formula carries the 2*pi
explicitly.  Angular quantities (omega_L_bar, k0, zeta) are rad/s, rad/m,
rad/s^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

# fixed physical constants (SI)
HBAR = 1.054572e-34          # J s
K_B = 1.380649e-23           # J/K
MU_B = 9.2740e-24            # J/T
M_RB87 = 1.44316e-25         # kg
EPSILON_0 = 8.8541878128e-12  # F/m
MU_0 = 1.25663706212e-6      # N/A^2


@dataclass(frozen=True)
class PhysicsParams:
    """Readout-model parameters.

    beta0        initial splitting gradient (Hz/m); beta(t) = beta0 - xi*t
    xi           gradient decay rate (Hz/m/s)
    z_g          zero-splitting point (m)
    omega_L_bar  bias term of the linearized phase (rad/s); equals
                 -2*pi*beta0*z_g when the bias comes purely from the
                 gradient geometry (see geometric_omega_L_bar)
    k0           signal wavenumber (rad/m)
    g_omega_c    lumped source prefactor (coupling constant times control
                 Rabi frequency)
    """

    beta0: float
    k0: float
    xi: float = 0.0
    z_g: float = 0.0
    omega_L_bar: float = 0.0
    g_omega_c: complex = 1.0 + 0.0j

    def __post_init__(self):
        if not (self.beta0 > 0):
            raise ValidationError(f"beta0 must be > 0, got {self.beta0}")
        if not (self.k0 > 0):
            raise ValidationError(f"k0 must be > 0, got {self.k0}")

    @property
    def beta_bar(self) -> float:
        """Dominant linear gradient coefficient (Hz/m)."""
        return self.beta0

    @property
    def zeta_theory(self) -> float:
        """Quadratic-in-time phase coefficient implied by the decaying
        gradient: pi*xi*z_g (rad/s^2)."""
        return math.pi * self.xi * self.z_g

    @property
    def geometric_omega_L_bar(self) -> float:
        """Bias term produced by the gradient geometry alone (rad/s)."""
        return -2.0 * math.pi * self.beta0 * self.z_g

    def gradient_decay_fraction(self, t_max: float) -> float:
        """|xi|*t_max / beta0.  Model validity requires this << 1; callers
        emit a warning (not an error) when it grows large."""
        return abs(self.xi) * abs(t_max) / self.beta0


@dataclass(frozen=True)
class CouplingParams:
    """Symbols of the far-detuned two-photon coupling constant."""

    k0: float        # rad/m
    detuning: float  # rad/s
    linewidth: float  # rad/s
    dipole: float    # C m

    def __post_init__(self):
        if not (self.linewidth > 0):
            raise ValidationError(f"linewidth must be > 0, got {self.linewidth}")


@dataclass(frozen=True)
class DecoherenceParams:
    """Thermal readout-decay times (seconds); math.inf disables a channel."""

    tau_k: float
    tau_beta: float = math.inf

    def __post_init__(self):
        if not (self.tau_k > 0):
            raise ValidationError(f"tau_k must be > 0, got {self.tau_k}")
        if not (self.tau_beta > 0):
            raise ValidationError(f"tau_beta must be > 0, got {self.tau_beta}")


def gradient_at(t, p: PhysicsParams):
    """Splitting gradient beta(t) = beta0 - xi*t (Hz/m)."""
    return p.beta0 - p.xi * np.asarray(t)


def gem_phase(z, t, p: PhysicsParams):
    """Spatiotemporal phase phi(z, t) = 2*pi*(z - z_g)*(beta0*t - xi*t^2/2),
    the exact time integral of the gradient times 2*pi*(z - z_g)."""
    z = np.asarray(z)
    t = np.asarray(t)
    return 2.0 * math.pi * (z - p.z_g) * (p.beta0 * t - 0.5 * p.xi * t**2)


def coupling_constant(c: CouplingParams) -> complex:
    """g = (k0/(hbar*eps0)) * d_ge^2 / (2*Delta + i*Gamma)."""
    denom = 2.0 * c.detuning + 1j * c.linewidth
    if denom == 0:
        raise ValidationError("coupling denominator 2*Delta + i*Gamma is zero")
    return (c.k0 / (HBAR * EPSILON_0)) * c.dipole**2 / denom


def decoherence_envelope(t, d: DecoherenceParams):
    """eta(t) = exp(-t^2/(2*tau_k^2) - t^4/(2*tau_beta^4)), for t >= 0."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValidationError("decoherence envelope requires t >= 0")
    log_eta = -(t**2) / (2.0 * d.tau_k**2)
    if math.isfinite(d.tau_beta):
        log_eta = log_eta - t**4 / (2.0 * d.tau_beta**4)
    return np.exp(log_eta)


def taus_from_temperature(
    T: float, k_sw: float, beta_bar: float, mass: float = M_RB87
) -> DecoherenceParams:
    """Thermal lifetimes from cloud temperature.

    tau_k = (1/k_sw) * sqrt(m/(k_B T))
    tau_beta = sqrt((2/(pi*beta_bar)) * sqrt(m/(k_B T)))   (beta_bar cyclic, Hz/m)
    """
    for name, v in (("T", T), ("k_sw", k_sw), ("beta_bar", beta_bar), ("mass", mass)):
        if not (v > 0):
            raise ValidationError(f"{name} must be > 0, got {v}")
    thermal = math.sqrt(mass / (K_B * T))  # seconds * (rad/m) worth of 1/velocity
    tau_k = thermal / k_sw
    tau_beta = math.sqrt(2.0 * thermal / (math.pi * beta_bar))
    return DecoherenceParams(tau_k=tau_k, tau_beta=tau_beta)


def temperature_from_tau_k(tau_k: float, k_sw: float, mass: float = M_RB87) -> float:
    """Invert tau_k = sqrt(m/(k_B T))/k_sw for T."""
    if not (tau_k > 0 and k_sw > 0):
        raise ValidationError("tau_k and k_sw must be > 0")
    return mass / (K_B * (tau_k * k_sw) ** 2)


def temperature_from_tau_beta(
    tau_beta: float, beta_bar: float, mass: float = M_RB87
) -> float:
    """Invert tau_beta = sqrt(2*sqrt(m/(k_B T))/(pi*beta_bar)) for T."""
    if not (tau_beta > 0 and beta_bar > 0):
        raise ValidationError("tau_beta and beta_bar must be > 0")
    thermal = 0.5 * math.pi * beta_bar * tau_beta**2  # sqrt(m/(k_B T))
    return mass / (K_B * thermal**2)


def k_sw_from_angle(theta: float, k0: float) -> float:
    """Spin-wave wavevector from the write-in/coupling beam angle:
    k_sw = 2*k0*sin(theta/2)."""
    if not (k0 > 0):
        raise ValidationError(f"k0 must be > 0, got {k0}")
    return 2.0 * k0 * math.sin(theta / 2.0)
