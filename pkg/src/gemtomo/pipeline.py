"""End-to-end flows behind the CLI: scenario assembly, simulation, and the
detector loop.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np
from scipy.ndimage import gaussian_filter

from .config import RunConfig
from .errors import ValidationError
from .fields import ComplexField3D
from .forward import (
    forward_fft,
    forward_splitstep,
    imprint_phase,
    wind_to_echo_time,
)
from .heterodyne import detect_signal
from .scenarios import (
    CloudParams,
    CoilParams,
    TwoPulseParams,
    bitmap_phase,
    checkerboard_phase,
    coil_phase_map,
    flat_spinwave,
    two_pulse_spinwave,
)


def _cloud_from_dict(d: dict) -> CloudParams:
    kwargs = {}
    mapping = {
        "length_z_m": "length_z",
        "sigma_x_m": "sigma_x",
        "sigma_y_m": "sigma_y",
        "edge_softness_m": "edge_softness",
        "peak_density": "peak_density",
    }
    for key, attr in mapping.items():
        if key in d:
            kwargs[attr] = float(d[key])
    unknown = set(d) - set(mapping)
    if unknown:
        raise ValidationError(f"scenario.cloud: unknown keys {sorted(unknown)}")
    return CloudParams(**kwargs)


def _smooth_map(phase: np.ndarray, grid, sigma_m: float) -> np.ndarray:
    """Optical softening of an imprint mask (the modulator beam is imaged
    with finite resolution)."""
    if sigma_m <= 0:
        return phase
    sigmas = [sigma_m / ax.step for ax in grid.axes]
    return gaussian_filter(phase, sigma=sigmas)


def build_spinwave(cfg: RunConfig) -> ComplexField3D:
    """Assemble the stored spin-wave for the configured scenario."""
    sc = cfg.scenario
    cloud = _cloud_from_dict(sc.get("cloud", {}))
    kind = sc["kind"]
    if kind == "flat":
        return flat_spinwave(cfg.grid, cloud)
    if kind == "two_pulse":
        tp = TwoPulseParams(alpha=sc["alpha"], delta_t=sc["delta_t_s"])
        return two_pulse_spinwave(cfg.grid, cloud, tp, cfg.physics.beta_bar)
    base = flat_spinwave(cfg.grid, cloud)
    if kind == "checkerboard":
        phase = checkerboard_phase(
            cfg.grid, sc["tile_m"], sc["amplitude_rad"], plane=sc.get("plane", "zx")
        )
        phase = _smooth_map(phase, cfg.grid, sc.get("edge_sigma_m", 0.0))
    elif kind == "bitmap":
        phase = bitmap_phase(
            cfg.grid,
            sc["path"],
            sc["scale_m_per_px"],
            sc["amplitude_rad"],
            plane=sc.get("plane", "zx"),
        )
        phase = _smooth_map(phase, cfg.grid, sc.get("edge_sigma_m", 0.0))
    elif kind == "coil":
        coil = CoilParams(
            radius=sc["radius_m"],
            current=sc["current_a"],
            t_c=sc["t_c_s"],
            center=tuple(sc.get("center_m", (0.0, 0.0, 0.0))),
            axis=tuple(sc.get("axis", (0.0, 0.0, 1.0))),
            B0=sc.get("b0_t", 1e-4),
        )
        phase = coil_phase_map(cfg.grid, coil)
    else:
        raise ValidationError(f"unknown scenario kind {kind!r}")
    return imprint_phase(base, phase)


def build_reference(cfg: RunConfig) -> ComplexField3D:
    """The flat (unmodulated) spin-wave of the same cloud."""
    cloud = _cloud_from_dict(cfg.scenario.get("cloud", {}))
    return flat_spinwave(cfg.grid, cloud)


def scenario_phase_map(cfg: RunConfig):
    """The imprinted phase map of the scenario (None for flat/two_pulse)."""
    sc = cfg.scenario
    if sc["kind"] in ("flat", "two_pulse"):
        return None
    base = build_spinwave(cfg)
    ref = build_reference(cfg)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(ref.values != 0, base.values / np.where(ref.values != 0, ref.values, 1.0), 1.0)
    return np.angle(ratio)


def stored_spinwave(cfg: RunConfig, s: ComplexField3D) -> ComplexField3D:
    """Apply the write-stage winding so echoes center in the readout window."""
    if not cfg.wind_to_window:
        return s
    t_center = float(np.mean(cfg.times.coords))
    return wind_to_echo_time(s, cfg.physics, t_center)


def run_forward(cfg: RunConfig, s: ComplexField3D):
    if cfg.forward.method == "splitstep":
        return forward_splitstep(s, cfg.physics, cfg.times, cfg.forward)
    return forward_fft(s, cfg.physics, cfg.times, cfg.forward)


def simulate(cfg: RunConfig, skip_detector: bool = False, no_noise: bool = False):
    """scenario -> stored spin-wave -> forward -> optional detector chain."""
    s = stored_spinwave(cfg, build_spinwave(cfg))
    sig = run_forward(cfg, s)
    if skip_detector or cfg.detector is None:
        return sig
    det = cfg.detector
    if no_noise and det.shot_noise:
        det = DetectorConfigReplace(det)
    return detect_signal(sig, det, signal_to_lo=cfg.signal_to_lo)


def DetectorConfigReplace(det):
    from dataclasses import replace

    return replace(det, shot_noise=False)
