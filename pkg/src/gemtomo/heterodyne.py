"""Spatially-resolved heterodyne camera: frame synthesis and demodulation.

The local oscillator carries an in-plane tilt (spatial carrier), so the
complex signal appears as a Fourier sideband of the differential image at
+carrier_k.  Demodulation multiplies the carrier out in real space, keeps the
baseband disk of radius filter_radius, and scales back to field units.  The
two camera regions are modeled as ideal balanced detection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .fields import KSpaceSignal


@dataclass(frozen=True)
class DetectorConfig:
    n_px_x: int
    n_px_y: int
    pixel_pitch: float
    lo_amplitude: float
    carrier_k: tuple            # (c_x, c_y), rad/m on the camera
    filter_radius: float        # rad/m, camera Fourier plane
    frames_per_delay: int = 100
    shot_noise: bool = True
    rng_seed: int = 0

    def __post_init__(self):
        if self.n_px_x < 1 or self.n_px_y < 1:
            raise ValidationError("detector needs at least one pixel per axis")
        if not (self.pixel_pitch > 0):
            raise ValidationError(f"pixel_pitch must be > 0, got {self.pixel_pitch}")
        if not (self.lo_amplitude > 0):
            raise ValidationError(f"lo_amplitude must be > 0, got {self.lo_amplitude}")
        if self.frames_per_delay < 1:
            raise ValidationError(
                f"frames_per_delay must be >= 1, got {self.frames_per_delay}"
            )
        if not (self.filter_radius > 0):
            raise ValidationError(f"filter_radius must be > 0, got {self.filter_radius}")
        if len(self.carrier_k) != 2:
            raise ValidationError("carrier_k must be a 2-vector")
        if np.hypot(*self.carrier_k) <= 2.0 * self.filter_radius:
            raise ValidationError(
                "carrier magnitude must exceed 2 * filter_radius so the "
                "sideband separates from baseband"
            )

    @property
    def pixel_coords(self):
        """Centered camera coordinates, shapes (n_px_x, 1) and (1, n_px_y)."""
        x = (np.arange(self.n_px_x) - self.n_px_x // 2) * self.pixel_pitch
        y = (np.arange(self.n_px_y) - self.n_px_y // 2) * self.pixel_pitch
        return x[:, None], y[None, :]

    def carrier_phase(self):
        x, y = self.pixel_coords
        return self.carrier_k[0] * x + self.carrier_k[1] * y


@dataclass(frozen=True, eq=False)
class FramePair:
    """Images from the two balanced camera regions (intensity units)."""

    plus: np.ndarray
    minus: np.ndarray

    def __post_init__(self):
        plus = np.asarray(self.plus, dtype=float)
        minus = np.asarray(self.minus, dtype=float)
        if plus.shape != minus.shape:
            raise ValidationError(
                f"frame shapes differ: {plus.shape} vs {minus.shape}"
            )
        object.__setattr__(self, "plus", plus)
        object.__setattr__(self, "minus", minus)

    @property
    def differential(self) -> np.ndarray:
        return self.plus - self.minus


def _check_carrier_in_band(cfg: DetectorConfig):
    nyquist = np.pi / cfg.pixel_pitch
    if abs(cfg.carrier_k[0]) >= nyquist or abs(cfg.carrier_k[1]) >= nyquist:
        raise ValidationError(
            f"carrier {cfg.carrier_k} outside the sampled band (+-{nyquist:.3g} rad/m)"
        )


def _frame_rng(cfg: DetectorConfig, frame_index: int, delay_index: int):
    # per-frame streams keyed on (seed, delay, frame): order-independent
    seq = np.random.SeedSequence(entropy=cfg.rng_seed, spawn_key=(delay_index, frame_index))
    return np.random.default_rng(seq)


def synthesize_frames(
    field_slice: np.ndarray, cfg: DetectorConfig, delay_index: int = 0
) -> list:
    """Camera frames for one readout delay.

    I_pm = |LO|^2 + |S|^2 +- 2 Re(LO* S), LO = lo_amplitude * e^{-i c.r}.
    With shot noise on, each pixel gains zero-mean Gaussian noise of variance
    equal to its intensity, deterministic under (rng_seed, delay, frame).
    """
    S = np.asarray(field_slice, dtype=np.complex128)
    if S.shape != (cfg.n_px_x, cfg.n_px_y):
        raise ValidationError(
            f"slice shape {S.shape} does not match detector ({cfg.n_px_x}, {cfg.n_px_y})"
        )
    _check_carrier_in_band(cfg)
    lo = cfg.lo_amplitude * np.exp(-1j * cfg.carrier_phase())
    base = np.abs(lo) ** 2 + np.abs(S) ** 2
    cross = 2.0 * np.real(np.conj(lo) * S)
    i_plus = base + cross
    i_minus = base - cross
    frames = []
    for f in range(cfg.frames_per_delay):
        if cfg.shot_noise:
            rng = _frame_rng(cfg, f, delay_index)
            noisy_plus = i_plus + rng.standard_normal(S.shape) * np.sqrt(i_plus)
            noisy_minus = i_minus + rng.standard_normal(S.shape) * np.sqrt(i_minus)
            frames.append(FramePair(noisy_plus, noisy_minus))
        else:
            frames.append(FramePair(i_plus.copy(), i_minus.copy()))
    return frames


def _sideband_filter(shape, pitch: float, radius: float) -> np.ndarray:
    kx = 2.0 * np.pi * np.fft.fftfreq(shape[0], pitch)
    ky = 2.0 * np.pi * np.fft.fftfreq(shape[1], pitch)
    return (kx[:, None] ** 2 + ky[None, :] ** 2) <= radius**2


def demodulate(pair: FramePair, cfg: DetectorConfig) -> np.ndarray:
    """Recover the complex field slice from a frame pair.

    The differential is carrier-shifted to baseband in real space (handles
    off-lattice carriers exactly), low-passed to filter_radius, and scaled.
    Keeping only one of the two Hermitian sidebands costs a factor 2, which
    is restored before the 4*lo_amplitude division.
    """
    _check_carrier_in_band(cfg)
    d = pair.differential
    if d.shape != (cfg.n_px_x, cfg.n_px_y):
        raise ValidationError(
            f"frame shape {d.shape} does not match detector ({cfg.n_px_x}, {cfg.n_px_y})"
        )
    shifted = d * np.exp(-1j * cfg.carrier_phase())
    spectrum = np.fft.fft2(shifted)
    spectrum *= _sideband_filter(d.shape, cfg.pixel_pitch, cfg.filter_radius)
    field = np.fft.ifft2(spectrum)
    return 2.0 * field / (4.0 * cfg.lo_amplitude)


def coherent_average(fields) -> np.ndarray:
    """Complex mean of equally-shaped field estimates."""
    fields = list(fields)
    if not fields:
        raise ValidationError("cannot average an empty list of fields")
    first = np.asarray(fields[0])
    for f in fields[1:]:
        if np.asarray(f).shape != first.shape:
            raise ValidationError("field shapes differ")
    return np.mean(np.stack([np.asarray(f) for f in fields]), axis=0)


def detect_signal(
    sig: KSpaceSignal, cfg: DetectorConfig, signal_to_lo: float = 0.2
) -> KSpaceSignal:
    """Run every time slice of a signal through the camera chain.

    Slices are scaled so the global peak is signal_to_lo * lo_amplitude on
    the camera (shot noise is then meaningful), and scaled back afterwards.
    Demodulation is linear, so averaging the differential frames before one
    demodulation equals coherently averaging per-frame demodulations.
    """
    if not (signal_to_lo > 0):
        raise ValidationError(f"signal_to_lo must be > 0, got {signal_to_lo}")
    if (sig.kx_axis.n, sig.ky_axis.n) != (cfg.n_px_x, cfg.n_px_y):
        raise ValidationError(
            "detector pixel count must match the transverse signal lattice"
        )
    peak = np.abs(sig.values).max()
    if peak == 0.0:
        return sig.with_values(sig.values.copy())
    scale = signal_to_lo * cfg.lo_amplitude / peak
    out = np.empty_like(sig.values)
    for it in range(sig.t_axis.n):
        frames = synthesize_frames(sig.values[:, :, it] * scale, cfg, delay_index=it)
        mean_diff = np.mean([fp.differential for fp in frames], axis=0)
        est = demodulate(FramePair(mean_diff, np.zeros_like(mean_diff)), cfg)
        out[:, :, it] = est / scale
    return sig.with_values(out)
